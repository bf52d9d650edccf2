"""CVs of hit-or-miss and projection estimators for the tilted spheroids, l = 1..5."""
from _common import parser, write_csv
from crofton_tensors.experiments import figure2, figure2_ratios

if __name__ == "__main__":
    p = parser(__doc__)
    p.add_argument("--reps", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=44)
    a = p.parse_args()
    rows = figure2(reps=a.reps, seed=a.seed, workers=a.threads)
    write_csv(a.outdir / "figure2.csv", ["l", "design", "component", "truth", "mean", "sd", "cv"],
              [(r.l, r.design, r.component, r.truth, r.mean, r.sd, r.cv) for r in rows])
    for k, v in figure2_ratios(rows).items():
        print(f"{k:32s} {v:.4g}")
