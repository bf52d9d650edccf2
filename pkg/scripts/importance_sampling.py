"""Variance of f*-, f*_K- and uniformly weighted single-line estimators on the planar test bodies."""
from _common import parser, write_csv
from crofton_tensors.experiments import importance_comparison

if __name__ == "__main__":
    p = parser(__doc__)
    p.add_argument("--reps", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--bootstrap", type=int, default=200)
    a = p.parse_args()
    res = importance_comparison(a.reps, a.seed, a.threads, a.bootstrap)
    write_csv(a.outdir / "importance_sampling.csv",
              ["body", "component", "design", "var", "ci_lo", "ci_hi", "mean", "se", "truth"],
              [(r.body, "%d%d" % r.component, r.design, r.var, float(r.ci[0]), float(r.ci[1]), r.mean, r.se, r.truth)
               for r in res])
    for r in res:
        print(f"{r.body:10s} {r.component} {r.design:7s} var={r.var:.5f}")
