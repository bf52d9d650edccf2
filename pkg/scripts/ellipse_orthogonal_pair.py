"""Probability that two orthogonal projection measurements give a positive definite estimate of a flat ellipse."""
from _common import parser, write_csv
from crofton_tensors.experiments import ellipse_orthogonal_pair

if __name__ == "__main__":
    p = parser(__doc__)
    p.add_argument("--draws", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=11)
    a = p.parse_args()
    rows = []
    for k in (0.5, 0.2, 0.1, 0.03, 0.01, 1e-3):
        pr = ellipse_orthogonal_pair(k, a.draws, a.seed, a.threads)
        rows.append((k, pr))
        print(f"k={k:<8g} P(pos. def.)={pr:.4f}")
    write_csv(a.outdir / "ellipse_orthogonal_pair.csv", ["k", "probability"], rows)
