"""Positive-definiteness probability of the systematic planar estimator for K1, K2, K3."""
import numpy as np

from _common import parser, write_csv
from crofton_tensors.experiments import figure1

if __name__ == "__main__":
    p = parser(__doc__)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--grid", type=int, default=500)
    p.add_argument("--nmax", type=int, default=12)
    a = p.parse_args()
    f = figure1(a.eps, a.grid, a.nmax)
    write_csv(a.outdir / "figure1.csv", ["N", "K1", "K2", "K3"], zip(f["N"], *(map(float, f[k]) for k in ("K1", "K2", "K3"))))
    for k in ("K1", "K2", "K3"):
        print(k, "reaches 1 at N =", int(f["N"][np.argmax(f[k] >= 1.0)]))
