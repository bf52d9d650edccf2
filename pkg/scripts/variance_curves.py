"""Second-moment curves of single-component estimators as functions of the rotation angle."""
import numpy as np

from _common import parser, write_csv
from crofton_tensors.curves import KINDS, variance_curves

if __name__ == "__main__":
    p = parser(__doc__)
    p.add_argument("--points", type=int, default=1000)
    a = p.parse_args()
    g = np.linspace(0, np.pi, a.points)
    cols = [variance_curves(k, g) for k in KINDS]
    write_csv(a.outdir / "variance_curves.csv", ["gamma", *KINDS], zip(g, *cols))
