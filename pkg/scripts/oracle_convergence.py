"""Convergence of the brute-force Crofton quadrature against the closed-form surface tensors."""
import time

from _common import parser, write_csv
from crofton_tensors.config import load_body
from crofton_tensors.coeffs import G_batch, crofton_rhs
from crofton_tensors.ground_truth import (QuadratureSpec, line_quadrature, rel_gap,
                                          relative_tensor_weights, surface_tensor)
from crofton_tensors.symtensor import SymmetricTensor
from _common import RESULTS

BODIES = RESULTS.parent / "configs" / "bodies"

if __name__ == "__main__":
    a = parser(__doc__).parse_args()
    rows = []
    for name, nodes in [("disk", [(256, 64), (1024, 256), (2048, 512)]),
                        ("square", [(256, 64), (1024, 256), (2048, 512)]),
                        ("triangle", [(256, 64), (1024, 256), (2048, 512)]),
                        ("ellipse21", [(256, 64), (1024, 256), (2048, 512)]),
                        ("ball", [(256, 24), (1024, 48), (2048, 64)]),
                        ("spheroid", [(256, 24), (1024, 48), (2048, 64)])]:
        K = load_body(BODIES / f"{name}.yaml")
        for D, O in nodes:
            t0 = time.perf_counter()
            U, w, I = line_quadrature(K, QuadratureSpec(D, O), a.threads)
            for s in (0, 2, 4):
                tr = {2 * k: surface_tensor(K, 2 * k) for k in range(s // 2 + 1)}
                inv = rel_gap(SymmetricTensor(K.dim, s, (w * I) @ G_batch(U, s)), tr[s])
                cro = rel_gap(SymmetricTensor(K.dim, s, (w * I) @ relative_tensor_weights(U, s)), crofton_rhs(K.dim, s, tr))
                rows.append((name, D, O, s, inv, cro))
            print(f"{name:9s} D={D:<5d} O={O:<4d} worst gap {max(r[4:] for r in rows[-3:])[0]:.2e} "
                  f"({time.perf_counter() - t0:.1f} s)")
    write_csv(a.outdir / "oracle_convergence.csv", ["body", "direction_nodes", "offset_nodes", "s", "inverse_gap", "crofton_gap"], rows)
