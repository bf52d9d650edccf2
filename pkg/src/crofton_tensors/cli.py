"""Command-line experiment runner.

Every command writes a CSV (first row: ``# config_hash=<hash>``, second row:
the column header) to ``--out`` or stdout, and with ``--out`` also a JSON run
manifest next to it.  Exit codes: 0 success, 2 configuration error, 3 a
numerical contract failed in ``selfcheck``.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import platform
import sys
from math import pi
from pathlib import Path

import numpy as np

from . import __version__
from .config import (
    SCHEMAS,
    ConfigError,
    ExperimentConfig,
    grain_from_dict,
    load_body,
    load_yaml,
    resolve_paths,
)
from .mc import THREADS_ENV, default_workers

EXIT_OK, EXIT_CONFIG, EXIT_CONTRACT = 0, 2, 3


# output helpers -------------------------------------------------------------------

class Output:
    def __init__(self, cfg: ExperimentConfig, out: str | None, extra_hash: str = ""):
        self.cfg = cfg
        self.out = out
        self.hash = cfg.hash(extra_hash)
        self.results: dict = {}

    def csv_text(self, header, rows) -> str:
        buf = io.StringIO()
        buf.write(f"# config_hash={self.hash}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(x) for x in r])
        return buf.getvalue()

    def write(self, header, rows, suffix: str = "") -> None:
        text = self.csv_text(header, rows)
        if self.out is None:
            sys.stdout.write(text)
            return
        path = _with_suffix(self.out, suffix)
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text)

    def write_text(self, text: str, suffix: str) -> None:
        if self.out is not None:
            Path(_with_suffix(self.out, suffix, keep_ext=False)).write_text(text)

    def manifest(self, seed=None) -> None:
        if self.out is None:
            return
        import scipy

        data = {
            "command": self.cfg.command,
            "config": self.cfg.values,
            "config_hash": self.hash,
            "seed": seed,
            "versions": {
                "crofton_tensors": __version__,
                "python": platform.python_version(),
                "numpy": np.__version__,
                "scipy": scipy.__version__,
            },
            "results": self.results,
        }
        Path(self.out + ".manifest.json").write_text(json.dumps(data, indent=2, sort_keys=True, default=_jsonable))


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    return str(x)


def _with_suffix(out: str, suffix: str, keep_ext: bool = True) -> str:
    if not suffix:
        return out
    p = Path(out)
    return str(p.with_name(p.stem + suffix + (p.suffix if keep_ext else "")))


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return str(x)


def _file_digest(path) -> str:
    try:
        return hashlib.sha256(Path(path).read_bytes()).hexdigest()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc


def _tensor_rows(t):
    return [(k, v) for k, v in t.csv_rows()]


# commands ---------------------------------------------------------------------------------

def cmd_coeffs(cfg, out: Output, args) -> int:
    from .coeffs import C_normalizer, CroftonTable, G_s

    tab = CroftonTable.build(cfg.n, cfg.s)
    m = cfg.s // 2
    rows = []
    for i in range(m + 1):
        for j in range(i + 1):
            rows.append(("c", i, j, tab.c[i, j]))
    for j in range(m + 1):
        rows.append(("C", 2 * j, "", C_normalizer(2 * j, cfg.n)))
    for i in range(m + 1):
        for j in range(i + 1):
            rows.append(("d", i, j, tab.d[i, j]))
    for j, w in enumerate(tab.g_weights()):
        rows.append(("G_weight", j, "", w))
    for idx, v in G_s(np.eye(cfg.n)[0], cfg.n, cfg.s).csv_rows():
        rows.append(("G_e1", idx, "", float(v)))
    out.write(["table", "i", "j", "value"], rows)
    out.manifest()
    return EXIT_OK


def cmd_truth(cfg, out: Output, args) -> int:
    from .ground_truth import QuadratureSpec, surface_tensor

    K = load_body(cfg.body)
    t = surface_tensor(K, cfg.s, QuadratureSpec(*cfg.nodes, "boundary-parametrization"))
    out.write(["index", "value"], _tensor_rows(t))
    out.manifest()
    return EXIT_OK


# documented defaults: direction nodes, offset nodes per dimension
ORACLE_NODES = {2: (2048, 512), 3: (2048, 64)}


def cmd_oracle(cfg, out: Output, args) -> int:
    from .coeffs import crofton_rhs, G_batch
    from .ground_truth import QuadratureSpec, line_quadrature, relative_tensor_weights, rel_gap, surface_tensor
    from .symtensor import SymmetricTensor

    K = load_body(cfg.body)
    q = QuadratureSpec(*(ORACLE_NODES[K.dim] if cfg.nodes == "auto" else cfg.nodes))
    U, w, I = line_quadrature(K, q, workers=args.threads)
    lhs31 = SymmetricTensor(K.dim, cfg.s, (w * I) @ relative_tensor_weights(U, cfg.s))
    lhs34 = SymmetricTensor(K.dim, cfg.s, (w * I) @ G_batch(U, cfg.s))
    truth = {2 * k: surface_tensor(K, 2 * k) for k in range(cfg.s // 2 + 1)}
    rhs31 = crofton_rhs(K.dim, cfg.s, truth)
    rows = [
        (i, a, b, c, d)
        for (i, a), (_, b), (_, c), (_, d) in zip(
            lhs31.csv_rows(), rhs31.csv_rows(), lhs34.csv_rows(), truth[cfg.s].csv_rows()
        )
    ]
    out.write(["index", "crofton_integral", "crofton_formula", "inverse_integral", "surface_tensor"], rows)
    gaps = {"crofton_gap": rel_gap(lhs31, rhs31), "inverse_gap": rel_gap(lhs34, truth[cfg.s])}
    out.results.update(gaps)
    print(f"max relative component gap: Crofton {gaps['crofton_gap']:.3e}, "
          f"inverse {gaps['inverse_gap']:.3e}", file=sys.stderr)
    out.manifest()
    return EXIT_OK


def _reference(cfg, K):
    from .estimators import ReferenceSet

    if cfg.ref_radius is None:
        r, R = K.inradius_circumradius()
        verts = getattr(K, "vertices", None)
        centre = getattr(K, "center", None)
        if centre is None:
            centre = (verts.max(0) + verts.min(0)) / 2
        rad = float(np.max(np.linalg.norm(verts - centre, axis=1))) if verts is not None else R
        return ReferenceSet.ball(centre, rad * 1.0000001)
    centre = cfg.ref_center if cfg.ref_center is not None else np.zeros(K.dim)
    return ReferenceSet.ball(centre, cfg.ref_radius)


def cmd_estimate(cfg, out: Output, args) -> int:
    from . import estimators as est
    from .ground_truth import surface_tensor
    from .mc import mc_run
    from .symtensor import LinearDirection, multi_indices

    K = load_body(cfg.body)
    s = cfg.s
    A = _reference(cfg, K)
    try:
        A.check(K)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    d = cfg.design
    if d == "iur":
        run = est.iur_design(K, A, s, cfg.lines, cfg.frame)
    elif d == "proj":
        run = est.projection_design(K, s, cfg.lines, cfg.frame)
    elif d == "syst":
        run = est.systematic_design(K, cfg.lines, s)
    elif d in ("vert", "vertw"):
        L0 = LinearDirection(cfg.axis)
        run = (est.vertical_batch if d == "vert" else est.vertical_width_batch)(K, A, L0, s)
    else:
        if s != 2 or K.dim != 2:
            raise ConfigError("weighted design needs n = 2 and s = 2")
        ij = tuple(cfg.component)
        dens = {
            "uniform": est.DirectionDensity.uniform,
            "fstar": lambda: est.DirectionDensity.fstar(ij),
            "fstarK": lambda: est.DirectionDensity.fstar_K(K, A.body.radius, ij),
        }[cfg.density]()
        run = est.weighted_batch(K, A, ij, dens)
    S = mc_run(run, cfg.reps, cfg.seed, args.threads, tensor_shape=(K.dim, s) if d != "weighted" else None)
    truth = surface_tensor(K, s).coeffs
    if d == "weighted":
        truth = truth[[est.component_index(2, cfg.component)]]
        idx = ["-".join(map(str, cfg.component))]
    else:
        idx = ["-".join(str(i + 1) for i in m) if m else "0" for m in multi_indices(K.dim, s)]
    rows = [(i, t, m, np.sqrt(v), se, c, (m - t) / se if se > 0 else 0.0)
            for i, t, m, v, se, c in zip(idx, truth, S.mean, S.var, S.se, S.cv_against(truth))]
    out.write(["index", "truth", "mean", "sd", "se", "cv", "z"], rows)
    out.results.update({"replications": S.replications, "posdef_fraction": S.posdef_fraction})
    out.manifest(cfg.seed)
    return EXIT_OK


GNUPLOT_FIG1 = """set datafile separator ','
set key bottom right
set xlabel 'N'
set ylabel 'P(S_N positive definite)'
plot for [k=2:4] '{csv}' every ::1 using 1:k with linespoints title columnhead(k)
"""


def cmd_figure1(cfg, out: Output, args) -> int:
    from .experiments import figure1

    f = figure1(cfg.eps, cfg.grid, cfg.nmax)
    rows = list(zip(f["N"], f["K1"], f["K2"], f["K3"]))
    out.write(["N", "K1", "K2", "K3"], rows)
    out.write_text(GNUPLOT_FIG1.format(csv=Path(out.out).name if out.out else "figure1.csv"), ".gp")
    first = {k: int(f["N"][np.argmax(f[k] >= 1.0)]) if np.any(f[k] >= 1.0) else None for k in ("K1", "K2", "K3")}
    out.results["first_N_with_probability_one"] = first
    out.manifest()
    return EXIT_OK


GNUPLOT_FIG2 = """set datafile separator ','
set logscale y
set xlabel 'l'
set ylabel 'CV'
# columns: l,design,component,truth,mean,sd,cv
plot '{csv}' every ::1 using 1:7 with points title 'CV by design/component'
"""


def cmd_figure2(cfg, out: Output, args) -> int:
    from .experiments import figure2, figure2_ratios

    rows = figure2(cfg.ls, cfg.reps, cfg.seed, args.threads)
    out.write(["l", "design", "component", "truth", "mean", "sd", "cv"],
              [(r.l, r.design, r.component, r.truth, r.mean, r.sd, r.cv) for r in rows])
    out.write_text(GNUPLOT_FIG2.format(csv=Path(out.out).name if out.out else "figure2.csv"), ".gp")
    out.results["ratios"] = figure2_ratios(rows)
    out.manifest(cfg.seed)
    return EXIT_OK


GNUPLOT_CURVES = """set datafile separator ','
set xlabel 'gamma'
set multiplot layout 1,2
plot '{csv}' every ::1 using 1:2 with lines title 'P_IUR', '' every ::1 using 1:3 with lines dt 2 title 'P_f*', '' every ::1 using 1:6 with lines dt 4 title 'P_opt'
plot '{csv}' every ::1 using 1:4 with lines title 'Q_IUR', '' every ::1 using 1:5 with lines dt 2 title 'Q_f*', '' every ::1 using 1:7 with lines dt 4 title 'Q_opt'
unset multiplot
"""


def cmd_curves(cfg, out: Output, args) -> int:
    from .curves import variance_curves

    g = np.linspace(0.0, pi, cfg.points)
    kinds = ["P_IUR", "P_fstar", "Q_IUR", "Q_fstar", "P_opt", "Q_opt"]
    cols = [variance_curves(k, g) for k in kinds]
    out.write(["gamma", *kinds], list(zip(g, *cols)))
    out.write_text(GNUPLOT_CURVES.format(csv=Path(out.out).name if out.out else "curves.csv"), ".gp")
    out.manifest()
    return EXIT_OK


def cmd_process(cfg, out: Output, args) -> int:
    from .mc import mc_run
    from .particle_process import ParticleProcessModel, process_design, specific_tensor_truth
    from .symtensor import multi_indices

    grain_cfg = load_yaml(cfg.grain)
    g = grain_cfg.get("grain", grain_cfg)
    dim = int(g.pop("dim", len(cfg.window)))
    if dim != len(cfg.window):
        raise ConfigError("window needs one side length per dimension")
    grains = grain_from_dict(g, dim)
    model = ParticleProcessModel(cfg.gamma, grains, tuple(0.0 for _ in cfg.window), tuple(cfg.window))
    if cfg.seglen > min(cfg.window):
        raise ConfigError("test segment longer than the window side")
    S = mc_run(process_design(model, cfg.s, cfg.lines, cfg.seglen, cfg.design), cfg.reps, cfg.seed, args.threads)
    truth = specific_tensor_truth(model, cfg.s).coeffs
    idx = ["-".join(str(i + 1) for i in m) if m else "0" for m in multi_indices(dim, cfg.s)]
    rows = [(i, t, m, np.sqrt(v), se, (m - t) / se if se > 0 else 0.0)
            for i, t, m, v, se in zip(idx, truth, S.mean, S.var, S.se)]
    out.write(["index", "truth", "mean", "sd", "se", "z"], rows)
    out.manifest(cfg.seed)
    return EXIT_OK


def cmd_selfcheck(cfg, out: Output, args) -> int:
    from .selfcheck import run_selfcheck

    results = run_selfcheck(workers=args.threads)
    rows = [(name, "pass" if ok else "FAIL", detail) for name, ok, detail in results]
    out.write(["check", "status", "detail"], rows)
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}", file=sys.stderr)
    out.results["failed"] = [r[0] for r in results if not r[1]]
    out.manifest()
    return EXIT_OK if all(r[1] for r in results) else EXIT_CONTRACT


COMMANDS = {
    "coeffs": cmd_coeffs, "truth": cmd_truth, "oracle": cmd_oracle, "estimate": cmd_estimate,
    "figure1": cmd_figure1, "figure2": cmd_figure2, "curves": cmd_curves, "process": cmd_process,
    "selfcheck": cmd_selfcheck,
}

HELP = {
    "coeffs": "dump c, C, d and G_s tables",
    "truth": "surface tensor of a body",
    "oracle": "both sides of the Crofton formulas by quadrature",
    "estimate": "Monte-Carlo run of one estimator design",
    "figure1": "positive-definiteness curves of the systematic planar design",
    "figure2": "CVs of the 3-D spheroid example",
    "curves": "second-moment curves for single-component estimation",
    "process": "specific tensors of a Poisson particle process",
    "selfcheck": "fast run of the numerical contracts",
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="crofton-tensors", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    for name, schema in SCHEMAS.items():
        sp = sub.add_parser(name, help=HELP[name])
        sp.add_argument("--config", help="YAML file with settings for this command")
        sp.add_argument("--out", help="CSV output path (default: stdout)")
        sp.add_argument("--threads", type=int, default=None,
                        help=f"worker threads (default: ${THREADS_ENV} or 1)")
        for key in schema:
            sp.add_argument("--" + key.replace("_", "-"), dest=key, default=None)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.threads is None:
        args.threads = default_workers()
    try:
        file_values = resolve_paths(load_yaml(args.config), args.config) if args.config else None
        flags = {k: getattr(args, k) for k in SCHEMAS[args.command]}
        cfg = ExperimentConfig.resolve(args.command, file_values, flags)
        extra = ""
        for key in ("body", "grain"):
            if key in cfg.values:
                extra += _file_digest(cfg.values[key])
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        out = Output(cfg, args.out, extra)
        return COMMANDS[args.command](cfg, out, args)
    except (ConfigError, ValueError, NotImplementedError) as exc:
        # library input validation raises ValueError; both mean the request cannot be run
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
