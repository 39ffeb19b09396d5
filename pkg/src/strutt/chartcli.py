"""Command-line front end: ``strutt {coeffs,det,boundary,scan,verify}``.

Every run reads an optional JSON config (flags override it), writes CSV/JSON
outputs into ``--out`` and a ``manifest.json`` naming the config hash.
Exit codes: 0 success, 1 verification failure, 2 input error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys
import time
import warnings
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from . import boundaries as bd
from .errors import StruttError
from .hill import HillParams, HillWindow, build_hill, det_complex, multiindex_expansion, raw_matrix, split_CS
from .kernels import ANTIPERIODIC, PERIODIC, ExpSumKernel, knm_exp_closed, load_kernel
from .monodromy import embed, monodromy, scan_chart
from .quadrature import CoefficientSource, QuadratureSpec, knm_quad

EXIT_OK, EXIT_VERIFY, EXIT_INPUT = 0, 1, 2
CHECKS = ("quadrature", "conjugation", "multiindex", "interpolation", "closed_forms", "monodromy")


class InputError(Exception):
    pass


# ---------------------------------------------------------------------------
# configuration


def parse_grid(spec) -> list:
    """'lo:hi:n', 'v1,v2,...', a number, a list, or {'lo', 'hi', 'n'}."""
    if spec is None:
        return []
    if isinstance(spec, (int, float)):
        return [float(spec)]
    if isinstance(spec, dict):
        return np.linspace(float(spec["lo"]), float(spec["hi"]), int(spec["n"])).tolist()
    if isinstance(spec, (list, tuple)):
        return [float(v) for v in spec]
    s = str(spec).strip()
    if ":" in s:
        parts = s.split(":")
        if len(parts) != 3:
            raise InputError(f"grid {s!r}: expected lo:hi:n")
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
        if n < 1:
            raise InputError(f"grid {s!r}: need at least one point")
        return np.linspace(lo, hi, n).tolist()
    return [float(v) for v in s.split(",") if v.strip()]


def _parse_range(spec):
    g = parse_grid(spec)
    if len(g) != 2:
        raise InputError(f"range {spec!r}: expected two values lo,hi")
    return tuple(g)


@dataclass
class RunConfig:
    kernel: str | None = None
    mode: str = PERIODIC
    order: int = 1
    quad: tuple = (32, 64)
    v: object = "auto"
    backend: str = "quad"
    a0: list = field(default_factory=lambda: [1.0])
    a1: list = field(default_factory=lambda: [0.0])
    theta: list = field(default_factory=lambda: [1.0])
    omega: list = field(default_factory=lambda: [0.0])
    lam: list = field(default_factory=lambda: [0.5])
    gamma: complex = 0j
    branch: list = field(default_factory=lambda: ["vertexB"])
    side_order: int = 3
    theta_range: tuple = (1.5, 2.5)
    a1_range: tuple = (0.0, 1.0)
    resolution: tuple = (200, 200)
    tol: float = 1e-8
    checks: list = field(default_factory=lambda: list(CHECKS))
    out: str = "out"

    def validate(self):
        if self.mode not in (PERIODIC, ANTIPERIODIC):
            raise InputError(f"mode must be periodic or antiperiodic, got {self.mode!r}")
        if int(self.order) != self.order or self.order < 1:
            raise InputError("truncation order N must be an integer >= 1")
        if self.backend not in ("quad", "closed"):
            raise InputError("backend must be closed or quad")
        if not self.tol > 0:
            raise InputError("tolerance must be positive")
        if any(r < 1 for r in self.resolution):
            raise InputError("resolution must be >= 1 in both directions")
        for name in ("a0", "a1", "theta", "omega", "lam"):
            if not getattr(self, name):
                raise InputError(f"{name} grid is empty")
        if any(t <= 0 for t in self.theta):
            raise InputError("theta values must be positive")
        unknown = set(self.branch) - set(bd.BRANCH_KINDS)
        if unknown:
            raise InputError(f"unknown branch kind(s): {', '.join(sorted(unknown))}")
        unknown = set(self.checks) - set(CHECKS)
        if unknown:
            raise InputError(f"unknown check(s): {', '.join(sorted(unknown))}")
        return self

    def quad_spec(self) -> QuadratureSpec:
        return QuadratureSpec(int(self.quad[0]), int(self.quad[1]), self.v)

    def echo(self) -> dict:
        d = asdict(self)
        d["gamma"] = [self.gamma.real, self.gamma.imag]
        d["quad"] = list(self.quad)
        d["theta_range"] = list(self.theta_range)
        d["a1_range"] = list(self.a1_range)
        d["resolution"] = list(self.resolution)
        return d

    def hash(self) -> str:
        d = self.echo()
        d.pop("out")
        if self.kernel and Path(self.kernel).is_file():
            d["kernel_sha256"] = hashlib.sha256(Path(self.kernel).read_bytes()).hexdigest()
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()


_GRID_KEYS = {"a0", "a1", "theta", "omega", "lam"}


def _apply(cfg: RunConfig, key: str, value, base: Path | None = None) -> RunConfig:
    if value is None:
        return cfg
    if key in _GRID_KEYS:
        value = parse_grid(value)
    elif key in ("theta_range", "a1_range"):
        value = _parse_range(value)
    elif key == "quad":
        if isinstance(value, dict):
            if "v" in value:
                cfg = replace(cfg, v=value["v"] if value["v"] == "auto" else float(value["v"]))
            value = (value.get("N", 32), value.get("M", 64))
        elif isinstance(value, str):
            value = tuple(value.split(","))
        try:
            value = tuple(int(x) for x in value)
        except ValueError as exc:
            raise InputError(f"quad must be Nnodes,Mpanels: {exc}") from exc
        if len(value) != 2:
            raise InputError("quad must be Nnodes,Mpanels")
    elif key == "resolution":
        if isinstance(value, str):
            value = value.split(",")
        value = tuple(int(x) for x in np.atleast_1d(value))
        if len(value) == 1:
            value = value * 2
    elif key == "gamma":
        value = complex(str(value).replace(" ", "")) if not isinstance(value, (list, tuple)) else complex(*value)
    elif key in ("branch", "checks"):
        if isinstance(value, str):
            value = [v for v in value.split(",") if v]
        value = list(value)
    elif key == "kernel" and base is not None:
        value = str((base / value).resolve()) if not Path(value).is_absolute() else value
    elif key in ("order", "side_order"):
        value = int(value)
    elif key == "tol":
        value = float(value)
    if not hasattr(cfg, key):
        raise InputError(f"unknown config key {key!r}")
    return replace(cfg, **{key: value})


def load_config(args) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "config", None):
        path = Path(args.config)
        if not path.is_file():
            raise InputError(f"config file not found: {path}")
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
        if not isinstance(data, dict):
            raise InputError(f"{path}: config must be a JSON object")
        for key, value in data.items():
            key = {"lambda": "lam"}.get(key, key)
            cfg = _apply(cfg, key, value, path.parent)
    for key in (
        "kernel", "mode", "order", "quad", "backend", "a0", "a1", "theta", "omega", "lam", "gamma",
        "branch", "side_order", "theta_range", "a1_range", "resolution", "tol", "checks", "out",
    ):
        cfg = _apply(cfg, key, getattr(args, key, None))
    if getattr(args, "v", None) is not None:
        cfg = replace(cfg, v=args.v if args.v == "auto" else float(args.v))
    return cfg.validate()


def _kernel(cfg: RunConfig):
    if not cfg.kernel:
        raise InputError("no kernel file given (--kernel)")
    if not Path(cfg.kernel).is_file():
        raise InputError(f"kernel file not found: {cfg.kernel}")
    return load_kernel(cfg.kernel)


def _source(cfg: RunConfig, k=None) -> CoefficientSource:
    k = k if k is not None else _kernel(cfg)
    if cfg.backend == "closed" and not isinstance(k, ExpSumKernel):
        raise InputError("the closed backend needs an exponential-sum kernel")
    return CoefficientSource(k, cfg.backend, cfg.quad_spec())


# ---------------------------------------------------------------------------
# output


def _fmt(x):
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def write_csv(path: Path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(x) for x in r])


def write_manifest(out: Path, cfg: RunConfig, command: str, files, t0: float, extra=None):
    manifest = {
        "command": command,
        "config": cfg.echo(),
        "config_hash": cfg.hash(),
        "code_version": __version__,
        "files": sorted(str(f.name) for f in files),
        "wall_time_s": time.perf_counter() - t0,
    }
    manifest.update(extra or {})
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True, default=_fmt) + "\n")


def _outdir(cfg: RunConfig) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# subcommands


def cmd_coeffs(cfg: RunConfig) -> int:
    t0 = time.perf_counter()
    src = _source(cfg)
    rows = []
    for th in cfg.theta:
        block = src(th, cfg.gamma, cfg.mode, cfg.order)
        rows.extend((cfg.mode, n, m, val.real, val.imag) for n, m, val in block.rows())
    out = _outdir(cfg)
    f = out / "coeffs.csv"
    write_csv(f, ["mode", "n", "m", "re", "im"], rows)
    write_manifest(out, cfg, "coeffs", [f], t0, {"backend": cfg.backend, "rows": len(rows)})
    return EXIT_OK


def cmd_det(cfg: RunConfig) -> int:
    t0 = time.perf_counter()
    src = _source(cfg)
    window = HillWindow(cfg.mode, cfg.order)
    rows = []
    for th in cfg.theta:
        block = src(th, cfg.gamma, cfg.mode, cfg.order)
        for a0 in cfg.a0:
            for a1 in cfg.a1:
                params = HillParams(a0, a1, th, cfg.gamma)
                D = det_complex(build_hill(params, window, block))
                R = det_complex(raw_matrix(params, window, block))
                rows.append((cfg.mode, window.size, th, cfg.gamma.real, cfg.gamma.imag, a0, a1, D.real, D.imag, R.real, R.imag))
    out = _outdir(cfg)
    f = out / "det.csv"
    header = ["mode", "size", "theta", "gamma_re", "gamma_im", "a0", "a1", "det_re", "det_im", "det_raw_re", "det_raw_im"]
    write_csv(f, header, rows)
    write_manifest(out, cfg, "det", [f], t0, {"rows": len(rows)})
    return EXIT_OK


def _branches(cfg: RunConfig, src, kind: str):
    theta = np.asarray(cfg.theta)
    # these two do not depend on a0
    if kind == "quasistatic":
        yield bd.quasistatic_branch(src, theta, cfg.omega, cfg.tol)
        return
    if kind == "sideAC" and cfg.side_order == 1:
        for lam in cfg.lam:
            yield bd.side_real_case_first_order(src, lam, theta, cfg.tol)
        return
    for a0 in cfg.a0:
        if kind == "periodic":
            for w in cfg.omega:
                yield bd.periodic_branch(src, a0, theta, w, cfg.tol)
        elif kind == "antiperiodic":
            for w in cfg.omega:
                yield bd.antiperiodic_branch(src, a0, theta, w, cfg.tol)
        elif kind == "vertexA":
            yield bd.vertexA_solve(src, a0, theta, cfg.tol)
        elif kind == "vertexB":
            yield bd.vertexB_branch(src, a0, theta, cfg.order)
        elif kind == "vertexC":
            yield bd.vertexC_branch(src, a0, theta, cfg.order)
        elif kind == "sideAB":
            for lam in cfg.lam:
                yield bd.side_antiperiodic_second_order(src, a0, lam, theta, cfg.tol)
        elif kind == "sideAC":
            for lam in cfg.lam:
                yield bd.side_real_case_third_order(src, a0, lam, theta, cfg.tol)


def cmd_boundary(cfg: RunConfig) -> int:
    t0 = time.perf_counter()
    src = _source(cfg)
    out = _outdir(cfg)
    header = ["branch_kind", "theta", "a0", "a1", "omega", "lambda", "residual", "truncation_order"]
    files, counts, residuals, diagnostics = [], {}, {}, {}
    for kind in cfg.branch:
        rows, res = [], []
        for b in _branches(cfg, src, kind):
            rows.extend(b.rows())
            res.extend(b.residual.tolist())
            if "diagnostic" in b.meta:
                diagnostics.setdefault(kind, []).append(b.meta["diagnostic"])
            if b.meta.get("indeterminate"):
                diagnostics.setdefault(kind, []).append("indeterminate: equation holds on the whole theta grid")
        f = out / f"boundary_{kind}.csv"
        write_csv(f, header, rows)
        files.append(f)
        counts[kind] = len(rows)
        r = np.asarray(res)
        r = r[np.isfinite(r)]
        residuals[kind] = {"max": float(r.max()) if r.size else None, "median": float(np.median(r)) if r.size else None}
    write_manifest(out, cfg, "boundary", files, t0, {"point_counts": counts, "residuals": residuals, "diagnostics": diagnostics})
    return EXIT_OK


def cmd_scan(cfg: RunConfig) -> int:
    t0 = time.perf_counter()
    k = _kernel(cfg)
    if not isinstance(k, ExpSumKernel):
        raise InputError(
            "scan uses the monodromy oracle, which needs an exponential-sum kernel; "
            "for other kernels use the determinant pathway (boundary / det subcommands)"
        )
    out = _outdir(cfg)
    files = []
    lines_out = []
    rows = []
    for a0 in cfg.a0:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            chart = scan_chart(k, a0, cfg.theta_range, cfg.a1_range, cfg.resolution)
        rows.extend((a0, *r) for r in chart.rows())
        for ln in chart.polylines:
            lines_out.append({"a0": a0, "label": ln["label"], "points": ln["points"].tolist()})
    f = out / "chart.csv"
    write_csv(f, ["a0", "theta", "a1", "p", "q", "spectral_radius", "class"], rows)
    g = out / "boundaries.json"
    g.write_text(json.dumps({"polylines": lines_out}, default=_fmt) + "\n")
    files += [f, g]
    write_manifest(out, cfg, "scan", files, t0, {"cells": len(rows), "polylines": len(lines_out)})
    return EXIT_OK


# verification suite ------------------------------------------------------


def _rel(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return float(np.abs(a - b).max() / max(np.abs(b).max(), 1e-300))


def _check_quadrature(cfg, k):
    if not isinstance(k, ExpSumKernel):
        return None, "skipped: needs an exponential-sum kernel"
    spec = cfg.quad_spec()
    err = 0.0
    for mode in (PERIODIC, ANTIPERIODIC):
        for n in range(-1, 1 + (mode == PERIODIC)):
            exact = knm_exp_closed(k, n, n, 1.0, 0.0, mode)
            err = max(err, abs(knm_quad(k, n, n, 1.0, 0.0, spec, mode) - exact) / abs(exact))
    return err, "max relative error, theta=1, gamma=0, |n| <= 1"


def _check_conjugation(cfg, k):
    src = _source(cfg, k)
    th, w, a0, a1 = 1.3, 0.4, 1.0, 0.5
    err = 0.0
    for mode in (PERIODIC, ANTIPERIODIC):
        win = HillWindow(mode, max(cfg.order, 1))
        dets = [det_complex(build_hill(HillParams(a0, a1, th, g), win, src(th, g, mode, win.N))) for g in (1j * w, -1j * w)]
        err = max(err, abs(dets[1] - np.conj(dets[0])) / max(abs(dets[0]), 1e-300))
    return err, "det D(-iw) vs conj det D(iw), relative"


def _check_multiindex(cfg, k):
    src = _source(cfg, k)
    th, w = 1.3, 0.4
    win = HillWindow(PERIODIC, min(max(cfg.order, 1), 3))
    D = build_hill(HillParams(1.0, 0.5, th, 1j * w), win, src(th, 1j * w, PERIODIC, win.N))
    ref = det_complex(D)
    return abs(multiindex_expansion(*split_CS(D)) - ref) / max(abs(ref), 1e-300), "relative"


def _check_interpolation(cfg, k):
    src = _source(cfg, k)
    th, w, a0 = 1.3, 0.4, 0.8
    q = bd.periodic_3x3_coeffs(src, th, w, a0)
    block = src(th, 1j * w, PERIODIC, 1)
    win = HillWindow(PERIODIC, 1)
    vals = [-det_complex(raw_matrix(HillParams(a0, a, th, 1j * w), win, block)) for a in (0.0, 1.0, 2.0)]
    fit = np.polyfit([0.0, 1.0, 2.0], vals, 2)
    return float(np.abs(fit - q.coeffs).max() / max(q.scale, 1e-300)), "relative to max |C|"


def _single_term(k):
    if isinstance(k, ExpSumKernel) and len(k.terms) == 1 and k.c[0] >= 0:
        return float(k.c[0]), float(k.mu[0])
    return None


def _check_closed_forms(cfg, k):
    ct = _single_term(k)
    if ct is None:
        return None, "skipped: needs a single-term exponential kernel with c >= 0"
    c, mu = ct
    src = CoefficientSource(k, "closed")
    err = 0.0
    for th in np.linspace(0.6, 3.0, 7):
        for a0 in np.linspace(0.5, 3.0, 6):
            e8 = bd.exp_periodic_closed(c, mu, a0, th)
            vc = bd.vertexC_3x3(src, th, a0)
            if e8.admissible and math.isfinite(e8.a1_sq) and len(vc.roots):
                err = max(err, abs(vc.roots[-1] ** 2 - e8.a1_sq) / max(1.0, e8.a1_sq))
            e11 = bd.exp_antiperiodic_closed(c, mu, a0, th)[0]
            r = bd.antiperiodic_2x2_roots(src, th, 0.0, a0)
            if len(r):
                err = max(err, abs(r[-1] ** 2 - e11) / max(1.0, e11))
    return err, "generic pathway vs closed forms, relative"


def _check_monodromy(cfg, k):
    if not isinstance(k, ExpSumKernel):
        return None, "skipped: needs an exponential-sum kernel"
    src = CoefficientSource(k, "closed")
    a0 = cfg.a0[0]
    # vertexB point of the fourth-order (or higher) truncation at the primary resonance
    th = 2 * math.sqrt(a0) if a0 > 0 else 1.0
    b = bd.vertexB_branch(src, a0, [th], max(cfg.order, 2))
    if not len(b):
        return math.inf, f"no vertexB point at theta={th:.4g}"
    i = int(np.argmin(np.abs(b.a1)))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        rho = monodromy(embed(k, a0, b.a1[i], b.theta[i])).spectral_radius
    return abs(rho - 1), f"|rho - 1| at the vertexB point (theta={b.theta[i]:.4g}, a1={b.a1[i]:.4g})"


CHECK_FUNCS = {
    "quadrature": (_check_quadrature, 1e-4),
    "conjugation": (_check_conjugation, 1e-10),
    "multiindex": (_check_multiindex, 1e-12),
    "interpolation": (_check_interpolation, 1e-10),
    "closed_forms": (_check_closed_forms, 1e-8),
    "monodromy": (_check_monodromy, 0.05),
}


def cmd_verify(cfg: RunConfig) -> int:
    t0 = time.perf_counter()
    k = _kernel(cfg) if cfg.kernel else ExpSumKernel([(1.0, 1.0)])
    results = []
    for name in cfg.checks:
        fn, tol = CHECK_FUNCS[name]
        try:
            value, detail = fn(cfg, k)
            status = "SKIP" if value is None else ("PASS" if value <= tol else "FAIL")
        except (StruttError, ValueError, TypeError, ArithmeticError) as exc:
            value, detail, status = math.nan, f"{type(exc).__name__}: {exc}", "FAIL"
        results.append((name, status, math.nan if value is None else value, tol, detail))
        print(f"{status} {name}: {detail} (value={_fmt(value)}, tol={tol:g})")
    out = _outdir(cfg)
    f = out / "verify.csv"
    write_csv(f, ["check", "status", "value", "tol", "detail"], results)
    failed = [r[0] for r in results if r[1] == "FAIL"]
    write_manifest(out, cfg, "verify", [f], t0, {"failed": failed})
    return EXIT_VERIFY if failed else EXIT_OK


COMMANDS = {"coeffs": cmd_coeffs, "det": cmd_det, "boundary": cmd_boundary, "scan": cmd_scan, "verify": cmd_verify}


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--kernel", help="kernel JSON file")
    common.add_argument("--config", help="run config JSON file (flags override it)")
    common.add_argument("--out", help="output directory")
    common.add_argument("--order", type=int, help="truncation half-width N")
    common.add_argument("--quad", help="Nnodes,Mpanels for the kernel quadrature")
    common.add_argument("--v", help="exponential-weight scaling rate or 'auto'")
    common.add_argument("--backend", choices=("closed", "quad"))
    common.add_argument("--mode", choices=(PERIODIC, ANTIPERIODIC))
    common.add_argument("--tol", type=float)
    common.add_argument("--theta", help="grid: lo:hi:n, list or value")
    common.add_argument("--a0", help="grid: lo:hi:n, list or value")
    common.add_argument("--a1", help="grid: lo:hi:n, list or value")
    common.add_argument("--omega", help="grid for w' (gamma = i w')")
    common.add_argument("--lam", "--lambda", dest="lam", help="grid for the real shift lambda")
    common.add_argument("--gamma", help="complex shift, e.g. 0.3j or -0.5")

    p = argparse.ArgumentParser(prog="strutt", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("coeffs", parents=[common], help="kernel coefficient table")
    sub.add_parser("det", parents=[common], help="truncated Hill determinants")
    b = sub.add_parser("boundary", parents=[common], help="boundary branches")
    b.add_argument("--branch", help="comma-separated kinds: " + ",".join(bd.BRANCH_KINDS))
    b.add_argument("--side-order", dest="side_order", type=int, choices=(1, 3))
    s = sub.add_parser("scan", parents=[common], help="monodromy stability chart")
    s.add_argument("--theta-range", dest="theta_range", help="lo,hi")
    s.add_argument("--a1-range", dest="a1_range", help="lo,hi")
    s.add_argument("--resolution", help="n or n_theta,n_a1")
    v = sub.add_parser("verify", parents=[common], help="cross-check suite")
    v.add_argument("--checks", help="comma-separated subset of: " + ",".join(CHECKS))
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        cfg = load_config(args)
        return COMMANDS[args.command](cfg)
    except (InputError, StruttError, ValueError, TypeError, OSError) as exc:
        print(f"strutt {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
