"""Command line entry point: ``weyllab <command> [options]``.

Data files are written deterministically (17 significant digits); run
details that change between runs (timestamps, argv) go to a separate
``<out>.meta.json`` sidecar.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, ExperimentConfig, load_config
from .diagnostics import band_ratio, default_pairs, heat_bound_ratio, rough_bound_ratio, x_grid
from .lattice import (annulus_census_grid, cap_count, count_ball, enumerate_ball, shell_multiplicity,
                      weyl_remainder)
from .mollifier import MollifierSpec
from .pipeline import galerkin_convergence, main_report, solve
from .potential import FourierTable, ModelTable, envelope_report
from .spectral import ReliabilityWarning, assemble
from .weyl import (duhamel_identity_check, fit_exponent, pointwise_remainder, r1_indicator_lower, r1_sum,
                   r2_sum)

log = logging.getLogger("weyllab")


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o).__name__)


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1, default=_json_default) + "\n"


class Output:
    def __init__(self, args):
        self.path = Path(args.out) if args.out else None
        self.args = args

    def _sidecar(self, extra=None):
        if self.path is None:
            return
        meta = {"command": self.args.command, "argv": sys.argv[1:], "version": __version__,
                "written_at": time.strftime("%Y-%m-%dT%H:%M:%S%z")}
        meta.update(extra or {})
        Path(str(self.path) + ".meta.json").write_text(dumps(meta))

    def csv(self, header, rows, extra=None):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) for v in r])
        self._emit(buf.getvalue(), extra)

    def json(self, obj, extra=None):
        self._emit(dumps(obj), extra)

    def _emit(self, text, extra):
        if self.path is None:
            sys.stdout.write(text)
        else:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self.path.write_text(text)
            self._sidecar(extra)


def _cfg(args) -> ExperimentConfig:
    if not args.config:
        raise ConfigError("this command needs --config", rule="config required")
    return load_config(args.config, args.set)


def _solve(cfg: ExperimentConfig, args):
    cache = args.cache_dir or cfg.cache_dir
    return solve(cfg.potential(), cfg.truncation, cfg.quadrature, cfg.shift_floor, cache,
                 cfg.reliability, cfg.max_basis)


def _flags(caught) -> str:
    names = sorted({w.category.__name__ for w in caught})
    return ";".join(names)


# ---------------------------------------------------------------------------
# commands


def cmd_count(args):
    c = count_ball(args.dim, args.radius)
    print(c)
    if args.out:
        Output(args).csv(["dim", "radius", "count", "remainder"],
                         [[args.dim, float(args.radius), c, weyl_remainder(args.dim, args.radius)]])
    return 0


def cmd_shells(args):
    rows, cum = [], 0
    for m in range(int(args.max_norm_sq) + 1):
        k = shell_multiplicity(args.dim, m)
        cum += k
        if k:
            rows.append([m, k, cum])
    Output(args).csv(["norm_sq", "multiplicity", "cumulative"], rows)
    return 0


def cmd_annulus(args):
    grid = annulus_census_grid(args.dim, args.lam)
    rows = [[c.ell, c.m, c.J_count, c.max_K_count, c.S_count, c.bound_ratios["J"],
             c.bound_ratios["max_K"], c.bound_ratios["S"]] for c in grid.values()]
    Output(args).csv(["ell", "m", "J", "max_K", "S", "ratio_J", "ratio_max_K", "ratio_S"], rows)
    return 0


def cmd_caps(args):
    rows = []
    for r in args.cap_radius:
        c = cap_count(args.dim, args.lambda_sq, r)
        center = "" if c.argmax_center is None else " ".join(map(str, c.argmax_center.coords))
        rows.append([args.dim, args.lambda_sq, float(r), c.max_count, center])
    Output(args).csv(["dim", "lambda_sq", "cap_radius", "max_count", "center"], rows)
    return 0


def cmd_fourier(args):
    cfg = _cfg(args)
    V = cfg.potential()
    top = int(math.floor(args.xi_max**2 + 1e-9))
    ms = [m for m in range(top + 1) if shell_multiplicity(cfg.dimension, m) > 0]
    table = FourierTable(V, cfg.quadrature)
    table.ensure(ms)
    if args.envelope:
        rep = envelope_report(table, args.xi_max)
        Output(args).json({"c_min": rep.c_min, "c_max": rep.c_max, "worst_offsets": rep.worst_offsets,
                           "nonpositive": rep.nonpositive})
        return 0
    if args.out:
        table.to_csv(args.out)
        Output(args)._sidecar()
    else:
        Output(args).csv(["xi_norm_sq", "value", "err_estimate"], [[m, v, e] for m, (v, e) in table.items()])
    return 0


def cmd_assemble(args):
    cfg = _cfg(args)
    basis = enumerate_ball(cfg.dimension, cfg.truncation)
    H = assemble(basis, FourierTable(cfg.potential(), cfg.quadrature))
    off = H.matrix - np.diag(np.diag(H.matrix))
    Output(args).json({"size": len(basis), "fingerprint": H.fingerprint, "v00": H.v00,
                       "symmetric": bool(np.array_equal(H.matrix, H.matrix.T)),
                       "max_offdiag": float(np.abs(off).max(initial=0.0)), "trace": float(np.trace(H.matrix))})
    return 0


def cmd_eigs(args):
    cfg = _cfg(args)
    if args.convergence:
        cuts = [float(c) for c in args.convergence.split(",")]
        rows = galerkin_convergence(cfg.potential(), cuts, args.count, cfg.quadrature,
                                    args.cache_dir or cfg.cache_dir)
        Output(args).json({"table": rows, "max_rel_change": max(r["max_rel_change"] or 0 for r in rows)})
        return 0
    res = _solve(cfg, args)
    S = res.spectral
    k = len(S.raw_eigenvalues) if args.count is None else min(args.count, len(S.raw_eigenvalues))
    Output(args).csv(["index", "raw_eigenvalue", "eigenvalue"],
                     [[i, S.raw_eigenvalues[i], S.eigenvalues[i]] for i in range(k)],
                     {"cache_hit": res.cache_hit, "shift": S.shift})
    return 0


def _sweep(cfg, args, fn, header):
    res = _solve(cfg, args)
    rows = []
    for lam in cfg.lambdas:
        spec = MollifierSpec(float(lam), cfg.eta, cfg.epsilon)
        for i, x in enumerate(cfg.x_points):
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always")
                vals = fn(res, spec, x)
            rows.append([float(lam), i, *vals, _flags(caught)])
    Output(args).csv(header, rows, {"cache_hit": res.cache_hit})
    return 0


def cmd_weyl(args):
    cfg = _cfg(args)
    mode = args.mode or cfg.mode
    return _sweep(cfg, args, lambda r, s, x: [pointwise_remainder(r.spectral, s, x, mode), mode],
                  ["lambda", "x_index", "value", "mode", "warning_flags"])


def cmd_duhamel(args):
    cfg = _cfg(args)
    res = _solve(cfg, args)
    lam = args.lam or float(cfg.lambdas[0])
    spec = MollifierSpec(lam, cfg.eta, cfg.epsilon)
    x = cfg.x_points[0]
    chk = duhamel_identity_check(res.spectral, res.spectral.basis, res.table, None, spec, x, cfg.r2_max_points)
    r1, r2 = chk.relative
    print(f"res1 {fmt(chk.res1)}\nres2 {fmt(chk.res2)}\nrel1 {fmt(r1)}\nrel2 {fmt(r2)}")
    ok = chk.passed(args.tol)
    if args.out:
        Output(args).json({"lambda": lam, "res1": chk.res1, "res2": chk.res2, "rel1": r1, "rel2": r2,
                           "hdiag_v": chk.hdiag_v, "hdiag_0": chk.hdiag_0, "r1": chk.r1, "r2": chk.r2,
                           "pass": ok})
    return 0 if ok else 3


def cmd_r1(args):
    cfg = _cfg(args)

    def fn(res, spec, x):
        out = r1_sum(res.spectral.basis, res.table, spec, x)
        return [out.value, out.tail_bound]

    return _sweep(cfg, args, fn, ["lambda", "x_index", "value", "tail_bound", "warning_flags"])


def cmd_r2(args):
    cfg = _cfg(args)

    def fn(res, spec, x):
        S = res.spectral
        return [r2_sum(S.basis, S, res.table, None, spec, x, max_points=cfg.r2_max_points)]

    return _sweep(cfg, args, fn, ["lambda", "x_index", "value", "warning_flags"])


def cmd_r1_lower(args):
    cfg = _cfg(args)
    if cfg.coefficients == "model":
        table = ModelTable(cfg.dimension, cfg.eta)
    else:
        table = FourierTable(cfg.potential(), cfg.quadrature)
    rows, pts = [], []
    for lam in cfg.lambdas:
        cut = cfg.cutoff_for(float(lam))
        basis = enumerate_ball(cfg.dimension, cut)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            out = r1_indicator_lower(basis, table, float(lam), method=args.method)
        rows.append([float(lam), cut, out.value, out.tail_bound, out.tail_bound / out.value if out.value else math.inf,
                     _flags(caught)])
        pts.append((float(lam), out.value))
    Output(args).csv(["lambda", "cutoff", "value", "tail_bound", "tail_fraction", "warning_flags"], rows)
    return 0


def _read_points(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError(f"{path}: no rows")
    vcol = "value" if "value" in rows[0] else [k for k in rows[0] if k != "lambda"][0]
    return [(float(r["lambda"]), float(r[vcol])) for r in rows]


def cmd_fit(args):
    pts = _read_points(args.input)
    fit = fit_exponent(pts, tuple(args.window) if args.window else None)
    extra = {}
    if args.eta is not None and args.dim is not None:
        extra = {"eta": args.eta, "n": args.dim, "expected_exponent": args.dim - args.eta}
    Output(args).json(fit.to_record(**extra))
    return 0


def diagnose_reports(cfg: ExperimentConfig, S) -> list[dict]:
    grid = x_grid(cfg.dimension, cfg.center)
    th = cfg.thresholds
    reports = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ReliabilityWarning)
        for lam in cfg.lambdas:
            reports.append(band_ratio(S, float(lam), grid, th.get("band_ratio")).to_record())
            reports.append(rough_bound_ratio(S, float(lam), grid, th.get("rough_bound_ratio")).to_record())
        tmin = 4.0 / cfg.truncation**2
        times = cfg.heat_times or list(np.geomspace(tmin, 1.0, 6))
        pairs = default_pairs(cfg.dimension, cfg.center)
        reports.append(heat_bound_ratio(S, times, pairs, cfg.heat_c, th.get("heat_bound_ratio")).to_record())
    return reports


def cmd_diagnose(args):
    cfg = _cfg(args)
    res = _solve(cfg, args)
    Output(args).json({"reports": diagnose_reports(cfg, res.spectral)}, {"cache_hit": res.cache_hit})
    return 0


def cmd_report(args):
    cfg = _cfg(args)
    res = _solve(cfg, args)
    S = res.spectral
    rep = main_report(S, cfg.eta, cfg.lambdas, cfg.x_points[0], cfg.mode, cfg.epsilon)
    rep["config"] = {"dimension": cfg.dimension, "eta": cfg.eta, "gamma": cfg.gamma, "truncation": cfg.truncation,
                     "bump": {"variant": cfg.bump.variant, "support_radius": cfg.bump.support_radius},
                     "mode": cfg.mode, "epsilon": cfg.epsilon, "shift": S.shift, "basis_size": len(S.basis)}
    out = Output(args)
    if out.path is not None:
        csv_out = argparse.Namespace(**{**vars(args), "out": str(out.path.with_suffix(".csv"))})
        Output(csv_out).csv(["lambda", "value"], rep["points"])
    out.json(rep, {"cache_hit": res.cache_hit})
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="experiment config (JSON or YAML)")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a config key")
    common.add_argument("--out", help="output file (default stdout)")
    common.add_argument("--cache-dir", help="eigendata cache directory")
    common.add_argument("--error-json", action="store_true", help="report errors as JSON on stderr")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="weyllab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=fn)
        return sp

    sp = add("count", cmd_count, "lattice points in a closed ball")
    sp.add_argument("--dim", type=int, required=True)
    sp.add_argument("--radius", type=float, required=True)
    sp = add("shells", cmd_shells, "shell multiplicities")
    sp.add_argument("--dim", type=int, required=True)
    sp.add_argument("--max-norm-sq", type=int, required=True)
    sp = add("annulus", cmd_annulus, "dyadic annulus census")
    sp.add_argument("--dim", type=int, required=True)
    sp.add_argument("--lam", type=float, required=True)
    sp = add("caps", cmd_caps, "spherical cap counts")
    sp.add_argument("--dim", type=int, required=True)
    sp.add_argument("--lambda-sq", type=int, required=True)
    sp.add_argument("--cap-radius", type=float, nargs="+", required=True)
    sp = add("fourier", cmd_fourier, "Fourier coefficient table")
    sp.add_argument("--xi-max", type=float, default=20.0)
    sp.add_argument("--envelope", action="store_true", help="report the power-law envelope instead")
    add("assemble", cmd_assemble, "assemble the Hamiltonian and summarize it")
    sp = add("eigs", cmd_eigs, "eigenvalues (cached)")
    sp.add_argument("--count", type=int)
    sp.add_argument("--convergence", help="comma separated cutoffs for a Galerkin table")
    sp = add("weyl", cmd_weyl, "pointwise remainder R(lambda, x)")
    sp.add_argument("--mode", choices=["mollified", "indicator"])
    sp = add("duhamel-check", cmd_duhamel, "exact Duhamel identity residuals")
    sp.add_argument("--lam", type=float)
    sp.add_argument("--tol", type=float, default=1e-8)
    add("r1", cmd_r1, "first-order perturbation sum R1")
    sp = add("r1-lower", cmd_r1_lower, "indicator lower sum at the singular point")
    sp.add_argument("--method", choices=["auto", "direct", "fft"], default="auto")
    add("r2", cmd_r2, "second-order perturbation sum R2")
    sp = add("fit", cmd_fit, "log-log exponent fit of a (lambda, value) CSV")
    sp.add_argument("--input", required=True)
    sp.add_argument("--window", type=float, nargs=2)
    sp.add_argument("--eta", type=float)
    sp.add_argument("--dim", type=int)
    add("diagnose", cmd_diagnose, "band / rough / heat bound reports")
    add("report", cmd_report, "main scaling run: eigensolve, D(lambda, x0), fit")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except Exception as exc:  # surfaced as exit status + message
        if args.verbose:
            log.exception("command failed")
        payload = {"error": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, ConfigError):
            payload["rule"] = exc.rule
            if exc.line is not None:
                payload["line"] = exc.line
        if args.error_json:
            sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")
        else:
            sys.stderr.write(f"error: {exc}\n")
        return 2 if isinstance(exc, ConfigError) else 1


if __name__ == "__main__":
    sys.exit(main())
