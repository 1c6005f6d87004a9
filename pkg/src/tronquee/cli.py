"""Command-line front end.

Every subcommand prints its report (JSON by default, CSV with
``--format csv``) unless ``--quiet`` is given, and writes it to the output
directory when one is set with ``--out`` or ``TRONQUEE_OUTPUT_DIR``.
Timestamps go to a ``.meta.json`` sidecar so the report itself is
byte-identical across identical runs.

Exit codes: 0 success, 1 a checked property failed, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import re
import sys
import time
import warnings
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import __version__
from .exact import parse_exact
from .model import BRANCH_RANGE, Family, Polar, make_equation, branch as make_branch, sector
from .plots import line_chart, pole_map

OUTPUT_ENV = "TRONQUEE_OUTPUT_DIR"
PARAM_NAMES = ("alpha", "beta", "k0", "kinf")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    family: str = "p3i"
    m: int = 0
    params: dict = field(default_factory=dict)
    N: Optional[int] = None
    backend: Optional[str] = None
    tol: Optional[float] = None
    k: int = 0
    kind: str = "S"
    out: Optional[str] = None
    format: str = "json"
    quiet: bool = False
    options: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        return cls(**data)

    def equation(self):
        fam = Family.parse(self.family)
        vals = {}
        for name, text in self.params.items():
            vals[name] = _parse_param(name, text)
        return make_equation(fam, vals)


def _parse_param(name: str, text: str):
    try:
        return parse_exact(text)
    except (ValueError, ZeroDivisionError):
        pass
    try:
        z = complex(text.replace("i", "j"))
    except ValueError as exc:
        raise UsageError(f"cannot parse --{name} {text!r}") from exc
    warnings.warn(f"--{name} {text!r} is not exact; using floating arithmetic")
    return z


DEFAULT_PARAMS = {Family.P3i: {"alpha": "1", "beta": "2"},
                  Family.P3ii: {"beta": "1/2"},
                  Family.P4: {"k0": "1/2", "kinf": "1/3"}}


# ----------------------------------------------------------------------------
# output


def _jsonable(obj):
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return _jsonable(obj.item())
    return obj


def _to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    keys = list(dict.fromkeys(k for r in rows for k in r))
    w = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: json.dumps(_jsonable(v)) if isinstance(v, (list, dict)) else v
                    for k, v in r.items()})
    return buf.getvalue()


def _flat(payload: dict) -> list[dict]:
    return [{"key": k, "value": json.dumps(_jsonable(v)) if isinstance(v, (list, dict)) else v}
            for k, v in payload.items()]


class Output:
    def __init__(self, cfg: RunConfig, stdout=None):
        self.cfg = cfg
        self.stdout = stdout or sys.stdout
        self.dir = cfg.out or os.environ.get(OUTPUT_ENV)

    def emit(self, name: str, payload: dict, rows: Optional[list] = None,
             csv_text: Optional[str] = None, svgs: Optional[dict] = None) -> None:
        payload = _jsonable(payload)
        if self.cfg.format == "csv":
            text = csv_text if csv_text is not None else _to_csv(rows if rows else _flat(payload))
        else:
            text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
        if not self.cfg.quiet:
            self.stdout.write(text)
        if not self.dir:
            return
        os.makedirs(self.dir, exist_ok=True)
        ext = "csv" if self.cfg.format == "csv" else "json"
        with open(os.path.join(self.dir, f"{name}.{ext}"), "w", newline="") as fh:
            fh.write(text)
        if self.cfg.format == "csv":
            with open(os.path.join(self.dir, f"{name}.json"), "w") as fh:
                fh.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        for fname, svg in (svgs or {}).items():
            with open(os.path.join(self.dir, fname), "w") as fh:
                fh.write(svg)
        meta = {"created": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
                "version": __version__, "config": _jsonable(self.cfg.to_dict())}
        with open(os.path.join(self.dir, f"{name}.meta.json"), "w") as fh:
            fh.write(json.dumps(meta, indent=2, sort_keys=True) + "\n")


# ----------------------------------------------------------------------------
# subcommands


def cmd_coeffs(cfg: RunConfig, out: Output) -> int:
    from .series import compute_coefficients

    eq = cfg.equation()
    N = 10 if cfg.N is None else cfg.N
    table = compute_coefficients(cfg.m, eq, N, cfg.backend)
    d = table.to_dict()
    rows = [{"n": n, "re_a": a[0], "im_a": a[1], "re_A": A[0], "im_A": A[1]}
            for n, (a, A) in enumerate(zip(d["a"], d["A"]))]
    out.emit("coeffs", d, rows)
    return 0


def cmd_residual(cfg: RunConfig, out: Output) -> int:
    from .series import residual_order

    eq = cfg.equation()
    N = 20 if cfg.N is None else cfg.N
    r = residual_order(cfg.m, eq, N)
    ok = r >= N
    out.emit("residual", {"branch": make_branch(eq, cfg.m).label, "N": N,
                          "residual_order": "inf" if r == math.inf else r, "ok": ok,
                          "params": eq.describe()})
    return 0 if ok else 1


def cmd_eigs(cfg: RunConfig, out: Output) -> int:
    from .dynamics import wasow_check

    rows = []
    for fam in Family:
        params = dict(DEFAULT_PARAMS[fam])
        if cfg.params and Family.parse(cfg.family) is fam:
            params = dict(cfg.params)
        eq = RunConfig("eigs", family=fam.value, params=params).equation()
        for m in BRANCH_RANGE[fam]:
            rep = wasow_check(make_branch(eq, m), eq)
            ev = rep.get("eigenvalues")
            rows.append({"branch": rep["branch"], "status": rep["status"],
                         "eigenvalues": ev, "closed_form": rep.get("closed_form"),
                         "max_error": rep.get("max_error"),
                         "residual_order": rep.get("residual_order")})
    failed = [r for r in rows if r["status"] == "fail"]
    out.emit("eigs", {"branches": rows, "all_pass": not failed}, rows)
    return 1 if failed else 0


def _parse_path(spec: str):
    from .integrate import concat, make_arc, make_line, make_ray

    parts = []
    for item in spec.split(";"):
        kind, _, rest = item.strip().partition(":")
        nums = [float(v) for v in rest.split(",")] if kind != "line" else None
        if kind == "ray" and len(nums) == 3:
            parts.append(make_ray(*nums))
        elif kind == "arc" and len(nums) == 3:
            parts.append(make_arc(*nums))
        elif kind == "line":
            z = [complex(v.replace("i", "j")) for v in rest.split(",")]
            parts.append(make_line(*z[:2]))
        else:
            raise UsageError(f"bad path element {item!r}; use ray:theta,r0,r1 or "
                             "arc:r,theta0,theta1 or line:z0,z1")
    return concat(*parts)


def cmd_integrate(cfg: RunConfig, out: Output) -> int:
    from .experiments import _seed, seed_table
    from .integrate import integrate

    eq = cfg.equation()
    opts = cfg.options
    path = _parse_path(opts["path"])
    if opts.get("u0") is not None:
        u0 = complex(opts["u0"].replace("i", "j"))
        U0 = complex((opts.get("U0") or "0").replace("i", "j"))
    else:
        table = seed_table(eq, cfg.m, order=60, prec=128)
        start = Polar(abs(path.start), path.start_arg)
        u0, U0, _, _ = _seed(table, start, cfg.N, at=path.start)
    tr = integrate(eq, path, complex(u0), complex(U0), tol=cfg.tol or 1e-10,
                   pursue=opts.get("pursue"))
    out.emit("integrate", tr.summary(), csv_text=tr.to_csv())
    return 0


def _patch_svg(patch, dev_by_ray) -> str:
    series = []
    for theta, (rs, devs) in dev_by_ray.items():
        series.append((f"arg {theta:.2f}", rs, [math.log10(max(d, 1e-300)) for d in devs], "line"))
    return line_chart(series, "deviation from the series on the patch grid", "|x|",
                      "log10 relative deviation")


def cmd_tronquee(cfg: RunConfig, out: Output) -> int:
    from .experiments import (GridSpec, build_tronquee, seed_table, validate_asymptotics)
    from .series import evaluate, optimal_truncation_index

    eq = cfg.equation()
    opts = cfg.options
    br = make_branch(eq, cfg.m)
    sec = sector(eq, cfg.m, cfg.k, cfg.kind)
    table = seed_table(eq, br, order=120 if opts.get("validate") else 80)
    grid = GridSpec(n_rays=opts.get("rays", 9), n_radii=opts.get("radii", 12))
    patch = build_tronquee(eq, br, sec, opts.get("R0"), cfg.N, grid, cfg.tol or 1e-10,
                           opts.get("engine", "hp"), table)
    dev_by_ray, worst = {}, 0.0
    for g in patch.grid:
        if g.u is None:
            continue
        p = Polar(g.r, g.theta)
        n = optimal_truncation_index(table, p) or table.N
        s, _ = evaluate(table, p.z, n, sheet=p.theta)
        d = abs(g.u - complex(s)) / max(abs(complex(s)), 1e-300)
        worst = max(worst, d)
        rs, ds = dev_by_ray.setdefault(g.theta, ([], []))
        rs.append(g.r)
        ds.append(d)
    payload = patch.to_dict()
    payload["max_relative_series_deviation"] = worst
    svgs = {"tronquee_patch.svg": _patch_svg(patch, dev_by_ray)}
    ok = patch.pole_free
    if opts.get("validate"):
        radii = list(np.geomspace(15, 40, 7))
        fr = validate_asymptotics(patch, table, radii, opts.get("ncmp", 5))
        payload["validation"] = fr.to_dict()
        lr = [math.log(r) for r in fr.radii]
        fit = [fr.log_errors[0] + fr.slope * (x - lr[0]) for x in lr]
        svgs["tronquee_fit.svg"] = line_chart(
            [("log error", lr, fr.log_errors, "points"), (f"fit slope {fr.slope:.3f}", lr, fit, "line")],
            f"error slope, predicted {fr.predicted_slope:.3f}", "log |x|", "log error")
        ok = ok and fr.passed()
    out.emit("tronquee", payload, [g.to_dict() for g in patch.grid], svgs=svgs)
    return 0 if ok else 1


def cmd_perturb(cfg: RunConfig, out: Output) -> int:
    from .experiments import PerturbationEscaped, perturbation_decay

    eq = cfg.equation()
    opts = cfg.options
    window = None
    if opts.get("r_from") is not None and opts.get("r_to") is not None:
        window = (opts["r_from"], opts["r_to"])
    try:
        rep = perturbation_decay(eq, cfg.m, opts.get("theta"), opts.get("eps"), window,
                                 opts.get("mode", "decaying"),
                                 expect_growth=opts.get("expect_growth", False))
    except PerturbationEscaped as exc:
        out.emit("perturb", {"escaped": True, "message": str(exc)})
        return 1
    svg = line_chart([("log|du|", rep.radii, rep.log_du, "points"),
                      ("fit", rep.radii, rep.log_du_fit, "line")],
                     f"perturbation, rate ratio {rep.kappa:.4f}", "|x|", "log |du|")
    rows = [{"r": r, "log_du": l, "predicted_rate": p, "measured_rate": q}
            for r, l, p, q in zip(rep.radii, rep.log_du, rep.predicted_rate, rep.measured_rate)]
    out.emit("perturb", rep.to_dict(), rows, svgs={"perturb.svg": svg})
    return 0 if rep.relative_deviation <= opts.get("rtol", 0.05) and not rep.escaped else 1


def cmd_overlap(cfg: RunConfig, out: Output) -> int:
    from .experiments import overlap_agreement

    opts = cfg.options
    rep = overlap_agreement(cfg.equation(), cfg.m, cfg.k, 4 if cfg.N is None else cfg.N,
                            opts.get("R_probe", 20.0), probe_theta=opts.get("probe_theta"),
                            tol=cfg.tol or 1e-13)
    payload = rep.to_dict()
    payload["passed"] = rep.passed()
    out.emit("overlap", payload)
    return 0 if rep.passed() else 1


def cmd_sweep3ii(cfg: RunConfig, out: Output) -> int:
    from .experiments import tritronquee_sweep_p3ii

    opts = cfg.options
    cfg.family = "p3ii"
    if not cfg.params:
        cfg.params = dict(DEFAULT_PARAMS[Family.P3ii])
    rep = tritronquee_sweep_p3ii(cfg.equation(), cfg.m, opts.get("cut", -math.pi),
                                 opts.get("R", 30.0), 6 if cfg.N is None else cfg.N,
                                 opts.get("margin", 0.1))
    payload = rep.to_dict()
    payload["passed"] = rep.passed()
    rows = [{"checkpoint_arg": a, "relative_deviation": d}
            for a, d in zip(rep.checkpoints, rep.deviations)]
    svg = line_chart([("deviation", rep.checkpoints[:len(rep.deviations)],
                       [math.log10(max(d, 1e-300)) for d in rep.deviations], "line")],
                     "arc sweep against the series", "tracked arg x", "log10 relative deviation")
    out.emit("sweep3ii", payload, rows, svgs={"sweep3ii.svg": svg})
    return 0 if rep.passed() else 1


def cmd_scan(cfg: RunConfig, out: Output) -> int:
    from .experiments import ScanRegion, pole_scan

    opts = cfg.options
    region = ScanRegion(opts.get("R0", 15.0), opts.get("theta_lo", -0.6),
                        opts.get("theta_hi", 0.6), opts.get("rays", 7),
                        opts.get("r_inner", 6.0), opts.get("anchor", 0.0))
    det = complex(str(opts.get("detuning", "0.5")).replace("i", "j"))
    field_ = pole_scan(cfg.equation(), cfg.m, det, region, tol=cfg.tol or 1e-11)
    svg = pole_map([p.event.x_pole_estimate for p in field_.poles], field_.paths,
                   f"poles of the seed detuned by {det}")
    rows = [p.to_dict() for p in field_.poles]
    out.emit("scan", field_.to_dict(), rows, svgs={"scan.svg": svg})
    return 0


def cmd_selftest(cfg: RunConfig, out: Output) -> int:
    from .acceptance import run_check

    numbers = cfg.options.get("only") or list(range(1, 11))
    results = []
    for n in numbers:
        res = run_check(n)
        results.append(res)
        if not cfg.quiet:
            print(res.line(), file=sys.stderr)
    payload = {"results": [r.to_dict() for r in results],
               "passed": sum(r.passed for r in results), "total": len(results)}
    # timings differ run to run; keep them out of the report body
    for r in payload["results"]:
        r.pop("seconds")
    out.emit("selftest", payload, [{"criterion": r.number, "title": r.title,
                                    "passed": r.passed} for r in results])
    return 0 if all(r.passed for r in results) else 1


COMMANDS = {
    "coeffs": cmd_coeffs, "residual": cmd_residual, "eigs": cmd_eigs,
    "integrate": cmd_integrate, "tronquee": cmd_tronquee, "perturb": cmd_perturb,
    "overlap": cmd_overlap, "sweep3ii": cmd_sweep3ii, "scan": cmd_scan,
    "selftest": cmd_selftest,
}


# ----------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _common() -> argparse.ArgumentParser:
    p = _Parser(add_help=False)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--quiet", action="store_true")
    p.add_argument("--out", help=f"output directory (default ${OUTPUT_ENV})")
    p.add_argument("--family", default="p3i", choices=("p3i", "p3ii", "p4"))
    p.add_argument("--m", "--case", dest="m", type=int, default=None,
                   help="branch index (P4: case 1..4)")
    p.add_argument("--alpha")
    p.add_argument("--beta")
    p.add_argument("--k0", help="kappa_0 (P4)")
    p.add_argument("--kinf", help="kappa_infinity (P4)")
    p.add_argument("--N", type=int)
    p.add_argument("--backend", choices=("exact", "mp", "double"))
    p.add_argument("--tol", type=float)
    p.add_argument("--k", type=int, default=0, help="sector index")
    p.add_argument("--kind", default="S", choices=("S", "Omega"))
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tronquee", description="Tronquee solutions of P3 and P4.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    common = _common()
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name == "integrate":
            sp.add_argument("--path", required=True,
                            help="segments joined by ';', e.g. 'arc:15,0,0.5;ray:0.5,15,6'")
            sp.add_argument("--u0")
            sp.add_argument("--U0")
            sp.add_argument("--pursue", type=float)
        if name == "tronquee":
            sp.add_argument("--R0", type=float)
            sp.add_argument("--rays", type=int, default=9)
            sp.add_argument("--radii", type=int, default=12)
            sp.add_argument("--engine", choices=("hp", "dp"), default="hp")
            sp.add_argument("--validate", action="store_true")
            sp.add_argument("--ncmp", type=int, default=5)
        if name == "perturb":
            sp.add_argument("--theta", type=float)
            sp.add_argument("--eps", type=float)
            sp.add_argument("--r-from", dest="r_from", type=float)
            sp.add_argument("--r-to", dest="r_to", type=float)
            sp.add_argument("--mode", choices=("decaying", "growing"), default="decaying")
            sp.add_argument("--expect-growth", dest="expect_growth", action="store_true")
            sp.add_argument("--rtol", type=float, default=0.05)
        if name == "overlap":
            sp.add_argument("--R-probe", dest="R_probe", type=float, default=20.0)
            sp.add_argument("--probe-theta", dest="probe_theta", type=float)
        if name == "sweep3ii":
            sp.add_argument("--cut", type=float, default=-math.pi)
            sp.add_argument("--R", type=float, default=30.0)
            sp.add_argument("--margin", type=float, default=0.1)
        if name == "scan":
            sp.add_argument("--detuning", default="0.5")
            sp.add_argument("--R0", type=float, default=15.0)
            sp.add_argument("--theta-lo", dest="theta_lo", type=float, default=-0.6)
            sp.add_argument("--theta-hi", dest="theta_hi", type=float, default=0.6)
            sp.add_argument("--rays", type=int, default=7)
            sp.add_argument("--r-inner", dest="r_inner", type=float, default=6.0)
            sp.add_argument("--anchor", type=float, default=0.0)
        if name == "selftest":
            sp.add_argument("--only", type=int, nargs="+", choices=range(1, 11))
    return parser


_BASE = {"command", "format", "quiet", "out", "family", "m", "alpha", "beta", "k0", "kinf",
         "N", "backend", "tol", "k", "kind"}


_NEG_VALUE = re.compile(r"^-[\d.]")
_VALUE_FLAGS = {"--alpha", "--beta", "--k0", "--kinf", "--detuning"}


def _glue_negative_values(argv) -> list:
    """Let ``--kinf -2/7`` through; argparse only accepts plain negative numbers."""
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in _VALUE_FLAGS and i + 1 < len(argv) and _NEG_VALUE.match(argv[i + 1]):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def parse_config(argv) -> RunConfig:
    ns = vars(build_parser().parse_args(_glue_negative_values(list(argv))))
    fam = Family.parse(ns["family"])
    params = {n: ns[n] for n in PARAM_NAMES if ns.get(n) is not None}
    if not params and ns["command"] not in ("eigs", "selftest", "sweep3ii"):
        params = dict(DEFAULT_PARAMS[fam])
    m = ns["m"] if ns["m"] is not None else min(BRANCH_RANGE[fam])
    opts = {k: v for k, v in ns.items() if k not in _BASE}
    return RunConfig(ns["command"], fam.value, m, params, ns["N"], ns["backend"], ns["tol"],
                     ns["k"], ns["kind"], ns["out"], ns["format"], ns["quiet"], opts)


def run(argv=None, stdout=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg = parse_config(argv)
    except UsageError as exc:
        print(f"tronquee: error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    out = Output(cfg, stdout)
    try:
        return COMMANDS[cfg.command](cfg, out)
    except UsageError as exc:
        print(f"tronquee: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError) as exc:
        # bad parameters, branch or sector indices, exact-backend requests, ...
        print(f"tronquee: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
