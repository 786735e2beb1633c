"""Command-line front end and JSON/CSV reports.

Subcommands::

    kahlercrit check --potential "1/2*normsq + a*sepdecay(alpha)" \\
        --params a=-1,alpha=1,R=10 --n 2 --degree 2 --ambient flat
    kahlercrit repro ale-hyperbolic --params a=-1
    kahlercrit sweep --preset ale-flat --over R --values 5,10,100

Exit codes: 0 success, 1 usage, 2 potential parse error, 3 numeric/backend.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction

from .backend import Backend, parse_rational
from .calabi import (AmbientSpace, CoefficientMatrix, ambient_series,
                     coefficient_matrix, diastasis, monomial_ordering)
from .errors import KahlerCritError, UsageError
from .potentials import (CenterSpec, ParamBinding, RadDecay, SepDecay,
                         atoms, expand_at_center,
                         parse_potential, select_backend)
from .psdcert import NO_OBSTRUCTION, OBSTRUCTED, psd_check

SCHEMA_VERSION = "1"
SWEEPABLE = ("a", "alpha", "m", "R", "degree")
ALE_POTENTIAL = "1/2*normsq + a*sepdecay(alpha)"


@dataclass
class CheckConfig:
    potential: str
    params: ParamBinding = field(default_factory=ParamBinding)
    n: int = 2
    center: CenterSpec = field(default_factory=CenterSpec.diagonal)
    degree: int = 2
    ambient: AmbientSpace = field(default_factory=AmbientSpace.flat)
    backend: str = "auto"
    tolerance: float | None = None

    def __post_init__(self):
        if self.degree < 1:
            raise UsageError("degree must be at least 1")
        if self.n < 1:
            raise UsageError("n must be at least 1")
        if not isinstance(self.params, ParamBinding):
            self.params = ParamBinding(self.params)

    def to_dict(self, resolved_backend=None) -> dict:
        return {
            "potential": self.potential,
            "params": {k: _fmt_param(v) for k, v in sorted(self.params.items())},
            "n": self.n,
            "center": str(self.center),
            "degree": self.degree,
            "ambient": str(self.ambient),
            "backend": self.backend,
            "resolved_backend": None if resolved_backend is None else str(resolved_backend),
            "tolerance": self.tolerance,
        }


def _fmt_param(v):
    return str(v) if isinstance(v, Fraction) else repr(v)


@dataclass
class Report:
    config: dict
    ordering: list = field(default_factory=list)
    matrix: list = field(default_factory=list)
    verdict: dict | None = None
    certificate: dict | None = None
    rank_lower_bound: int | None = None
    margin: str | None = None
    notes: list = field(default_factory=list)
    preset: dict | None = None
    error: dict | None = None
    schema_version: str = SCHEMA_VERSION

    @property
    def status(self):
        return None if self.verdict is None else self.verdict["status"]

    def to_dict(self) -> dict:
        out = {
            "schema_version": self.schema_version,
            "config": self.config,
            "ordering": self.ordering,
            "matrix": self.matrix,
            "verdict": self.verdict,
            "certificate": self.certificate,
            "rank_lower_bound": self.rank_lower_bound,
            "margin": self.margin,
            "notes": self.notes,
        }
        if self.preset is not None:
            out["preset"] = self.preset
        if self.error is not None:
            out["error"] = self.error
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


# -- pipeline ------------------------------------------------------------

def _notes_for(expr, config: CheckConfig) -> list:
    notes = []
    kinds = {type(a) for a in atoms(expr)}
    if SepDecay in kinds:
        notes.append("separable decay reading: |z|^(-2 alpha) expanded as "
                      "sum_i |z_i|^(-2 alpha)")
    if RadDecay in kinds:
        notes.append("radial decay reading: (sum_i |z_i|^2)^(-alpha)")
    if kinds & {SepDecay, RadDecay}:
        notes.append("ALE error terms O(|z|^(-2 alpha - 1)) modelled as zero")
        if "a" in config.params:
            notes.append(f"mass readout: a = {_fmt_param(config.params['a'])}")
            if config.ambient.kind == "flat":
                notes.append("mass sign: the flat obstruction found here occurs "
                              "exactly for a < 0; a positive-mass reading of the "
                              "same statement would flip this sign")
    return notes


def run_check(config: CheckConfig) -> Report:
    """Expand, take the diastasis, transform, build the matrix and certify it."""
    expr = parse_potential(config.potential)
    be = select_backend(expr, config.params, config.center, config.n, config.backend)
    order = 2 * config.degree
    phi = expand_at_center(expr, config.params, config.center, config.n, order, be)
    tol = 0 if be.is_exact else be.power(2, -(be.prec // 2))
    D = diastasis(phi, tol)
    S = ambient_series(D, config.ambient)
    M = coefficient_matrix(S, config.degree, config.ambient)
    verdict = psd_check(M, config.tolerance)
    fmt = be.format
    cert = None
    if verdict.certificate is not None:
        vec = verdict.certificate.vector
        cert = {
            "vector": [fmt(x) for x in vec],
            "support": [lab for lab, x in zip(M.labels, vec) if x != 0],
            "value": fmt(verdict.certificate.value),
        }
    notes = _notes_for(expr, config) + list(verdict.notes)
    if not be.is_exact:
        notes.append(f"float backend at {be.prec} bits")
    return Report(
        config=config.to_dict(be),
        ordering=M.labels,
        matrix=[[fmt(x) for x in row] for row in M.entries],
        verdict={"status": verdict.status, "degree": verdict.degree},
        certificate=cert,
        rank_lower_bound=verdict.rank_lower_bound,
        margin=fmt(verdict.margin),
        notes=notes,
    )


def matrix_from_report(report) -> CoefficientMatrix:
    """Rebuild the coefficient matrix stored in a report (dict or Report)."""
    data = report.to_dict() if isinstance(report, Report) else report
    cfg = data["config"]
    be = Backend.parse(cfg["resolved_backend"])
    n = cfg["n"]
    ordering = monomial_ordering(n, cfg["degree"])
    rows = [[be.parse_scalar(x) for x in row] for row in data["matrix"]]
    return CoefficientMatrix.from_rows(rows, be, cfg["degree"], ordering,
                                       AmbientSpace.parse(cfg["ambient"]))


# -- presets -------------------------------------------------------------

@dataclass(frozen=True)
class Preset:
    potential: str
    params: dict
    n: int
    center: CenterSpec
    ambient: AmbientSpace
    expected: object        # callable(params) -> status
    note: str | None = None


PRESETS = {
    "taubnut": Preset(
        "taubnut_slice(m)", {"m": 1}, 1, CenterSpec.origin(), AmbientSpace.flat(),
        lambda p: OBSTRUCTED if p["m"] > 0 else NO_OBSTRUCTION),
    "ale-flat": Preset(
        ALE_POTENTIAL, {"a": -1, "alpha": 1, "R": 10}, 2, CenterSpec.diagonal(),
        AmbientSpace.flat(),
        lambda p: OBSTRUCTED if p["a"] < 0 else NO_OBSTRUCTION),
    "ale-hyperbolic": Preset(
        ALE_POTENTIAL, {"a": 1, "alpha": 1, "R": 10}, 2, CenterSpec.diagonal(),
        AmbientSpace.hyperbolic(), lambda p: OBSTRUCTED),
    "ale-projective": Preset(
        ALE_POTENTIAL, {"a": 1, "alpha": 1, "R": 10}, 2, CenterSpec.diagonal(),
        AmbientSpace.projective(), lambda p: NO_OBSTRUCTION,
        note="inconclusive: the degree-2 matrix gives no obstruction, and "
             "immersion into projective space is not decided by it"),
}


def preset_config(name: str, overrides=None, degree: int = 2,
                  backend: str = "auto", tolerance=None) -> CheckConfig:
    if name not in PRESETS:
        raise UsageError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    p = PRESETS[name]
    params = ParamBinding(p.params).merged(overrides or {})
    return CheckConfig(p.potential, params, p.n, p.center, degree, p.ambient,
                       backend, tolerance)


def _attach_preset(report: Report, name: str, params) -> Report:
    p = PRESETS[name]
    expected = p.expected(params)
    report.preset = {"name": name, "expected": expected,
                     "pass": report.status == expected}
    if p.note:
        report.notes.append(p.note)
    return report


def repro_preset(name: str, overrides=None, degree: int = 2,
                 backend: str = "auto", tolerance=None) -> Report:
    """Run a named reference computation and record pass/fail against its expected verdict."""
    config = preset_config(name, overrides, degree, backend, tolerance)
    return _attach_preset(run_check(config), name, config.params)


# -- sweeps ----------------------------------------------------------------

def _error_report(config: CheckConfig, exc: Exception) -> Report:
    return Report(config=config.to_dict(),
                  error={"type": type(exc).__name__, "message": str(exc),
                         "exit_code": getattr(exc, "exit_code", 3)})


def sweep(config: CheckConfig, sweep_param: str, values, preset: str | None = None,
          jobs: int = 1) -> list:
    """One report per value, in input order.

    A failing value records its error in its own slot; the rest still run.
    """
    if sweep_param not in SWEEPABLE:
        raise UsageError(f"cannot sweep {sweep_param!r}; choose from {', '.join(SWEEPABLE)}")

    def one(value):
        try:
            if sweep_param == "degree":
                cfg = replace(config, degree=int(value))
            else:
                cfg = replace(config, params=config.params.merged({sweep_param: value}))
        except (KahlerCritError, ValueError) as exc:
            return _error_report(config, exc)
        try:
            report = run_check(cfg)
        except (KahlerCritError, ValueError, ZeroDivisionError) as exc:
            return _error_report(cfg, exc)
        if preset:
            _attach_preset(report, preset, cfg.params)
        return report

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(one, values))
    return [one(v) for v in values]


# -- output ----------------------------------------------------------------

CSV_FIELDS = ["preset", "potential", "params", "n", "degree", "ambient",
              "backend", "status", "rank_lower_bound", "margin",
              "certificate_value", "preset_pass", "error"]


def reports_to_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    w.writeheader()
    for r in reports:
        cfg = r.config
        w.writerow({
            "preset": (r.preset or {}).get("name", ""),
            "potential": cfg["potential"],
            "params": ",".join(f"{k}={v}" for k, v in cfg["params"].items()),
            "n": cfg["n"],
            "degree": cfg["degree"],
            "ambient": cfg["ambient"],
            "backend": cfg["resolved_backend"] or cfg["backend"],
            "status": r.status or "",
            "rank_lower_bound": "" if r.rank_lower_bound is None else r.rank_lower_bound,
            "margin": r.margin or "",
            "certificate_value": (r.certificate or {}).get("value", ""),
            "preset_pass": "" if r.preset is None else r.preset["pass"],
            "error": "" if r.error is None else r.error["message"],
        })
    return buf.getvalue()


# -- argument parsing --------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _read_potential(text: str) -> str:
    if text.startswith("@"):
        try:
            with open(text[1:], encoding="utf-8") as fh:
                return fh.read().strip()
        except OSError as exc:
            raise UsageError(f"cannot read potential file: {exc}") from exc
    return text


def _usage(fn, text):
    try:
        return fn(text)
    except (ValueError, KahlerCritError) as exc:
        raise UsageError(str(exc)) from exc


def _add_common(p, with_model=True):
    if with_model:
        p.add_argument("--potential", help="potential text or @file")
        p.add_argument("--n", type=int, default=2, help="number of complex variables")
        p.add_argument("--center", default="diagonal",
                       help="origin | diagonal | diagonal:<R> | c1;c2;...")
        p.add_argument("--ambient", default="flat",
                       help="flat | projective | hyperbolic | b=<value>")
    p.add_argument("--params", default="", help="name=value pairs, e.g. a=-1,alpha=1,R=10")
    p.add_argument("--degree", type=int, default=2)
    p.add_argument("--backend", default="auto", help="auto | exact | float[:bits]")
    p.add_argument("--tolerance", type=float, default=None,
                   help="relative pivot tolerance for the float backend")
    p.add_argument("--format", choices=("json", "csv"), default="json")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="kahlercrit",
                 description="Calabi-criterion obstruction checks for Kähler potentials")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    check = sub.add_parser("check", help="check one potential")
    _add_common(check)

    repro = sub.add_parser("repro", help="run a named reference computation")
    repro.add_argument("preset", choices=sorted(PRESETS))
    _add_common(repro, with_model=False)

    sw = sub.add_parser("sweep", help="repeat a check over a list of values")
    sw.add_argument("--preset", choices=sorted(PRESETS))
    sw.add_argument("--over", required=True, choices=SWEEPABLE)
    sw.add_argument("--values", required=True, help="comma-separated values")
    sw.add_argument("--jobs", type=int, default=1)
    _add_common(sw)
    return ap


def _config_from_args(args) -> CheckConfig:
    params = _usage(ParamBinding.parse, args.params)
    if args.backend != "auto":
        _usage(Backend.parse, args.backend)
    if getattr(args, "preset", None):
        return preset_config(args.preset, params, args.degree, args.backend,
                             args.tolerance)
    if not args.potential:
        raise UsageError("--potential is required unless a preset is given")
    return CheckConfig(
        potential=_read_potential(args.potential),
        params=params,
        n=args.n,
        center=_usage(CenterSpec.parse, args.center),
        degree=args.degree,
        ambient=_usage(AmbientSpace.parse, args.ambient),
        backend=args.backend,
        tolerance=args.tolerance,
    )


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command == "sweep":
            config = _config_from_args(args)
            raw = [v.strip() for v in args.values.split(",") if v.strip()]
            values = ([_usage(int, v) for v in raw] if args.over == "degree"
                      else [_usage(parse_rational, v) for v in raw])
            reports = sweep(config, args.over, values, args.preset, args.jobs)
        else:
            config = _config_from_args(args)
            report = run_check(config)
            if args.command == "repro":
                _attach_preset(report, args.preset, config.params)
            reports = [report]
        if args.format == "csv":
            sys.stdout.write(reports_to_csv(reports))
        elif args.command == "sweep":
            sys.stdout.write(json.dumps([r.to_dict() for r in reports], indent=2) + "\n")
        else:
            sys.stdout.write(reports[0].to_json() + "\n")
        return 0
    except KahlerCritError as exc:
        print(f"kahlercrit: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (ValueError, ZeroDivisionError) as exc:
        print(f"kahlercrit: error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
