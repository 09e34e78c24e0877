"""Command-line front end.

Every subcommand writes one CSV or JSON table. When ``--output`` is given a
run manifest is written next to it as ``<output>.manifest.json``.

Exit status: 0 when every bound check passes, 2 when a check fails,
1 on usage or runtime errors.

Set specs
---------
``halfspace:u=1,0;b=0``  ``{<u, x> <= b}``, ``u`` rescaled to unit length
``box:a=0.5``            ``prod (-inf, a_i]``; a scalar is repeated ``n`` times
``ball:c=0;R=1``         Euclidean ball; a scalar center is repeated
``maxthr:K=1``           ``{max x_i > K}``
``sumthr:K=0``           ``{sum x_i >= K}``
``comp:base=<spec>``     complement
``rot:seed=3;base=<spec>`` image under a Haar rotation
``empty``

Measure specs: ``gaussian``, ``gaussian:mean=0;var=1``, ``boltzmann:rho=1.5``,
``uniform``.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .bounds import (
    DEFAULT_R_SCHEDULE,
    boundary_estimate,
    box_exact,
    check_kkl,
    check_lowmax_sum,
    check_talagrand_sum,
    check_transitive_iso,
    iso_suite,
    measure_t,
    rho_exponent,
)
from .influence import influence_profile
from .measures import Boltzmann, Gaussian, MCConfig, Measure1D, ProductSpace, Uniform01
from .reports import BoundReport, emit, load_baselines
from .rotation import haar_sample, rotate_set, rotation_scan
from .russo import max_test_power, measure_curve, russo_check, width_check
from .sets import (
    BoxLower,
    CapabilityError,
    Complement,
    EmptySet,
    FiberResolutionError,
    HalfSpace,
    L2Ball,
    MaxThreshold,
    SetDescriptor,
    SumThreshold,
)

REPORT_COLUMNS = ["name", "lhs", "rhs_at_c1", "implied_constant", "baseline_constant",
                  "kind", "pass", "n", "rho", "t", "seed"]


class UsageError(Exception):
    """Bad flags or specs; exit status 1."""


class SpecError(UsageError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------------------
# spec mini-language


def _params(body: str) -> dict[str, str]:
    out: dict[str, str] = {}
    while body:
        if body.startswith("base="):
            out["base"] = body[5:]
            break
        item, _, body = body.partition(";")
        key, eq, value = item.partition("=")
        if not eq or not key.strip():
            raise SpecError(f"malformed parameter {item!r}")
        out[key.strip()] = value.strip()
    return out


def _floats(text: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.split(",")], dtype=float)
    except ValueError:
        raise SpecError(f"expected comma-separated numbers, got {text!r}") from None


def _vector(text: str, n: int | None, what: str) -> np.ndarray:
    v = _floats(text)
    if v.size == 1 and n is not None:
        return np.full(n, v[0])
    if n is not None and v.size != n:
        raise SpecError(f"{what} has {v.size} entries but n = {n}")
    return v


def _need(p: dict[str, str], kind: str, *keys: str) -> None:
    missing = [k for k in keys if k not in p]
    if missing:
        raise SpecError(f"set spec {kind!r} is missing {', '.join(missing)}")


def parse_set(spec: str, n: int | None) -> tuple[SetDescriptor, int | None]:
    """Parse a set spec; returns the descriptor and the dimension it implies."""
    kind, _, body = spec.strip().partition(":")
    p = _params(body)
    try:
        if kind == "halfspace":
            _need(p, kind, "u")
            u = _vector(p["u"], n, "u")
            return HalfSpace.from_normal(u, float(p.get("b", 0))), u.size
        if kind == "box":
            _need(p, kind, "a")
            a = _vector(p["a"], n, "a")
            return BoxLower(a), a.size if n is not None or a.size > 1 else n
        if kind == "ball":
            _need(p, kind, "R")
            c = _vector(p.get("c", "0"), n, "c")
            return L2Ball(c, float(p["R"])), c.size if n is not None or c.size > 1 else n
        if kind == "maxthr":
            _need(p, kind, "K")
            return MaxThreshold(float(p["K"])), n
        if kind == "sumthr":
            _need(p, kind, "K")
            return SumThreshold(float(p["K"])), n
        if kind == "comp":
            _need(p, kind, "base")
            base, n2 = parse_set(p["base"], n)
            return Complement(base), n2
        if kind == "rot":
            _need(p, kind, "seed", "base")
            base, n2 = parse_set(p["base"], n)
            if n2 is None:
                raise SpecError("rotation needs a known dimension; pass --n")
            return rotate_set(base, haar_sample(n2, int(p["seed"]))), n2
        if kind == "empty":
            return EmptySet(), n
    except (TypeError, ValueError) as exc:
        if isinstance(exc, SpecError):
            raise
        raise SpecError(f"bad set spec {spec!r}: {exc}") from None
    raise SpecError(f"unknown set spec {kind!r}")


def parse_measure(spec: str) -> Measure1D:
    kind, _, body = spec.strip().partition(":")
    p = _params(body)
    try:
        if kind == "gaussian":
            return Gaussian(float(p.get("mean", 0)), float(p.get("var", 1)))
        if kind == "boltzmann":
            _need(p, kind, "rho")
            return Boltzmann(float(p["rho"]))
        if kind == "uniform":
            return Uniform01()
    except ValueError as exc:
        if isinstance(exc, SpecError):
            raise
        raise SpecError(f"bad measure spec {spec!r}: {exc}") from None
    raise SpecError(f"unknown measure spec {kind!r}")


def _rho_tag(m: Measure1D):
    if isinstance(m, Gaussian):
        if m.mean != 0 or m.variance != 1:
            raise UsageError("bound checks need the standard Gaussian or a Boltzmann measure")
        return "gaussian"
    if isinstance(m, Boltzmann):
        return m.rho
    raise UsageError("bound checks need the standard Gaussian or a Boltzmann measure")


# ---------------------------------------------------------------------------
# subcommands


def _space(args) -> tuple[SetDescriptor, ProductSpace, MCConfig]:
    A, n = parse_set(args.set, args.n)
    if n is None:
        raise UsageError("the dimension is not determined by the set; pass --n")
    m = parse_measure(args.measure)
    return A, ProductSpace.iid(m, n), _cfg(args)


def _cfg(args) -> MCConfig:
    if args.seed is None:
        raise UsageError(f"--seed is required for '{args.command}'")
    try:
        return MCConfig(args.seed, args.samples, args.workers)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None


def cmd_influence(args):
    A, P, cfg = _space(args)
    prof = influence_profile(A, P, cfg)
    rows = [{"i": e.coordinate + 1, "value": e.value, "stderr": e.stderr} for e in prof.estimates]
    return rows, ["i", "value", "stderr"], []


def cmd_bounds(args):
    A, P, cfg = _space(args)
    rho = _rho_tag(P.factor(0))
    if P.n < 2:
        raise UsageError("bound checks need n >= 2")
    base = load_baselines(args.baselines)
    # the boundary identity is part of the report, so non-enlargeable sets fail early
    est = boundary_estimate(A, P, cfg, args.r_schedule)
    prof = influence_profile(A, P, cfg)
    t, _ = measure_t(A, P, cfg)
    reports: list[BoundReport] = [
        check_kkl(prof, t, P.n, rho, base, cfg.seed),
        check_talagrand_sum(prof, t, rho, base, seed=cfg.seed),
    ]
    alpha = prof.maximum
    if 0 < alpha <= 1:
        reports.append(check_lowmax_sum(prof, t, alpha, rho, base, cfg.seed))
    if A.transitive:
        reports.append(check_transitive_iso(A, P, cfg, args.r_schedule, base, t=t))
    rows = [r.row() for r in reports]
    rows.append({"name": "boundary_estimate", "lhs": est.limit, "rhs_at_c1": prof.total,
                 "n": P.n, "rho": reports[0].context["rho"], "t": t, "seed": cfg.seed,
                 "kind": "estimate"})
    return rows, REPORT_COLUMNS, reports


def cmd_russo(args):
    A, P, cfg = _space(args)
    m = P.factor(0)
    alphas = _floats(args.alphas)
    curve = measure_curve(A, m, P.n, alphas, cfg)
    rows, checks = [], []
    for row in curve.rows():
        res = russo_check(A, m, P.n, row["alpha"], cfg)
        ok = res.within()
        row.update(derivative=res.finite_difference, influence_sum=res.influence_sum,
                   combined_stderr=res.combined_stderr, **{"pass": int(ok)})
        rows.append(row)
        checks.append(ok)
    return rows, ["alpha", "value", "stderr", "derivative", "influence_sum",
                  "combined_stderr", "pass"], checks


def cmd_threshold(args):
    A, _ = parse_set(args.set, None)
    cfg = None if isinstance(A, MaxThreshold) else _cfg(args)
    base = load_baselines(args.baselines)
    m = parse_measure(args.measure)
    rows, reports = [], []
    for n in (int(v) for v in _floats(args.ns)):
        rep = width_check(A, n, args.eps, cfg, m, base)
        reports.append(rep)
        rows.append({"n": n, "width": rep.lhs, "rhs": rep.rhs_at_c1,
                     "implied_c": rep.implied_constant, "pass": int(rep.passed)})
    return rows, ["n", "width", "rhs", "implied_c", "pass"], reports


def cmd_power(args):
    try:
        rep = max_test_power(args.theta0, args.theta1, args.beta, args.n)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return [rep.row()], ["theta0", "theta1", "beta", "n", "K", "power"], []


def cmd_rotate(args):
    A, n = parse_set(args.set, args.n)
    if n is None:
        raise UsageError("the dimension is not determined by the set; pass --n")
    cfg = _cfg(args)
    P = ProductSpace.iid(Gaussian(), n)
    try:
        scan = rotation_scan(A, P, args.rotations, cfg, load_baselines(args.baselines))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return scan.rows(), ["rotation_index", "influence_sum", "stderr"], [scan.report]


def cmd_iso(args):
    cfg = _cfg(args)
    rows = iso_suite(_floats(args.rho), _floats(args.radii), args.count, cfg.seed)
    checks = [r.violations == 0 for r in rows]
    return [r.row() for r in rows], ["rho", "r", "cases", "violations", "min_margin"], checks


def cmd_box_table(args):
    rho = "gaussian" if args.rho == "gaussian" else float(args.rho)
    e = rho_exponent(rho)
    rows = []
    n = 2
    while n <= args.nmax:
        b = box_exact(n, rho)
        rows.append({"n": n, "a_n": b.a_n, "I": b.influence,
                     "normalized": n * b.influence / math.log(n) ** e})
        n *= 2
    return rows, ["n", "a_n", "I", "normalized"], []


# ---------------------------------------------------------------------------
# parser and driver


def _r_schedule(text: str) -> tuple[float, ...]:
    vals = tuple(float(v) for v in text.split(","))
    if len(vals) < 2 or any(v <= 0 for v in vals) or any(b >= a for a, b in zip(vals, vals[1:])):
        raise argparse.ArgumentTypeError("r schedule must be decreasing positive numbers")
    return vals


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="base seed (required for Monte Carlo)")
    common.add_argument("--samples", type=int, default=100_000)
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--format", choices=["csv", "json"], default="csv")
    common.add_argument("--output", default=None, help="report path (stdout if omitted)")
    common.add_argument("--baselines", default=None, help="baseline-constants file")

    parser = _Parser(prog="geoinfluence", description="Geometric influence experiments.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def mc(name, fn, help):
        p = sub.add_parser(name, parents=[common], help=help)
        p.add_argument("--set", required=True)
        p.add_argument("--measure", default="gaussian")
        p.add_argument("--n", type=int, default=None)
        p.set_defaults(fn=fn)
        return p

    mc("influence", cmd_influence, "geometric influences of a set")
    p = mc("bounds", cmd_bounds, "inequality checks against baselines")
    p.add_argument("--r-schedule", type=_r_schedule, default=DEFAULT_R_SCHEDULE)
    p = mc("russo", cmd_russo, "measure curve and derivative identity")
    p.add_argument("--alphas", default="-0.5,0,0.5")

    p = sub.add_parser("threshold", parents=[common], help="sharp-threshold widths")
    p.add_argument("--set", required=True)
    p.add_argument("--measure", default="gaussian")
    p.add_argument("--ns", default="10,100,1000,10000")
    p.add_argument("--eps", type=float, default=0.1)
    p.set_defaults(fn=cmd_threshold)

    p = sub.add_parser("power", parents=[common], help="power of the max test")
    p.add_argument("--theta0", type=float, required=True)
    p.add_argument("--theta1", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(fn=cmd_power)

    p = sub.add_parser("rotate", parents=[common], help="influence sums under Haar rotations")
    p.add_argument("--set", required=True)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--rotations", type=int, default=200)
    p.set_defaults(fn=cmd_rotate)

    p = sub.add_parser("iso", parents=[common], help="randomized 1-D isoperimetry suite")
    p.add_argument("--rho", default="1.5,2,3")
    p.add_argument("--radii", default="0.01,0.1,1")
    p.add_argument("--count", type=int, default=1000)
    p.set_defaults(fn=cmd_iso)

    p = sub.add_parser("box-table", parents=[common], help="exact tightness-family table")
    p.add_argument("--rho", default="2")
    p.add_argument("--nmax", type=int, default=4096)
    p.set_defaults(fn=cmd_box_table)
    return parser


def _checks_passed(checks) -> bool:
    return all(c.passed if isinstance(c, BoundReport) else bool(c) for c in checks)


def _config_echo(args) -> dict:
    out = {}
    for k, v in sorted(vars(args).items()):
        if k == "fn":
            continue
        out[k] = list(v) if isinstance(v, tuple) else v
    return out


def run(argv: Sequence[str] | None = None, stdout=None) -> int:
    """Execute one subcommand; returns the exit status."""
    stdout = sys.stdout if stdout is None else stdout
    err = sys.stderr
    start = time.perf_counter()
    try:
        args = build_parser().parse_args(argv)
        rows, columns, checks = args.fn(args)
        text = emit(rows, args.format, None, columns)
    except SpecError as exc:
        print(f"error: invalid spec: {exc}", file=err)
        return 1
    except UsageError as exc:
        print(f"error: usage: {exc}", file=err)
        return 1
    except CapabilityError as exc:
        print(f"error: unsupported capability: {exc}", file=err)
        return 1
    except FiberResolutionError as exc:
        print(f"error: fiber resolution failed: {exc}", file=err)
        return 1
    except (OSError, KeyError) as exc:
        print(f"error: {exc}", file=err)
        return 1
    except ValueError as exc:
        print(f"error: invalid input: {exc}", file=err)
        return 1
    ok = _checks_passed(checks)
    if args.output is None:
        stdout.write(text)
    else:
        try:
            out = Path(args.output)
            out.write_text(text, encoding="utf-8")
            manifest = {
                "config": _config_echo(args),
                "version": __version__,
                "wall_time_s": round(time.perf_counter() - start, 3),
                "checks": {"total": len(checks), "passed": sum(
                    (c.passed if isinstance(c, BoundReport) else bool(c)) for c in checks)},
                "all_passed": ok,
            }
            Path(str(out) + ".manifest.json").write_text(
                json.dumps(manifest, indent=1, sort_keys=True) + "\n", encoding="utf-8")
        except OSError as exc:
            print(f"error: cannot write output: {exc}", file=err)
            return 1
    if not ok:
        print("check failed: at least one bound check did not pass", file=err)
        return 2
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
