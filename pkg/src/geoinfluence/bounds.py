"""Checkers for the influence inequalities.

Every checker returns a :class:`~geoinfluence.reports.BoundReport` holding the
measured side, the other side evaluated with constant 1, and a committed
baseline for the (nonconstructive) constant.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .influence import InfluenceProfile, influence_profile
from .measures import Boltzmann, Gaussian, MCConfig, Measure1D, ProductSpace, per_sample, sample, summarize
from .reports import Baselines, BoundReport, load_baselines
from .sets import (
    CapabilityError,
    EmptySet,
    IntervalUnion,
    SetDescriptor,
    fiber_measure,
    measure_mc,
)

DEFAULT_R_SCHEDULE = (1e-1, 3e-2, 1e-2, 3e-3)


def rho_exponent(rho) -> float:
    """Exponent ``1 - 1/rho``; ``"gaussian"`` means ``rho = 2``."""
    if isinstance(rho, str):
        if rho.lower() != "gaussian":
            raise ValueError(f"unknown family {rho!r}")
        return 0.5
    rho = float(rho)
    if rho < 1:
        raise ValueError("rho must be >= 1")
    return 1.0 - 1.0 / rho


def rho_label(rho) -> str:
    return "gaussian" if isinstance(rho, str) else f"{float(rho):g}"


def rho_of(P: ProductSpace):
    """Family tag of an i.i.d. product space: a Boltzmann ``rho`` or ``"gaussian"``."""
    m = P.factor(0)
    if isinstance(m, Boltzmann):
        return m.rho
    if isinstance(m, Gaussian):
        return "gaussian"
    raise ValueError(f"no rho for {m}")


def _baselines(b: Baselines | None) -> Baselines:
    return load_baselines() if b is None else b


def _values(profile) -> np.ndarray:
    if isinstance(profile, InfluenceProfile):
        return profile.values
    return np.asarray(profile, dtype=float)


# ---------------------------------------------------------------------------
# boundary under uniform enlargement


@dataclass(frozen=True)
class BoundaryEstimate:
    """Extrapolated boundary measure and the finite differences it came from.

    ``per_r`` holds ``(r, difference_quotient, stderr)`` in schedule order.
    """

    limit: float
    stderr: float
    per_r: tuple[tuple[float, float, float], ...]
    conditioning: str = "axis"


def _is_standard_gaussian(P: ProductSpace) -> bool:
    return all(
        isinstance(m, Gaussian) and m.mean == 0 and m.variance == 1
        for m in (P.factor(i) for i in range(P.n))
    )


def _supports(A: SetDescriptor, probe) -> bool:
    if isinstance(A, EmptySet):
        return True
    try:
        probe(A)
    except CapabilityError:
        return False
    return True


def _measure_fn(A: SetDescriptor, P: ProductSpace, mode: str):
    """Per-sample conditional measure of ``A`` given the draw ``X``.

    ``"diagonal"`` integrates exactly along the line through ``X`` in the
    direction ``(1, ..., 1)``; under the standard Gaussian the coordinate
    along that line is independent of the rest. ``"axis"`` integrates
    coordinate 0 exactly. ``"indicator"`` uses ``1_A(X)``.
    """
    if isinstance(A, EmptySet):
        return lambda X: np.zeros(X.shape[0])
    if mode == "diagonal":
        w = np.full(P.n, 1.0 / np.sqrt(P.n))
        g = P.factor(0)

        def fn(X):
            base = X - np.outer(X @ w, w)
            return fiber_measure(*A.line_fiber(base, w), g)

        return fn
    if mode == "axis":
        m = P.factor(0)
        return lambda X: fiber_measure(*A.axis_fiber(0, X), m)
    return lambda X: A.contains(X).astype(float)


def _conditioning(sets, P: ProductSpace, mode: str) -> str:
    n = P.n
    if mode != "auto":
        return mode
    if sets[0].monotone is not None and _is_standard_gaussian(P) and all(
        _supports(S, lambda S: S.line_fiber(np.zeros((1, n)), np.ones(n))) for S in sets
    ):
        return "diagonal"
    if all(_supports(S, lambda S: S.axis_fiber(0, np.zeros((1, n)))) for S in sets):
        return "axis"
    return "indicator"


def boundary_estimate(
    A: SetDescriptor,
    P: ProductSpace,
    cfg: MCConfig,
    r_schedule: Sequence[float] = DEFAULT_R_SCHEDULE,
    conditioning: str = "auto",
) -> BoundaryEstimate:
    """Estimate ``lim (P(A + [-r,r]^n) - P(A)) / r`` as ``r -> 0``.

    All measures share one sample batch, and each sample contributes the
    exact measure of a one-dimensional slice through it (see
    ``conditioning``), which keeps the difference quotients bounded per
    sample. The limit is the linear-in-``r`` extrapolation through the two
    smallest radii.

    Parameters
    ----------
    conditioning : {"auto", "diagonal", "axis", "indicator"}
        Slice used per sample. ``"auto"`` takes the diagonal line for
        monotone sets under the standard Gaussian product when line fibers
        exist (the diagonal crosses a monotone boundary transversally),
        else coordinate 0 when axis fibers exist, else plain indicators.

    Raises
    ------
    CapabilityError
        If ``A`` cannot be enlarged.
    """
    rs = [float(r) for r in r_schedule]
    if len(rs) < 2 or any(r <= 0 for r in rs):
        raise ValueError("r_schedule needs at least two positive radii")
    if any(b >= a for a, b in zip(rs, rs[1:])):
        raise ValueError("r_schedule must be strictly decreasing")
    enlarged = [A.enlarge(r) for r in rs]
    mode = _conditioning([A, *enlarged], P, conditioning)
    if mode == "diagonal" and not _is_standard_gaussian(P):
        raise ValueError("diagonal conditioning needs the standard Gaussian product")
    base = _measure_fn(A, P, mode)
    fns = [_measure_fn(B, P, mode) for B in enlarged]

    def fn(X):
        m0 = base(X)
        return np.stack([(f(X) - m0) / r for f, r in zip(fns, rs)], axis=1)

    D = per_sample(P, cfg, fn)
    means, ses = summarize(D)
    r1, r2 = rs[-1], rs[-2]
    extrap = (r2 * D[:, -1] - r1 * D[:, -2]) / (r2 - r1)
    limit, se = summarize(extrap)
    per_r = tuple((r, float(v), float(s)) for r, v, s in zip(rs, means, ses))
    return BoundaryEstimate(limit, se, per_r, mode)


# ---------------------------------------------------------------------------
# influence inequalities


def check_kkl(profile, t: float, n: int, rho="gaussian", baselines: Baselines | None = None,
              seed: int | None = None) -> BoundReport:
    """Maximal influence against ``t(1-t) (log n)^(1-1/rho) / n``."""
    if n < 2:
        raise ValueError("n must be >= 2")
    vals = _values(profile)
    e = rho_exponent(rho)
    rhs = t * (1 - t) * math.log(n) ** e / n
    c = _baselines(baselines).constant("kkl", f"rho={rho_label(rho)}")
    ctx = {"n": n, "rho": rho_label(rho), "t": t, "seed": seed}
    return BoundReport("kkl", float(vals.max()), rhs, c, ctx)


def check_talagrand_sum(profile, t: float, rho="gaussian", baselines: Baselines | None = None,
                        n: int | None = None, seed: int | None = None) -> BoundReport:
    """``sum I_i / (-log I_i)^(1-1/rho)`` against ``t(1-t)``.

    Influences at or above 1 use 1 in place of ``-log I``; zero influences
    contribute nothing.
    """
    vals = _values(profile)
    e = rho_exponent(rho)
    pos = vals[vals > 0]
    logs = np.where(pos < 1, -np.log(np.minimum(pos, 1.0)), 1.0)
    lhs = float(np.sum(pos / logs**e))
    c = _baselines(baselines).constant("talagrand", f"rho={rho_label(rho)}")
    ctx = {"n": n if n is not None else vals.size, "rho": rho_label(rho), "t": t, "seed": seed}
    return BoundReport("talagrand", lhs, t * (1 - t), c, ctx)


def check_lowmax_sum(profile, t: float, alpha: float, rho="gaussian",
                     baselines: Baselines | None = None, seed: int | None = None) -> BoundReport:
    """``sum I_i`` against ``t(1-t) (-log alpha)^(1-1/rho)`` when ``max I_i <= alpha``.

    A violated precondition is recorded in the context as
    ``precondition=0`` rather than raised.
    """
    if not 0 < alpha <= 1:
        raise ValueError("alpha must lie in (0, 1]")
    vals = _values(profile)
    e = rho_exponent(rho)
    rhs = t * (1 - t) * (-math.log(alpha)) ** e
    c = _baselines(baselines).constant("lowmax", f"rho={rho_label(rho)}")
    ok = bool(vals.max() <= alpha * (1 + 1e-12))
    ctx = {"n": vals.size, "rho": rho_label(rho), "t": t, "alpha": alpha,
           "precondition": int(ok), "seed": seed}
    return BoundReport("lowmax", float(vals.sum()), rhs, c, ctx)


# ---------------------------------------------------------------------------
# junta approximation


@dataclass(frozen=True, eq=False)
class JuntaSet(SetDescriptor):
    """Cylinder ``{x : P(A | x_S) > 1/2}`` with the conditional measure
    estimated on a fixed inner sample ``Z`` for the free coordinates."""

    base: SetDescriptor
    coords: tuple[int, ...]
    inner: np.ndarray
    block: int = 32

    def conditional(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        Z = self.inner
        if not self.coords:
            p = float(self.base.contains(Z).mean())
            return np.full(X.shape[0], p)
        S = list(self.coords)
        out = np.empty(X.shape[0])
        for s in range(0, X.shape[0], self.block):
            xb = X[s:s + self.block]
            Y = np.broadcast_to(Z, (xb.shape[0],) + Z.shape).copy()
            Y[:, :, S] = xb[:, None, S]
            out[s:s + self.block] = self.base.contains(Y.reshape(-1, Z.shape[1])).reshape(
                xb.shape[0], -1).mean(axis=1)
        return out

    def contains(self, X):
        return self.conditional(X) > 0.5


@dataclass(frozen=True)
class JuntaResult:
    k: int
    B: JuntaSet
    symmdiff: float
    symmdiff_stderr: float
    s: float
    success: bool
    history: tuple[tuple[int, float], ...] = field(default=())


def junta_s(values, rho="gaussian") -> float:
    """``sum I_i (-log I_i)^(1/rho)`` over the positive influences below 1."""
    vals = _values(values)
    e = 1.0 - rho_exponent(rho)
    pos = vals[(vals > 0) & (vals < 1)]
    return float(np.sum(pos * (-np.log(pos)) ** e))


def junta_approx(A: SetDescriptor, P: ProductSpace, eps: float, cfg: MCConfig, inner: int = 1000,
                 profile: InfluenceProfile | None = None, rho=None) -> JuntaResult:
    """Greedy junta approximation of a monotone set.

    Coordinates are added in decreasing order of influence until the
    measured ``P(A symmetric-difference B) <= eps``. Reaching ``k = n``
    without success is reported through ``success=False``.
    """
    if A.monotone is None:
        raise ValueError("junta_approx needs a monotone set")
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    if profile is None:
        profile = influence_profile(A, P, cfg)
    if rho is None:
        rho = rho_of(P)
    order = np.argsort(-profile.values, kind="stable")
    X = sample(P, cfg.seed, cfg.samples)
    Z = sample(P, (int(cfg.seed) ^ 0x6A756E7461) % 2**64, inner)
    a = A.contains(X)
    history = []
    best = None
    for k in range(P.n + 1):
        B = JuntaSet(A, tuple(int(i) for i in order[:k]), Z)
        diff = (B.contains(X) != a).astype(float)
        d, se = summarize(diff)
        history.append((k, d))
        best = (k, B, d, se)
        if d <= eps:
            break
    k, B, d, se = best
    return JuntaResult(k, B, d, se, junta_s(profile, rho), d <= eps, tuple(history))


def check_junta(result: JuntaResult, eps: float, baselines: Baselines | None = None) -> BoundReport:
    """``log k`` against ``s / eps`` (upper bound, constant ``c2``)."""
    c = _baselines(baselines).constant("junta.c2")
    lhs = math.log(result.k) if result.k >= 1 else 0.0
    ctx = {"k": result.k, "eps": eps, "symmdiff": result.symmdiff, "success": int(result.success)}
    return BoundReport("junta", lhs, result.s / eps, c, ctx, kind="upper")


# ---------------------------------------------------------------------------
# isoperimetry


def check_1d_iso(S: IntervalUnion, m: Measure1D, r: float, tol: float = 1e-10) -> BoundReport:
    """Exact one-dimensional enlargement against the extremal ray.

    ``lhs = m(S + [-r, r])`` and ``rhs = Lambda(Lambda^{-1}(t) + r)`` with
    ``t = m(S)``; the report passes when ``lhs >= rhs - tol``.
    """
    if not r > 0:
        raise ValueError("r must be positive")
    t = S.measure(m)
    lhs = S.dilate(r).measure(m)
    if t <= 0:
        rhs = 0.0
    elif t >= 1:
        rhs = 1.0
    else:
        rhs = float(m.cdf(m.quantile(t) + r))
        if not m.symmetric:
            rhs = min(rhs, float(m.sf(m.quantile(1.0 - t) - r)))
    return BoundReport("iso_1d", float(lhs), rhs, 1.0, {"t": t, "r": r}, tolerance=tol)


def check_transitive_iso(A: SetDescriptor, P: ProductSpace, cfg: MCConfig,
                         r_schedule: Sequence[float] = DEFAULT_R_SCHEDULE,
                         baselines: Baselines | None = None, t: float | None = None) -> BoundReport:
    """Boundary measure of a transitive set against ``t(1-t)(log n)^(1-1/rho)``.

    When ``t(1-t) <= 1/n`` the context also carries ``iso_ratio``, the
    boundary estimate divided by the one-dimensional profile at ``t``.
    """
    if not A.transitive:
        raise ValueError("check_transitive_iso needs a transitive set")
    if P.n < 2:
        raise ValueError("n must be >= 2")
    rho = rho_of(P)
    est = boundary_estimate(A, P, cfg, r_schedule)
    if t is None:
        t, _ = measure_t(A, P, cfg)
    rhs = t * (1 - t) * math.log(P.n) ** rho_exponent(rho)
    c = _baselines(baselines).constant("transitive_iso", f"rho={rho_label(rho)}")
    ctx = {"n": P.n, "rho": rho_label(rho), "t": t, "seed": cfg.seed, "stderr": est.stderr}
    if 0 < t < 1 and t * (1 - t) <= 1.0 / P.n:
        ctx["iso_ratio"] = est.limit / float(P.factor(0).iso_profile(t))
    return BoundReport("transitive_iso", est.limit, rhs, c, ctx)


def measure_t(A: SetDescriptor, P: ProductSpace, cfg: MCConfig) -> tuple[float, float]:
    """``P(A)`` with its standard error, integrating coordinate 0 exactly when possible."""
    return measure_mc(A, P, cfg, axis=0 if _has_axis(A, P) else None)


def _has_axis(A: SetDescriptor, P: ProductSpace) -> bool:
    try:
        A.axis_fiber(0, np.zeros((1, P.n)))
    except CapabilityError:
        return False
    return True


# ---------------------------------------------------------------------------
# tightness family


@dataclass(frozen=True)
class BoxExact:
    a_n: float
    influence: float
    total: float


def box_measure(rho) -> Measure1D:
    return Gaussian() if isinstance(rho, str) else Boltzmann(float(rho))


def box_exact(n: int, rho=2.0) -> BoxExact:
    """Threshold, per-coordinate influence and influence sum of
    ``(-inf, a_n]^n`` with ``Phi(a_n)^n = 1/2``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    m = box_measure(rho)
    a = float(m.quantile(2.0 ** (-1.0 / n)))
    inf = 0.5 ** ((n - 1) / n) * float(m.density(a))
    return BoxExact(a, inf, n * inf)


# ---------------------------------------------------------------------------
# randomized one-dimensional isoperimetry suite


def random_interval_union(rng: np.random.Generator, max_components: int = 4,
                          scale: float = 2.0) -> IntervalUnion:
    """Random finite union of 1 to ``max_components`` intervals.

    Endpoints are sorted normal draws with standard deviation ``scale``; the
    outermost ends become infinite with probability 1/4 each.
    """
    k = int(rng.integers(1, max_components + 1))
    pts = np.sort(rng.normal(0.0, scale, 2 * k))
    if np.any(np.diff(pts) <= 0):
        pts = np.unique(pts)
        pts = pts[: 2 * (pts.size // 2)]
    if rng.random() < 0.25:
        pts[0] = -math.inf
    if rng.random() < 0.25:
        pts[-1] = math.inf
    return IntervalUnion(tuple(zip(pts[::2], pts[1::2])))


@dataclass(frozen=True)
class IsoSuiteRow:
    rho: float
    r: float
    cases: int
    violations: int
    min_margin: float

    def row(self) -> dict:
        return {"rho": self.rho, "r": self.r, "cases": self.cases,
                "violations": self.violations, "min_margin": self.min_margin}


def iso_suite(rhos: Sequence[float] = (1.5, 2.0, 3.0), radii: Sequence[float] = (0.01, 0.1, 1.0),
              count: int = 1000, seed: int = 0, tol: float = 1e-10) -> list[IsoSuiteRow]:
    """Run :func:`check_1d_iso` over ``count`` random interval unions per cell.

    ``min_margin`` is the smallest ``lhs - rhs`` observed in the cell. The
    same unions are reused across cells.
    """
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), 0x49534F])))
    unions = [random_interval_union(rng) for _ in range(count)]
    out = []
    for rho in rhos:
        m = Boltzmann(float(rho))
        for r in radii:
            reps = [check_1d_iso(S, m, r, tol) for S in unions]
            margins = [rep.lhs - rep.rhs_at_c1 for rep in reps]
            out.append(IsoSuiteRow(float(rho), float(r), count,
                                   sum(not rep.passed for rep in reps), float(min(margins))))
    return out
