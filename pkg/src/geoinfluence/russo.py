"""Location families, the derivative identity, threshold locations and the max test."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import optimize, special

from .bounds import _baselines
from .influence import influence_samples
from .measures import Gaussian, MCConfig, Measure1D, ProductSpace, per_sample, sample, summarize, translate
from .reports import Baselines, BoundReport
from .sets import CapabilityError, HalfSpace, MaxThreshold, SetDescriptor, fiber_measure

FD_STEPS = (1e-2, 1e-3)
ALPHA_WINDOW = (-20.0, 20.0)


@dataclass(frozen=True)
class ThresholdCurve:
    """Estimates of ``nu_alpha^n(A)`` along a sorted grid of shifts."""

    alphas: np.ndarray
    values: np.ndarray
    stderrs: np.ndarray
    n: int
    seed: int

    def rows(self) -> list[dict]:
        return [
            {"alpha": float(a), "value": float(v), "stderr": float(s)}
            for a, v, s in zip(self.alphas, self.values, self.stderrs)
        ]


@dataclass(frozen=True)
class PowerReport:
    theta0: float
    theta1: float
    beta: float
    n: int
    K: float
    power: float

    def row(self) -> dict:
        return {"theta0": self.theta0, "theta1": self.theta1, "beta": self.beta,
                "n": self.n, "K": self.K, "power": self.power}


@dataclass(frozen=True)
class RussoResult:
    finite_difference: float
    fd_stderr: float
    influence_sum: float
    influence_stderr: float

    @property
    def discrepancy(self) -> float:
        return abs(self.finite_difference - self.influence_sum)

    @property
    def combined_stderr(self) -> float:
        return math.hypot(self.fd_stderr, self.influence_stderr)

    def within(self, rel: float = 0.02, k: float = 3.0) -> bool:
        return self.discrepancy <= rel * abs(self.influence_sum) + k * self.combined_stderr


def _shifted_measure_fn(A: SetDescriptor, m: Measure1D, n: int):
    """``(X0, alpha) -> per-sample estimate of nu_alpha^n(A)`` from base draws ``X0``.

    Each sample contributes the exact measure of a line through it, so the
    per-sample curves are continuous in ``alpha``. For Gaussian factors the
    line has direction ``w`` (the normal of a half-space, else the
    diagonal): the coordinate along ``w`` is Gaussian and independent of the
    orthogonal part. Otherwise the line is coordinate 0.
    """
    probe = np.zeros((1, n))
    if isinstance(m, Gaussian):
        # half-spaces are integrated along their normal, everything else
        # along the diagonal
        w = A.u if isinstance(A, HalfSpace) else np.full(n, 1.0 / math.sqrt(n))
        drift = np.ones(n) - w.sum() * w
        try:
            A.line_fiber(probe, w)
        except CapabilityError:
            pass
        else:
            def along_line(X0, a):
                base = X0 - np.outer(X0 @ w, w) + a * drift
                along = Gaussian((m.mean + a) * w.sum(), m.variance)
                return fiber_measure(*A.line_fiber(base, w), along)

            return along_line
    try:
        A.axis_fiber(0, probe)
    except CapabilityError:
        return lambda X0, a: A.contains(X0 + a).astype(float)
    return lambda X0, a: fiber_measure(*A.axis_fiber(0, X0 + a), translate(m, a))


def _check_increasing(A: SetDescriptor) -> None:
    if A.monotone != "increasing":
        raise ValueError("the set must be increasing")


def measure_curve(A: SetDescriptor, m: Measure1D, n: int, alphas: Sequence[float],
                  cfg: MCConfig) -> ThresholdCurve:
    """``alpha -> nu_alpha^n(A)`` on a grid, with common random numbers."""
    _check_increasing(A)
    alphas = np.sort(np.asarray(alphas, dtype=float))
    P = ProductSpace.iid(m, n)
    f = _shifted_measure_fn(A, m, n)
    vals = per_sample(P, cfg, lambda X: np.stack([f(X, a) for a in alphas], axis=1))
    means, ses = summarize(vals)
    return ThresholdCurve(alphas, np.atleast_1d(means), np.atleast_1d(ses), n, cfg.seed)


def russo_check(A: SetDescriptor, m: Measure1D, n: int, alpha: float, cfg: MCConfig,
                steps: tuple[float, float] = FD_STEPS) -> RussoResult:
    """Compare the derivative of ``nu_alpha^n(A)`` with the influence sum.

    The derivative is the central difference at both ``steps``, combined by
    Richardson extrapolation for an ``O(h^2)`` error; the influence sum is
    taken under ``nu_alpha^n`` on the same draws.
    """
    _check_increasing(A)
    h1, h2 = steps
    P = ProductSpace.iid(m, n)
    Pa = ProductSpace.iid(translate(m, alpha), n)
    f = _shifted_measure_fn(A, m, n)

    def fn(X):
        d1 = (f(X, alpha + h1) - f(X, alpha - h1)) / (2 * h1)
        d2 = (f(X, alpha + h2) - f(X, alpha - h2)) / (2 * h2)
        d = (h1**2 * d2 - h2**2 * d1) / (h1**2 - h2**2)
        s = influence_samples(A, Pa, X + alpha).sum(axis=1)
        return np.stack([d, s], axis=1)

    vals = per_sample(P, cfg, fn)
    means, ses = summarize(vals)
    return RussoResult(float(means[0]), float(ses[0]), float(means[1]), float(ses[1]))


def threshold_alpha(A: SetDescriptor, m: Measure1D, n: int, delta: float, cfg: MCConfig) -> float:
    """Shift at which the estimated ``nu_alpha^n(A)`` equals ``delta``.

    The estimate uses one fixed batch of draws, so it is a monotone function
    of ``alpha`` and is solved with Brent's method on ``[-20, 20]``.

    Raises
    ------
    ValueError
        If the curve does not cross ``delta`` inside the window.
    """
    _check_increasing(A)
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    X0 = sample(ProductSpace.iid(m, n), cfg.seed, cfg.samples)
    f = _shifted_measure_fn(A, m, n)

    def g(a):
        return float(f(X0, a).mean()) - delta

    lo, hi = ALPHA_WINDOW
    glo, ghi = g(lo), g(hi)
    if not (glo < 0 < ghi):
        raise ValueError(f"curve does not cross {delta} for alpha in [{lo}, {hi}]")
    return float(optimize.brentq(g, lo, hi, xtol=1e-12, rtol=4 * np.finfo(float).eps))


def max_threshold_alpha(K: float, n: int, delta, m: Measure1D | None = None):
    """Closed form ``K - F^{-1}((1 - delta)^{1/n})`` for ``{max x > K}``."""
    m = Gaussian() if m is None else m
    delta = np.asarray(delta, dtype=float)
    if np.any((delta <= 0) | (delta >= 1)):
        raise ValueError("delta must lie in (0, 1)")
    # F(K - alpha)^n = 1 - delta, solved through the upper-tail mass q
    q = -np.expm1(np.log1p(-delta) / n)
    if isinstance(m, Gaussian):
        upper = m.mean - m.sd * special.ndtri(q)
    else:
        upper = m.quantile(1.0 - q)
    out = K - upper
    return float(out) if np.ndim(out) == 0 else out


def width_check(A: SetDescriptor, n: int, eps: float, cfg: MCConfig | None = None,
                m: Measure1D | None = None, baselines: Baselines | None = None) -> BoundReport:
    """Sharp-threshold width ``alpha(1-eps) - alpha(eps)`` against ``log(1/(2 eps)) / sqrt(log n)``.

    ``max_threshold`` sets use the closed form; other sets need ``cfg``.
    """
    if not 0 < eps < 0.5:
        raise ValueError("eps must lie in (0, 1/2)")
    if n < 2:
        raise ValueError("n must be >= 2")
    m = Gaussian() if m is None else m
    if isinstance(A, MaxThreshold):
        width = max_threshold_alpha(A.K, n, 1 - eps, m) - max_threshold_alpha(A.K, n, eps, m)
    else:
        if cfg is None:
            raise ValueError("a Monte Carlo config is needed for this set")
        width = threshold_alpha(A, m, n, 1 - eps, cfg) - threshold_alpha(A, m, n, eps, cfg)
    rhs = math.log(1 / (2 * eps)) / math.sqrt(math.log(n))
    c = _baselines(baselines).constant("width")
    ctx = {"n": n, "eps": eps, "seed": None if cfg is None else cfg.seed}
    return BoundReport("width", float(width), rhs, c, ctx, kind="upper")


def max_test_power(theta0: float, theta1: float, beta: float, n: int) -> PowerReport:
    """Level-``beta`` test rejecting when ``max x_i > K`` for i.i.d. ``N(theta, 1)``.

    ``K = theta0 + Phi^{-1}((1 - beta)^{1/n})`` and the power at ``theta1`` is
    ``1 - Phi(K - theta1)^n``; both are evaluated through ``log1p``/``expm1``
    so that large ``n`` keeps full precision.
    """
    if not 0 < beta < 1:
        raise ValueError("beta must lie in (0, 1)")
    if n < 1 or int(n) != n:
        raise ValueError("n must be a positive integer")
    if theta1 < theta0:
        raise ValueError("theta1 must be >= theta0")
    n = int(n)
    q = -math.expm1(math.log1p(-beta) / n)
    K = theta0 - float(special.ndtri(q))
    power = -math.expm1(n * float(special.log_ndtr(K - theta1)))
    return PowerReport(float(theta0), float(theta1), float(beta), n, K, min(max(power, 0.0), 1.0))


def power_separation(c: float, beta: float, n: int) -> float:
    """Separation ``c log(1/(2 beta)) / sqrt(log n)``."""
    return c * math.log(1 / (2 * beta)) / math.sqrt(math.log(n))
