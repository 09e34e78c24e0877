"""Geometric influences, h-influences and the entropy machinery relating them."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import optimize

from .measures import MCConfig, Measure1D, ProductSpace, per_sample, summarize
from .sets import SetDescriptor, fiber_content, fiber_measure

LOG2 = math.log(2.0)


@dataclass(frozen=True)
class InfluenceEstimate:
    value: float
    stderr: float
    samples: int
    seed: int
    coordinate: int


@dataclass(frozen=True)
class HProfile:
    """A function ``h : [0, 1] -> [0, inf)`` applied to fiber measures."""

    evaluator: Callable[[np.ndarray], np.ndarray]
    name: str

    def __call__(self, t):
        return self.evaluator(np.asarray(t, dtype=float))

    def scaled(self, c: float) -> "HProfile":
        f = self.evaluator
        return HProfile(lambda t: c * f(t), f"{c:g}*{self.name}")


@dataclass(frozen=True)
class InfluenceProfile:
    estimates: tuple[InfluenceEstimate, ...]
    total: float
    total_stderr: float

    @property
    def values(self) -> np.ndarray:
        return np.array([e.value for e in self.estimates])

    @property
    def stderrs(self) -> np.ndarray:
        return np.array([e.stderr for e in self.estimates])

    @property
    def maximum(self) -> float:
        return float(self.values.max())

    @property
    def argmax(self) -> int:
        return int(self.values.argmax())


# ---------------------------------------------------------------------------
# entropy and friends


def entropy(x):
    """Binary entropy in nats, with ``entropy(0) = entropy(1) = 0``."""
    x = np.asarray(x, dtype=float)
    if np.any((x < 0) | (x > 1)):
        raise ValueError("entropy is defined on [0, 1]")
    out = -special_xlogx(x) - special_xlogx(1.0 - x)
    return float(out) if out.ndim == 0 else out


def special_xlogx(x):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(x > 0, x * np.log(np.where(x > 0, x, 1.0)), 0.0)


def entropy_inverse(y: float, tol: float = 1e-15) -> float:
    """Inverse of ``entropy`` restricted to ``[0, 1/2]``.

    Near ``1/2`` the entropy is flat to second order, so the inverse is
    only determined to about ``sqrt(eps)`` there.
    """
    if not 0.0 <= y <= LOG2:
        raise ValueError("entropy_inverse needs 0 <= y <= log 2")
    if y == 0.0:
        return 0.0
    if y >= entropy(0.5):
        return 0.5
    return float(optimize.brentq(lambda x: entropy(x) - y, 0.0, 0.5, xtol=tol, rtol=4 * np.finfo(float).eps))


def theta(y: float) -> float:
    """``y / (-2 log y)`` on ``(0, 1/2]``."""
    if not 0.0 < y <= 0.5:
        raise ValueError("theta is defined on (0, 1/2]")
    return y / (-2.0 * math.log(y))


def entropy_profile() -> HProfile:
    return HProfile(lambda t: -special_xlogx(t) - special_xlogx(1.0 - t), "entropy")


def variance_profile() -> HProfile:
    return HProfile(lambda t: t * (1.0 - t), "variance")


def iso_h_profile(m: Measure1D) -> HProfile:
    """``h(t) = density(quantile(t))``, extended by 0 at the endpoints."""

    def h(t):
        t = np.asarray(t, dtype=float)
        inside = (t > 0) & (t < 1)
        out = np.zeros_like(t)
        if inside.any():
            out[inside] = m.iso_profile(t[inside])
        return out

    return HProfile(h, f"iso_profile({m})")


def ent_to_h_bound(h: HProfile, I_ent: float, grid: int = 10_000) -> float:
    """Lower bound ``delta * I_ent / 2`` on the h-influence.

    ``delta`` is the infimum of ``h / entropy`` over
    ``[theta(I_ent / 2), 1 - theta(I_ent / 2)]``, found on a grid that is
    geometrically refined toward both endpoints and then polished locally.
    """
    if not 0.0 < I_ent <= LOG2:
        raise ValueError("I_ent must lie in (0, log 2]")
    a = theta(I_ent / 2.0)
    half = np.geomspace(a, 0.5, grid // 2)
    xs = np.unique(np.concatenate([half, 1.0 - half]))
    ratio = h(xs) / entropy(xs)
    k = int(np.argmin(ratio))
    lo, hi = xs[max(k - 1, 0)], xs[min(k + 1, xs.size - 1)]
    delta = float(ratio[k])
    if hi > lo:
        res = optimize.minimize_scalar(
            lambda x: float(h(x) / entropy(x)), bounds=(lo, hi), method="bounded",
            options={"xatol": 1e-12},
        )
        delta = min(delta, float(res.fun))
    return 0.5 * delta * I_ent


# ---------------------------------------------------------------------------
# estimators


def _fiber_values(A: SetDescriptor, P: ProductSpace, i: int, what: str, h: HProfile | None = None):
    m = P.factor(i)

    def fn(X):
        lo, hi = A.axis_fiber(i, X)
        if what == "content":
            return fiber_content(lo, hi, m)
        nu = np.clip(fiber_measure(lo, hi, m), 0.0, 1.0)
        return h(nu)

    return fn


def geometric_influence(A: SetDescriptor, P: ProductSpace, i: int, cfg: MCConfig) -> InfluenceEstimate:
    """Monte Carlo estimate of the expected boundary content of the ``i``-th fibers."""
    vals = per_sample(P, cfg, _fiber_values(A, P, i, "content"))
    v, se = summarize(vals)
    return InfluenceEstimate(v, se, cfg.samples, cfg.seed, i)


def h_influence(A: SetDescriptor, P: ProductSpace, h: HProfile, i: int, cfg: MCConfig) -> InfluenceEstimate:
    """Monte Carlo estimate of ``E h(nu(A_i^x))``."""
    vals = per_sample(P, cfg, _fiber_values(A, P, i, "h", h))
    v, se = summarize(vals)
    return InfluenceEstimate(v, se, cfg.samples, cfg.seed, i)


def influence_samples(A: SetDescriptor, P: ProductSpace, X: np.ndarray) -> np.ndarray:
    """Per-sample fiber contents for every coordinate, shape ``(N, n)``."""
    return np.stack(
        [fiber_content(*A.axis_fiber(i, X), P.factor(i)) for i in range(P.n)], axis=1
    )


def influence_profile(A: SetDescriptor, P: ProductSpace, cfg: MCConfig) -> InfluenceProfile:
    """All geometric influences from one shared sample batch."""
    vals = per_sample(P, cfg, lambda X: influence_samples(A, P, X))
    means, ses = summarize(vals)
    total, total_se = summarize(vals.sum(axis=1))
    ests = tuple(
        InfluenceEstimate(float(means[i]), float(ses[i]), cfg.samples, cfg.seed, i) for i in range(P.n)
    )
    return InfluenceProfile(ests, total, total_se)


def h_influence_profile(A: SetDescriptor, P: ProductSpace, h: HProfile, cfg: MCConfig) -> InfluenceProfile:
    def fn(X):
        cols = []
        for i in range(P.n):
            lo, hi = A.axis_fiber(i, X)
            cols.append(h(np.clip(fiber_measure(lo, hi, P.factor(i)), 0.0, 1.0)))
        return np.stack(cols, axis=1)

    vals = per_sample(P, cfg, fn)
    means, ses = summarize(vals)
    total, total_se = summarize(vals.sum(axis=1))
    ests = tuple(
        InfluenceEstimate(float(means[i]), float(ses[i]), cfg.samples, cfg.seed, i) for i in range(P.n)
    )
    return InfluenceProfile(ests, total, total_se)
