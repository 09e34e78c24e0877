"""Borel set descriptors, one-dimensional fibers and their boundary content.

Fibers are handled in batch form: for ``N`` base points a fiber is a pair of
arrays ``(lo, hi)`` of shape ``(N, k)``, one column per interval component.
Unused slots hold ``(+inf, +inf)``; a degenerate point is ``lo == hi``.
With this padding the lower Minkowski content of a fiber is simply
``sum(density(lo) + density(hi))`` and its measure ``sum(cdf(hi) - cdf(lo))``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .measures import MCConfig, Measure1D, ProductSpace, per_sample, summarize

INF = math.inf


class CapabilityError(Exception):
    """Operation not supported by this kind of set descriptor."""


class FiberResolutionError(Exception):
    """A generic oracle fiber has more components than its declared bound."""


# ---------------------------------------------------------------------------
# one-dimensional interval unions


@dataclass(frozen=True)
class IntervalUnion:
    """Finite union of disjoint, sorted intervals with endpoints in [-inf, inf].

    Endpoint closedness is recorded but never affects content or measure:
    densities are continuous wherever these quantities are used.
    """

    components: tuple[tuple[float, float], ...] = ()
    closed: tuple[tuple[bool, bool], ...] | None = None

    def __post_init__(self):
        comps = tuple((float(a), float(b)) for a, b in self.components)
        object.__setattr__(self, "components", comps)
        if self.closed is None:
            object.__setattr__(self, "closed", tuple((True, True) for _ in comps))
        for a, b in comps:
            if a > b or a == INF or b == -INF:
                raise ValueError(f"bad component [{a}, {b}]")
        for (_, b), (a, _) in zip(comps, comps[1:]):
            if not a > b:
                raise ValueError("components must be sorted with positive gaps")

    @classmethod
    def empty(cls) -> "IntervalUnion":
        return cls(())

    @classmethod
    def real_line(cls) -> "IntervalUnion":
        return cls(((-INF, INF),))

    @classmethod
    def from_bounds(cls, lo: Sequence[float], hi: Sequence[float]) -> "IntervalUnion":
        """Build from one row of batch bounds, dropping padding slots."""
        comps = sorted(
            (float(a), float(b))
            for a, b in zip(lo, hi)
            if a <= b and not (a == b and math.isinf(a))
        )
        return cls(tuple(comps))

    def __len__(self) -> int:
        return len(self.components)

    def measure(self, m: Measure1D) -> float:
        return float(sum(m.cdf(b) - m.cdf(a) for a, b in self.components))

    def minkowski_content(self, m: Measure1D) -> float:
        return minkowski_content(self, m)

    def dilate(self, r: float) -> "IntervalUnion":
        """Exact ``S + [-r, r]``, merging components that come to overlap."""
        if r < 0:
            raise ValueError("r must be non-negative")
        merged: list[list[float]] = []
        for a, b in self.components:
            a, b = a - r, b + r
            if merged and a <= merged[-1][1]:
                merged[-1][1] = max(merged[-1][1], b)
            else:
                merged.append([a, b])
        return IntervalUnion(tuple((a, b) for a, b in merged))

    def complement(self) -> "IntervalUnion":
        edges = [-INF] + [v for c in self.components for v in c] + [INF]
        comps = []
        for a, b in zip(edges[::2], edges[1::2]):
            if a < b:
                comps.append((a, b))
        return IntervalUnion(tuple(comps))

    def contains(self, y: float) -> bool:
        return any(a <= y <= b for a, b in self.components)


def minkowski_content(S: IntervalUnion, m: Measure1D) -> float:
    """Lower Minkowski content of a finite interval union under ``m``.

    Each finite endpoint contributes the density there; a degenerate point
    therefore counts twice and the whole line counts zero.
    """
    total = 0.0
    for a, b in S.components:
        if math.isfinite(a):
            total += float(m.density(a))
        if math.isfinite(b):
            total += float(m.density(b))
    return total


def _empty_like(lo: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return np.full_like(lo, INF), np.full_like(lo, INF)


def normalize_bounds(lo: np.ndarray, hi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Replace empty components (``lo > hi``) by the padding value."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    empty = lo > hi
    if empty.any():
        lo = np.where(empty, INF, lo)
        hi = np.where(empty, INF, hi)
    return lo, hi


def complement_bounds(lo: np.ndarray, hi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Batch complement of interval unions (the result has ``k + 1`` slots)."""
    order = np.argsort(lo, axis=1, kind="stable")
    lo = np.take_along_axis(lo, order, axis=1)
    hi = np.take_along_axis(hi, order, axis=1)
    N = lo.shape[0]
    starts = np.concatenate([np.full((N, 1), -INF), hi], axis=1)
    ends = np.concatenate([lo, np.full((N, 1), INF)], axis=1)
    # (-inf, -inf) and (+inf, +inf) slots contribute nothing; keep them as padding
    pad = (starts == ends) & np.isinf(starts)
    starts = np.where(pad, INF, starts)
    ends = np.where(pad, INF, ends)
    return starts, ends


def fiber_content(lo: np.ndarray, hi: np.ndarray, m: Measure1D) -> np.ndarray:
    """Per-row lower Minkowski content of batch fibers."""
    return (m.density(lo) + m.density(hi)).sum(axis=1)


def fiber_measure(lo: np.ndarray, hi: np.ndarray, m: Measure1D) -> np.ndarray:
    """Per-row ``m``-measure of batch fibers."""
    return (m.cdf(hi) - m.cdf(lo)).sum(axis=1)


# ---------------------------------------------------------------------------
# descriptors


class SetDescriptor:
    """Base class. Subclasses implement ``contains`` and, where possible,
    ``line_fiber`` / ``axis_fiber``, ``enlarge`` and ``erode``.

    ``monotone`` is ``"increasing"``, ``"decreasing"`` or ``None``.
    """

    monotone: str | None = None
    convex: bool = False
    transitive: bool = False

    def contains(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def line_fiber(self, P: np.ndarray, d: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Fiber ``{y : p + y d in A}`` for each row ``p`` of ``P``."""
        raise CapabilityError(f"{type(self).__name__} has no line fibers")

    def axis_fiber(self, i: int, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Fiber along coordinate ``i``; column ``i`` of ``X`` is ignored."""
        P = np.array(X, dtype=float, copy=True)
        P[:, i] = 0.0
        d = np.zeros(P.shape[1])
        d[i] = 1.0
        return self.line_fiber(P, d)

    def enlarge(self, r: float) -> "SetDescriptor":
        """Descriptor of ``A + [-r, r]^n``."""
        raise CapabilityError(f"cannot enlarge {type(self).__name__}")

    def erode(self, r: float) -> "SetDescriptor":
        """Descriptor of ``{x : x + [-r, r]^n is inside A}``."""
        raise CapabilityError(f"cannot erode {type(self).__name__}")

    def dilate_l2(self, r: float) -> "SetDescriptor":
        """Closed-form Euclidean dilation, where available."""
        raise CapabilityError(f"no Euclidean dilation for {type(self).__name__}")

    def erode_l2(self, r: float) -> "SetDescriptor":
        raise CapabilityError(f"no Euclidean erosion for {type(self).__name__}")


def _check_r(r: float) -> float:
    if not r > 0:
        raise ValueError("r must be positive")
    return float(r)


@dataclass(frozen=True, eq=False)
class HalfSpace(SetDescriptor):
    """``{x : <u, x> <= b}`` with a unit normal ``u``."""

    u: np.ndarray
    b: float
    convex = True

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        if u.ndim != 1:
            raise ValueError("u must be a vector")
        if abs(np.linalg.norm(u) - 1.0) > 1e-12:
            raise ValueError("half-space normal must have unit L2 norm")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "b", float(self.b))

    @classmethod
    def from_normal(cls, w: Sequence[float], b: float) -> "HalfSpace":
        """``{x : <w, x> <= b}`` for any nonzero ``w``, rescaled to unit normal."""
        w = np.asarray(w, dtype=float)
        norm = np.linalg.norm(w)
        if norm == 0:
            raise ValueError("normal must be nonzero")
        return cls(w / norm, b / norm)

    @property
    def monotone(self) -> str | None:  # type: ignore[override]
        if np.all(self.u >= 0):
            return "decreasing"
        if np.all(self.u <= 0):
            return "increasing"
        return None

    @property
    def transitive(self) -> bool:  # type: ignore[override]
        return bool(np.all(self.u == self.u[0]))

    def contains(self, X):
        return np.asarray(X) @ self.u <= self.b

    def line_fiber(self, P, d):
        c = float(np.dot(self.u, d))
        v = self.b - np.asarray(P) @ self.u
        if c > 0:
            return np.full_like(v, -INF)[:, None], (v / c)[:, None]
        if c < 0:
            return (v / c)[:, None], np.full_like(v, INF)[:, None]
        lo = np.where(v >= 0, -INF, INF)
        hi = np.where(v >= 0, INF, INF)
        return lo[:, None], hi[:, None]

    def axis_fiber(self, i, X):
        X = np.asarray(X)
        v = self.b - (X @ self.u - self.u[i] * X[:, i])
        c = self.u[i]
        if c > 0:
            return np.full_like(v, -INF)[:, None], (v / c)[:, None]
        if c < 0:
            return (v / c)[:, None], np.full_like(v, INF)[:, None]
        lo = np.where(v >= 0, -INF, INF)
        return lo[:, None], np.full_like(v, INF)[:, None]

    def enlarge(self, r):
        return HalfSpace(self.u, self.b + _check_r(r) * np.abs(self.u).sum())

    def erode(self, r):
        return HalfSpace(self.u, self.b - _check_r(r) * np.abs(self.u).sum())

    def dilate_l2(self, r):
        return HalfSpace(self.u, self.b + r)

    def erode_l2(self, r):
        return HalfSpace(self.u, self.b - r)


@dataclass(frozen=True, eq=False)
class BoxLower(SetDescriptor):
    """Lower orthant box ``prod_i (-inf, a_i]``."""

    a: np.ndarray
    monotone = "decreasing"
    convex = True

    def __post_init__(self):
        object.__setattr__(self, "a", np.atleast_1d(np.asarray(self.a, dtype=float)))

    @property
    def transitive(self) -> bool:  # type: ignore[override]
        return bool(np.all(self.a == self.a[0]))

    def contains(self, X):
        return np.all(np.asarray(X) <= self.a, axis=1)

    def axis_fiber(self, i, X):
        X = np.asarray(X)
        ok = np.all(np.delete(X, i, axis=1) <= np.delete(self.a, i), axis=1)
        lo = np.where(ok, -INF, INF)
        hi = np.where(ok, self.a[i], INF)
        return lo[:, None], hi[:, None]

    def line_fiber(self, P, d):
        P = np.asarray(P)
        d = np.asarray(d, dtype=float)
        slack = self.a - P  # constraint: y d_k <= slack_k
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = slack / d
        hi = np.where(d > 0, ratio, INF).min(axis=1)
        lo = np.where(d < 0, ratio, -INF).max(axis=1)
        ok = np.all(np.where(d == 0, slack >= 0, True), axis=1)
        lo = np.where(ok, lo, INF)
        hi = np.where(ok, hi, INF)
        return normalize_bounds(lo[:, None], hi[:, None])

    def enlarge(self, r):
        return BoxLower(self.a + _check_r(r))

    def erode(self, r):
        return BoxLower(self.a - _check_r(r))


@dataclass(frozen=True, eq=False)
class L2Ball(SetDescriptor):
    """Closed Euclidean ball."""

    center: np.ndarray
    radius: float
    convex = True

    def __post_init__(self):
        object.__setattr__(self, "center", np.atleast_1d(np.asarray(self.center, dtype=float)))
        if not self.radius > 0:
            raise ValueError("radius must be positive")

    @property
    def transitive(self) -> bool:  # type: ignore[override]
        return bool(np.all(self.center == self.center[0]))

    def contains(self, X):
        return ((np.asarray(X) - self.center) ** 2).sum(axis=1) <= self.radius**2

    def line_fiber(self, P, d):
        w = np.asarray(P) - self.center
        d = np.asarray(d, dtype=float)
        A = float(d @ d)
        B = w @ d
        C = (w * w).sum(axis=1) - self.radius**2
        disc = B * B - A * C
        ok = disc >= 0
        root = np.sqrt(np.where(ok, disc, 0.0))
        lo = np.where(ok, (-B - root) / A, INF)
        hi = np.where(ok, (-B + root) / A, INF)
        return lo[:, None], hi[:, None]

    def axis_fiber(self, i, X):
        w = np.asarray(X) - self.center
        rest = (w * w).sum(axis=1) - w[:, i] ** 2
        s = self.radius**2 - rest
        ok = s >= 0
        h = np.sqrt(np.where(ok, s, 0.0))
        c = self.center[i]
        return np.where(ok, c - h, INF)[:, None], np.where(ok, c + h, INF)[:, None]

    def enlarge(self, r):
        return CubeDilatedBall(self.center, self.radius, _check_r(r))

    def dilate_l2(self, r):
        return L2Ball(self.center, self.radius + r)

    def erode_l2(self, r):
        if r >= self.radius:
            return EmptySet()
        return L2Ball(self.center, self.radius - r)


@dataclass(frozen=True, eq=False)
class CubeDilatedBall(SetDescriptor):
    """Minkowski sum of a Euclidean ball and the cube ``[-r, r]^n``.

    A point belongs iff clamping the center into ``x + [-r, r]^n`` lands
    within ``radius`` of it.
    """

    center: np.ndarray
    radius: float
    r: float
    convex = True

    def __post_init__(self):
        object.__setattr__(self, "center", np.atleast_1d(np.asarray(self.center, dtype=float)))

    def _excess(self, X):
        return np.maximum(np.abs(np.asarray(X) - self.center) - self.r, 0.0)

    def contains(self, X):
        return (self._excess(X) ** 2).sum(axis=1) <= self.radius**2

    def axis_fiber(self, i, X):
        e = self._excess(X)
        s = self.radius**2 - ((e * e).sum(axis=1) - e[:, i] ** 2)
        ok = s >= 0
        h = self.r + np.sqrt(np.where(ok, s, 0.0))
        c = self.center[i]
        return np.where(ok, c - h, INF)[:, None], np.where(ok, c + h, INF)[:, None]

    def line_fiber(self, P, d, iters: int = 60):
        # the squared excess is convex along any line: locate its minimum by
        # bisection on the derivative, then each crossing of radius^2
        w = np.asarray(P, dtype=float) - self.center
        d = np.asarray(d, dtype=float)
        dmax = float(np.abs(d).max())
        if dmax == 0:
            inside = self.contains(P)
            return np.where(inside, -INF, INF)[:, None], np.full((w.shape[0], 1), INF)
        R2 = self.radius**2

        def g(s):
            return (np.maximum(np.abs(w + s[:, None] * d) - self.r, 0.0) ** 2).sum(axis=1)

        def dg(s):
            y = w + s[:, None] * d
            return (np.maximum(np.abs(y) - self.r, 0.0) * np.sign(y) * d).sum(axis=1)

        S = (np.abs(w).max(axis=1) + self.r + self.radius) / dmax + 1.0
        lo, hi = -S, S.copy()
        for _ in range(iters):
            mid = 0.5 * (lo + hi)
            up = dg(mid) > 0
            hi = np.where(up, mid, hi)
            lo = np.where(up, lo, mid)
        smin = 0.5 * (lo + hi)
        ok = g(smin) <= R2

        def crossing(a, b, rising):
            for _ in range(iters):
                mid = 0.5 * (a + b)
                out = g(mid) > R2
                if rising:
                    a, b = np.where(out, a, mid), np.where(out, mid, b)
                else:
                    a, b = np.where(out, mid, a), np.where(out, b, mid)
            return 0.5 * (a + b)

        left = crossing(-S, smin, rising=False)
        right = crossing(smin, S, rising=True)
        return np.where(ok, left, INF)[:, None], np.where(ok, right, INF)[:, None]

    def enlarge(self, r):
        return CubeDilatedBall(self.center, self.radius, self.r + _check_r(r))


@dataclass(frozen=True, eq=False)
class MaxThreshold(SetDescriptor):
    """``{x : max_i x_i > K}``."""

    K: float
    monotone = "increasing"
    transitive = True

    def contains(self, X):
        return np.asarray(X).max(axis=1) > self.K

    def axis_fiber(self, i, X):
        X = np.asarray(X)
        if X.shape[1] == 1:
            whole = np.zeros(X.shape[0], dtype=bool)
        else:
            whole = np.delete(X, i, axis=1).max(axis=1) > self.K
        lo = np.where(whole, -INF, self.K)
        return lo[:, None], np.full(X.shape[0], INF)[:, None]

    def line_fiber(self, P, d):
        P = np.asarray(P)
        d = np.asarray(d, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = (self.K - P) / d
        right = np.where(d > 0, ratio, INF).min(axis=1)  # (right, inf)
        left = np.where(d < 0, ratio, -INF).max(axis=1)  # (-inf, left)
        whole = np.any((d == 0) & (P > self.K), axis=1) | (left >= right)
        lo = np.stack([np.where(np.isfinite(left), -INF, INF), right], axis=1)
        hi = np.stack([np.where(np.isfinite(left), left, INF), np.full_like(right, INF)], axis=1)
        lo[whole] = [-INF, INF]
        hi[whole] = [INF, INF]
        return lo, hi

    def enlarge(self, r):
        return MaxThreshold(self.K - _check_r(r))

    def erode(self, r):
        return MaxThreshold(self.K + _check_r(r))


@dataclass(frozen=True, eq=False)
class SumThreshold(SetDescriptor):
    """``{x : sum_i x_i >= K - n * shift}``; ``shift`` accumulates enlargements."""

    K: float
    shift: float = 0.0
    monotone = "increasing"
    transitive = True
    convex = True

    def level(self, n: int) -> float:
        return self.K - n * self.shift

    def contains(self, X):
        X = np.asarray(X)
        return X.sum(axis=1) >= self.level(X.shape[1])

    def axis_fiber(self, i, X):
        X = np.asarray(X)
        s = self.level(X.shape[1]) - (X.sum(axis=1) - X[:, i])
        return s[:, None], np.full_like(s, INF)[:, None]

    def line_fiber(self, P, d):
        P = np.asarray(P)
        c = float(np.sum(d))
        v = self.level(P.shape[1]) - P.sum(axis=1)  # need y c >= v
        if c > 0:
            return (v / c)[:, None], np.full_like(v, INF)[:, None]
        if c < 0:
            return np.full_like(v, -INF)[:, None], (v / c)[:, None]
        lo = np.where(v <= 0, -INF, INF)
        return lo[:, None], np.full_like(v, INF)[:, None]

    def enlarge(self, r):
        return SumThreshold(self.K, self.shift + _check_r(r))

    def erode(self, r):
        return SumThreshold(self.K, self.shift - _check_r(r))


@dataclass(frozen=True, eq=False)
class EmptySet(SetDescriptor):
    convex = True
    transitive = True

    def contains(self, X):
        return np.zeros(np.asarray(X).shape[0], dtype=bool)

    def line_fiber(self, P, d):
        P = np.asarray(P)
        return _empty_like(np.zeros((P.shape[0], 1)))

    def axis_fiber(self, i, X):
        return self.line_fiber(X, None)

    def enlarge(self, r):
        return self

    def erode(self, r):
        return self

    def dilate_l2(self, r):
        return self

    def erode_l2(self, r):
        return self


@dataclass(frozen=True, eq=False)
class Rotated(SetDescriptor):
    """Image ``g(A) = {M x : x in A}`` under an orthogonal matrix ``M``."""

    base: SetDescriptor
    M: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "M", np.asarray(self.M, dtype=float))

    @property
    def convex(self) -> bool:  # type: ignore[override]
        return self.base.convex

    def contains(self, X):
        # M^{-1} x = M^T x, i.e. the row vector x^T M
        return self.base.contains(np.asarray(X) @ self.M)

    def line_fiber(self, P, d):
        return self.base.line_fiber(np.asarray(P) @ self.M, np.asarray(d) @ self.M)

    def dilate_l2(self, r):
        return Rotated(self.base.dilate_l2(r), self.M)

    def erode_l2(self, r):
        inner = self.base.erode_l2(r)
        return inner if isinstance(inner, EmptySet) else Rotated(inner, self.M)


@dataclass(frozen=True, eq=False)
class Complement(SetDescriptor):
    base: SetDescriptor

    @property
    def monotone(self) -> str | None:  # type: ignore[override]
        flip = {"increasing": "decreasing", "decreasing": "increasing"}
        return flip.get(self.base.monotone)

    @property
    def transitive(self) -> bool:  # type: ignore[override]
        return self.base.transitive

    def contains(self, X):
        return ~self.base.contains(X)

    def line_fiber(self, P, d):
        return complement_bounds(*self.base.line_fiber(P, d))

    def axis_fiber(self, i, X):
        return complement_bounds(*self.base.axis_fiber(i, X))

    def enlarge(self, r):
        return Complement(self.base.erode(r))

    def erode(self, r):
        return Complement(self.base.enlarge(r))


@dataclass(frozen=True, eq=False)
class MonotoneOracle(SetDescriptor):
    """Monotone set given by a vectorized membership function.

    ``indicator`` maps an ``(N, n)`` array to ``N`` booleans and must be a
    pure function. Fibers are located by bisection to ``tol``.
    """

    indicator: Callable[[np.ndarray], np.ndarray]
    direction: str
    window: tuple[float, float] = (-40.0, 40.0)
    tol: float = 1e-9

    def __post_init__(self):
        if self.direction not in ("increasing", "decreasing"):
            raise ValueError("direction must be 'increasing' or 'decreasing'")

    @property
    def monotone(self) -> str:  # type: ignore[override]
        return self.direction

    @property
    def _sign(self) -> float:
        return 1.0 if self.direction == "decreasing" else -1.0

    def contains(self, X):
        return np.asarray(self.indicator(np.asarray(X, dtype=float)), dtype=bool)

    def line_fiber(self, P, d):
        P = np.asarray(P, dtype=float)
        d = np.asarray(d, dtype=float)
        if np.all(d >= 0):
            orient = self._sign
        elif np.all(d <= 0):
            orient = -self._sign
        else:
            raise CapabilityError("monotone oracle fibers need a sign-definite direction")
        L, R = self.window
        # orient > 0: membership decreasing in y, fiber (-inf, t]
        at_lo = self.contains(P + L * d)
        at_hi = self.contains(P + R * d)
        if orient > 0:
            whole, none = at_hi, ~at_lo
        else:
            whole, none = at_lo, ~at_hi
        a = np.full(P.shape[0], L)
        b = np.full(P.shape[0], R)
        todo = ~(whole | none)
        idx = np.flatnonzero(todo)
        a, b = a[idx], b[idx]
        Pi = P[idx]
        while idx.size and np.max(b - a) > self.tol:
            mid = 0.5 * (a + b)
            inside = self.contains(Pi + mid[:, None] * d)
            # the boundary lies between a member and a non-member
            go_right = inside if orient > 0 else ~inside
            a = np.where(go_right, mid, a)
            b = np.where(go_right, b, mid)
        t = np.full(P.shape[0], np.nan)
        t[idx] = 0.5 * (a + b)
        if orient > 0:
            lo = np.where(whole, -INF, np.where(none, INF, -INF))
            hi = np.where(whole, INF, np.where(none, INF, t))
        else:
            lo = np.where(whole, -INF, np.where(none, INF, t))
            hi = np.full(P.shape[0], INF)
        return lo[:, None], hi[:, None]

    def enlarge(self, r):
        shift = _check_r(r) * self._sign
        f = self.indicator
        return MonotoneOracle(lambda X: f(X - shift), self.direction, self.window, self.tol)

    def erode(self, r):
        shift = _check_r(r) * self._sign
        f = self.indicator
        return MonotoneOracle(lambda X: f(X + shift), self.direction, self.window, self.tol)


@dataclass(frozen=True, eq=False)
class GenericOracle(SetDescriptor):
    """Arbitrary set given by a vectorized membership function.

    Axis fibers are found by scanning ``window`` on a ``grid``-point mesh and
    bisecting each detected crossing ``refinements`` times. Membership is
    assumed constant beyond the window. More than ``max_components``
    components raises :class:`FiberResolutionError`.
    """

    indicator: Callable[[np.ndarray], np.ndarray]
    max_components: int = 1
    window: tuple[float, float] = (-8.0, 8.0)
    grid: int = 4096
    refinements: int = 40
    convex: bool = False

    def contains(self, X):
        return np.asarray(self.indicator(np.asarray(X, dtype=float)), dtype=bool)

    def line_fiber(self, P, d):
        P = np.asarray(P, dtype=float)
        d = np.asarray(d, dtype=float)
        k = self.max_components
        ys = np.linspace(self.window[0], self.window[1], self.grid)
        N, n = P.shape
        lo = np.full((N, k), INF)
        hi = np.full((N, k), INF)
        block = max(1, 2**22 // (self.grid * n))
        for s in range(0, N, block):
            Pb = P[s : s + block]
            pts = Pb[:, None, :] + ys[None, :, None] * d
            mem = self.contains(pts.reshape(-1, n)).reshape(Pb.shape[0], self.grid)
            for row in range(Pb.shape[0]):
                m = mem[row]
                flips = np.flatnonzero(m[1:] != m[:-1])
                if flips.size > 2 * k:
                    raise FiberResolutionError(
                        f"fiber has more than {k} component(s) in the scan window"
                    )
                edges = []
                p = Pb[row]
                for j in flips:
                    a, b = ys[j], ys[j + 1]
                    entering = not m[j]
                    for _ in range(self.refinements):
                        mid = 0.5 * (a + b)
                        inside = bool(self.contains((p + mid * d)[None, :])[0])
                        if inside != entering:
                            a = mid
                        else:
                            b = mid
                    edges.append(0.5 * (a + b))
                bounds = ([-INF] if m[0] else []) + edges + ([INF] if m[-1] else [])
                comps = list(zip(bounds[::2], bounds[1::2]))
                if len(comps) > k:
                    raise FiberResolutionError(
                        f"fiber has more than {k} component(s) in the scan window"
                    )
                for c, (a, b) in enumerate(comps):
                    lo[s + row, c] = a
                    hi[s + row, c] = b
        return lo, hi


# ---------------------------------------------------------------------------
# helpers


def indicator(A: SetDescriptor, x: Sequence[float]) -> int:
    """Membership of a single point, as 0 or 1."""
    return int(A.contains(np.asarray(x, dtype=float)[None, :])[0])


def fiber(A: SetDescriptor, i: int, x: Sequence[float]) -> IntervalUnion:
    """The fiber ``A_i^x`` through a single point."""
    lo, hi = A.axis_fiber(i, np.asarray(x, dtype=float)[None, :])
    return IntervalUnion.from_bounds(lo[0], hi[0])


def enlarge(A: SetDescriptor, r: float) -> SetDescriptor:
    return A.enlarge(r)


def measure_mc(
    A: SetDescriptor, P: ProductSpace, cfg: MCConfig, axis: int | None = None
) -> tuple[float, float]:
    """Monte Carlo estimate of the ``P``-measure of ``A`` with its standard error.

    With ``axis`` set, each sample contributes the exact measure of its fiber
    along that coordinate instead of a 0/1 indicator.
    """
    if isinstance(A, EmptySet):
        return 0.0, 0.0
    if axis is None:
        vals = per_sample(P, cfg, lambda X: A.contains(X).astype(float))
    else:
        m = P.factor(axis)
        vals = per_sample(P, cfg, lambda X: fiber_measure(*A.axis_fiber(axis, X), m))
    return summarize(vals)


@dataclass(frozen=True)
class JcalReport:
    epsilon: float
    probes: int
    members: int
    violations: int

    @property
    def violation_fraction(self) -> float:
        return self.violations / self.members if self.members else 0.0


def _unit_directions(rng: np.random.Generator, count: int, n: int) -> np.ndarray:
    g = rng.standard_normal((count, n))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def jcal_spotcheck(
    A: SetDescriptor,
    eps: float,
    probes: int,
    seed: int,
    n: int | None = None,
    directions: int = 64,
    points: Sequence[Sequence[float]] | np.ndarray | None = None,
    scale: float = 2.0,
) -> JcalReport:
    """Statistical check of ``(A_eps)^(2 eps) contains A`` on probe points.

    Probe points come from ``points`` or a Gaussian cloud of the given
    ``scale``. Members of ``A`` are tested for having some point of the
    eroded set ``A_eps`` within distance ``2 eps``. Kinds with closed-form
    Euclidean erosion/dilation use them; otherwise erosion is decided by
    probing ``directions`` random unit directions plus the coordinate
    corners of the closed ``eps``-sphere. This never certifies membership.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), 0x4A43])))
    if points is None:
        if n is None:
            raise ValueError("need n or explicit probe points")
        X = scale * rng.standard_normal((probes, n))
    else:
        X = np.asarray(points, dtype=float)
        n = X.shape[1]
    members = X[A.contains(X)]
    if members.shape[0] == 0:
        return JcalReport(eps, X.shape[0], 0, 0)

    try:
        rebuilt = A.erode_l2(eps).dilate_l2(2 * eps)
        ok = rebuilt.contains(members)
        return JcalReport(eps, X.shape[0], members.shape[0], int((~ok).sum()))
    except CapabilityError:
        pass

    dirs = np.concatenate([_unit_directions(rng, directions, n), np.eye(n), -np.eye(n)])

    def in_eroded(Y):
        # y in A_eps iff the closed eps-ball around y avoids A^c (probed)
        ok = A.contains(Y)
        for dvec in dirs:
            for rad in (0.5 * eps, eps):
                ok &= A.contains(Y + rad * dvec)
        return ok

    violations = 0
    for x in members:
        # candidates y within 2 eps of x, including x itself
        cand = [x[None, :]]
        for rad in (0.5 * eps, eps, 1.5 * eps, 1.999 * eps):
            cand.append(x + rad * dirs)
        Y = np.concatenate(cand)
        if not in_eroded(Y).any():
            violations += 1
    return JcalReport(eps, X.shape[0], members.shape[0], violations)


@dataclass(frozen=True, eq=False)
class FiniteSet(SetDescriptor):
    """A finite point set (membership within ``atol``), used as a probe example."""

    points: np.ndarray
    atol: float = 1e-12

    def contains(self, X):
        X = np.asarray(X, dtype=float)
        d = np.abs(X[:, None, :] - np.asarray(self.points)[None, :, :]).max(axis=2)
        return (d <= self.atol).any(axis=1)

    def erode_l2(self, r):
        return EmptySet()


__all__ = [
    "CapabilityError",
    "FiberResolutionError",
    "IntervalUnion",
    "minkowski_content",
    "normalize_bounds",
    "complement_bounds",
    "fiber_content",
    "fiber_measure",
    "SetDescriptor",
    "HalfSpace",
    "BoxLower",
    "L2Ball",
    "CubeDilatedBall",
    "MaxThreshold",
    "SumThreshold",
    "EmptySet",
    "FiniteSet",
    "Rotated",
    "Complement",
    "MonotoneOracle",
    "GenericOracle",
    "indicator",
    "fiber",
    "enlarge",
    "measure_mc",
    "jcal_spotcheck",
    "JcalReport",
]
