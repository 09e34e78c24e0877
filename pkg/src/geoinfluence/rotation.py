"""Haar-random rotations and influence sums of rotated sets."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special, stats

from .bounds import _baselines
from .influence import influence_profile
from .measures import Gaussian, MCConfig, ProductSpace
from .reports import Baselines, BoundReport
from .sets import CubeDilatedBall, HalfSpace, L2Ball, Rotated, SetDescriptor, measure_mc

PHI0 = 1.0 / math.sqrt(2.0 * math.pi)
_HAAR_TAG = 0x48414152


@dataclass(frozen=True, eq=False)
class OrthogonalMatrix:
    matrix: np.ndarray
    seed: int
    stream: int = 0

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def T(self) -> np.ndarray:
        return self.matrix.T

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)


def haar_sample(n: int, seed: int, stream: int = 0) -> OrthogonalMatrix:
    """Haar-distributed orthogonal ``n x n`` matrix.

    QR of a standard Gaussian matrix, with columns of ``Q`` flipped so that
    ``R`` has a positive diagonal. ``(seed, stream)`` selects an independent
    counter-based substream.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), _HAAR_TAG, int(stream)])))
    G = rng.standard_normal((n, n))
    Q, R = np.linalg.qr(G)
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1.0
    return OrthogonalMatrix(Q * signs, int(seed), int(stream))


def _mat(M) -> np.ndarray:
    return M.matrix if isinstance(M, OrthogonalMatrix) else np.asarray(M, dtype=float)


def rotate_set(A: SetDescriptor, M) -> SetDescriptor:
    """The image ``{M x : x in A}``; half-spaces and balls stay in closed form."""
    M = _mat(M)
    if isinstance(A, HalfSpace):
        u = M @ A.u
        return HalfSpace(u / np.linalg.norm(u), A.b)
    if isinstance(A, L2Ball):
        return L2Ball(M @ A.center, A.radius)
    if isinstance(A, Rotated):
        return Rotated(A.base, M @ A.M)
    return Rotated(A, M)


def halfspace_influences_exact(u, b: float) -> np.ndarray:
    """Geometric influences ``|u_i| phi(b)`` of ``{<u, x> <= b}`` under the standard Gaussian."""
    u = np.asarray(u, dtype=float)
    if abs(np.linalg.norm(u) - 1.0) > 1e-12:
        raise ValueError("u must be a unit vector")
    return np.abs(u) * PHI0 * math.exp(-0.5 * b * b)


def _require_standard_gaussian(P: ProductSpace) -> None:
    for i in range(P.n):
        m = P.factor(i)
        if not (isinstance(m, Gaussian) and m.mean == 0 and m.variance == 1):
            raise ValueError("rotation experiments need the standard Gaussian product")


def gaussian_measure_exact(A: SetDescriptor) -> float | None:
    """Standard Gaussian measure of a half-space or ball, else ``None``."""
    if isinstance(A, HalfSpace):
        return float(special.ndtr(A.b))
    if isinstance(A, L2Ball):
        n = A.center.size
        nc = float(A.center @ A.center)
        r2 = A.radius**2
        return float(stats.chi2.cdf(r2, n) if nc == 0 else stats.ncx2.cdf(r2, n, nc))
    return None


@dataclass(frozen=True)
class RotationScan:
    sums: np.ndarray
    stderrs: np.ndarray
    t: float
    report: BoundReport

    @property
    def mean(self) -> float:
        return float(self.sums.mean())

    @property
    def max(self) -> float:
        return float(self.sums.max())

    def rows(self) -> list[dict]:
        return [{"rotation_index": j, "influence_sum": float(s), "stderr": float(e)}
                for j, (s, e) in enumerate(zip(self.sums, self.stderrs))]


def rotation_rhs(n: int, t: float) -> float:
    """``sqrt(n) t(1-t) sqrt(-log(t(1-t)))``."""
    v = t * (1 - t)
    return 0.0 if v <= 0 else math.sqrt(n) * v * math.sqrt(-math.log(v))


def rotation_scan(A: SetDescriptor, P: ProductSpace, num_rotations: int, cfg: MCConfig,
                  baselines: Baselines | None = None) -> RotationScan:
    """Influence sums of ``M_j(A)`` for Haar rotations ``M_1, ..., M_k``.

    Half-spaces use the closed form ``||M u||_1 phi(b)``; other convex sets
    are estimated with common random numbers across rotations. Membership
    in the regularity class needed for the lower bound is assumed, not
    certified (see :func:`geoinfluence.sets.jcal_spotcheck`).
    """
    _require_standard_gaussian(P)
    if not A.convex:
        raise ValueError("rotation_scan needs a convex set")
    if num_rotations < 1:
        raise ValueError("num_rotations must be >= 1")
    n = P.n
    sums = np.empty(num_rotations)
    ses = np.zeros(num_rotations)
    for j in range(num_rotations):
        B = rotate_set(A, haar_sample(n, cfg.seed, j))
        if isinstance(B, HalfSpace):
            sums[j] = halfspace_influences_exact(B.u, B.b).sum()
        else:
            prof = influence_profile(B, P, cfg)
            sums[j], ses[j] = prof.total, prof.total_stderr
    t = gaussian_measure_exact(A)
    if t is None:
        t, _ = measure_mc(A, P, cfg)
    c = _baselines(baselines).constant("rotation")
    ctx = {"n": n, "t": t, "rotations": num_rotations, "seed": cfg.seed,
           "max_sum": float(sums.max())}
    report = BoundReport("rotation", float(sums.mean()), rotation_rhs(n, t), c, ctx)
    return RotationScan(sums, ses, t, report)


def mean_abs_l1_norm(n: int) -> float:
    """``E ||v||_1`` for ``v`` uniform on the unit sphere of ``R^n``."""
    return n * math.exp(math.lgamma(n / 2) - math.lgamma((n + 1) / 2)) / math.sqrt(math.pi)


@dataclass(frozen=True)
class CubeEnlargement:
    lhs: float
    stderr: float
    rhs: float
    per_rotation: np.ndarray
    scale: float

    @property
    def passed(self) -> bool:
        return self.lhs >= self.rhs - 3 * self.stderr


def _euclidean_neighborhood_gain(A: SetDescriptor, eps: float) -> float:
    if isinstance(A, HalfSpace):
        return float(special.ndtr(A.b + eps) - special.ndtr(A.b))
    if isinstance(A, L2Ball):
        return gaussian_measure_exact(L2Ball(A.center, A.radius + eps)) - gaussian_measure_exact(A)
    raise NotImplementedError


def random_cube_enlargement(A: SetDescriptor, r: float, K: float, num_rotations: int, cfg: MCConfig,
                            log_factor: bool = False) -> CubeEnlargement:
    """Average measure of ``A + M^{-1}(s [-r, r]^n)`` over Haar rotations.

    ``s = K / sqrt(n)``, or ``K sqrt(log n) / sqrt(n)`` with ``log_factor``.
    The comparison value is ``mu(A) + mu(A^{r/3} minus A) / 2`` with the
    exact Euclidean neighbourhood. Half-spaces are handled in closed form
    and balls by Monte Carlo.

    Raises
    ------
    CapabilityError
        For sets other than half-spaces and balls.
    """
    from .sets import CapabilityError

    if not isinstance(A, (HalfSpace, L2Ball)):
        raise CapabilityError(f"random_cube_enlargement does not support {type(A).__name__}")
    if not r > 0:
        raise ValueError("r must be positive")
    n = A.u.size if isinstance(A, HalfSpace) else A.center.size
    s = K / math.sqrt(n)
    if log_factor:
        s *= math.sqrt(math.log(n)) if n > 1 else 0.0
    P = ProductSpace.iid(Gaussian(), n)
    vals = np.empty(num_rotations)
    ses = np.zeros(num_rotations)
    for j in range(num_rotations):
        M = haar_sample(n, cfg.seed, j).matrix
        if isinstance(A, HalfSpace):
            # support function of M^T C in direction u is s r ||M u||_1
            vals[j] = special.ndtr(A.b + s * r * np.abs(M @ A.u).sum())
        else:
            # x in A + M^T C  iff  M x in M A + C, and M X is again standard Gaussian
            B = CubeDilatedBall(M @ A.center, A.radius, s * r)
            vals[j], ses[j] = measure_mc(B, P, cfg, axis=0)
    t = gaussian_measure_exact(A)
    rhs = t + 0.5 * _euclidean_neighborhood_gain(A, r / 3)
    # estimates share draws, so the mean of the errors bounds the error of the mean
    return CubeEnlargement(float(vals.mean()), float(ses.mean()), rhs, vals, s)
