"""Diophantine classifiers for angles and tuples, and the dilation search.

Angles enter on the rescaled torus: a point t is K-smooth when every small
integer multiple of t/(pi n) stays at torus distance > K/n from the
integers, and a tuple is lambda-spread when all pairwise sums and
differences of the t_r/(2 pi n) are >= lambda/n from the integers (the weak
variant only constrains differences).  ``find_dilation`` searches
exhaustively for an integer dilation that spreads a clustered tuple out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .minima import MeshConfig
from .polymodel import PreconditionError

__all__ = [
    "PhaseTuple",
    "ArithMeta",
    "DilationResult",
    "torus_dist",
    "is_smooth",
    "is_spread",
    "is_weakly_spread",
    "classify_bad_arcs",
    "find_dilation",
    "random_smooth_spread_tuple",
]


def torus_dist(x):
    """Distance to the nearest integer, ||x||_{R/Z}.

    Inputs are reduced mod 1 first to avoid catastrophic cancellation for
    large arguments.
    """
    frac = np.mod(x, 1.0)
    return np.minimum(frac, 1.0 - frac)


@dataclass(frozen=True)
class PhaseTuple:
    """Rescaled angles t_r = n * x_r."""

    t: tuple[float, ...]
    n: int

    def __post_init__(self):
        if len(self.t) < 1:
            raise PreconditionError("tuple must have m >= 1 entries")
        if not all(math.isfinite(v) for v in self.t):
            raise PreconditionError("tuple entries must be finite")
        object.__setattr__(self, "t", tuple(float(v) for v in self.t))

    @property
    def m(self) -> int:
        return len(self.t)

    @property
    def angles(self) -> np.ndarray:
        """t_r / n, the underlying angles on the circle."""
        return np.asarray(self.t) / self.n


@dataclass(frozen=True)
class ArithMeta:
    smooth_K: float | None
    spread_lambda: float | None
    weakly_spread_lambda: float | None

    def __post_init__(self):
        if self.spread_lambda is not None and self.weakly_spread_lambda is not None:
            if self.weakly_spread_lambda < self.spread_lambda:
                raise PreconditionError("weak spread level cannot be below spread level")


def is_smooth(t: float, K: float, n: int) -> bool:
    """K-smoothness: ||p0 t / (pi n)|| > K/n for all 0 < |p0| <= K+1."""
    if n < 1 or K <= 0:
        raise PreconditionError("need n >= 1 and K > 0")
    base = t / (math.pi * n)
    p0 = np.arange(1, int(math.floor(K + 1)) + 1)
    return bool(np.all(torus_dist(p0 * base) > K / n))


def _pair_gaps(tup: PhaseTuple, signs: tuple[int, ...]) -> np.ndarray:
    t = np.asarray(tup.t)
    gaps = []
    for r in range(tup.m):
        for rp in range(r + 1, tup.m):
            for s in signs:
                gaps.append((t[r] + s * t[rp]) / (2 * math.pi * tup.n))
    return np.asarray(gaps)


def is_spread(tup: PhaseTuple, lam: float) -> bool:
    """lambda-spread: both-sign pair separations (single-point clause at m=1)."""
    if lam <= 0:
        raise PreconditionError("lambda must be positive")
    if tup.m == 1:
        return bool(torus_dist(tup.t[0] / (2 * math.pi * tup.n)) >= lam / tup.n)
    return bool(np.all(torus_dist(_pair_gaps(tup, (1, -1))) >= lam / tup.n))


def is_weakly_spread(tup: PhaseTuple, lam: float) -> bool:
    """Weak variant: only the differences t_r - t_r' are constrained."""
    if lam <= 0:
        raise PreconditionError("lambda must be positive")
    if tup.m == 1:
        return bool(torus_dist(tup.t[0] / (2 * math.pi * tup.n)) >= lam / tup.n)
    return bool(np.all(torus_dist(_pair_gaps(tup, (-1,))) >= lam / tup.n))


def classify_bad_arcs(mesh: MeshConfig, kappa: float = 0.1) -> np.ndarray:
    """Boolean mask over alpha = 1..N: True where n x_alpha is NOT n^kappa-smooth.

    For x_alpha = 2 pi alpha / N the test reduces to distances of
    2 p0 alpha / N from the integers, which vectorizes over the mesh.
    """
    if not 0 < kappa < 1:
        raise PreconditionError("kappa must lie in (0, 1)")
    n, N = mesh.n, mesh.N_effective
    K = float(n) ** kappa
    alphas = np.arange(1, N + 1)
    good = np.ones(N, dtype=bool)
    for p0 in range(1, int(math.floor(K + 1)) + 1):
        good &= torus_dist(2.0 * p0 * alphas / N) > K / n
    return ~good


@dataclass(frozen=True)
class DilationResult:
    L: int
    achieved: float
    input_spread: bool  # False flags a precondition violation (achieved may be 0)


def find_dilation(tup: PhaseTuple, lam: float, K: float) -> DilationResult:
    """Best simultaneous dilation L in [n/(2K), n/K].

    Maximizes the minimum over all pair/sign combinations of
    ||L (t_r +- t_r') / (2 pi n)|| (||L t / (2 pi n)|| at m = 1) by
    exhaustive scan of the interval.
    """
    n = tup.n
    lo, hi = int(math.ceil(n / (2 * K))), int(math.floor(n / K))
    if hi < lo or hi < 1:
        raise PreconditionError(f"empty dilation range [{n / (2 * K):.1f}, {n / K:.1f}]")
    L = np.arange(max(lo, 1), hi + 1)
    if tup.m == 1:
        gaps = np.array([tup.t[0] / (2 * math.pi * n)])
    else:
        gaps = _pair_gaps(tup, (1, -1))
    # rows: candidate L; cols: pair/sign combinations
    scores = torus_dist(np.outer(L, np.mod(gaps, 1.0))).min(axis=1)
    i = int(np.argmax(scores))
    return DilationResult(
        L=int(L[i]), achieved=float(scores[i]), input_spread=is_spread(tup, lam)
    )


def random_smooth_spread_tuple(
    n: int,
    m: int,
    rng: np.random.Generator,
    K: float,
    lam: float = 1.0,
    weak: bool = False,
    max_tries: int = 10_000,
) -> PhaseTuple:
    """Rejection-sample a K-smooth, lambda-spread tuple of rescaled angles."""
    check = is_weakly_spread if weak else is_spread
    for _ in range(max_tries):
        t = PhaseTuple(tuple(rng.uniform(0.0, math.pi * n, size=m)), n)
        if check(t, lam) and all(is_smooth(v, K, n) for v in t.t):
            return t
    raise PreconditionError("could not sample a smooth spread tuple")
