"""Averaged cumulants, low-order Edgeworth densities and box probabilities.

The normalized walk S/sqrt(2n+1) is asymptotically Gaussian with covariance
V; the Edgeworth density corrects the Gaussian by cumulant-driven
Hermite-polynomial terms in powers of (number of steps)^{-1/2}:

    Q_l(x) = phi_V(x) * (1 + sum_{r=1}^{l-2} N^{-r/2} p_r(x)),

where p_1 collects the third cumulants and p_2 the fourth plus
third-squared ones.  Box probabilities are computed by tensor
Gauss-Legendre quadrature with an adaptive order check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .arithmetic import PhaseTuple
from .phasewalk import covariance, sample_walks, step_matrix
from .polymodel import CoefficientDist, PreconditionError

__all__ = [
    "CumulantSet",
    "ExpansionDensity",
    "GaussianComparison",
    "average_cumulants",
    "build_expansion",
    "box_probability",
    "compare_box",
]


def _multi_indices(dim: int, total: int) -> list[tuple[int, ...]]:
    """All multi-indices of the given dimension summing to ``total``."""
    if dim == 1:
        return [(total,)]
    out = []
    for first in range(total + 1):
        out.extend((first, *rest) for rest in _multi_indices(dim - 1, total - first))
    return out


def _nu_factorial(nu: tuple[int, ...]) -> float:
    f = 1.0
    for k in nu:
        f *= math.factorial(k)
    return f


@dataclass(frozen=True)
class CumulantSet:
    """Averaged walk cumulants chi-bar_nu = chi_nu(S) / n_steps."""

    order: int
    dim: int
    n_steps: int
    values: dict
    moments_used: tuple[float, ...]

    def get(self, nu: tuple[int, ...]) -> float:
        return self.values.get(tuple(nu), 0.0)


def average_cumulants(
    tup: PhaseTuple,
    dist: CoefficientDist,
    order: int,
    J=None,
    variant: str = "full4m",
) -> CumulantSet:
    """chi-bar_nu for all 1 <= |nu| <= order.

    Each step contributes chi_nu(xi w_j) = kappa_{|nu|}(xi) w_j^nu; the sum
    is divided by the number of index values |J|, so |nu| = 2 entries match
    :func:`covariance` and disjoint-union additivity holds exactly.
    """
    if order > 6:
        raise PreconditionError("cumulant order is capped at 6")
    if dist.is_complex and variant != "complex2m":
        raise PreconditionError("complex coefficient laws require the complex2m variant")
    comp = CoefficientDist("gaussian_real") if dist.is_complex else dist
    table = comp.moment_table()
    if order > len(table):
        raise PreconditionError(f"coefficient moments up to order {order} are required")
    kappas = [comp.cumulant(p) for p in range(1, order + 1)]
    sm = step_matrix(tup, J, variant)
    mats = [sm.rows] if sm.rows_v is None else [sm.rows, sm.rows_v]
    dim = sm.dim
    n_steps = len(sm.j) * len(mats)
    values: dict = {}
    for W in mats:
        # column powers W[:, i]^p, reused across multi-indices
        pw = [[None] + [W[:, i] ** p for p in range(1, order + 1)] for i in range(dim)]
        for p in range(1, order + 1):
            kap = kappas[p - 1]
            for nu in _multi_indices(dim, p):
                if kap == 0.0:
                    values.setdefault(nu, 0.0)
                    continue
                prod = None
                for i, e in enumerate(nu):
                    if e:
                        prod = pw[i][e] if prod is None else prod * pw[i][e]
                values[nu] = values.get(nu, 0.0) + kap * float(prod.sum())
    values = {nu: v / n_steps for nu, v in values.items()}
    return CumulantSet(
        order=order, dim=dim, n_steps=n_steps, values=values, moments_used=tuple(table)
    )


# ---------------------------------------------------------------------------
# Hermite machinery: H_nu defined by (-D)^nu phi_V = H_nu phi_V, represented
# as polynomials in y = V^{-1} x (dict multi-index -> coefficient).


def _hermite(nu: tuple[int, ...], Vinv: np.ndarray, cache: dict) -> dict:
    if nu in cache:
        return cache[nu]
    if sum(nu) == 0:
        cache[nu] = {nu: 1.0}
        return cache[nu]
    i = next(k for k, e in enumerate(nu) if e)
    prev = tuple(e - (k == i) for k, e in enumerate(nu))
    H = _hermite(prev, Vinv, cache)
    out: dict = {}
    for mu, c in H.items():
        up = tuple(e + (k == i) for k, e in enumerate(mu))  # y_i * monomial
        out[up] = out.get(up, 0.0) + c
        for k, e in enumerate(mu):  # -d/dx_i = -sum_k Vinv[k,i] d/dy_k
            if e:
                down = tuple(f - (kk == k) for kk, f in enumerate(mu))
                out[down] = out.get(down, 0.0) - c * e * Vinv[k, i]
    cache[nu] = out
    return out


def _poly_mul(a: dict, b: dict) -> dict:
    out: dict = {}
    for mu, c in a.items():
        for mu2, c2 in b.items():
            key = tuple(x + y for x, y in zip(mu, mu2))
            out[key] = out.get(key, 0.0) + c * c2
    return out


def _poly_axpy(out: dict, a: float, p: dict) -> None:
    for mu, c in p.items():
        out[mu] = out.get(mu, 0.0) + a * c


def _eval_poly(poly: dict, y: np.ndarray) -> np.ndarray:
    vals = np.zeros(y.shape[0])
    max_pow = max((max(mu) for mu in poly), default=0)
    # power table pw[i][p] = y[:, i]^p, shared across monomials
    pw = [[None, y[:, i]] for i in range(y.shape[1])]
    for p in range(2, max_pow + 1):
        for i in range(y.shape[1]):
            pw[i].append(pw[i][p - 1] * y[:, i])
    for mu, c in poly.items():
        if c == 0.0:
            continue
        term = None
        for i, e in enumerate(mu):
            if e:
                term = pw[i][e] if term is None else term * pw[i][e]
        vals += c if term is None else c * term
    return vals


@dataclass(frozen=True)
class ExpansionDensity:
    """Evaluable density phi_V(x) * (1 + sum_r n_steps^{-r/2} p_r(x))."""

    V: np.ndarray
    ell: int
    n_steps: int
    Vinv: np.ndarray = field(repr=False, default=None)
    log_norm: float = 0.0
    # p_r as polynomials in y = V^{-1} x, r = 1..ell-2
    corrections: tuple = ()

    @property
    def dim(self) -> int:
        return self.V.shape[0]

    def pdf(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        y = x @ self.Vinv
        q = np.einsum("ij,ij->i", x, y)
        dens = np.exp(-0.5 * q + self.log_norm)
        if self.corrections:
            factor = np.ones(len(x))
            for r, poly in enumerate(self.corrections, start=1):
                factor += self.n_steps ** (-r / 2.0) * _eval_poly(poly, y)
            dens = dens * factor
        return dens


class GaussianComparison:
    """The plain Gaussian comparison measure with the walk covariance."""

    def __init__(self, V: np.ndarray):
        self.V = np.asarray(V, dtype=np.float64)
        self._density = build_expansion(None, self.V, 2)

    @property
    def dim(self) -> int:
        return self.V.shape[0]

    def pdf(self, x: np.ndarray) -> np.ndarray:
        return self._density.pdf(x)


def build_expansion(
    cumulants: CumulantSet | None, V: np.ndarray, ell: int
) -> ExpansionDensity:
    """Assemble the order-ell density (ell = 2 is the pure Gaussian)."""
    if ell not in (2, 3, 4):
        raise PreconditionError("expansion order must be 2, 3 or 4")
    V = np.asarray(V, dtype=np.float64)
    d = V.shape[0]
    eigs = np.linalg.eigvalsh(V)
    if eigs[0] <= 1e-8:
        raise PreconditionError(f"covariance is near-singular (sigma_min = {eigs[0]:.3g})")
    Vinv = np.linalg.inv(V)
    sign, logdet = np.linalg.slogdet(V)
    log_norm = -0.5 * (d * math.log(2 * math.pi) + logdet)
    if ell == 2:
        return ExpansionDensity(V=V, ell=2, n_steps=1, Vinv=Vinv, log_norm=log_norm)
    if cumulants is None or cumulants.order < ell:
        raise PreconditionError(f"cumulants up to order {ell} are required for ell = {ell}")
    if cumulants.dim != d:
        raise PreconditionError("cumulant dimension does not match covariance")
    # T-polynomials in z: T_1 = chi^(3), T_2 = chi^(4) + (1/2)(chi^(3))^2,
    # with chi^(p)(z) = sum_{|nu|=p} chi-bar_nu z^nu / nu!.
    chi = {
        p: {
            nu: cumulants.get(nu) / _nu_factorial(nu)
            for nu in _multi_indices(d, p)
            if cumulants.get(nu) != 0.0
        }
        for p in (3, 4)
    }
    T = [chi[3]]
    if ell == 4:
        T2: dict = dict(chi[4])
        _poly_axpy(T2, 0.5, _poly_mul(chi[3], chi[3]))
        T.append(T2)
    cache: dict = {}
    corrections = []
    for Tr in T:
        poly: dict = {}
        for nu, c in Tr.items():
            if c != 0.0:
                _poly_axpy(poly, c, _hermite(nu, Vinv, cache))
        corrections.append(poly)
    return ExpansionDensity(
        V=V,
        ell=ell,
        n_steps=cumulants.n_steps,
        Vinv=Vinv,
        log_norm=log_norm,
        corrections=tuple(corrections),
    )


def _quad_once(density, box, orders, max_points) -> float:
    nodes, weights = [], []
    for (lo, hi), g in zip(box, orders):
        u, w = np.polynomial.legendre.leggauss(g)
        nodes.append(0.5 * (hi + lo) + 0.5 * (hi - lo) * u)
        weights.append(0.5 * (hi - lo) * w)
    total = math.prod(len(v) for v in nodes)
    if total > max_points:
        raise PreconditionError(
            f"quadrature grid of {total} points exceeds the budget {max_points}"
        )
    d = len(box)
    if d == 1:
        return float(density.pdf(nodes[0][:, None]) @ weights[0])
    rest = np.stack(np.meshgrid(*nodes[1:], indexing="ij"), axis=-1).reshape(-1, d - 1)
    w_rest = weights[1]
    for w in weights[2:]:
        w_rest = np.outer(w_rest, w).ravel()
    acc = 0.0
    pts = np.empty((rest.shape[0], d))
    pts[:, 1:] = rest
    for x0, w0 in zip(nodes[0], weights[0]):
        pts[:, 0] = x0
        acc += w0 * float(density.pdf(pts) @ w_rest)
    return acc


def box_probability(
    density,
    Q,
    target_rel_err: float = 1e-6,
    max_points: int = 60_000_000,
) -> float:
    """Probability mass of the density over the axis-aligned box Q.

    Q is a sequence of (lo, hi) pairs, one per coordinate.  Each axis is
    clipped to +-9 marginal standard deviations (negligible mass beyond) and
    integrated by Gauss-Legendre quadrature whose order scales with the
    clipped width; convergence is verified by re-running at a higher order.
    """
    V = np.asarray(density.V, dtype=np.float64)
    d = V.shape[0]
    Q = [(float(lo), float(hi)) for lo, hi in Q]
    if len(Q) != d:
        raise PreconditionError(f"box must have {d} interval pairs")
    if any(hi <= lo for lo, hi in Q):
        raise PreconditionError("box side lengths must be positive")
    sigma = np.sqrt(np.diag(V))
    box, orders = [], []
    for i, (lo, hi) in enumerate(Q):
        lo_c = max(lo, -9.0 * sigma[i])
        hi_c = min(hi, 9.0 * sigma[i])
        if hi_c <= lo_c:
            return 0.0
        box.append((lo_c, hi_c))
        span = (hi_c - lo_c) / sigma[i]
        orders.append(min(60, max(12, int(math.ceil(2.0 * span)) + 6)))
    val_lo = _quad_once(density, box, orders, max_points)
    val_hi = _quad_once(density, box, [g + 6 for g in orders], max_points)
    achieved = abs(val_hi - val_lo)
    if achieved <= max(target_rel_err * abs(val_hi), 1e-12):
        return val_hi
    val_xhi = _quad_once(density, box, [g + 16 for g in orders], max_points)
    achieved = abs(val_xhi - val_hi)
    if achieved > max(target_rel_err * abs(val_xhi), 1e-12):
        raise PreconditionError(
            f"quadrature did not converge: achieved error {achieved:.3g} "
            f"exceeds target {target_rel_err:.3g} (value {val_xhi:.6g})"
        )
    return val_xhi


def _walk_scale(tup: PhaseTuple, variant: str, J) -> float:
    """|J| / (2n+1): covariance() -> Cov(S / sqrt(2n+1)) conversion factor."""
    sm = step_matrix(tup, J, variant)
    return len(sm.j) / (2 * tup.n + 1)


def compare_box(
    tup: PhaseTuple,
    dist: CoefficientDist,
    Q,
    samples: int = 1_000_000,
    ell: int = 2,
    seed: int = 0,
    variant: str = "full4m",
) -> dict:
    """Monte Carlo box probability next to both analytic ones.

    Returns a record with the empirical probability (and its binomial
    standard error), the Gaussian and Edgeworth box probabilities, and the
    differences against the empirical value.
    """
    if variant == "complex2m" and dist.is_complex:
        J = (1, tup.n)
    else:
        J = None
    V, _sigma = covariance(tup, J, variant)
    V_s = V * _walk_scale(tup, variant, J)
    Q = [(float(lo), float(hi)) for lo, hi in Q]
    lows = np.array([lo for lo, _ in Q])
    highs = np.array([hi for _, hi in Q])
    hits = 0
    chunk = 65_536
    for c, start in enumerate(range(0, samples, chunk)):
        stop = min(start + chunk, samples)
        block = sample_walks(
            tup, dist, stop - start, seed=seed + 7919 * c, variant=variant, dtype=np.float32
        )
        inside = np.all((block >= lows) & (block <= highs), axis=1)
        hits += int(np.count_nonzero(inside))
    p_emp = hits / samples
    stderr = math.sqrt(max(p_emp * (1 - p_emp), 1.0 / samples) / samples)
    p_gauss = box_probability(GaussianComparison(V_s), Q)
    if ell == 2 or dist.is_complex:
        p_edge = p_gauss
    else:
        cs = average_cumulants(tup, dist, max(ell, 2), J=J, variant=variant)
        # rescale chi-bar to the normalized walk: divide V by the scale used above
        dens = build_expansion(cs, V_s, ell)
        p_edge = box_probability(dens, Q)
    return {
        "empirical": p_emp,
        "gaussian": p_gauss,
        "edgeworth": p_edge,
        "stderr": stderr,
        "diff_gaussian": p_emp - p_gauss,
        "diff_edgeworth": p_emp - p_edge,
        "samples": samples,
        "ell": ell,
    }
