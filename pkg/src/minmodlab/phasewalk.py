"""Phase-space random walk machinery in R^{4m} (and R^{2m} for complex laws).

The walk S(t) = sum_j xi_j w_j collects the real and imaginary parts of the
polynomial and its derivative at the m angles t_r/n; its steps are

    w_j = (a_j, (j/n) b_j, b_j, -(j/n) a_j),
    a_j = (sin(j t_r / n))_r,   b_j = (cos(j t_r / n))_r.

For complex coefficient laws only the imaginary part matters and the walk
lives in R^{2m} with steps u_j = (a_j, (j/n) b_j), v_j = (b_j, -(j/n) a_j).

Also here: exact and Monte Carlo characteristic functions (log-domain
products), the xi-norm, psi-sequences, plain and twisted differencing
operators, the shift-bound evaluator, and small-ball estimation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .arithmetic import PhaseTuple, is_spread, torus_dist
from .polymodel import CoefficientDist, PreconditionError, split_seed

__all__ = [
    "StepMatrix",
    "WalkSample",
    "PsiSequence",
    "CharfnResult",
    "step_matrix",
    "covariance",
    "sample_walk",
    "sample_walks",
    "charfn_log_modulus",
    "xi_norm",
    "psi_sequence",
    "finite_difference",
    "twisted_difference",
    "shift_bound_sides",
    "find_q0",
    "small_ball_estimate",
    "small_ball_polynomial",
]

# ln|cos| = -inf is represented by a saturating sentinel; downstream only
# compares against thresholds.
LOG_ZERO_SENTINEL = -1e9


def _j_array(tup: PhaseTuple, J) -> np.ndarray:
    if J is None:
        return np.arange(-tup.n, tup.n + 1)
    if isinstance(J, tuple) and len(J) == 2:
        return np.arange(J[0], J[1] + 1)
    return np.asarray(J, dtype=np.int64)


def _ab(tup: PhaseTuple, j: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    phase = np.outer(j, np.asarray(tup.t) / tup.n)
    return np.sin(phase), np.cos(phase)


@dataclass(frozen=True)
class StepMatrix:
    tuple: PhaseTuple
    j: np.ndarray
    variant: str  # full4m | complex2m
    rows: np.ndarray  # w_j (|J| x 4m) or u_j (|J| x 2m)
    rows_v: np.ndarray | None = None  # v_j, complex2m only

    @property
    def dim(self) -> int:
        return self.rows.shape[1]


def step_matrix(tup: PhaseTuple, J=None, variant: str = "full4m") -> StepMatrix:
    """Rows w_j (full4m) or u_j/v_j (complex2m) for j in J."""
    j = _j_array(tup, J)
    if np.any(np.abs(j) > tup.n):
        raise PreconditionError("J must be contained in [-n, n]")
    a, b = _ab(tup, j)
    scale = (j / tup.n)[:, None]
    if variant == "full4m":
        return StepMatrix(tup, j, variant, np.hstack([a, scale * b, b, -scale * a]))
    if variant == "complex2m":
        u = np.hstack([a, scale * b])
        v = np.hstack([b, -scale * a])
        return StepMatrix(tup, j, variant, u, v)
    raise PreconditionError(f"unknown variant {variant!r}")


def covariance(
    tup: PhaseTuple, J=None, variant: str = "full4m"
) -> tuple[np.ndarray, float]:
    """(V, sigma_min) with V = (1/|J|) sum_j w_j w_j^T (Gram average)."""
    sm = step_matrix(tup, J, variant)
    if len(sm.j) < sm.dim:
        raise PreconditionError("|J| must be at least the walk dimension")
    V = sm.rows.T @ sm.rows
    if sm.rows_v is not None:
        V = V + sm.rows_v.T @ sm.rows_v
    V /= len(sm.j)
    sigma_min = float(np.linalg.eigvalsh(V)[0])
    return V, sigma_min


@dataclass(frozen=True)
class WalkSample:
    value: np.ndarray  # S / sqrt(2n+1)
    seed: int
    dist: CoefficientDist
    variant: str


def sample_walks(
    tup: PhaseTuple,
    dist: CoefficientDist,
    size: int,
    seed: int = 0,
    variant: str = "full4m",
    J=None,
    dtype=np.float64,
    chunk: int = 8192,
) -> np.ndarray:
    """(size, dim) array of normalized walk samples S / sqrt(2n+1).

    Sampling is chunked; chunk c uses the child seed split(seed, c), so the
    result is independent of the chunk size actually used only through the
    fixed default.  For reproducibility, treat (seed, chunk) as the key.
    """
    if variant == "complex2m" and J is None:
        J = (1, tup.n)
    sm = step_matrix(tup, J, variant)
    norm = 1.0 / math.sqrt(2 * tup.n + 1)
    W = (sm.rows * norm).astype(dtype)
    Wv = None if sm.rows_v is None else (sm.rows_v * norm).astype(dtype)
    comp = dist
    if dist.is_complex:
        if variant != "complex2m":
            raise PreconditionError("complex coefficient laws require the complex2m variant")
        comp = CoefficientDist("gaussian_real")
    out = np.empty((size, sm.dim), dtype=dtype)
    nj = len(sm.j)
    for c, start in enumerate(range(0, size, chunk)):
        stop = min(start + chunk, size)
        rng = np.random.default_rng(split_seed(seed, c))
        xi = comp.sample(rng, (stop - start) * nj).reshape(stop - start, nj).astype(dtype)
        block = xi @ W
        if Wv is not None:
            xi2 = comp.sample(rng, (stop - start) * nj).reshape(stop - start, nj).astype(dtype)
            block = block + xi2 @ Wv
        out[start:stop] = block
    return out


def sample_walk(
    tup: PhaseTuple, dist: CoefficientDist, seed: int = 0, variant: str = "full4m", J=None
) -> WalkSample:
    value = sample_walks(tup, dist, 1, seed=seed, variant=variant, J=J)[0]
    return WalkSample(value=value, seed=int(seed), dist=dist, variant=variant)


@dataclass(frozen=True)
class CharfnResult:
    value: float  # ln |E e(<S, x>)|
    stderr: float
    saturated: bool  # an exactly-zero factor was clipped to the sentinel

    def __float__(self) -> float:
        return self.value


def _log_abs_factor(dist_variant: str, theta: np.ndarray) -> np.ndarray:
    """ln |E e(xi theta)| per step, exact closed forms."""
    if dist_variant == "rademacher":
        return np.log(np.abs(np.cos(theta)))
    if dist_variant == "gaussian_real":
        return -0.5 * theta**2
    if dist_variant == "uniform_symmetric":
        z = math.sqrt(3.0) * theta
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = np.where(z == 0.0, 0.0, np.log(np.abs(np.sinc(z / math.pi))))
        return vals
    raise PreconditionError(f"no closed form for {dist_variant!r}")


def charfn_log_modulus(
    tup: PhaseTuple,
    x: np.ndarray,
    dist: CoefficientDist,
    variant: str = "full4m",
    J=None,
    mc_samples: int = 20_000,
    seed: int = 0,
) -> CharfnResult:
    """ln |E e(<S(t), x>)|, computed in the log domain.

    Exact products for Rademacher / Gaussian / symmetric-uniform laws;
    Monte Carlo over xi (per step, shared draws) otherwise.  Refuses when a
    Monte Carlo factor estimate is indistinguishable from zero at the sample
    budget.
    """
    x = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise PreconditionError("probe vector must be finite")
    if variant == "complex2m" and J is None:
        J = (1, tup.n)
    sm = step_matrix(tup, J, variant)
    if x.shape != (sm.dim,):
        raise PreconditionError(f"probe must have dimension {sm.dim}")
    thetas = [sm.rows @ x]
    if sm.rows_v is not None:
        thetas.append(sm.rows_v @ x)
    comp_variant = dist.variant
    if dist.is_complex:
        if variant != "complex2m":
            raise PreconditionError("complex coefficient laws require the complex2m variant")
        comp_variant = "gaussian_real"
    if comp_variant in ("rademacher", "gaussian_real", "uniform_symmetric"):
        total, saturated = 0.0, False
        for theta in thetas:
            logs = _log_abs_factor(comp_variant, theta)
            if not np.all(np.isfinite(logs)):
                saturated = True
                return CharfnResult(LOG_ZERO_SENTINEL, 0.0, True)
            total += float(logs.sum())
        return CharfnResult(total, 0.0, saturated)
    # Monte Carlo branch (custom laws): independent xi draws per step, so
    # per-step error variances add and the reported stderr is valid.
    rng = np.random.default_rng(split_seed(seed, 0))
    block = max(1, (1 << 23) // max(mc_samples, 1))
    total, var_total = 0.0, 0.0
    for theta in thetas:
        for start in range(0, len(theta), block):
            th = theta[start : start + block]
            xi = dist.sample(rng, mc_samples * len(th)).reshape(mc_samples, len(th))
            ph = xi * th[None, :]
            c = np.cos(ph)
            s = np.sin(ph)
            cm, sm_ = c.mean(axis=0), s.mean(axis=0)
            rho2 = cm**2 + sm_**2
            var_c = c.var(axis=0) / mc_samples
            var_s = s.var(axis=0) / mc_samples
            var_rho2 = 4 * (cm**2 * var_c + sm_**2 * var_s)
            if np.any(rho2 <= 3 * np.sqrt(var_rho2)):
                raise PreconditionError(
                    "characteristic factor indistinguishable from 0 at this sample budget"
                )
            # second-order bias correction for E ln X ~ ln EX - var/(2 EX^2)
            total += float(0.5 * (np.log(rho2) + var_rho2 / (2 * rho2**2)).sum())
            # delta method for ln rho = 0.5 ln rho2
            var_total += float((0.25 * var_rho2 / rho2**2).sum())
    return CharfnResult(total, math.sqrt(var_total), False)


def xi_norm(
    w: float, dist: CoefficientDist, samples: int = 100_000, seed: int = 0
) -> float:
    """(E ||w (xi - xi')||^2_{R/Z})^{1/2}; closed form for Rademacher."""
    if dist.variant == "rademacher":
        return math.sqrt(float(torus_dist(2.0 * w)) ** 2 / 2.0)
    if samples < 1000:
        raise PreconditionError("Monte Carlo xi-norm needs >= 1000 samples")
    rng = np.random.default_rng(split_seed(seed, 0))
    comp = CoefficientDist("gaussian_real") if dist.is_complex else dist
    diff = comp.sample(rng, samples) - comp.sample(rng, samples)
    return float(np.sqrt(np.mean(torus_dist(w * diff) ** 2)))


@dataclass(frozen=True)
class PsiSequence:
    tuple: PhaseTuple
    y: np.ndarray
    y_prime: np.ndarray
    j: np.ndarray
    values: np.ndarray
    variant: str  # psi | psi_prime


def psi_sequence(
    tup: PhaseTuple, y, y_prime, j_range, variant: str = "psi"
) -> PsiSequence:
    """psi(j) = sum_r y_r cos(j t_r/n) - y'_r (j/n) sin(j t_r/n).

    The psi_prime variant (complex-coefficient case) is
    sum_r y_r sin(j t_r/n) + y'_r (j/n) cos(j t_r/n).
    """
    y = np.asarray(y, dtype=np.float64)
    yp = np.asarray(y_prime, dtype=np.float64)
    if y.shape != (tup.m,) or yp.shape != (tup.m,):
        raise PreconditionError(f"y and y' must have dimension m = {tup.m}")
    j = _j_array(tup, j_range) if not isinstance(j_range, np.ndarray) else j_range
    a, b = _ab(tup, j)
    scale = (j / tup.n)[:, None]
    if variant == "psi":
        vals = b @ y - (scale * a) @ yp
    elif variant == "psi_prime":
        vals = a @ y + (scale * b) @ yp
    else:
        raise PreconditionError(f"unknown psi variant {variant!r}")
    return PsiSequence(tup, y, yp, j, vals, variant)


def finite_difference(seq: np.ndarray, k: int, q: int) -> np.ndarray:
    """Order-k step-q discrete differential: sum_i C(k,i)(-1)^i g(j+iq)."""
    if k < 1 or q < 1:
        raise PreconditionError("need k >= 1 and q >= 1")
    seq = np.asarray(seq)
    if len(seq) <= k * q:
        raise PreconditionError("sequence too short for the requested difference")
    out = np.zeros(len(seq) - k * q, dtype=seq.dtype)
    for i in range(k + 1):
        out = out + math.comb(k, i) * (-1) ** i * seq[i * q : i * q + len(out)]
    return out


def twisted_difference(seq: np.ndarray, t0: float, L: int, n: int) -> np.ndarray:
    """(D_{t0} f)(j) = sum_{a=0}^2 C(2,a)(-1)^a e(-a L t0 / n) f(j + a L).

    The twist annihilates the frequency-t0 components f_{t0}, g_{t0}.
    """
    if L < 1:
        raise PreconditionError("L must be a positive integer")
    seq = np.asarray(seq, dtype=np.complex128)
    if len(seq) <= 2 * L:
        raise PreconditionError("sequence too short for a twisted second difference")
    out_len = len(seq) - 2 * L
    out = np.zeros(out_len, dtype=np.complex128)
    for a in range(3):
        weight = math.comb(2, a) * (-1) ** a * np.exp(-1j * a * L * t0 / n)
        out += weight * seq[a * L : a * L + out_len]
    return out


def find_q0(tup: PhaseTuple, q_max: int) -> tuple[int, np.ndarray]:
    """Pigeonhole step: q0 in [1, q_max] minimizing sum_r ||q t_r/(2 pi n)||^2.

    Returns (q0, s) with s_r the signed offsets q0 t_r/(2 pi n) - round(.).
    """
    if q_max < 1:
        raise PreconditionError("q_max must be >= 1")
    base = np.mod(np.asarray(tup.t) / (2 * math.pi * tup.n), 1.0)
    q = np.arange(1, q_max + 1)
    d = torus_dist(np.outer(q, base))
    scores = (d**2).sum(axis=1)
    q0 = int(q[np.argmin(scores)])
    frac = q0 * base
    s = frac - np.round(frac)
    return q0, s


def shift_bound_sides(
    tup: PhaseTuple,
    y,
    y_prime,
    j: int,
    L: int,
    L_prime: int,
    ell: int,
    q0: int,
    k: int,
) -> tuple[float, float]:
    """Both sides of the shift bound, returned for inspection.

    lhs = (L'/n) |y'_1 (1 - e_n(2L' t_1))^2 (1 - e_n(l q0 t_1))^k
          prod_{r>=2} (1 - e_n(L(t_1 - t_r)))^2 (1 - e_n(L(t_1 + t_r)))^2|;
    rhs sums ||psi|| over the shifted triple index set.  The bound asserts
    lhs << rhs with a constant we measure rather than assume.
    """
    if min(j, L, L_prime, ell, q0, k) < 1:
        raise PreconditionError("all shift-bound parameters must be positive integers")
    m, n = tup.m, tup.n
    j_hi = j + k * ell * q0 + 4 * (m - 1) * L + 3 * L_prime
    if j_hi > n:
        raise PreconditionError(f"index range [{j}, {j_hi}] leaves the psi domain [0, {n}]")
    y = np.asarray(y, dtype=np.float64)
    yp = np.asarray(y_prime, dtype=np.float64)
    t = np.asarray(tup.t)
    e_n = lambda theta: np.exp(1j * theta / n)
    lhs = (
        (L_prime / n)
        * abs(yp[0])
        * abs(1 - e_n(2 * L_prime * t[0])) ** 2
        * abs(1 - e_n(ell * q0 * t[0])) ** k
    )
    for r in range(1, m):
        lhs *= abs(1 - e_n(L * (t[0] - t[r]))) ** 2 * abs(1 - e_n(L * (t[0] + t[r]))) ** 2
    idx = (
        j
        + np.arange(1, k + 1)[:, None, None] * ell * q0
        + np.arange(0, 4 * (m - 1) + 1)[None, :, None] * L
        + np.arange(0, 4)[None, None, :] * L_prime
    ).ravel()
    psi = psi_sequence(tup, y, yp, idx, "psi")
    rhs = float(torus_dist(psi.values).sum())
    return float(lhs), rhs


def small_ball_estimate(
    tup: PhaseTuple,
    dist: CoefficientDist,
    w,
    delta: float,
    samples: int = 100_000,
    seed: int = 0,
    variant: str = "full4m",
) -> tuple[float, float]:
    """Empirical P(S/sqrt(2n+1) in B(w, delta)) with binomial standard error."""
    if samples < 10_000:
        raise PreconditionError("small-ball estimation needs >= 1e4 samples")
    dim = 4 * tup.m if variant == "full4m" else 2 * tup.m
    w = np.zeros(dim) if w is None else np.asarray(w, dtype=np.float64)
    hits = 0
    chunk = 65_536
    for c, start in enumerate(range(0, samples, chunk)):
        stop = min(start + chunk, samples)
        block = sample_walks(
            tup, dist, stop - start, seed=seed + 7919 * c, variant=variant, dtype=np.float32
        )
        d2 = ((block - w.astype(np.float32)) ** 2).sum(axis=1)
        hits += int(np.count_nonzero(d2 <= delta * delta))
    p = hits / samples
    return p, math.sqrt(max(p * (1 - p), 1.0 / samples) / samples)


def small_ball_polynomial(
    tup: PhaseTuple,
    dist: CoefficientDist,
    delta: float,
    samples: int = 100_000,
    seed: int = 0,
    r: int = 0,
    derivative: bool = False,
) -> tuple[float, float]:
    """P(|tilde-P(t_r/n)| <= delta) (or the derivative variant) by projection.

    |tilde-P| = hypot(S~[r], S~[2m+r]) and |tilde-P'| = hypot(S~[m+r], S~[3m+r]).
    """
    if samples < 10_000:
        raise PreconditionError("small-ball estimation needs >= 1e4 samples")
    m = tup.m
    i1, i2 = (m + r, 3 * m + r) if derivative else (r, 2 * m + r)
    hits = 0
    chunk = 65_536
    for c, start in enumerate(range(0, samples, chunk)):
        stop = min(start + chunk, samples)
        block = sample_walks(
            tup, dist, stop - start, seed=seed + 7919 * c, dtype=np.float32
        )
        mod2 = block[:, i1] ** 2 + block[:, i2] ** 2
        hits += int(np.count_nonzero(mod2 <= delta * delta))
    p = hits / samples
    return p, math.sqrt(max(p * (1 - p), 1.0 / samples) / samples)
