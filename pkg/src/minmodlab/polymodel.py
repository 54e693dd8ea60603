"""Random trigonometric polynomial ensembles and their evaluation.

Three ensembles are supported, all normalized to unit variance at each
point of the circle:

* ``symmetric_kac``:  P(x) = (2n+1)^{-1/2} sum_{j=-n..n} xi_j e(jx)
* ``one_sided_kac``:  P(x) = (n+1)^{-1/2}  sum_{j=0..n}  xi_j e(jx)
* ``cos_sin``:        P(x) = (n+a)^{-1/2} [ sqrt(a) xi_0
                              + sum_{j=1..n} xi_j cos(jx) + eta_j sin(jx) ]

Here e(t) = exp(i t).  Coefficients are iid draws from a
:class:`CoefficientDist`.  Sampling is pure: the same (spec, seed) pair
always yields bit-identical coefficients.  Per-index child seeds for
replicated Monte Carlo are derived with the splittable-counter scheme
``SeedSequence(entropy=master, spawn_key=(i,))`` (see :func:`split_seed`),
so ensembles are reproducible independently of worker count.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "PreconditionError",
    "CoefficientDist",
    "ModelSpec",
    "PolySample",
    "split_seed",
    "sample_polynomial",
    "evaluate",
    "evaluate_mesh",
    "poly_to_json",
    "poly_from_json",
]


class PreconditionError(ValueError):
    """An operation was called outside its stated domain."""


# Moment tables E[xi^k], k = 1..8, for the built-in real distributions.
_MOMENTS = {
    "rademacher": (0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0),
    "gaussian_real": (0.0, 1.0, 0.0, 3.0, 0.0, 15.0, 0.0, 105.0),
    # Uniform on [-sqrt(3), sqrt(3)]: E xi^{2k} = 3^k / (2k+1).
    "uniform_symmetric": (0.0, 1.0, 0.0, 9.0 / 5, 0.0, 27.0 / 7, 0.0, 9.0),
}


def _moments_to_cumulants(moments: Sequence[float]) -> list[float]:
    """Raw moments m_1..m_p -> cumulants k_1..k_p (standard recursion)."""
    p = len(moments)
    m = [0.0] + list(moments)
    k = [0.0] * (p + 1)
    for j in range(1, p + 1):
        acc = m[j]
        for i in range(1, j):
            acc -= math.comb(j - 1, i - 1) * k[i] * m[j - i]
        k[j] = acc
    return k[1:]


@dataclass(frozen=True)
class CoefficientDist:
    """A centered, unit-variance coefficient law.

    ``custom`` variants must supply a ``sampler(rng, size) -> ndarray`` and a
    declared moment table (E xi^1 .. E xi^8); moments are never estimated
    internally.
    """

    variant: str = "gaussian_real"
    sampler: Callable | None = None
    moments: tuple[float, ...] | None = None

    def __post_init__(self):
        known = {
            "rademacher",
            "gaussian_real",
            "gaussian_complex_split",
            "uniform_symmetric",
            "custom",
        }
        if self.variant not in known:
            raise PreconditionError(f"unknown coefficient distribution {self.variant!r}")
        if self.variant == "custom":
            if self.sampler is None or self.moments is None:
                raise PreconditionError("custom dist requires sampler and declared moments")
            if abs(self.moments[0]) > 1e-12 or abs(self.moments[1] - 1.0) > 1e-12:
                raise PreconditionError("declared mean must be 0 and variance 1")

    @property
    def is_complex(self) -> bool:
        return self.variant == "gaussian_complex_split"

    def moment_table(self) -> tuple[float, ...]:
        if self.variant == "custom":
            return self.moments
        if self.variant == "gaussian_complex_split":
            raise PreconditionError(
                "gaussian_complex_split has no real moment table; use the complex walk variant"
            )
        return _MOMENTS[self.variant]

    def cumulant(self, order: int) -> float:
        """Cumulant kappa_order of the (real) coefficient law."""
        table = self.moment_table()
        if order > len(table):
            raise PreconditionError(
                f"moments up to order {order} required, only {len(table)} declared"
            )
        return _moments_to_cumulants(table[:order])[order - 1]

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.variant == "rademacher":
            return rng.integers(0, 2, size=size).astype(np.float64) * 2.0 - 1.0
        if self.variant == "gaussian_real":
            return rng.standard_normal(size)
        if self.variant == "uniform_symmetric":
            return rng.uniform(-math.sqrt(3.0), math.sqrt(3.0), size=size)
        if self.variant == "gaussian_complex_split":
            re = rng.standard_normal(size)
            im = rng.standard_normal(size)
            return (re + 1j * im) / math.sqrt(2.0)
        vals = np.asarray(self.sampler(rng, size))
        if vals.shape != (size,):
            raise PreconditionError(
                f"custom sampler returned shape {vals.shape}, expected ({size},)"
            )
        if not np.all(np.isfinite(vals)):
            bad = int(np.count_nonzero(~np.isfinite(vals)))
            raise PreconditionError(f"custom sampler returned {bad} non-finite values")
        return vals


@dataclass(frozen=True)
class ModelSpec:
    """Which polynomial ensemble to draw from."""

    model: str  # symmetric_kac | one_sided_kac | cos_sin
    n: int
    dist: CoefficientDist = field(default_factory=CoefficientDist)
    a: float | None = None  # cos_sin only

    def __post_init__(self):
        if self.model not in ("symmetric_kac", "one_sided_kac", "cos_sin"):
            raise PreconditionError(f"unknown model {self.model!r}")
        if self.n < 0:
            raise PreconditionError("degree must be >= 0")
        if self.model == "cos_sin":
            if self.a is None or self.a <= 0:
                raise PreconditionError("cos_sin requires a > 0")
            if not self.dist.is_complex:
                warnings.warn(
                    "cos_sin with real coefficients is likely to have roots on the circle",
                    stacklevel=2,
                )

    @property
    def num_coeffs(self) -> int:
        if self.model == "one_sided_kac":
            return self.n + 1
        return 2 * self.n + 1

    @property
    def normalization(self) -> float:
        if self.model == "symmetric_kac":
            return 1.0 / math.sqrt(2 * self.n + 1)
        if self.model == "one_sided_kac":
            return 1.0 / math.sqrt(self.n + 1)
        return 1.0 / math.sqrt(self.n + self.a)


@dataclass(frozen=True)
class PolySample:
    """A drawn polynomial: model-basis coefficients, unnormalized.

    The normalization factor is applied at evaluation time, never stored.
    For ``cos_sin`` the layout is (xi_0, xi_1..xi_n, eta_1..eta_n).
    """

    spec: ModelSpec
    coeffs: np.ndarray
    seed: int

    @property
    def n(self) -> int:
        return self.spec.n

    def exp_coeffs(self) -> tuple[np.ndarray, int]:
        """Coefficients c_j on the exponential basis e(jx), j = j_min..j_max.

        Returns (c, j_min); the normalization is folded in, so
        P(x) = sum_j c[j - j_min] e(jx).
        """
        n, norm = self.spec.n, self.spec.normalization
        if self.spec.model == "symmetric_kac":
            return norm * self.coeffs.astype(np.complex128), -n
        if self.spec.model == "one_sided_kac":
            return norm * self.coeffs.astype(np.complex128), 0
        xi0 = self.coeffs[0]
        xi = self.coeffs[1 : n + 1]
        eta = self.coeffs[n + 1 :]
        c = np.zeros(2 * n + 1, dtype=np.complex128)
        c[n] = math.sqrt(self.spec.a) * xi0
        c[n + 1 :] = (xi - 1j * eta) / 2.0  # j = 1..n
        c[:n] = ((xi + 1j * eta) / 2.0)[::-1]  # j = -1..-n reversed
        return norm * c, -n


def split_seed(master_seed: int, index: int) -> np.random.SeedSequence:
    """Child seed #index of a master seed (splittable-counter scheme)."""
    return np.random.SeedSequence(entropy=master_seed, spawn_key=(index,))


def sample_polynomial(spec: ModelSpec, seed: int) -> PolySample:
    """Draw one polynomial; deterministic for fixed (spec, seed)."""
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    coeffs = spec.dist.sample(rng, spec.num_coeffs)
    return PolySample(spec=spec, coeffs=coeffs, seed=int(seed))


def evaluate(poly: PolySample, x, order: int = 0, rescaled: bool = False):
    """P^{(order)}(x) for order in {0, 1, 2}; vectorized in x.

    With ``rescaled=True`` the argument is s and the value is the rescaled
    polynomial tilde-P^{(order)}(s) = n^{-order} P^{(order)}(s/n).
    """
    if order not in (0, 1, 2):
        raise PreconditionError("order must be 0, 1 or 2")
    c, j_min = poly.exp_coeffs()
    j = np.arange(j_min, j_min + len(c))
    cj = c * (1j * j) ** order
    x = np.asarray(x, dtype=np.float64)
    n = max(poly.n, 1)
    arg = x / n if rescaled else x
    vals = np.exp(1j * np.outer(np.atleast_1d(arg), j)) @ cj
    if rescaled:
        vals = vals / float(n) ** order
    return vals[0] if x.ndim == 0 else vals


def evaluate_mesh(poly: PolySample, N: int, order: int = 0) -> np.ndarray:
    """P^{(order)} at x_alpha = 2 pi alpha / N, alpha = 1..N, via zero-padded FFT.

    Derivatives are taken in coefficient space (multiply by i*j), exact for
    trigonometric polynomials.  Requires N >= 2n+1 (no aliasing).
    """
    if order not in (0, 1, 2):
        raise PreconditionError("mesh evaluation supports order 0, 1 or 2")
    n = poly.n
    if N < 2 * n + 1:
        raise PreconditionError(f"N={N} < 2n+1={2 * n + 1} would alias")
    c, j_min = poly.exp_coeffs()
    j = np.arange(j_min, j_min + len(c))
    cj = c * (1j * j) ** order
    buf = np.zeros(N, dtype=np.complex128)
    np.add.at(buf, np.mod(j, N), cj)
    vals0 = np.fft.ifft(buf) * N  # value at alpha = 0..N-1
    return np.concatenate([vals0[1:], vals0[:1]])  # alpha = 1..N


def poly_to_json(poly: PolySample) -> str:
    """Serialize a sample for reproducibility."""
    coeffs = np.asarray(poly.coeffs, dtype=np.complex128)
    doc = {
        "model": poly.spec.model,
        "n": poly.spec.n,
        "dist": poly.spec.dist.variant,
        "a": poly.spec.a,
        "coeffs": [[float(z.real), float(z.imag)] for z in coeffs],
        "seed": poly.seed,
    }
    return json.dumps(doc)


def poly_from_json(text: str, dist: CoefficientDist | None = None) -> PolySample:
    """Inverse of :func:`poly_to_json`.

    The coefficient law is not serializable in general (custom samplers), so
    an explicit ``dist`` may be supplied; built-in variants round-trip.
    """
    doc = json.loads(text)
    if dist is None:
        if doc["dist"] == "custom":
            raise PreconditionError("custom dist cannot be reconstructed from JSON alone")
        dist = CoefficientDist(doc["dist"])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        spec = ModelSpec(model=doc["model"], n=doc["n"], dist=dist, a=doc.get("a"))
    coeffs = np.array([complex(re, im) for re, im in doc["coeffs"]])
    if not dist.is_complex and np.allclose(coeffs.imag, 0.0):
        coeffs = coeffs.real
    if len(coeffs) != spec.num_coeffs:
        raise PreconditionError("coefficient count does not match model")
    return PolySample(spec=spec, coeffs=coeffs, seed=int(doc["seed"]))
