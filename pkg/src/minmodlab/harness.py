"""Ensemble runner and statistics for the rescaled minimum modulus n * m_n.

The headline experiment draws M independent polynomials, records the global
minimum modulus of each (times the degree), and compares the empirical law
of n * m_n against the exponential with rate 2 sqrt(pi / 3).
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .minima import MeshConfig, build_mesh, global_min
from .polymodel import ModelSpec, PreconditionError, sample_polynomial, split_seed

__all__ = [
    "TARGET_RATE",
    "EnsembleResult",
    "FitReport",
    "run_ensemble",
    "fit_exponential",
    "ks_distance",
    "histogram",
]

# Limiting exponential rate of n * m_n.
TARGET_RATE = 2.0 * math.sqrt(math.pi / 3.0)


@dataclass(frozen=True)
class EnsembleResult:
    spec: ModelSpec
    mesh: MeshConfig
    samples: np.ndarray  # n * m_n per successful replicate (NaN where failed)
    seeds: tuple[int, ...]
    method: str
    wallclock: float
    failures: tuple[tuple[int, str], ...] = ()

    def clean_samples(self) -> np.ndarray:
        return self.samples[np.isfinite(self.samples)]


def _replicate_seed(master_seed: int, i: int) -> int:
    return int(split_seed(master_seed, i).generate_state(1, dtype=np.uint64)[0])


def run_ensemble(
    spec: ModelSpec,
    mesh_params: dict | None = None,
    M: int = 100,
    master_seed: int = 0,
    method: str = "mesh_linearized",
    threads: int = 1,
    resolution: int | None = None,
    refine_iters: int = 40,
) -> EnsembleResult:
    """Draw M replicates and record n * m_n for each.

    Deterministic for a fixed master seed regardless of thread count:
    replicate i always uses the i-th split of the master seed and results
    are folded in replicate order.  Per-replicate failures are recorded and
    flagged (NaN sample), not fatal.
    """
    if M < 1:
        raise PreconditionError("need at least one replicate")
    mesh = build_mesh(spec.n, **(mesh_params or {}))
    if method == "dense_oracle" and resolution is None:
        resolution = 64 * spec.n
    seeds = tuple(_replicate_seed(master_seed, i) for i in range(M))

    def one(seed: int) -> float:
        poly = sample_polynomial(spec, seed)
        gm = global_min(
            poly, method=method, mesh=mesh, resolution=resolution or 0,
            refine_iters=refine_iters,
        )
        return spec.n * gm.value

    t0 = time.perf_counter()
    samples = np.full(M, np.nan)
    failures: list[tuple[int, str]] = []
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(one, s) for s in seeds]
            for i, fut in enumerate(futures):
                try:
                    samples[i] = fut.result()
                except Exception as exc:  # noqa: BLE001 - replicate isolation
                    failures.append((i, str(exc)))
    else:
        for i, s in enumerate(seeds):
            try:
                samples[i] = one(s)
            except Exception as exc:  # noqa: BLE001 - replicate isolation
                failures.append((i, str(exc)))
    wall = time.perf_counter() - t0
    return EnsembleResult(
        spec=spec,
        mesh=mesh,
        samples=samples,
        seeds=seeds,
        method=method,
        wallclock=wall,
        failures=tuple(failures),
    )


@dataclass(frozen=True)
class FitReport:
    lambda_hat_mle: float
    lambda_hat_tail: float
    ks_vs_fitted: float
    ks_vs_target: float
    ci_mle: tuple[float, float]  # bootstrap 95% interval for the MLE rate
    n_samples: int


def fit_exponential(
    samples: np.ndarray,
    tau_grid: np.ndarray | None = None,
    bootstrap: int = 200,
    seed: int = 0,
) -> FitReport:
    """Exponential-rate fit of nonnegative samples.

    Reports the full-sample MLE (1 / mean) and a tail-regression estimate:
    the through-origin slope of -ln(empirical survival) on tau over the grid
    points where survival is at least 0.05.  Both are reported because the
    finite-n law is only asymptotically exponential.
    """
    samples = np.asarray(samples, dtype=np.float64)
    samples = samples[np.isfinite(samples)]
    if len(samples) < 100:
        raise PreconditionError("exponential fitting needs >= 100 samples")
    if np.all(samples == samples[0]):
        raise PreconditionError("degenerate (all-equal) sample")
    mean = float(samples.mean())
    lam_mle = 1.0 / mean
    if tau_grid is None:
        tau_grid = np.linspace(0.0, float(np.quantile(samples, 0.95)), 51)[1:]
    tau_grid = np.asarray(tau_grid, dtype=np.float64)
    surv = np.array([(samples > t).mean() for t in tau_grid])
    keep = (surv >= 0.05) & (tau_grid > 0)
    if not np.any(keep):
        raise PreconditionError("no tau grid points with survival >= 0.05")
    t, y = tau_grid[keep], -np.log(surv[keep])
    lam_tail = float((t @ y) / (t @ t))
    ks_fit = ks_distance(samples, lambda x: 1.0 - np.exp(-lam_mle * x))
    ks_target = ks_distance(samples, lambda x: 1.0 - np.exp(-TARGET_RATE * x))
    rng = np.random.default_rng(split_seed(seed, 0))
    boots = np.empty(bootstrap)
    for b in range(bootstrap):
        boots[b] = 1.0 / rng.choice(samples, size=len(samples), replace=True).mean()
    lo, hi = np.quantile(boots, [0.025, 0.975])
    return FitReport(
        lambda_hat_mle=lam_mle,
        lambda_hat_tail=lam_tail,
        ks_vs_fitted=float(ks_fit),
        ks_vs_target=float(ks_target),
        ci_mle=(float(lo), float(hi)),
        n_samples=len(samples),
    )


def ks_distance(samples_a, reference) -> float:
    """Kolmogorov-Smirnov sup-distance.

    ``reference`` is either a second sample (two-sample statistic) or a
    callable CDF (one-sample statistic).
    """
    a = np.asarray(samples_a, dtype=np.float64)
    if len(a) == 0:
        raise PreconditionError("empty sample")
    if callable(reference):
        return float(stats.kstest(a, reference).statistic)
    b = np.asarray(reference, dtype=np.float64)
    if len(b) == 0:
        raise PreconditionError("empty sample")
    return float(stats.ks_2samp(a, b).statistic)


def histogram(samples, bins: int, range=None) -> str:
    """Histogram as CSV rows: bin_left, bin_right, count, density."""
    if bins < 1:
        raise PreconditionError("need at least one bin")
    samples = np.asarray(samples, dtype=np.float64)
    counts, edges = np.histogram(samples, bins=bins, range=range)
    total = counts.sum()
    widths = np.diff(edges)
    density = counts / (total * widths) if total > 0 else np.zeros(bins)
    lines = ["bin_left,bin_right,count,density"]
    for i, (count, dens) in enumerate(zip(counts, density)):
        lines.append(f"{edges[i]:.17g},{edges[i + 1]:.17g},{count},{dens:.17g}")
    return "\n".join(lines) + "\n"
