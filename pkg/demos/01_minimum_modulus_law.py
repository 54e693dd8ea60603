"""The limiting exponential law of the rescaled minimum modulus.

Draws an ensemble of random trigonometric polynomials, records n * m_n for
each replicate with the dense-oracle minimizer, and fits an exponential to
the empirical law.  The fitted rate approaches 2 sqrt(pi / 3) ~ 2.0466 as
the degree grows; at the small degree used here the agreement is already
visible.  Runs in well under a minute.
"""

import numpy as np

from minmodlab import (
    TARGET_RATE,
    CoefficientDist,
    ModelSpec,
    fit_exponential,
    histogram,
    run_ensemble,
)


def main() -> None:
    n, M = 200, 1500
    spec = ModelSpec("symmetric_kac", n, CoefficientDist("gaussian_complex_split"))
    res = run_ensemble(spec, M=M, master_seed=7, method="dense_oracle", threads=4)
    s = res.clean_samples()
    fit = fit_exponential(s)

    print(f"degree n = {n}, replicates M = {M}, wallclock = {res.wallclock:.1f}s")
    print(f"target rate        2 sqrt(pi/3) = {TARGET_RATE:.4f}")
    print(f"fitted rate (MLE)               = {fit.lambda_hat_mle:.4f}")
    print(f"fitted rate (tail regression)   = {fit.lambda_hat_tail:.4f}")
    print(f"bootstrap 95% CI for the rate   = ({fit.ci_mle[0]:.4f}, {fit.ci_mle[1]:.4f})")
    print(f"KS distance vs target law       = {fit.ks_vs_target:.4f}")
    print()
    print("histogram of n * m_n (first bins):")
    for line in histogram(s, bins=25, range=(0, float(np.quantile(s, 0.99)))).splitlines()[:9]:
        print("  " + line)


if __name__ == "__main__":
    main()
