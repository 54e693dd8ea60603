"""Finite-difference and twisted-difference identities on exponentials.

The arithmetic analysis of the walk rests on a few exact identities for
sequences e_n(jt) = exp(ijt/n): the order-k step-q difference acts as
multiplication by (1 - e_n(qt))^k; a phase-twisted second difference
annihilates its target frequency exactly and transfers onto other
frequencies with an explicit factor; and the psi sequence (the torus
distance input) has a closed-form k-th difference.  This script evaluates
each identity numerically and prints the worst error.
"""

import math

import numpy as np

from minmodlab import (
    PhaseTuple,
    find_q0,
    finite_difference,
    psi_sequence,
    shift_bound_sides,
    twisted_difference,
)


def main() -> None:
    rng = np.random.default_rng(9)
    n = 256
    j = np.arange(0, 120)
    t0, t = rng.uniform(0, 2 * math.pi * n, size=2)
    L, k, q = 5, 2, 3

    f = np.exp(1j * j * t / n)
    lhs = finite_difference(f, k, q)
    rhs = (1 - np.exp(1j * q * t / n)) ** k * f[: len(lhs)]
    print(f"eigen-identity error:          {np.abs(lhs - rhs).max():.2e}")

    ft0 = np.exp(1j * j * t0 / n)
    print(f"twisted annihilation residual: {np.abs(twisted_difference(ft0, t0, L, n)).max():.2e}")

    lhs = twisted_difference(f, t0, L, n)
    rhs = (1 - np.exp(1j * L * (t - t0) / n)) ** 2 * f[: len(lhs)]
    print(f"twisted transfer error:        {np.abs(lhs - rhs).max():.2e}")

    tup = PhaseTuple((t0, t), n)
    y, yp = rng.standard_normal(2), rng.standard_normal(2)
    seq = psi_sequence(tup, y, yp, j).values
    lhs = finite_difference(seq, k, q)
    jj = j[: len(lhs)]
    rhs = np.zeros(len(lhs))
    for r in range(2):
        tr = tup.t[r]
        w = 1 - np.exp(1j * q * tr / n)
        F = w**k * np.exp(1j * jj * tr / n)
        dF = (1j * jj / n) * F - k * (1j * q / n) * np.exp(1j * q * tr / n) * w ** (
            k - 1
        ) * np.exp(1j * jj * tr / n)
        rhs += y[r] * F.real + yp[r] * dF.real
    print(f"psi-difference identity error: {np.abs(lhs - rhs).max():.2e}")

    q0, s = find_q0(tup, 16)
    print(f"\npigeonhole step q0 = {q0}, offsets = {np.round(s, 4)}")
    lhs_v, rhs_v = shift_bound_sides(tup, y, yp, j=3, L=5, L_prime=2, ell=2, q0=q0, k=3)
    print(f"shift bound: lhs = {lhs_v:.3e} <= C * rhs = C * {rhs_v:.3e}")


if __name__ == "__main__":
    main()
