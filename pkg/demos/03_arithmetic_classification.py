"""Diophantine classification of angles: smoothness, spread, bad arcs.

An angle is K-smooth when its small integer multiples stay away from
integers after the rescaling t / (pi n); tuples are lambda-spread when the
pairwise sums and differences of their entries are separated on the rescaled
torus.  Mesh points failing smoothness form the "bad arcs" that the thinned
point process excludes.  A dilation search finds an integer multiplier that
spreads a given tuple out again.
"""

import numpy as np

from minmodlab import (
    PhaseTuple,
    build_mesh,
    classify_bad_arcs,
    find_dilation,
    is_smooth,
    is_spread,
    random_smooth_spread_tuple,
)


def main() -> None:
    n = 512
    rng = np.random.default_rng(3)
    K = n**0.3

    tup = random_smooth_spread_tuple(n, 2, rng, K=K)
    print(f"sampled tuple (n = {n}, K = {K:.2f}): t = "
          f"({tup.t[0]:.2f}, {tup.t[1]:.2f})")
    print(f"  K-smooth entries: {[is_smooth(t, K, n) for t in tup.t]}")
    print(f"  1-spread: {is_spread(tup, 1.0)}")

    # rational angles are maximally non-smooth
    rational = n * np.pi / 3
    print(f"rational angle t = n pi / 3: 2-smooth = {is_smooth(rational, 2.0, n)}")

    mesh = build_mesh(n)
    for kappa in (0.05, 0.1, 0.2):
        bad = classify_bad_arcs(mesh, kappa)
        print(f"bad arcs at kappa = {kappa}: {bad.sum()} of {mesh.N_effective} "
          f"mesh points ({100 * bad.mean():.2f}%)")

    # a clustered tuple can be spread back out by an integer dilation
    t0 = float(rng.uniform(0, np.pi * n))
    clustered = PhaseTuple((t0, t0 + 0.3), n)
    print(f"clustered tuple 1-spread: {is_spread(clustered, 1.0)}")
    dil = find_dilation(clustered, lam=1.0, K=K)
    print(f"dilation search: L = {dil.L}, achieved separation = {dil.achieved:.3f}/n")


if __name__ == "__main__":
    main()
