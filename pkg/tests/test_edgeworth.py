import math

import numpy as np
import pytest
from scipy.integrate import quad

from minmodlab import (
    CoefficientDist,
    GaussianComparison,
    PhaseTuple,
    PreconditionError,
    average_cumulants,
    box_probability,
    build_expansion,
    compare_box,
    covariance,
    random_smooth_spread_tuple,
    step_matrix,
)
from minmodlab.edgeworth import CumulantSet


def _tuple(n=64, m=1, seed=0):
    rng = np.random.default_rng(seed)
    return random_smooth_spread_tuple(n, m, rng, K=n**0.3)


def test_gaussian_higher_cumulants_vanish():
    cs = average_cumulants(_tuple(), CoefficientDist("gaussian_real"), 4)
    for nu, val in cs.values.items():
        if sum(nu) in (3, 4):
            assert abs(val) < 1e-12


def test_second_order_cumulants_match_covariance():
    tup = _tuple(seed=1)
    V, _ = covariance(tup)
    for dist in ("rademacher", "uniform_symmetric"):
        cs = average_cumulants(tup, CoefficientDist(dist), 4)
        d = cs.dim
        for i in range(d):
            for k in range(i, d):
                nu = tuple((2 if q == i else 0) if i == k else int(q in (i, k))
                           for q in range(d))
                # chi_nu = kappa_2 * avg(w_i^a w_k^b); off-diagonal nu has
                # multiplicity 1 in the moment average, matching V directly
                assert cs.get(nu) == pytest.approx(V[i, k], abs=1e-12)


def test_odd_cumulants_vanish_for_symmetric_laws():
    cs = average_cumulants(_tuple(seed=2), CoefficientDist("rademacher"), 5)
    for nu, val in cs.values.items():
        if sum(nu) % 2 == 1:
            assert abs(val) < 1e-12


def test_rademacher_fourth_cumulant_formula():
    tup = _tuple(seed=3)
    cs = average_cumulants(tup, CoefficientDist("rademacher"), 4)
    W = step_matrix(tup).rows
    nu = (4, 0, 0, 0)
    assert cs.get(nu) == pytest.approx(-2.0 * float((W[:, 0] ** 4).mean()))
    nu = (2, 1, 1, 0)
    direct = -2.0 * float((W[:, 0] ** 2 * W[:, 1] * W[:, 2]).mean())
    assert cs.get(nu) == pytest.approx(direct)


def test_cumulant_additivity_over_disjoint_index_sets():
    tup = _tuple(seed=4)
    n = tup.n
    full = average_cumulants(tup, CoefficientDist("uniform_symmetric"), 4)
    left = average_cumulants(tup, CoefficientDist("uniform_symmetric"), 4, J=(-n, 0))
    right = average_cumulants(tup, CoefficientDist("uniform_symmetric"), 4, J=(1, n))
    wl, wr = (n + 1) / (2 * n + 1), n / (2 * n + 1)
    for nu, val in full.values.items():
        assert val == pytest.approx(wl * left.get(nu) + wr * right.get(nu), abs=1e-12)


def test_missing_moments_refused():
    short = CoefficientDist(
        "custom",
        sampler=lambda rng, size: rng.standard_normal(size),
        moments=(0.0, 1.0, 0.0, 3.0),
    )
    with pytest.raises(PreconditionError):
        average_cumulants(_tuple(), short, 6)
    with pytest.raises(PreconditionError):
        average_cumulants(_tuple(), CoefficientDist("rademacher"), 7)


def _manual_1d_cumulants(k3, k4, n_steps):
    return CumulantSet(order=4, dim=1, n_steps=n_steps,
                       values={(3,): k3, (4,): k4}, moments_used=())


def test_order_2_expansion_is_pure_gaussian():
    V = np.array([[0.7]])
    dens = build_expansion(None, V, 2)
    xs = np.linspace(-3, 3, 11)[:, None]
    expect = np.exp(-xs[:, 0] ** 2 / 1.4) / math.sqrt(2 * math.pi * 0.7)
    assert np.allclose(dens.pdf(xs), expect, atol=1e-14)
    assert dens.corrections == ()


def test_symmetric_law_order_3_equals_order_2():
    tup = _tuple(seed=5)
    V, _ = covariance(tup)
    cs = average_cumulants(tup, CoefficientDist("rademacher"), 4)
    d2 = build_expansion(cs, V, 2)
    d3 = build_expansion(cs, V, 3)
    xs = np.random.default_rng(0).normal(size=(50, 4))
    assert np.allclose(d2.pdf(xs), d3.pdf(xs), atol=1e-14)


def test_one_dimensional_oracle_order_4():
    # textbook Edgeworth density with variance v, skew k3, excess k4
    v, k3, k4, N = 0.8, -0.3, 0.5, 37
    dens = build_expansion(_manual_1d_cumulants(k3, k4, N), np.array([[v]]), 4)
    xs = np.linspace(-4, 4, 201)

    def oracle(x):
        z = x / math.sqrt(v)
        phi = math.exp(-x * x / (2 * v)) / math.sqrt(2 * math.pi * v)
        he3 = (z**3 - 3 * z) / v**1.5
        he4 = (z**4 - 6 * z**2 + 3) / v**2
        he6 = (z**6 - 15 * z**4 + 45 * z**2 - 15) / v**3
        return phi * (1 + N**-0.5 * (k3 / 6) * he3
                      + (1 / N) * ((k4 / 24) * he4 + (k3**2 / 72) * he6))

    ours = dens.pdf(xs[:, None])
    expect = np.array([oracle(x) for x in xs])
    assert np.abs(ours - expect).max() <= 1e-10


def test_expansion_moment_matching_and_cancellation():
    v, k3, k4, N = 0.6, 0.4, -0.7, 25
    dens = build_expansion(_manual_1d_cumulants(k3, k4, N), np.array([[v]]), 4)
    mass, _ = quad(lambda x: float(dens.pdf([[x]])[0]), -12, 12, limit=200)
    mean, _ = quad(lambda x: x * float(dens.pdf([[x]])[0]), -12, 12, limit=200)
    second, _ = quad(lambda x: x * x * float(dens.pdf([[x]])[0]), -12, 12, limit=200)
    assert mass == pytest.approx(1.0, abs=1e-8)
    assert mean == pytest.approx(0.0, abs=1e-4)
    assert second == pytest.approx(v, abs=1e-4)


def test_near_singular_covariance_refused():
    with pytest.raises(PreconditionError):
        build_expansion(None, np.array([[1.0, 1.0], [1.0, 1.0]]), 2)
    with pytest.raises(PreconditionError):
        build_expansion(None, np.array([[1.0]]), 5)


def test_box_probability_normalization():
    tup = _tuple(seed=6)
    V, _ = covariance(tup)
    cs = average_cumulants(tup, CoefficientDist("rademacher"), 4)
    dens = build_expansion(cs, V, 4)
    sig = np.sqrt(np.diag(V))
    box = [(-10 * s, 10 * s) for s in sig]
    assert box_probability(dens, box) == pytest.approx(1.0, abs=1e-6)
    assert box_probability(GaussianComparison(V), box) == pytest.approx(1.0, abs=1e-6)


def test_box_probability_symmetric_box_order_collapse():
    tup = _tuple(seed=7)
    V, _ = covariance(tup)
    cs = average_cumulants(tup, CoefficientDist("rademacher"), 4)
    box = [(-0.4, 0.4)] * 4
    p2 = box_probability(build_expansion(cs, V, 2), box)
    p3 = box_probability(build_expansion(cs, V, 3), box)
    assert p3 == pytest.approx(p2, abs=1e-9)


def test_box_probability_guards():
    V = np.eye(2)
    g = GaussianComparison(V)
    with pytest.raises(PreconditionError):
        box_probability(g, [(0.0, 1.0)])  # wrong dimension
    with pytest.raises(PreconditionError):
        box_probability(g, [(1.0, 1.0), (0.0, 1.0)])  # empty side
    # a box entirely beyond the 9-sigma clip carries no mass
    assert box_probability(g, [(10.0, 11.0), (0.0, 1.0)]) == 0.0


def test_compare_box_gaussian_equals_order_2_field():
    tup = _tuple(n=32, seed=8)
    rec = compare_box(tup, CoefficientDist("rademacher"), [(-0.5, 0.5)] * 4,
                      samples=10_000, ell=2, seed=1)
    assert rec["edgeworth"] == rec["gaussian"]
    assert 0 <= rec["empirical"] <= 1 and rec["stderr"] > 0


def test_compare_box_point_mass_stub():
    stub = CoefficientDist(
        "custom",
        sampler=lambda rng, size: np.zeros(size),
        moments=(0.0, 1.0, 0.0, 3.0, 0.0, 15.0, 0.0, 105.0),
    )
    tup = _tuple(n=32, seed=9)
    inside = compare_box(tup, stub, [(-0.5, 0.5)] * 4, samples=10_000, ell=2)
    assert inside["empirical"] == 1.0
    outside = compare_box(tup, stub, [(1.0, 2.0)] + [(-0.5, 0.5)] * 3, samples=10_000, ell=2)
    assert outside["empirical"] == 0.0


def test_compare_box_edgeworth_beats_gaussian():
    # the 4th-order correction should reduce the defect for Rademacher signs
    tup = PhaseTuple((700.0,), 512)
    rec = compare_box(tup, CoefficientDist("rademacher"), [(-0.5, 0.5)] * 4,
                      samples=200_000, ell=4, seed=3)
    assert abs(rec["diff_edgeworth"]) <= abs(rec["diff_gaussian"]) + 2 * rec["stderr"]
