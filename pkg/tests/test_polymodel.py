import json
import math
import warnings

import numpy as np
import pytest

from minmodlab import (
    CoefficientDist,
    ModelSpec,
    PreconditionError,
    evaluate,
    evaluate_mesh,
    poly_from_json,
    poly_to_json,
    sample_polynomial,
    split_seed,
)


def test_unknown_dist_rejected():
    with pytest.raises(PreconditionError):
        CoefficientDist("levy")


def test_custom_requires_sampler_and_moments():
    with pytest.raises(PreconditionError):
        CoefficientDist("custom")
    with pytest.raises(PreconditionError):
        CoefficientDist("custom", sampler=lambda r, s: r.standard_normal(s),
                        moments=(0.5, 1, 0, 3, 0, 15, 0, 105))


def test_moment_tables_match_numeric_integrals():
    rng = np.random.default_rng(0)
    u = rng.uniform(-math.sqrt(3), math.sqrt(3), 4_000_000)
    table = CoefficientDist("uniform_symmetric").moment_table()
    for k, m in enumerate(table, start=1):
        est = (u**k).mean()
        assert abs(est - m) < 0.02 * max(1.0, abs(m))
    # exact values for the uniform law: E xi^{2k} = 3^k / (2k + 1)
    assert table[3] == pytest.approx(9.0 / 5.0)
    assert table[5] == pytest.approx(27.0 / 7.0)
    assert table[7] == pytest.approx(9.0)


def test_cumulants_from_moments():
    # standard normal: kappa_2 = 1, all others zero
    g = CoefficientDist("gaussian_real")
    assert g.cumulant(2) == pytest.approx(1.0)
    for order in (1, 3, 4, 5, 6):
        assert g.cumulant(order) == pytest.approx(0.0, abs=1e-12)
    # rademacher: kappa_4 = E xi^4 - 3 (E xi^2)^2 = -2
    r = CoefficientDist("rademacher")
    assert r.cumulant(4) == pytest.approx(-2.0)
    assert r.cumulant(6) == pytest.approx(16.0)
    # uniform on [-sqrt(3), sqrt(3)]: kappa_4 = 9/5 - 3 = -6/5
    u = CoefficientDist("uniform_symmetric")
    assert u.cumulant(4) == pytest.approx(-1.2)


def test_sampling_determinism_and_laws():
    for variant in ("rademacher", "gaussian_real", "uniform_symmetric",
                    "gaussian_complex_split"):
        spec = ModelSpec("symmetric_kac", 50, CoefficientDist(variant))
        a = sample_polynomial(spec, 7)
        b = sample_polynomial(spec, 7)
        assert np.array_equal(a.coeffs, b.coeffs)
    r = CoefficientDist("rademacher").sample(np.random.default_rng(1), 10_000)
    assert set(np.unique(r)) == {-1.0, 1.0}
    z = CoefficientDist("gaussian_complex_split").sample(np.random.default_rng(1), 200_000)
    assert abs(np.var(z.real) - 0.5) < 0.01 and abs(np.var(z.imag) - 0.5) < 0.01


def test_custom_sampler_nonfinite_rejected():
    bad = CoefficientDist(
        "custom",
        sampler=lambda rng, size: np.full(size, np.nan),
        moments=(0.0, 1.0, 0.0, 3.0, 0.0, 15.0, 0.0, 105.0),
    )
    with pytest.raises(PreconditionError):
        bad.sample(np.random.default_rng(0), 5)


def test_unit_variance_normalization():
    # var of P(x) at fixed x should be ~1 for every model
    rng_seeds = range(400)
    for model, a in (("symmetric_kac", None), ("one_sided_kac", None), ("cos_sin", 1.0)):
        dist = CoefficientDist("gaussian_complex_split" if model == "cos_sin"
                               else "gaussian_real")
        spec = ModelSpec(model, 30, dist, a=a)
        vals = np.array([complex(evaluate(sample_polynomial(spec, s), 0.7))
                         for s in rng_seeds])
        assert abs(np.mean(np.abs(vals) ** 2) - 1.0) < 0.15


def test_cos_sin_real_dist_warns():
    with pytest.warns(UserWarning):
        ModelSpec("cos_sin", 10, CoefficientDist("rademacher"), a=1.0)


def test_evaluate_derivative_matches_finite_difference():
    spec = ModelSpec("symmetric_kac", 20, CoefficientDist("gaussian_real"))
    poly = sample_polynomial(spec, 3)
    h = 1e-6
    for order in (1, 2):
        lower = evaluate(poly, 1.0 - h, order=order - 1)
        upper = evaluate(poly, 1.0 + h, order=order - 1)
        fd = (upper - lower) / (2 * h)
        assert abs(fd - evaluate(poly, 1.0, order=order)) < 1e-5


def test_rescaled_evaluation():
    spec = ModelSpec("symmetric_kac", 16, CoefficientDist("gaussian_real"))
    poly = sample_polynomial(spec, 5)
    s = 2.5
    direct = evaluate(poly, s / 16, order=1) / 16
    assert complex(evaluate(poly, s, order=1, rescaled=True)) == pytest.approx(complex(direct))


def test_mesh_evaluation_agrees_with_direct():
    for model, dist, a in (
        ("symmetric_kac", "gaussian_complex_split", None),
        ("one_sided_kac", "rademacher", None),
        ("cos_sin", "gaussian_complex_split", 2.0),
    ):
        spec = ModelSpec(model, 17, CoefficientDist(dist), a=a)
        poly = sample_polynomial(spec, 11)
        for order in (0, 1):
            N = 123
            mesh_vals = evaluate_mesh(poly, N, order=order)
            xs = 2 * math.pi * np.arange(1, N + 1) / N
            direct = evaluate(poly, xs, order=order)
            assert np.abs(mesh_vals - direct).max() < 1e-11


def test_mesh_refuses_aliasing():
    spec = ModelSpec("symmetric_kac", 50, CoefficientDist("gaussian_real"))
    poly = sample_polynomial(spec, 0)
    with pytest.raises(PreconditionError):
        evaluate_mesh(poly, 100)  # < 2n+1


def test_json_round_trip():
    for dist in ("rademacher", "gaussian_complex_split"):
        spec = ModelSpec("symmetric_kac", 12, CoefficientDist(dist))
        poly = sample_polynomial(spec, 9)
        back = poly_from_json(poly_to_json(poly))
        assert np.allclose(np.asarray(back.coeffs, dtype=complex),
                           np.asarray(poly.coeffs, dtype=complex))
        assert back.spec.model == poly.spec.model and back.seed == poly.seed
    doc = json.loads(poly_to_json(poly))
    assert doc["n"] == 12


def test_split_seed_children_distinct_and_stable():
    a = split_seed(42, 0).generate_state(2)
    b = split_seed(42, 1).generate_state(2)
    c = split_seed(42, 0).generate_state(2)
    assert not np.array_equal(a, b)
    assert np.array_equal(a, c)
