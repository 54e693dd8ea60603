import math

import numpy as np
import pytest

from minmodlab import (
    CoefficientDist,
    ModelSpec,
    PreconditionError,
    build_mesh,
    check_derivative_event,
    check_separation,
    evaluate,
    global_min,
    linearize_site,
    process_to_csv,
    sample_polynomial,
    select_minima,
)


def _poly(n=64, dist="gaussian_complex_split", seed=0):
    return sample_polynomial(ModelSpec("symmetric_kac", n, CoefficientDist(dist)), seed)


def test_mesh_resolution_floors():
    mesh = build_mesh(64)
    assert mesh.N_paper == int(64**2 / math.log(64) ** 5)
    assert mesh.N_effective == max(mesh.N_paper, 64 * 64, 129)
    # large n: the quadratic prescription dominates
    big = build_mesh(10_000_000_000)
    assert big.N_effective == big.N_paper > 64 * big.n


def test_mesh_guards():
    with pytest.raises(PreconditionError):
        build_mesh(2)
    with pytest.raises(PreconditionError):
        build_mesh(64, K0=4.0)
    with pytest.raises(PreconditionError):
        build_mesh(64, beta=2)


def test_linearize_site_matches_formulas():
    p, dp, n = 0.3 - 0.4j, 2.0 + 1.0j, 10
    y, z = linearize_site(p, dp, n)
    cross = p * np.conj(dp)
    assert y == pytest.approx(-cross.real / abs(dp) ** 2)
    assert z == pytest.approx(n * cross.imag / abs(dp))
    # the linearization F(x0 + Y) has modulus |Z|/n
    F = p + y * dp
    assert abs(F) == pytest.approx(abs(z) / n)
    with pytest.raises(PreconditionError):
        linearize_site(1.0, 0.0, 10)


def test_linearized_min_is_linearization_optimum():
    # |p + t dp| is minimized over real t at t = Y with value |Z|/n
    rng = np.random.default_rng(1)
    for _ in range(50):
        p = complex(rng.standard_normal(), rng.standard_normal())
        dp = complex(rng.standard_normal(), rng.standard_normal())
        y, z = linearize_site(p, dp, 7)
        ts = np.linspace(y - 1, y + 1, 1001)
        vals = np.abs(p + ts * dp)
        assert abs(z) / 7 <= vals.min() + 1e-12


def test_select_minima_flags_are_consistent():
    poly = _poly(seed=2)
    mesh = build_mesh(64)
    proc = select_minima(poly, mesh)
    n, N = 64, mesh.N_effective
    assert len(proc.thinned_mask) == len(proc.records)
    for r in proc.records[:50]:
        assert abs(r.Y) <= math.pi / N and abs(r.Z) <= math.log(n)
        assert abs(r.p) <= n**-0.5
        assert r.flag_a
        # recorded values match a direct evaluation at x_alpha
        assert complex(evaluate(poly, r.x)) == pytest.approx(r.p, abs=1e-10)


def test_global_min_methods_agree():
    for seed in range(10):
        poly = _poly(seed=seed)
        gm_mesh = global_min(poly, "mesh_linearized")
        gm_dense = global_min(poly, "dense_oracle", resolution=64 * 64)
        assert abs(gm_mesh.value - gm_dense.value) < 5e-3
        # oracle value is achieved by an actual evaluation
        assert abs(evaluate(poly, gm_dense.x)) == pytest.approx(gm_dense.value, abs=1e-12)


def test_dense_oracle_matches_very_dense_reference():
    for seed in range(5):
        poly = _poly(seed=seed)
        quick = global_min(poly, "dense_oracle", resolution=64 * 64)
        ref = global_min(poly, "dense_oracle", resolution=1 << 20, refine_iters=60)
        assert abs(quick.value - ref.value) <= 1e-9 * max(ref.value, 1e-6)


def test_dense_oracle_resolution_guard():
    with pytest.raises(PreconditionError):
        global_min(_poly(), "dense_oracle", resolution=100)


def test_degree_zero_min_is_coefficient_modulus():
    spec = ModelSpec("symmetric_kac", 0, CoefficientDist("gaussian_real"))
    poly = sample_polynomial(spec, 1)
    gm = global_min(poly, "dense_oracle", resolution=16)
    assert gm.value == pytest.approx(abs(poly.coeffs[0]))


def test_check_derivative_event():
    poly = _poly(seed=3)
    holds, sup = check_derivative_event(poly, 2, 2.5)
    assert sup > 0
    assert holds == (sup <= math.log(64) ** 2.5)
    # the reported sup dominates the rescaled derivative at random points
    xs = np.random.default_rng(0).uniform(0, 2 * math.pi * 64, 100)
    vals = np.abs(evaluate(poly, xs, order=2, rescaled=True))
    assert vals.max() <= sup * (1 + 1e-9)


def test_check_separation_returns_pairs():
    poly = _poly(seed=4)
    proc = select_minima(poly, build_mesh(64))
    violations = check_separation(proc)
    for a, b in violations:
        assert 1 <= a <= proc.mesh.N_effective and 1 <= b <= proc.mesh.N_effective


def test_process_csv_shape():
    proc = select_minima(_poly(seed=5), build_mesh(64))
    text = process_to_csv(proc)
    lines = text.strip().split("\n")
    assert lines[0].startswith("alpha,x,")
    assert len(lines) == 1 + len(proc.records)
