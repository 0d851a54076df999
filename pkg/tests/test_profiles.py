import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.integrate import quad

from memflow import (
    ConstantSet,
    InputError,
    Profile,
    UnsupportedDimensionError,
    compute_constants,
    coupling_ft_tail_mass,
    coupling_tail_mass,
    radius_for_tail,
)

from oracles import fourier_transform_oracle

BASE = Profile(dimension=3)


def test_value_at_center_is_amplitude():
    assert BASE.value(np.zeros(3)) == 1.0
    assert Profile(dimension=3, amplitude=2.0).value(np.zeros(3)) == 2.0


def test_value_closed_form():
    got = BASE.value(np.array([1.0, 0.0, 0.0]))
    assert_allclose(got, math.exp(-0.5), rtol=1e-15)
    assert abs(got - 0.6065306597) < 1e-9


def test_value_dimension_mismatch():
    with pytest.raises(InputError):
        BASE.value(np.zeros(2))


def test_coupling_vanishes_at_origin():
    for prof in (BASE, Profile(dimension=3, center=[0.3, -0.1, 0.2])):
        assert_allclose(prof.coupling(np.zeros(3)), np.zeros(3))


def test_coupling_odd_for_radial():
    eta = np.array([0.4, -1.2, 0.7])
    assert_allclose(BASE.coupling(-eta), -BASE.coupling(eta), rtol=0, atol=0)


def test_coupling_closed_form():
    got = BASE.coupling(np.array([1.0, 0.0, 0.0]))
    assert_allclose(got, [math.exp(-1.0), 0.0, 0.0], rtol=1e-15)


def test_coupling_ft_zero_at_origin_for_radial():
    assert_allclose(BASE.coupling_ft(np.zeros(3)), np.zeros(3))


def test_coupling_ft_closed_form_matches_brute_force():
    y = np.array([1.0, 0.0, 0.0])
    expected = -1j * y / 2**2.5 * np.exp(-0.25)
    assert_allclose(BASE.coupling_ft(y), expected, atol=1e-14)
    brute = fourier_transform_oracle(BASE, y)
    assert_allclose(BASE.coupling_ft(y), brute, atol=1e-10)


def test_coupling_ft_shifted_matches_brute_force():
    prof = Profile(dimension=3, amplitude=1.3, center=[0.4, -0.2, 0.1], width=0.9)
    rng = np.random.RandomState(7)
    for _ in range(3):
        y = rng.uniform(-1.5, 1.5, size=3)
        assert_allclose(prof.coupling_ft(y), fourier_transform_oracle(prof, y), atol=1e-9)


def test_coupling_ft_conjugate_symmetry():
    rng = np.random.RandomState(3)
    prof = Profile(dimension=3, center=[0.2, 0.0, -0.5])
    for _ in range(5):
        y = rng.uniform(-2, 2, size=3)
        assert_allclose(prof.coupling_ft(-y), np.conj(prof.coupling_ft(y)), rtol=1e-13)


def test_coupling_ft_jacobian_consistent_with_finite_differences():
    prof = Profile(dimension=3, center=[0.3, 0.1, 0.0], width=1.1)
    y = np.array([0.7, -0.4, 0.2])
    jac = prof.coupling_ft_jacobian(y)
    eps = 1e-6
    for i in range(3):
        e = np.zeros(3)
        e[i] = eps
        fd = (prof.coupling_ft(y + e) - prof.coupling_ft(y - e)) / (2 * eps)
        assert_allclose(jac[:, i], fd, atol=1e-8)


def test_radial_norm_helpers_match_pointwise_values():
    prof = Profile(dimension=3, amplitude=0.8, center=[0.5, -0.3, 0.2], width=1.2)
    rng = np.random.RandomState(11)
    for _ in range(5):
        y = rng.uniform(-2, 2, size=3)
        rho = np.linalg.norm(y)
        assert_allclose(np.linalg.norm(prof.coupling_ft(y)), prof.coupling_ft_norm(rho), rtol=1e-12)
        fro = np.sqrt(np.sum(np.abs(prof.coupling_ft_jacobian(y)) ** 2))
        assert_allclose(fro, prof.coupling_ft_jacobian_fro(rho), rtol=1e-12)


# --- constants -------------------------------------------------------------


def test_constants_zero_amplitude():
    c = compute_constants(Profile(dimension=3, amplitude=0.0))
    for name, value in c.as_dict().items():
        if name in ("delta", "c_sphere"):
            continue
        assert value == 0.0


def test_moment_closed_forms():
    c = compute_constants(BASE)
    assert_allclose(c.moment1, 1.5 * math.pi**1.5, rtol=1e-12)
    assert abs(c.moment1 - 8.354) < 2e-3
    assert_allclose(c.coupling_l1, 2.0 * math.pi, rtol=1e-12)
    assert_allclose(c.coupling_ft_l1, 2**2.5 * math.pi, rtol=1e-12)


def test_moment1_against_radial_quadrature_oracle():
    oracle = 4 * math.pi * quad(lambda r: r**4 * math.exp(-(r**2)), 0, 12)[0]
    assert_allclose(compute_constants(BASE).moment1, oracle, rtol=1e-10)


def test_ft_grad_l1_against_jacobian_quadrature_oracle():
    prof = Profile(dimension=3, width=1.1, amplitude=0.9)

    def fro(r):
        jac = prof.coupling_ft_jacobian(np.array([r, 0.0, 0.0]))
        return math.sqrt(float(np.sum(np.abs(jac) ** 2)))

    oracle = 4 * math.pi * quad(lambda r: r**2 * fro(r), 0, 40, limit=200)[0]
    assert_allclose(compute_constants(prof).coupling_ft_grad_l1, oracle, rtol=1e-9)


def test_sphere_factor_against_1d_quadrature_oracle():
    # d=3: 2*pi * |S^1| * integral_0^2 rho d rho = 8 pi^2
    oracle = 2 * math.pi * 2 * math.pi * quad(lambda rho: rho, 0, 2)[0]
    c = compute_constants(BASE)
    assert_allclose(c.c_sphere, oracle, rtol=1e-12)
    assert_allclose(c.c_sphere, 8 * math.pi**2, rtol=1e-12)
    # d=4: 2*pi * |S^2| * integral_0^2 rho sqrt(2 rho - rho^2) d rho
    oracle4 = 2 * math.pi * 4 * math.pi * quad(
        lambda rho: rho * math.sqrt(2 * rho - rho**2), 0, 2, limit=200
    )[0]
    assert_allclose(compute_constants(Profile(dimension=4)).c_sphere, oracle4, rtol=1e-8)


def test_derived_constant_identities():
    c = compute_constants(BASE)
    pi32 = math.pi**1.5
    assert_allclose(c.c_frozen_tail, 0.5 * pi32 * c.coupling_ft_l1, rtol=1e-14)
    assert_allclose(c.c_derivative, c.coupling_l1 + c.c_frozen_tail, rtol=1e-14)
    assert_allclose(
        c.c_memory,
        4 * c.coupling_l1 + 2 * pi32 * (c.c_derivative * c.coupling_ft_grad_l1 + c.coupling_ft_l1),
        rtol=1e-14,
    )


def test_amplitude_scaling_is_quadratic():
    base = compute_constants(Profile(dimension=3, center=[0.2, 0.0, -0.1]))
    doubled = compute_constants(Profile(dimension=3, amplitude=2.0, center=[0.2, 0.0, -0.1]))
    eta = np.array([0.5, -0.2, 0.3])
    p1 = Profile(dimension=3, center=[0.2, 0.0, -0.1])
    p2 = Profile(dimension=3, amplitude=2.0, center=[0.2, 0.0, -0.1])
    assert_allclose(p2.coupling(eta), 4 * p1.coupling(eta), rtol=1e-12)
    assert_allclose(p2.coupling_ft(eta), 4 * p1.coupling_ft(eta), rtol=1e-12)
    for name in ("moment1", "coupling_l1", "coupling_ft_l1", "coupling_ft_grad_l1",
                 "c_derivative", "c_frozen_tail"):
        assert_allclose(getattr(doubled, name), 4 * getattr(base, name), rtol=1e-12)


def test_parseval_consistency_for_radial_gaussian():
    # L2 norm of the density equals the L2 norm of its transform
    direct = 4 * math.pi * quad(lambda r: r**4 * math.exp(-2 * r**2), 0, 12)[0]
    transformed = 4 * math.pi * quad(
        lambda r: r**4 * (2**-2.5 * math.exp(-(r**2) / 4)) ** 2 / r**2 * r**2, 0, 40, limit=200
    )[0]
    assert_allclose(direct, transformed, rtol=1e-10)
    # and pointwise: |ft|^2 integrates the same as computed from the package formula
    pkg = 4 * math.pi * quad(lambda r: r**2 * BASE.coupling_ft_norm(r) ** 2, 0, 40, limit=200)[0]
    assert_allclose(pkg, direct, rtol=1e-10)


def test_shifted_profile_constants_continuous_at_center_zero():
    nearly = compute_constants(Profile(dimension=3, center=[1e-12, 0.0, 0.0]))
    exact = compute_constants(BASE)
    for name, value in exact.as_dict().items():
        assert_allclose(getattr(nearly, name), value, rtol=1e-8)


def test_constants_resolution_stable():
    prof = Profile(dimension=3, center=[0.4, 0.1, -0.2], width=0.9)
    coarse = compute_constants(prof, nodes=512)
    fine = compute_constants(prof, nodes=1024)
    for name, value in coarse.as_dict().items():
        ref = getattr(fine, name)
        assert abs(value - ref) <= 1e-8 * max(1.0, abs(ref))


def test_constants_require_dimension_three():
    with pytest.raises(UnsupportedDimensionError, match="dimension >= 3"):
        compute_constants(Profile(dimension=2))


def test_delta_range_validated():
    with pytest.raises(InputError):
        compute_constants(BASE, delta=0.3)  # >= (d-2)/4 = 0.25
    with pytest.raises(InputError):
        compute_constants(BASE, delta=0.0)


def test_constant_set_dict_roundtrip():
    c = compute_constants(BASE)
    d = c.as_dict()
    assert set(d) == {f.name for f in ConstantSet.__dataclass_fields__.values()}


# --- tails -----------------------------------------------------------------


def test_coupling_tail_bound_certifies():
    prof = Profile(dimension=3, center=[0.5, 0.0, 0.0], width=1.1)
    for radius in (3.0, 4.5, 6.0):
        actual = 2 * math.pi * quad(
            lambda r: quad(
                lambda mu: r**3 * prof.amplitude**2 * math.exp(
                    -(r**2 - 2 * r * 0.5 * mu + 0.25) / prof.width**2
                ),
                -1,
                1,
            )[0],
            radius,
            radius + 14,
            limit=200,
        )[0]
        bound = coupling_tail_mass(prof, radius)
        assert bound >= actual
        assert bound < 1e4 * max(actual, 1e-300)


def test_radius_for_tail_meets_tolerance():
    prof = Profile(dimension=3, width=0.8)
    for tol in (1e-6, 1e-9, 1e-12):
        radius = radius_for_tail(prof, tol)
        assert coupling_tail_mass(prof, radius) <= tol


def test_ft_tail_mass_decreases():
    radii = [2.0, 4.0, 6.0]
    masses = [coupling_ft_tail_mass(BASE, r) for r in radii]
    assert masses[0] > masses[1] > masses[2] > 0


# --- validation ------------------------------------------------------------


def test_profile_validation():
    with pytest.raises(InputError):
        Profile(dimension=0)
    with pytest.raises(InputError):
        Profile(dimension=3, amplitude=-1.0)
    with pytest.raises(InputError):
        Profile(dimension=3, width=0.0)
    with pytest.raises(InputError):
        Profile(dimension=3, center=[1.0, 2.0])


def test_radial_flag():
    assert BASE.radial()
    assert not Profile(dimension=3, center=[0.0, 1e-9, 0.0]).radial()
