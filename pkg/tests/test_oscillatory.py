import math
import warnings

import numpy as np
import pytest
from numpy.testing import assert_allclose

from memflow import (
    InputError,
    Profile,
    QuadratureSpec,
    SolverConfig,
    SphereQuadSpec,
    Trajectory,
    compute_constants,
    eval_frozen_field,
    eval_limit_field,
    eval_memory_field,
    nu_exponent,
    phase,
    solve_memory,
)

from oracles import brute_force_frozen, frozen_field_oracle, memory_field_oracle

BASE = Profile(dimension=3)
E1 = np.array([1.0, 0.0, 0.0])
QUAD = QuadratureSpec.for_profile(BASE, 1e-9, eta_nodes_per_axis=128)


@pytest.fixture(scope="module")
def short_memory_run():
    quad = QuadratureSpec.for_profile(BASE, 1e-9, eta_nodes_per_axis=96)
    config = SolverConfig(
        profile=BASE, xi0=E1, horizon=0.25, dt=1.0 / 64, h=0.2, quad=quad,
        squad=SphereQuadSpec(),
    )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        traj = solve_memory(config)
    return traj, config


# --- phase -------------------------------------------------------------------


def test_phase_zero_eta():
    assert phase(np.zeros(3), np.array([0.3, 1.0, -2.0])) == 0.0


def test_phase_antipodal_point_on_resonance_sphere():
    u = np.array([0.7, -0.2, 0.4])
    assert_allclose(phase(2.0 * u, u), 0.0, atol=1e-15)


def test_phase_direct_arithmetic():
    assert phase(np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0])) == 1.0


def test_phase_dimension_mismatch():
    with pytest.raises(InputError):
        phase(np.zeros(3), np.zeros(4))


# --- frozen field ------------------------------------------------------------


def test_frozen_field_zero_amplitude():
    prof = Profile(dimension=3, amplitude=0.0)
    quad = QuadratureSpec(eta_radius=3.0, eta_nodes_per_axis=16, tail_tolerance=1e-6)
    assert_allclose(eval_frozen_field(E1, 1.0, 0.5, prof, quad), np.zeros(3))


def test_frozen_field_modulus_strictly_below_crude_bound():
    c = compute_constants(BASE)
    for t, h in ((1.0, 0.5), (0.5, 0.1)):
        val = eval_frozen_field(E1, t, h, BASE, QUAD)
        assert np.linalg.norm(val) < 2.0 * (t / h) * c.coupling_l1


def test_frozen_field_long_horizon_parallel_and_near_limit():
    c = compute_constants(BASE)
    quad = QuadratureSpec.for_profile(BASE, 1e-6, eta_nodes_per_axis=192)
    val = eval_frozen_field(E1, 1.0, 0.02, BASE, quad)  # t/h = 50
    assert np.max(np.abs(val[1:])) <= 1e-8 * np.linalg.norm(val)
    limit = eval_limit_field(E1, BASE, SphereQuadSpec())
    assert np.linalg.norm(val - limit) <= c.c_frozen_tail * math.sqrt(0.02)


def test_frozen_field_matches_brute_force_double_quadrature():
    rng = np.random.RandomState(42)
    quad = QuadratureSpec(eta_radius=4.5, eta_nodes_per_axis=12, tail_tolerance=1e-4)
    for _ in range(3):
        u = rng.uniform(-1, 1, size=3)
        t = rng.uniform(0.4, 1.0)
        h = t / rng.uniform(0.5, 3.0)
        fast = eval_frozen_field(u, t, h, BASE, quad)
        slow = brute_force_frozen(u, t, h, BASE, quad, r_panels=10000)
        assert np.linalg.norm(fast - slow) <= 1e-6 * max(np.linalg.norm(slow), 1e-12)


def test_frozen_field_matches_analytic_eta_oracle():
    got = eval_frozen_field(E1, 1.0, 0.25, BASE, QUAD)
    want = frozen_field_oracle(E1, 1.0, 0.25, BASE)
    assert np.linalg.norm(got - want) <= 1e-9


def test_frozen_field_uniform_bound_on_sample():
    c = compute_constants(BASE)
    bound = 2.0 * c.c_derivative
    rng = np.random.RandomState(7)
    quad = QuadratureSpec.for_profile(BASE, 1e-6, eta_nodes_per_axis=48)
    for _ in range(100):
        u = rng.uniform(-1, 1, size=3) * rng.uniform(0.0, 2.0)
        ratio = rng.uniform(1.0, 30.0)  # t/h >= 1
        t = rng.uniform(0.2, 2.0)
        val = eval_frozen_field(u, t, t / ratio, BASE, quad)
        assert np.linalg.norm(val) <= bound


def test_frozen_field_odd_in_state_for_radial():
    u = np.array([0.6, -0.3, 0.8])
    lhs = eval_frozen_field(-u, 1.0, 0.25, BASE, QUAD)
    rhs = -eval_frozen_field(u, 1.0, 0.25, BASE, QUAD)
    assert np.linalg.norm(lhs - rhs) <= 1e-10


def test_frozen_field_node_doubling_stable():
    coarse = QuadratureSpec.for_profile(BASE, 1e-9, eta_nodes_per_axis=256)
    fine = QuadratureSpec.for_profile(BASE, 1e-9, eta_nodes_per_axis=512)
    a = eval_frozen_field(E1, 1.0, 0.1, BASE, coarse)
    b = eval_frozen_field(E1, 1.0, 0.1, BASE, fine)
    assert np.linalg.norm(a - b) < 10.0 * coarse.tail_tolerance


def test_frozen_field_input_validation():
    with pytest.raises(InputError):
        eval_frozen_field(E1, 0.0, 0.1, BASE, QUAD)
    with pytest.raises(InputError):
        eval_frozen_field(E1, 1.0, -0.1, BASE, QUAD)
    with pytest.raises(InputError):
        eval_frozen_field(np.zeros(4), 1.0, 0.1, BASE, QUAD)


def test_quadrature_spec_validation():
    with pytest.raises(InputError):
        QuadratureSpec(eta_radius=-1.0)
    with pytest.raises(InputError):
        QuadratureSpec(eta_radius=5.0, eta_nodes_per_axis=4)
    with pytest.raises(InputError):
        QuadratureSpec(eta_radius=5.0, r_substeps_per_history_step=0)
    # a radius too small for the tail certificate is rejected at evaluation time
    bad = QuadratureSpec(eta_radius=1.0, tail_tolerance=1e-9)
    with pytest.raises(InputError, match="tail"):
        eval_frozen_field(E1, 1.0, 0.5, BASE, bad)


# --- memory field ------------------------------------------------------------


def test_memory_field_zero_at_time_zero():
    vals = np.tile(E1, (5, 1))
    pref = np.arange(5)[:, None] * 0.1 * E1[None, :]
    traj = Trajectory(dt=0.1, values=vals, prefix=pref)
    assert_allclose(eval_memory_field(traj, 0.0, 0.3, BASE, QUAD), np.zeros(3))


def test_memory_field_constant_history_collapses_to_frozen():
    dt = 1.0 / 128
    k = 128
    vals = np.tile(E1, (k + 1, 1))
    pref = (np.arange(k + 1) * dt)[:, None] * E1[None, :]
    traj = Trajectory(dt=dt, values=vals, prefix=pref)
    for t, h in ((0.7, 0.2), (1.0, 0.35)):
        mem = eval_memory_field(traj, t, h, BASE, QUAD)
        frz = eval_frozen_field(E1, t, h, BASE, QUAD)
        assert np.linalg.norm(mem - frz) <= 1e-12


def test_memory_field_matches_independent_oracle_along_solve(short_memory_run):
    traj, config = short_memory_run
    for t in (0.0625, 0.125, 0.25):
        mine = eval_memory_field(traj, t, config.h, BASE, config.quad)
        ref = memory_field_oracle(traj, t, config.h, BASE)
        assert np.linalg.norm(mine - ref) <= 1e-9


def test_memory_field_gap_to_frozen_within_envelope(short_memory_run):
    traj, config = short_memory_run
    c = compute_constants(BASE)
    envelope = c.c_memory * config.h ** (nu_exponent(3) - c.delta)
    for t in (0.125, 0.1875, 0.25):
        mem = eval_memory_field(traj, t, config.h, BASE, config.quad)
        frz = eval_frozen_field(traj.value_at(t), t, config.h, BASE, config.quad)
        assert np.linalg.norm(mem - frz) <= envelope


def test_memory_field_node_doubling_stable(short_memory_run):
    traj, config = short_memory_run
    fine = QuadratureSpec.for_profile(BASE, 1e-9, eta_nodes_per_axis=192)
    coarse = QuadratureSpec.for_profile(BASE, 1e-9, eta_nodes_per_axis=96)
    a = eval_memory_field(traj, 0.25, config.h, BASE, coarse)
    b = eval_memory_field(traj, 0.25, config.h, BASE, fine)
    assert np.linalg.norm(a - b) < 10.0 * coarse.tail_tolerance


def test_memory_field_requires_coverage(short_memory_run):
    traj, config = short_memory_run
    with pytest.raises(InputError):
        eval_memory_field(traj, traj.horizon + 1.0, config.h, BASE, config.quad)


def test_memory_field_rejects_bad_h(short_memory_run):
    traj, _ = short_memory_run
    from memflow.oscillatory import MemoryFieldEvaluator

    with pytest.raises(InputError):
        MemoryFieldEvaluator(traj.dt, 0.1, -0.5, BASE, QUAD)
