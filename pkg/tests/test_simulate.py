import numpy as np
import pytest
import scipy.linalg as sla
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from phs import (
    Signal,
    SolverError,
    TimoshenkoParams,
    boundary_signals,
    discretize,
    midpoint_step,
    simulate,
    stack_inputs,
    static_equilibrium,
    timoshenko,
    wave_1d,
)
from phs.system import DiscreteSystem, StateBlock


def toy_system():
    return DiscreteSystem(
        j_mat=sp.csr_matrix([[0.0, 1.0], [-1.0, 0.0]]),
        b_mat=sp.csr_matrix((2, 0)),
        q_weights=sp.identity(2, format="csr"),
        states=[StateBlock("p", (0.0,), 0, 1), StateBlock("q", (0.0,), 1, 2)],
        ports=[], n_p=1, n_q=1, steps=(1.0,), measure=1.0,
    )


def test_midpoint_hand_example():
    x = midpoint_step(toy_system(), [1.0, 0.0], dt=2.0)
    np.testing.assert_allclose(x, [0.0, -1.0], atol=1e-15)
    assert np.linalg.norm(x) == pytest.approx(1.0, rel=1e-15)


def test_signal_release_semantics():
    s = Signal.step_release([2.0, 0.0], 1.0)
    np.testing.assert_array_equal(s(0.999, 2), [2.0, 0.0])
    np.testing.assert_array_equal(s(1.0, 2), [0.0, 0.0])
    with pytest.raises(ValueError):
        s(0.0, 3)
    with pytest.raises(ValueError):
        Signal("ramp")
    assert Signal.zero().is_zero and Signal.constant([0.0]).is_zero


def test_stack_inputs_by_name_and_list():
    sys = discretize(timoshenko(), 11)
    u = stack_inputs(sys, {"b": Signal.constant([1.0, 2.0])}, 0.0)
    np.testing.assert_array_equal(u, [1.0, 2.0, 0.0, 0.0])
    with pytest.raises(ValueError):
        stack_inputs(sys, [Signal.zero()], 0.0)


def test_reversibility(rng):
    sys = discretize(wave_1d(), 11)
    x = rng.standard_normal(sys.n_states)
    u = rng.standard_normal(sys.n_inputs)
    fwd = midpoint_step(sys, x, u, dt=0.01)
    back = midpoint_step(sys, fwd, u, dt=-0.01)
    np.testing.assert_allclose(back, x, rtol=1e-12, atol=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.integers(0, 2**32 - 1))
def test_step_is_linear(a, b, seed):
    rng = np.random.default_rng(seed)
    sys = discretize(timoshenko(), 11)
    x, y = rng.standard_normal((2, sys.n_states))
    u, v = rng.standard_normal((2, sys.n_inputs))
    lhs = midpoint_step(sys, a * x + b * y, a * u + b * v, dt=1e-3)
    rhs = a * midpoint_step(sys, x, u, dt=1e-3) + b * midpoint_step(sys, y, v, dt=1e-3)
    np.testing.assert_allclose(lhs, rhs, rtol=1e-9, atol=1e-9 * (1 + np.abs(rhs).max()))


def test_second_order_in_time(rng):
    sys = discretize(wave_1d(), 11)
    a = sys.system_matrix().toarray()
    x0 = rng.standard_normal(sys.n_states)
    exact = sla.expm(a * 0.5) @ x0
    errs = []
    for dt in (0.05, 0.025, 0.0125):
        tr = simulate(sys, None, dt, 0.5, x0)
        errs.append(np.linalg.norm(tr.states[-1] - exact))
    ratios = np.array(errs[:-1]) / np.array(errs[1:])
    assert np.all((ratios > 3.8) & (ratios < 4.2))


def test_power_balance_with_inputs():
    model = wave_1d(at_a="q", at_b="p", signal_a=Signal.constant([0.3]), signal_b=Signal.step_release([0.1], 0.2))
    sys = discretize(model, 9)
    tr = simulate(sys, boundary_signals(sys, model), 1e-2, 1.0)
    assert np.abs(tr.residual).max() <= 1e-13 * max(1.0, tr.hamiltonian.max())
    assert np.abs(tr.port_power()).max() > 0


def test_zero_input_conservation(rng):
    sys = discretize(timoshenko(TimoshenkoParams(tip_mass=0.0)), 11)
    tr = simulate(sys, None, 1e-3, 1.0, x0=rng.standard_normal(sys.n_states))
    assert tr.max_relative_drift() < 1e-11


def test_simulate_rejects_bad_times():
    sys = discretize(wave_1d(), 11)
    with pytest.raises(SolverError):
        simulate(sys, None, 0.0, 1.0)
    with pytest.raises(SolverError):
        simulate(sys, None, 1e-3, -1.0)
    with pytest.raises(SolverError):
        midpoint_step(sys, np.full(sys.n_states, np.nan))


def test_ill_conditioned_step_rejected():
    # free-free string has a rigid mode, so I - dt/2 A degenerates as dt grows
    sys = discretize(wave_1d(at_a="q", at_b="q"), 10)
    with pytest.raises(SolverError, match="ill-conditioned"):
        midpoint_step(sys, np.zeros(sys.n_states), dt=1e20)


def test_sparse_path_matches_dense(rng):
    sys = discretize(wave_1d(at_b="p"), 600)
    x = rng.standard_normal(sys.n_states)
    a = sys.system_matrix().toarray()
    n = sys.n_states
    dense = np.linalg.solve(np.eye(n) - 5e-4 * a, (np.eye(n) + 5e-4 * a) @ x)
    np.testing.assert_allclose(midpoint_step(sys, x, dt=1e-3), dense, rtol=1e-10, atol=1e-10)


def test_static_equilibrium_of_loaded_string():
    # fixed at a, stress 0.5 applied at b: uniform strain 0.5 / E
    model = wave_1d(modulus=2.0, signal_b=Signal.constant([0.5]))
    sys = discretize(model, 11)
    u = stack_inputs(sys, boundary_signals(sys, model), 0.0)
    eq = static_equilibrium(sys, u)
    assert eq.exists
    q = np.concatenate([eq.state[s.slice] for s in sys.state_blocks("q")])
    p = np.concatenate([eq.state[s.slice] for s in sys.state_blocks("p")])
    np.testing.assert_allclose(q, 0.25, rtol=1e-12)
    np.testing.assert_allclose(p, 0.0, atol=1e-12)
    tr = simulate(sys, boundary_signals(sys, model), 1e-2, 0.5, x0=eq.state)
    np.testing.assert_allclose(tr.states[-1], eq.state, atol=1e-12)


def test_static_equilibrium_of_cantilever():
    pr = TimoshenkoParams(release_time=100.0)
    model = timoshenko(pr)
    sys = discretize(model, 11)
    u = stack_inputs(sys, boundary_signals(sys, model), 0.0)
    eq = static_equilibrium(sys, u)
    assert eq.exists
    # constant shear force, linear moment; the q port carries (P1 + h P0) e_q,
    # so the discrete tip moment is -h * force
    force = -pr.tip_mass * 9.81
    h = sys.steps[0]
    G = pr.young_modulus / (2 * (1 + pr.poisson_ratio))
    for blk in sys.state_blocks("q"):
        shear, curvature = eq.state[blk.slice]
        x = blk.point[0]
        assert shear * pr.kappa * G * pr.area == pytest.approx(force, rel=1e-9)
        assert curvature * pr.young_modulus * pr.second_moment == pytest.approx(force * (pr.length - h - x), rel=1e-9)
