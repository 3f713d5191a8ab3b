import numpy as np
import pytest

from phs import discretize, mindlin, timoshenko, wave_1d, wave_2d
from phs.convergence import (
    ReferenceUnavailable,
    convergence_rows,
    fit_order,
    refinement_levels,
    standing_wave,
    standing_wave_error,
)


def test_fit_order_recovers_power_law():
    h = np.array([0.1, 0.05, 0.025])
    assert fit_order(h, 3.0 * h**2) == pytest.approx(2.0)


def test_refinement_keeps_parity():
    assert refinement_levels(wave_1d(at_b="p"), 10, 4) == [10, 20, 40, 80]
    assert refinement_levels(wave_1d(), 11, 3) == [11, 23, 47]
    assert refinement_levels(wave_2d(), (8, 7), 2) == [(8, 7), (16, 15)]


def _consistency(model, K):
    ref = standing_wave(model)
    sys = discretize(model, K)
    t, eps = 0.3 / ref.omega, 1e-6 / ref.omega
    xdot = (ref.state(sys, t + eps) - ref.state(sys, t - eps)) / (2 * eps)
    resid = sys.system_matrix() @ ref.state(sys, t) - xdot
    return np.linalg.norm(resid) / np.linalg.norm(xdot)


@pytest.mark.parametrize("at_a,at_b,K", [("p", "p", 10), ("p", "q", 11), ("q", "p", 11), ("q", "q", 10)])
def test_standing_wave_consistency(at_a, at_b, K):
    model = wave_1d(density=2.0, modulus=3.0, at_a=at_a, at_b=at_b)
    coarse = _consistency(model, K)
    fine = _consistency(model, 2 * K if K % 2 == 0 else 2 * K + 1)
    assert coarse < 0.1
    assert coarse / fine > 3.0


def test_1d_order_is_two():
    rows = convergence_rows(wave_1d(at_b="p"), 10, 3, dt=1e-3, t_end=0.5)
    order = fit_order([r.h for r in rows], [r.error for r in rows])
    assert 1.8 <= order <= 2.2
    ratio = rows[0].error / rows[1].error
    assert 3.4 <= ratio <= 4.6


def test_free_end_order_is_two():
    rows = convergence_rows(wave_1d(), 11, 3, dt=1e-3, t_end=0.5)
    assert 1.8 <= fit_order([r.h for r in rows], [r.error for r in rows]) <= 2.2


def test_halving_dt_leaves_spatial_error():
    model = wave_1d(at_b="p")
    e1 = standing_wave_error(model, 20, 1e-3, 0.5)
    e2 = standing_wave_error(model, 20, 5e-4, 0.5)
    assert abs(e1 - e2) / e1 < 0.05


def test_2d_order():
    rows = convergence_rows(wave_2d(), (8, 8), 3, dt=5e-3, t_end=0.3)
    assert 1.7 <= fit_order([r.h for r in rows], [r.error for r in rows]) <= 2.3


def test_reference_unavailable():
    for model in (timoshenko(), mindlin(), wave_2d(edges={"left": "q", "right": "q"})):
        with pytest.raises(ReferenceUnavailable):
            standing_wave(model)
