import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phs import (
    BoundarySpec1D,
    BoundarySpec2D,
    CoefficientSet,
    ContinuousModel,
    ModelError,
    QuadraticDensity,
    coenergy,
    validate_model,
)
from phs.system import hamiltonian, skew_from_upper

from conftest import random_model_1d, random_spd


def test_coefficient_arrays_are_read_only():
    c = CoefficientSet(p1=np.eye(2), p0=np.zeros((2, 2)))
    with pytest.raises(ValueError):
        c.p1[0, 0] = 5.0
    assert (c.n_p, c.n_q, c.dimension) == (2, 2, 1)


def test_coefficient_shape_mismatch_is_reported():
    model = ContinuousModel(1, (0.0, 1.0), CoefficientSet(p1=np.eye(2), p0=np.zeros((2, 3))),
                            QuadraticDensity(np.eye(2)), QuadraticDensity(np.eye(2)),
                            BoundarySpec1D("p", "q"))
    assert any("p0 shape" in m for m in validate_model(model))


def test_density_callable_needs_size():
    with pytest.raises(ModelError):
        QuadraticDensity(lambda x: np.eye(2))
    d = QuadraticDensity(lambda x: (1.0 + x) * np.eye(2), size=2)
    assert not d.is_constant
    np.testing.assert_allclose(d.weight_at(0.5), 1.5 * np.eye(2))


def test_coenergy_is_weight_times_state():
    w = np.array([[2.0, 1.0], [1.0, 3.0]])
    np.testing.assert_allclose(coenergy(QuadraticDensity(w), 0.0, [1.0, -1.0]), [1.0, -2.0])
    with pytest.raises(ModelError):
        coenergy(QuadraticDensity(w), 0.0, [1.0, 2.0, 3.0])


def test_boundary_tags_accept_long_names():
    bc = BoundarySpec1D("p-effort-input", "q")
    assert (bc.at_a, bc.at_b) == ("p", "q")
    with pytest.raises(ModelError):
        BoundarySpec1D("x", "q")


def _model(p1, wq, name="m"):
    return ContinuousModel(1, (0.0, 1.0), CoefficientSet(p1=p1, p0=np.zeros_like(p1)),
                           QuadraticDensity(np.eye(p1.shape[0])), QuadraticDensity(wq),
                           BoundarySpec1D("p", "q"), name)


def test_validate_reports_rank_deficiency():
    msgs = validate_model(_model(np.array([[1.0, 1.0], [1.0, 1.0]]), np.eye(2)))
    assert any("p1 rank-deficient" in m for m in msgs)


def test_validate_reports_indefinite_density():
    msgs = validate_model(_model(np.eye(2), np.diag([1.0, -1.0])))
    assert any("density_q" in m and "positive definite" in m for m in msgs)


def test_validate_2d_needs_p2():
    model = ContinuousModel(2, (1.0, 1.0), CoefficientSet(p1=[[1.0, 0.0]], p0=[[0.0, 0.0]]),
                            QuadraticDensity([[1.0]]), QuadraticDensity(np.eye(2)),
                            BoundarySpec2D("p", "p", "p", "p"))
    assert validate_model(model)


def test_hamiltonian_is_half_quadratic_form(rng):
    w = random_spd(rng, 4)
    import scipy.sparse as sp

    from phs.system import DiscreteSystem, StateBlock

    sys = DiscreteSystem(sp.csr_matrix((4, 4)), sp.csr_matrix((4, 0)), sp.csr_matrix(w),
                         [StateBlock("p", (0.0,), 0, 4)], [], 4, 4, (1.0,), 2.0)
    x = rng.standard_normal(4)
    assert hamiltonian(sys, x) == pytest.approx(0.5 * x @ w @ x, rel=1e-14)
    with pytest.raises(ValueError):
        hamiltonian(sys, np.ones(3))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_skew_from_upper_is_exactly_skew(n_p, n_q, seed):
    import scipy.sparse as sp

    upper = sp.csr_matrix(np.random.default_rng(seed).standard_normal((n_p, n_q)))
    j = skew_from_upper(upper, n_p, n_q)
    assert abs(j + j.T).max() == 0.0


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 3), st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_random_full_rank_models_validate(n_p, n_q, seed):
    assert validate_model(random_model_1d(np.random.default_rng(seed), n_p, n_q)) == []
