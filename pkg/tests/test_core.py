import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

import oracles
from lhsac import core
from lhsac.core import CouplingLaw as Law

finite = st.floats(-10, 10, allow_nan=False)


def complex_vec(dim):
    return arrays(np.float64, (2, dim), elements=finite).map(lambda a: a[0] + 1j * a[1])


def unit_vec(dim):
    return complex_vec(dim).filter(lambda z: np.linalg.norm(z) > 1e-3).map(lambda z: z / np.linalg.norm(z))


# --- hermitian_inner -------------------------------------------------------------

def test_inner_orthogonal_basis():
    assert core.hermitian_inner([1, 0], [0, 1]) == 0


def test_inner_unit_norm():
    assert core.hermitian_inner([1, 0], [1, 0]) == 1


def test_inner_conjugates_first_slot():
    expected = oracles.inner([1j, 0j], [1 + 0j, 0j])
    assert expected == -1j
    assert core.hermitian_inner([1j, 0], [1, 0]) == expected


def test_inner_dimension_mismatch():
    with pytest.raises(ValueError, match="dimension"):
        core.hermitian_inner([1, 0], [1, 0, 0])


@given(complex_vec(4), complex_vec(4))
def test_inner_conjugate_symmetry(z, w):
    assert abs(core.hermitian_inner(z, w) - np.conj(core.hermitian_inner(w, z))) <= 1e-14 * (
        1 + np.linalg.norm(z) * np.linalg.norm(w))


@given(unit_vec(3), unit_vec(3))
def test_sphere_identity(z, w):
    lhs = np.linalg.norm(z - w) ** 2
    rhs = 2 * (1 - core.hermitian_inner(z, w).real)
    assert abs(lhs - rhs) <= 1e-12


@given(unit_vec(3), st.integers(0, 2**32 - 1))
def test_skew_hermitian_orthogonality(z, seed):
    om = core.random_skew_hermitian(3, np.random.default_rng(seed))
    assert abs(core.hermitian_inner(z, om @ z).real) <= 1e-12


# --- correlation -----------------------------------------------------------------

def test_correlation_self():
    h, R, I = core.correlation([0.6, 0.8j], [0.6, 0.8j])
    assert (R, I) == pytest.approx((1.0, 0.0), abs=1e-15)


def test_correlation_orthogonal():
    assert core.correlation([1, 0], [0, 1]) == (0, 0, 0)


def test_correlation_phase():
    h, R, I = core.correlation([1, 0], [1j, 0])
    assert h == oracles.inner([1 + 0j, 0j], [1j, 0j]) == 1j
    assert (R, I) == (0.0, 1.0)


@given(unit_vec(3), unit_vec(3))
def test_correlation_swap_symmetry(z, w):
    h1, R1, I1 = core.correlation(z, w)
    h2, R2, I2 = core.correlation(w, z)
    assert abs(h1) <= 1 + 1e-12
    assert R1 == pytest.approx(R2, abs=1e-15)
    assert I1 == pytest.approx(-I2, abs=1e-15)


# --- coupling laws --------------------------------------------------------------

def test_anti_hebbian_values():
    z = np.array([1, 0], dtype=complex)
    assert core.gamma0_eval(Law.ANTI_HEBBIAN, z, z) == 0
    assert core.gamma0_eval(Law.ANTI_HEBBIAN, z, -z) == 4


def test_hebbian_orthogonal_is_zero():
    assert core.gamma0_eval(Law.HEBBIAN, [1, 0], [0, 1]) == pytest.approx(0.0, abs=1e-15)


def test_zero_and_neg_half_laws():
    z, w = np.array([1, 0j]), np.array([0, 1j])
    assert core.gamma0_eval(Law.ZERO, z, w) == 0
    for law in (Law.ANTI_HEBBIAN, Law.HEBBIAN):
        assert core.gamma0_eval(law.neg_half(), z, w) == -0.5 * core.gamma0_eval(law, z, w)
    with pytest.raises(ValueError):
        Law.ZERO.neg_half()


@given(unit_vec(3), unit_vec(3))
def test_law_ranges(z, w):
    a = core.gamma0_eval(Law.ANTI_HEBBIAN, z, w)
    h = core.gamma0_eval(Law.HEBBIAN, z, w)
    assert 0 <= a <= 4 + 1e-12
    assert -1 - 1e-12 <= h <= 1
    assert a == pytest.approx(oracles.sqdist(list(z), list(w)), abs=1e-12)


def test_law_codes_match_kernel_convention():
    assert [law.code for law in Law] == [0, 1, 2, 3, 4]


# --- projection -----------------------------------------------------------------

def test_project_scaling():
    z, drift = core.project_to_sphere([2, 0])
    assert np.array_equal(z, [1, 0]) and drift == 1


def test_project_identity():
    z, drift = core.project_to_sphere([0, 1j])
    assert np.array_equal(z, [0, 1j]) and drift == 0


def test_project_diagonal():
    z, drift = core.project_to_sphere([1, 1])
    assert np.allclose(z, [1 / math.sqrt(2)] * 2, rtol=0, atol=1e-16)
    assert drift == pytest.approx(math.sqrt(2) - 1, abs=1e-15)


def test_project_degenerate():
    with pytest.raises(core.DegenerateStateError):
        core.project_to_sphere([1e-15, 0])


# --- containers -----------------------------------------------------------------

def test_params_rejects_non_skew():
    with pytest.raises(ValueError, match="skew-hermitian: defect"):
        core.ModelParams(omega=np.array([[1.0, 0], [0, 0]]))


def test_params_rejects_negative_rate():
    with pytest.raises(ValueError, match="gamma0"):
        core.ModelParams.zero_omega(2, gamma0=-1)


def test_ensemble_validation():
    with pytest.raises(ValueError, match="kappa"):
        core.Ensemble(0, np.ones((3, 2)), np.ones((2, 2)), np.ones((3, 3)))
    with pytest.raises(ValueError, match="non-finite"):
        core.Ensemble(0, np.ones((1, 2)), [[np.nan]], [[0.0]])


def test_ensemble_is_read_only():
    e = core.Ensemble(0, [[1, 0]], [[1.0]], [[0.0]])
    with pytest.raises(ValueError):
        e.kappa[0, 0] = 2.0


# --- sampling -------------------------------------------------------------------

def test_sample_zero_spread_is_aggregated():
    e = core.sample_initial(core.InitRecipe(4, 2, spread=0.0), 3)
    assert np.array_equal(e.states, np.tile([1, 0, 0], (4, 1)).astype(complex))
    assert np.max(core.pairwise_sqdist(e.states)) == 0


def test_sample_deterministic():
    r = core.InitRecipe(5, 3, spread=0.3, lambda_rule="range", lambda_range=(-1, 1))
    a, b = core.sample_initial(r, 9), core.sample_initial(r, 9)
    for x, y in zip((a.states, a.kappa, a.lam), (b.states, b.kappa, b.lam)):
        assert np.array_equal(x, y)


def test_sample_on_sphere_and_in_range():
    e = core.sample_initial(core.InitRecipe(6, 2, spread=0.4, kappa_range=(1, 2)), 1)
    assert e.on_sphere()
    assert np.all((e.kappa >= 1) & (e.kappa <= 2))
    assert np.array_equal(e.lam, -0.5 * e.kappa)


def test_sample_with_predicate():
    from lhsac.diagnostics import lyapunov_matrix

    pred = lambda e: float(np.max(lyapunov_matrix(e, 1.0))) < 1  # noqa: E731
    e = core.sample_initial(core.InitRecipe(5, 2, spread=0.1, kappa_range=(1, 2)), 0, pred)
    assert pred(e)


def test_sample_rejection_budget():
    with pytest.raises(core.RejectionBudgetError, match="predicate"):
        core.sample_initial(core.InitRecipe(2, 1), 0, lambda e: False)


def test_symmetric_gains():
    e = core.sample_initial(core.InitRecipe(4, 1, symmetric_gains=True), 2)
    assert np.array_equal(e.kappa, e.kappa.T)
