import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracles
from lhsac import core, dynamics as dyn, reductions as red
from lhsac.core import CouplingLaw as Law
from lhsac.dynamics import Variant
from lhsac.integrate import IntegratorSettings, rk4_fixed, simulate

seeds = st.integers(0, 2**32 - 1)


# --- real embedding ---------------------------------------------------------------

def test_embed_examples():
    assert np.array_equal(red.embed_real([1]), [1, 0])
    assert np.array_equal(red.embed_real([1j]), [0, 1])
    assert np.array_equal(red.unembed_real(red.embed_real([0.6, 0.8j])), [0.6, 0.8j])


@given(seeds, st.integers(1, 5))
def test_embed_inner_product_identity(seed, m):
    rng = np.random.default_rng(seed)
    w = core.random_unit_states(2, m, rng)
    lhs = oracles.inner(list(w[0]), list(w[1])) + oracles.inner(list(w[1]), list(w[0]))
    x = red.embed_real(w)
    assert abs(lhs.real - 2 * float(x[0] @ x[1])) <= 1e-14
    assert abs(np.linalg.norm(x[0]) - 1) <= 1e-14


def test_omega_tilde_examples():
    assert np.array_equal(red.build_omega_tilde(np.zeros((2, 2))), np.zeros((4, 4)))
    assert np.array_equal(red.build_omega_tilde([[1j]]), [[0, -1], [1, 0]])
    with pytest.raises(ValueError, match="skew-hermitian"):
        red.build_omega_tilde([[1.0]])


@given(seeds, st.integers(1, 5))
def test_omega_tilde_commutes(seed, m):
    rng = np.random.default_rng(seed)
    om = core.random_skew_hermitian(m, rng)
    Ot = red.build_omega_tilde(om)
    assert np.max(np.abs(Ot + Ot.T)) <= 1e-12
    w = core.random_unit_states(1, m, rng)[0]
    assert np.max(np.abs(red.embed_real(om @ w) - Ot @ red.embed_real(w))) <= 1e-12


def test_embedding_equivalence_short_run():
    rng = np.random.default_rng(3)
    n, dim, kap = 4, 2, 0.8
    om = core.random_skew_hermitian(dim, rng)
    z0 = core.random_unit_states(n, dim, rng)
    K = np.full((n, n), kap)
    # the gain-pair state flow with omega, written as the full model with lambda = -kappa/2
    e0 = core.Ensemble(0.0, z0, K, -0.5 * K)
    tr = simulate(e0, core.ModelParams(om, 0.0, 0.0, 0.0, 0.0), Variant.FULL,
                  IntegratorSettings(1e-3, 1.0, renormalize=False, record_every=100))
    Ot = red.build_omega_tilde(om)
    _, ys = rk4_fixed(lambda x, k: dyn.rhs_lohe_sphere_adaptive(x, Ot, k, 0.0, 0.0, Law.ZERO),
                      (red.embed_real(z0), K), 1e-3, 1000, record_every=100)
    for k, y in enumerate(ys):
        assert np.max(np.abs(red.embed_real(tr.states[k]) - y[0])) <= 1e-10


# --- circle map ----------------------------------------------------------------

def test_circle_examples():
    assert np.array_equal(red.theta_to_states([0.0]), [[1]])
    assert red.theta_to_states([math.pi / 2])[0, 0] == pytest.approx(1j, abs=1e-16)
    assert red.states_to_theta([[-1 + 0j]])[0] == math.pi
    with pytest.raises(ValueError, match="circle"):
        red.states_to_theta([[0j]])


@given(st.lists(st.floats(-50, 50), min_size=1, max_size=8))
def test_circle_round_trip(theta):
    back = red.states_to_theta(red.theta_to_states(theta))
    assert np.all(back > -math.pi) and np.all(back <= math.pi)
    assert np.max(red.circular_distance(back, theta)) <= 1e-12


def test_circle_pullback_example():
    e = core.Ensemble(0, red.theta_to_states([0.0, math.pi / 2]), [[0, 1], [0, 0]], np.zeros((2, 2)))
    d = dyn.rhs_subsystem_a(e, core.ModelParams.zero_omega(1))
    assert red.pullback_theta_dot(e.states, d.dstates)[0] == pytest.approx(1.0, abs=1e-15)


@given(seeds, st.floats(-2, 2))
def test_subsystem_a_pullback_is_kuramoto(seed, nu):
    rng = np.random.default_rng(seed)
    n = 5
    theta = rng.uniform(-math.pi, math.pi, n)
    K = rng.uniform(0, 2, (n, n))
    e = core.Ensemble(0, red.theta_to_states(theta), K, np.zeros((n, n)))
    p = core.ModelParams(np.array([[1j * nu]]))
    assert red.nu_from_omega(p.omega) == pytest.approx(nu)
    dth = red.pullback_theta_dot(e.states, dyn.rhs_subsystem_a(e, p).dstates)
    KK, _ = red.subsystem_a_to_kuramoto(K, 1.0)
    ref = oracles.kuramoto_rhs(list(theta), [nu] * n, KK.tolist())
    assert np.max(np.abs(dth - np.array(ref))) <= 1e-12


def test_gain_mappings():
    K = np.array([[0.0, 1.5], [0.5, 0.0]])
    KK, mu = red.subsystem_a_to_kuramoto(K, 0.3)
    assert np.array_equal(KK, 2 * K) and mu == 0.6
    KL, mu = red.lohe_sphere_to_kuramoto(K, 0.3)
    assert np.array_equal(KL, K) and mu == 0.3


def test_kuramoto_equivalence_short_run():
    rng = np.random.default_rng(4)
    n, nu, gam, mu = 4, 0.3, 0.5, 0.4
    theta0 = rng.uniform(-math.pi, math.pi, n)
    K = rng.uniform(0.2, 1.0, (n, n))
    p = core.ModelParams(np.array([[1j * nu]]), gam, gam, mu, mu, Law.ANTI_HEBBIAN)
    e0 = core.Ensemble(0.0, red.theta_to_states(theta0), K, np.zeros((n, n)))
    tr = simulate(e0, p, Variant.SUBSYSTEM_A, IntegratorSettings(1e-3, 2.0, record_every=100))
    KK, muK = red.subsystem_a_to_kuramoto(K, mu)
    _, ys = rk4_fixed(lambda th, k: dyn.rhs_kuramoto_adaptive(th, np.full(n, nu), k, gam, muK, Law.ANTI_HEBBIAN),
                      (theta0, KK), 1e-3, 2000, record_every=100)
    for k, y in enumerate(ys):
        assert np.max(red.circular_distance(red.states_to_theta(tr.states[k]), y[0])) <= 1e-10
        assert np.max(np.abs(2 * tr.kappa[k] - y[1])) <= 1e-10


# --- Stuart-Landau restriction --------------------------------------------------

def test_sl_restrict_examples():
    z = np.array([[0.6, 0.8j]] * 3)
    assert np.max(np.abs(red.sl_tangential_derivative(z, np.zeros((2, 2)), 1.0))) <= 1e-16
    a = red.sl_tangential_derivative([[1], [1j]], [[0]], 1.0)
    e = core.Ensemble(0, [[1], [1j]], np.ones((2, 2)), np.zeros((2, 2)))
    b = dyn.rhs_sl_pair(e, core.ModelParams.zero_omega(1)).dstates
    assert a[0, 0] == pytest.approx(0.5j, abs=1e-16)
    assert b[0, 0] == pytest.approx(0.5j, abs=1e-16)


def test_sl_restrict_band():
    with pytest.raises(ValueError, match="amplitude"):
        red.sl_restrict([[1.01, 0]])
    out = red.sl_restrict([[1 + 5e-7, 0]])
    assert out[0, 0] == 1.0


@given(seeds, st.floats(0.1, 2.0))
def test_sl_restrict_matches_sl_pair(seed, kap):
    rng = np.random.default_rng(seed)
    z = core.random_unit_states(4, 2, rng)
    a = red.sl_tangential_derivative(z, np.zeros((2, 2)), kap)
    e = core.Ensemble(0.0, z, np.full((4, 4), kap), np.zeros((4, 4)))
    b = dyn.rhs_sl_pair(e, core.ModelParams.zero_omega(2)).dstates
    assert np.max(np.abs(a - b)) <= 1e-10


# --- real invariance --------------------------------------------------------------

def test_real_invariance_short_run():
    rng = np.random.default_rng(5)
    a = rng.standard_normal((3, 3))
    x = rng.standard_normal((4, 3))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    p = core.ModelParams(0.5 * (a - a.T), 0.6, 0.6, 0.9, 0.9, Law.HEBBIAN)
    e0 = core.Ensemble(0.0, x, rng.uniform(0.2, 1.0, (4, 4)), np.zeros((4, 4)))
    tr = simulate(e0, p, Variant.SUBSYSTEM_A, IntegratorSettings(1e-2, 2.0, record_every=10))
    assert np.max(np.abs(tr.states.imag)) == 0


# --- lambda conversion ------------------------------------------------------------

def test_lambda_tilde_examples():
    K = np.array([[2.0, 1.0], [0.4, 3.0]])
    assert np.array_equal(red.lambda_tilde_convert(K, -0.5 * K), np.zeros((2, 2)))
    assert red.lambda_tilde_convert([[2.0]], [[0.0]])[0, 0] == 1.0
    with pytest.raises(ValueError, match="shape"):
        red.lambda_tilde_convert(np.ones((2, 2)), np.ones((3, 3)))


@given(seeds)
def test_lambda_round_trip(seed):
    rng = np.random.default_rng(seed)
    K = rng.uniform(0, 4, (4, 4))
    L = rng.uniform(-2, 2, (4, 4))
    back = red.lambda_from_tilde(K, red.lambda_tilde_convert(K, L))
    # exact in real arithmetic; in floating point one rounding of the sum remains
    assert np.max(np.abs(back - L)) <= 4 * np.finfo(float).eps * np.max(np.abs(K) + np.abs(L))


def test_perturbed_round_trip_ensemble():
    e = core.sample_initial(core.InitRecipe(3, 1, lambda_rule="range", lambda_range=(-1, 1)), 0)
    back = red.from_perturbed(red.to_perturbed(e))
    assert np.allclose(back.lam, e.lam, rtol=0, atol=1e-15)
    assert np.array_equal(back.kappa, e.kappa)
