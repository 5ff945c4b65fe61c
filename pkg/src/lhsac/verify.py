"""Self-check batteries behind ``lhsac verify``.

Each check returns a measured value and the tolerance it is held to; the
suites are small deterministic versions of the property tests.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import core, diagnostics as dg, dynamics as dyn, reductions as red
from .core import CouplingLaw as Law
from .dynamics import Variant
from .integrate import IntegratorSettings, matrix_exponential, rk4_fixed, simulate, splitting_compose


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    tol: float
    passed: bool

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{self.name:<34} {status}  measured={self.value:.3e}  tol={self.tol:.1e}"


def _le(name: str, value: float, tol: float) -> Check:
    value = float(value)
    return Check(name, value, tol, bool(value <= tol))


def _ensembles(count: int, n: int, d: int, seed: int, spread: float = 0.5):
    rng = np.random.default_rng(seed)
    for s in range(count):
        recipe = core.InitRecipe(n, d, spread=spread, kappa_range=(0.2, 2.0),
                                 lambda_rule="range", lambda_range=(-1.0, 1.0))
        yield core.sample_initial(recipe, int(rng.integers(2**31))), rng


# --- invariants ------------------------------------------------------------------

def _inv_algebra() -> list[Check]:
    rng = np.random.default_rng(11)
    conj = sphere = skew = 0.0
    for _ in range(200):
        z, w = core.random_unit_states(2, 4, rng)
        om = core.random_skew_hermitian(4, rng)
        conj = max(conj, abs(core.hermitian_inner(z, w) - np.conj(core.hermitian_inner(w, z))))
        sphere = max(sphere, abs(np.linalg.norm(z - w) ** 2 - 2 * (1 - core.hermitian_inner(z, w).real)))
        skew = max(skew, abs(core.hermitian_inner(z, om @ z).real))
    return [_le("conjugate_symmetry", conj, 1e-14), _le("sphere_identity", sphere, 1e-12),
            _le("skew_orthogonality", skew, 1e-12)]


def _inv_rhs() -> list[Check]:
    tang = slc = pert = freeze = 0.0
    for e, rng in _ensembles(200, 5, 2, 12):
        om = core.random_skew_hermitian(3, rng)
        p = core.ModelParams(om, 0.7, 0.7, 1.1, 1.1, Law.HEBBIAN, Law.ANTI_HEBBIAN)
        p0 = p.replace(omega=np.zeros((3, 3)))
        for v in Variant:
            pv = p0 if v in (Variant.SL_PAIR, Variant.PERTURBED) else p
            dz = dyn.rhs(e, pv, v).dstates
            tang = max(tang, float(np.max(np.abs(np.sum(np.conj(e.states) * dz, axis=1).real))))
        a = dyn.rhs_sl_pair(e, p0).dstates
        b = dyn.rhs_full(e.replace(lam=-0.5 * e.kappa), p0).dstates
        slc = max(slc, float(np.max(np.abs(a - b))))
        c = dyn.rhs_perturbed(red.to_perturbed(e), p0).dstates
        pert = max(pert, float(np.max(np.abs(c - dyn.rhs_full(e, p0).dstates))))
        x = rng.standard_normal((5, 3))
        real = e.replace(states=x / np.linalg.norm(x, axis=1, keepdims=True))
        # the interaction must vanish identically, leaving the free flow
        free = dyn.rhs_subsystem_b(real.replace(lam=np.zeros((5, 5))), p).dstates
        fz = dyn.rhs_subsystem_b(real, p).dstates - free
        freeze = max(freeze, float(np.max(np.abs(fz))))
    return [_le("tangency_all_variants", tang, 1e-12), _le("sl_pair_consistency", slc, 1e-14),
            _le("perturbed_consistency", pert, 1e-14), _le("subsystem_b_real_freeze", freeze, 0.0)]


def _inv_integrator() -> list[Check]:
    rng = np.random.default_rng(13)
    unit = 0.0
    for _ in range(20):
        E = matrix_exponential(core.random_skew_hermitian(4, rng, scale=3.0), 1.7)
        unit = max(unit, float(np.max(np.abs(E.conj().T @ E - np.eye(4)))))
    om = core.random_skew_hermitian(4, rng)
    p = core.ModelParams(om, 0.5, 0.8, 1.0, 0.7, Law.HEBBIAN, Law.ANTI_HEBBIAN)
    e0 = core.sample_initial(core.InitRecipe(8, 3, spread=0.5, lambda_rule="range",
                                             lambda_range=(-1, 1)), 1)
    tr = simulate(e0, p, Variant.FULL, IntegratorSettings(1e-3, 10.0, renormalize=False, record_every=100))
    drift = float(np.max(np.abs(np.linalg.norm(tr.states, axis=2) - 1.0)))
    return [_le("expm_unitarity", unit, 1e-10), _le("modulus_conservation", drift, 1e-8)]


def _inv_lyapunov() -> list[Check]:
    worst = 0.0
    p = core.ModelParams.zero_omega(3, gamma0=0.7, gamma1=0.7, mu0=1.3, mu1=1.3,
                                    law1=Law.NEG_HALF_ANTI_HEBBIAN)
    for k, (e, rng) in enumerate(_ensembles(100, 5, 2, 14, spread=0.3)):
        v = Variant.SL_PAIR if k % 2 else Variant.PERTURBED
        i, j = rng.choice(5, size=2, replace=False)
        a = dg.dL_dt_analytic(e, p, v, int(i), int(j))
        f = dg.dL_dt_central_difference(e, p, v, int(i), int(j))
        worst = max(worst, abs(a - f) / max(abs(a), 1e-300))
    return [_le("dL_dt_consistency", worst, 1e-5)]


# --- reductions ------------------------------------------------------------------

def _red_embedding() -> list[Check]:
    rng = np.random.default_rng(21)
    n, dim, kap = 6, 3, 0.8
    om = core.random_skew_hermitian(dim, rng)
    z0 = core.random_unit_states(n, dim, rng)
    K = np.full((n, n), kap)
    p = core.ModelParams(om, 0.0, 0.0, 0.0, 0.0)
    e0 = core.Ensemble(0.0, z0, K, -0.5 * K)
    tr = simulate(e0, p, Variant.FULL, IntegratorSettings(1e-3, 10.0, renormalize=False, record_every=100))
    Ot = red.build_omega_tilde(om)

    def f(x, k):
        dx, dk = dyn.rhs_lohe_sphere_adaptive(x, Ot, k, 0.0, 0.0, Law.ZERO)
        return dx, dk

    _, ys = rk4_fixed(f, (red.embed_real(z0), K), 1e-3, 10_000, record_every=100)
    diff = max(float(np.max(np.abs(red.embed_real(tr.states[k]) - y[0]))) for k, y in enumerate(ys))
    return [_le("real_embedding_equivalence", diff, 1e-8)]


def _red_kuramoto() -> list[Check]:
    rng = np.random.default_rng(22)
    n, nu, gam, mu = 6, 0.7, 0.5, 0.4
    theta0 = rng.uniform(-np.pi, np.pi, n)
    K = rng.uniform(0.2, 1.0, (n, n))
    p = core.ModelParams(np.array([[1j * nu]]), gam, gam, mu, mu, Law.HEBBIAN)
    e0 = core.Ensemble(0.0, red.theta_to_states(theta0), K, np.zeros((n, n)))
    tr = simulate(e0, p, Variant.SUBSYSTEM_A, IntegratorSettings(1e-3, 10.0, record_every=100))
    KK, muK = red.subsystem_a_to_kuramoto(K, mu)

    def f(th, k):
        return dyn.rhs_kuramoto_adaptive(th, np.full(n, nu), k, gam, muK, Law.HEBBIAN)

    _, ys = rk4_fixed(f, (theta0, KK), 1e-3, 10_000, record_every=100)
    diff = max(float(np.max(red.circular_distance(red.states_to_theta(tr.states[k]), y[0])))
               for k, y in enumerate(ys))
    return [_le("kuramoto_equivalence", diff, 1e-8)]


def _red_splitting() -> list[Check]:
    rng = np.random.default_rng(23)
    om = core.random_skew_hermitian(4, rng)
    p = core.ModelParams(om, 0.5, 0.8, 1.0, 0.7, Law.HEBBIAN, Law.ANTI_HEBBIAN)
    e0 = core.sample_initial(core.InitRecipe(8, 3, spread=0.5, lambda_rule="range",
                                             lambda_range=(-1, 1)), 2)
    s = IntegratorSettings(1e-3, 5.0, record_every=100)
    tr = simulate(e0, p, Variant.FULL, s)
    w = simulate(e0, p.replace(omega=np.zeros((4, 4))), Variant.FULL, s)
    diff = float(np.max(np.linalg.norm(tr.states - splitting_compose(w, om).states, axis=2)))
    return [_le("solution_splitting", diff, 1e-6)]


def _red_sl_restrict() -> list[Check]:
    rng = np.random.default_rng(24)
    worst = 0.0
    for _ in range(1000):
        z = core.random_unit_states(4, 2, rng)
        kap = float(rng.uniform(0.1, 2.0))
        a = red.sl_tangential_derivative(z, np.zeros((2, 2)), kap)
        e = core.Ensemble(0.0, z, np.full((4, 4), kap), np.zeros((4, 4)))
        b = dyn.rhs_sl_pair(e, core.ModelParams.zero_omega(2)).dstates
        worst = max(worst, float(np.max(np.abs(a - b))))
    return [_le("sl_restrict_agreement", worst, 1e-10)]


def _red_real_invariance() -> list[Check]:
    rng = np.random.default_rng(25)
    a = rng.standard_normal((3, 3))
    om = 0.5 * (a - a.T)
    x = rng.standard_normal((6, 3))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    p = core.ModelParams(om, 0.6, 0.6, 0.9, 0.9, Law.ANTI_HEBBIAN)
    e0 = core.Ensemble(0.0, x, rng.uniform(0.2, 1.0, (6, 6)), np.zeros((6, 6)))
    tr = simulate(e0, p, Variant.SUBSYSTEM_A, IntegratorSettings(1e-3, 10.0, record_every=100))
    return [_le("real_invariance", float(np.max(np.abs(tr.states.imag))), 1e-10)]


# --- theorems ----------------------------------------------------------------------

def _monotone(tr, mu: float) -> float:
    L = np.array([dg.lyapunov_matrix(tr.ensemble(k), mu) for k in range(len(tr))])
    return float(np.max(np.diff(L, axis=0), initial=0.0))


def _thm_t31() -> list[Check]:
    p = core.ModelParams.zero_omega(3)
    recipe = core.InitRecipe(5, 2, spread=0.15)
    e0 = core.sample_initial(recipe, 4, lambda e: float(np.max(dg.lyapunov_matrix(e, 1.0))) <= 0.5)
    tr = simulate(e0, p, Variant.SL_PAIR, IntegratorSettings(0.01, 200.0, record_every=10))
    minR = float(np.min([core.gram(s).real for s in tr.states]))
    ratio = np.sqrt(np.max(core.pairwise_sqdist(tr.states[-1])) / np.max(core.pairwise_sqdist(e0.states)))
    bound = dg.kappa_upper_bound(e0.kappa[None], 1.0, 1.0, tr.times[:, None, None])
    return [_le("t31_lyapunov_nonincrease", _monotone(tr, 1.0), 1e-10),
            Check("t31_R_positive", minR, 0.0, minR > 0),
            _le("t31_distance_ratio", ratio, 0.2),
            _le("t31_gain_ratio", tr.kappa[-1].max() / e0.kappa.max(), 0.2),
            _le("gain_upper_bound_excess", float(np.max(tr.kappa - bound)), 1e-8)]


def _thm_t32() -> list[Check]:
    p = core.ModelParams.zero_omega(3, law0=Law.HEBBIAN)
    recipe = core.InitRecipe(5, 2, spread=0.1, kappa_range=(0.92, 0.98))
    e0 = core.sample_initial(recipe, 5, lambda e: dg.diameter_D(e)[0] <= 0.05)
    rep = dg.check_theorem(e0, p, "T32")
    if not rep.satisfied:
        return [Check("t32_hypothesis", min(rep.margins.values()), 0.0, False)]
    env = dg.envelope_from_report(rep, dg.diameter_D(e0)[0])
    tr = simulate(e0, p, Variant.SL_PAIR, IntegratorSettings(0.01, 20.0, record_every=10), envelope=env)
    excess = float(np.max(tr.column("D") / (tr.column("envelope") * (1 + 1e-6))))
    rate, _ = dg.fit_decay_rate(tr, (10.0, 20.0))
    return [_le("t32_envelope_ratio", excess, 1.0),
            Check("t32_fitted_rate", rate, 0.9 * rep.rate, rate >= 0.9 * rep.rate)]


def _thm_t33() -> list[Check]:
    p = core.ModelParams.zero_omega(3, law1=Law.NEG_HALF_ANTI_HEBBIAN)
    recipe = core.InitRecipe(5, 2, spread=0.15, lambda_rule="uniform_tilde", lambda_tilde0=0.1)
    e0 = core.sample_initial(
        recipe, 6, lambda e: dg.check_theorem(e, p, "T33").margins["lambda_ratio_plus_max_L"] >= 0.2)
    tr = simulate(e0, p, Variant.PERTURBED, IntegratorSettings(0.01, 200.0, record_every=10))
    lt = dg.lambda_tilde_closed_form(e0.lam[None], 1.0, tr.times[:, None, None])
    minR = float(np.min([core.gram(s).real for s in tr.states]))
    floor = 2 * 0.1 / float(np.min(e0.kappa))
    return [_le("t33_lambda_tilde_closed_form", float(np.max(np.abs(tr.lam - lt))), 1e-8),
            _le("t33_lyapunov_nonincrease", _monotone(tr, 1.0), 1e-10),
            Check("t33_R_floor_margin", minR - floor, 0.0, minR > floor)]


def _thm_t34() -> list[Check]:
    p = core.ModelParams.zero_omega(3, law0=Law.HEBBIAN, law1=Law.NEG_HALF_HEBBIAN)
    recipe = core.InitRecipe(5, 2, spread=0.1, kappa_range=(0.92, 0.98),
                             lambda_rule="uniform_tilde", lambda_tilde0=0.01)
    e0 = core.sample_initial(recipe, 7, lambda e: dg.check_theorem(e, p, "T34"))
    rep = dg.check_theorem(e0, p, "T34")
    env = dg.envelope_from_report(rep, dg.diameter_D(e0)[0])
    tr = simulate(e0, p, Variant.PERTURBED, IntegratorSettings(0.01, 20.0, record_every=10), envelope=env)
    excess = float(np.max(tr.column("D") / (tr.column("envelope") * (1 + 1e-6))))
    return [_le("t34_envelope_ratio", excess, 1.0)]


def _thm_sl_pair() -> list[Check]:
    rng = np.random.default_rng(31)
    om = core.random_skew_hermitian(3, rng)
    p = core.ModelParams(om, 0.5, 0.5, 1.0, 1.0, Law.HEBBIAN, Law.NEG_HALF_HEBBIAN)
    e0 = core.sample_initial(core.InitRecipe(6, 2, spread=0.5), 3)
    s = IntegratorSettings(1e-3, 10.0, record_every=100)
    tr = simulate(e0, p, Variant.FULL, s)
    zero = float(np.max(np.abs(tr.kappa + 2 * tr.lam)))
    tr1 = simulate(e0.replace(lam=(1.0 - e0.kappa) / 2), p, Variant.FULL, s)
    return [_le("sl_pair_propagation_zero", zero, 1e-8),
            _le("sl_pair_propagation_decay", dg.sl_pair_defect(tr1, 0.5), 1e-8)]


SUITES: dict[str, list[Callable[[], list[Check]]]] = {
    "invariants": [_inv_algebra, _inv_rhs, _inv_integrator, _inv_lyapunov],
    "reductions": [_red_embedding, _red_kuramoto, _red_splitting, _red_sl_restrict, _red_real_invariance],
    "theorems": [_thm_sl_pair, _thm_t31, _thm_t32, _thm_t33, _thm_t34],
}


def run_suite(name: str) -> list[Check]:
    if name not in SUITES:
        raise KeyError(name)
    checks: list[Check] = []
    for battery in SUITES[name]:
        checks.extend(battery())
    return checks
