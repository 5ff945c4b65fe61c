"""Right-hand sides for every model variant.

The ensemble variants (full model, Stuart-Landau gain pair, perturbed pair,
Subsystems A and B) share one kernel in :mod:`lhsac._kernels`; the three
standalone models (generalized Stuart-Landau, adaptive Kuramoto, adaptive
Lohe sphere) act on their own state shapes and are plain numpy.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import TOL_SKEW, CouplingLaw, Ensemble, ModelParams


class VariantError(ValueError):
    """Parameters violate the contract of the requested model variant."""


class Variant(enum.Enum):
    FULL = "full"
    SL_PAIR = "sl_pair"
    PERTURBED = "perturbed"
    SUBSYSTEM_A = "subsystem_a"
    SUBSYSTEM_B = "subsystem_b"


@dataclass(frozen=True)
class Derivative:
    dstates: np.ndarray
    dkappa: np.ndarray
    dlambda: np.ndarray


# (sphere_mode, rot_on, k_on, l_on, lmix0, lmix1)
_LAYOUT = {
    Variant.FULL: (1, True, True, True, 0.0, 1.0),
    Variant.SUBSYSTEM_A: (1, False, True, False, 0.0, 0.0),
    Variant.SUBSYSTEM_B: (0, True, False, True, 0.0, 1.0),
    Variant.SL_PAIR: (2, False, True, False, 0.0, 0.0),
    # lambda block holds lambda-tilde, driven by Gamma0/2 + Gamma1
    Variant.PERTURBED: (2, True, True, True, 0.5, 1.0),
}


def check_variant(variant: Variant, p: ModelParams) -> None:
    variant = Variant(variant)
    if variant in (Variant.SL_PAIR, Variant.PERTURBED) and not p.omega_is_zero:
        raise VariantError(f"{variant.value} variant requires omega = 0")
    if variant is Variant.PERTURBED and (p.gamma0 != p.gamma1 or p.mu0 != p.mu1):
        raise VariantError(
            "perturbed variant requires gamma0 == gamma1 and mu0 == mu1 "
            f"(got gamma=({p.gamma0}, {p.gamma1}), mu=({p.mu0}, {p.mu1}))"
        )


def kernel_args(variant: Variant, p: ModelParams) -> tuple:
    """Positional arguments after ``(Z, K, L)`` for the kernel functions."""
    variant = Variant(variant)
    check_variant(variant, p)
    sphere_mode, rot_on, k_on, l_on, lmix0, lmix1 = _LAYOUT[variant]
    rates = np.array([p.gamma0, p.gamma1, p.mu0, p.mu1], dtype=np.float64)
    omega = np.ascontiguousarray(p.omega, dtype=np.complex128)
    return (omega, rates, sphere_mode, rot_on, k_on, l_on,
            p.law0.code, p.law1.code, lmix0, lmix1)


def rhs(e: Ensemble, p: ModelParams, variant: Variant) -> Derivative:
    if e.dim != p.dim:
        raise ValueError(f"state dimension {e.dim} does not match omega dimension {p.dim}")
    args = kernel_args(variant, p)
    dz, dk, dl = _kernels.backend.rhs(
        np.ascontiguousarray(e.states), np.ascontiguousarray(e.kappa),
        np.ascontiguousarray(e.lam), *args,
    )
    return Derivative(dz, dk, dl)


def rhs_full(e: Ensemble, p: ModelParams) -> Derivative:
    return rhs(e, p, Variant.FULL)


def rhs_sl_pair(e: Ensemble, p: ModelParams) -> Derivative:
    """Stuart-Landau gain pair reduction; the lambda block is ignored (zero derivative)."""
    return rhs(e, p, Variant.SL_PAIR)


def rhs_perturbed(e: Ensemble, p: ModelParams) -> Derivative:
    """Perturbed pair system; ``e.lam`` is interpreted as lambda-tilde.

    Any second law is accepted, but the stability analysis only covers the
    case where Gamma-tilde vanishes; other choices are an extrapolation.
    """
    return rhs(e, p, Variant.PERTURBED)


def rhs_subsystem_a(e: Ensemble, p: ModelParams) -> Derivative:
    return rhs(e, p, Variant.SUBSYSTEM_A)


def rhs_subsystem_b(e: Ensemble, p: ModelParams) -> Derivative:
    return rhs(e, p, Variant.SUBSYSTEM_B)


def rhs_stuart_landau(states, omega, kappa: float) -> np.ndarray:
    """Generalized Stuart-Landau field; amplitudes are free to leave the sphere."""
    z = np.asarray(states, dtype=np.complex128)
    omega = np.asarray(omega, dtype=np.complex128)
    amp = 1.0 - np.sum(np.abs(z) ** 2, axis=1)
    mean = z.mean(axis=0)
    return amp[:, None] * z + z @ omega.T + kappa * (mean[None, :] - z)


def gamma_hat(law: CouplingLaw, dtheta):
    """Kuramoto coupling law: the sphere law composed with the chord length."""
    chord = 2.0 * np.abs(np.sin(0.5 * np.asarray(dtheta, dtype=np.float64)))
    return law.from_sqdist(chord**2)


def rhs_kuramoto_adaptive(theta, nu, kappa, gamma: float, mu: float, law: CouplingLaw):
    """Adaptive Kuramoto model; returns ``(dtheta, dkappa)``.

    ``dkappa[j, k] = -gamma * kappa[j, k] + mu * gamma_hat(theta_k - theta_j)``.
    """
    theta = np.asarray(theta, dtype=np.float64)
    kappa = np.asarray(kappa, dtype=np.float64)
    n = theta.shape[0]
    delta = theta[None, :] - theta[:, None]
    dtheta = np.asarray(nu, dtype=np.float64) + np.sum(kappa * np.sin(delta), axis=1) / n
    dkappa = -gamma * kappa + mu * gamma_hat(law, delta)
    return dtheta, dkappa


def rhs_lohe_sphere_adaptive(x, omega, kappa, gamma: float, mu: float, law: CouplingLaw):
    """Adaptive Lohe sphere model on real unit vectors; returns ``(dx, dkappa)``."""
    x = np.asarray(x, dtype=np.float64)
    omega = np.asarray(omega, dtype=np.float64)
    kappa = np.asarray(kappa, dtype=np.float64)
    if np.max(np.abs(omega + omega.T), initial=0.0) > TOL_SKEW:
        raise ValueError("omega must be real antisymmetric")
    n = x.shape[0]
    G = x @ x.T
    norms = np.diag(G)
    dx = x @ omega.T + (norms[:, None] * (kappa @ x) - np.sum(kappa * G, axis=1)[:, None] * x) / n
    diff = x[:, None, :] - x[None, :, :]
    dkappa = -gamma * kappa + mu * law.from_sqdist(np.sum(diff**2, axis=-1))
    return dx, dkappa
