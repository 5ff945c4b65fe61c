"""Maps between the hermitian-sphere model and its reductions.

* real embedding of C^{d+1} into R^{2(d+1)} (real parts first, then imaginary parts)
* the circle parametrization ``z = e^{i theta}`` for d = 0
* the unit-amplitude restriction of the Stuart-Landau flow
* conversion between lambda and lambda-tilde = kappa/2 + lambda
"""
from __future__ import annotations

import numpy as np

from .core import DEGENERATE_NORM, TOL_SKEW, Ensemble, skew_defect
from .dynamics import rhs_stuart_landau

AMPLITUDE_BAND = 1e-6


def embed_real(w) -> np.ndarray:
    """``(Re w, Im w)`` along the last axis; works on a vector or a stack of states."""
    w = np.asarray(w, dtype=np.complex128)
    return np.concatenate([w.real, w.imag], axis=-1)


def unembed_real(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    m = x.shape[-1]
    if m % 2:
        raise ValueError(f"real embedding has even length, got {m}")
    h = m // 2
    return x[..., :h] + 1j * x[..., h:]


def build_omega_tilde(omega) -> np.ndarray:
    """Real block form ``[[Re O, -Im O], [Im O, Re O]]`` of a skew-hermitian matrix."""
    omega = np.asarray(omega, dtype=np.complex128)
    defect = skew_defect(omega)
    if defect > TOL_SKEW:
        raise ValueError(f"omega is not skew-hermitian (defect {defect:.3e})")
    re, im = omega.real, omega.imag
    return np.block([[re, -im], [im, re]])


# --- circle / Kuramoto ---------------------------------------------------------

def theta_to_states(theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=np.float64)
    return np.exp(1j * theta)[:, None]


def states_to_theta(states) -> np.ndarray:
    """Angles in (-pi, pi] of d = 0 states."""
    z = np.asarray(states, dtype=np.complex128)
    if z.ndim == 2:
        if z.shape[1] != 1:
            raise ValueError(f"circle map needs d = 0 states, got dimension {z.shape[1]}")
        z = z[:, 0]
    if np.any(np.abs(z) <= DEGENERATE_NORM):
        raise ValueError("state at the origin is not on the circle")
    theta = np.angle(z)
    # np.angle can return -pi exactly; fold it onto +pi
    return np.where(theta <= -np.pi, theta + 2.0 * np.pi, theta)


def circular_distance(a, b) -> np.ndarray:
    d = np.mod(np.asarray(a) - np.asarray(b) + np.pi, 2.0 * np.pi) - np.pi
    return np.abs(d)


def pullback_theta_dot(states, dstates) -> np.ndarray:
    """Angular velocity ``Im(conj(z) dz) / |z|^2`` of d = 0 states."""
    z = np.asarray(states, dtype=np.complex128)[:, 0]
    dz = np.asarray(dstates, dtype=np.complex128)[:, 0]
    return np.imag(np.conj(z) * dz) / np.abs(z) ** 2


def nu_from_omega(omega) -> float:
    """Natural frequency of a 1x1 skew-hermitian ``[[i nu]]``."""
    omega = np.asarray(omega, dtype=np.complex128)
    if omega.shape != (1, 1):
        raise ValueError("nu is defined for d = 0 only")
    return float(omega[0, 0].imag)


def subsystem_a_to_kuramoto(kappa, mu: float) -> tuple[np.ndarray, float]:
    """Kuramoto gains and plasticity rate equivalent to d = 0 Subsystem A.

    The sphere coupling produces ``2/N sum kappa sin``, so the Kuramoto gains
    (which carry ``1/N``) are doubled, and so is the plasticity rate.
    """
    return 2.0 * np.asarray(kappa, dtype=np.float64), 2.0 * float(mu)


def lohe_sphere_to_kuramoto(kappa, mu: float) -> tuple[np.ndarray, float]:
    """The real Lohe sphere model on the circle already carries ``1/N``: identity map."""
    return np.asarray(kappa, dtype=np.float64).copy(), float(mu)


def circle_to_real(theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=np.float64)
    return np.stack([np.cos(theta), np.sin(theta)], axis=1)


# --- Stuart-Landau restriction ----------------------------------------------------

def sl_restrict(states) -> np.ndarray:
    """Project Stuart-Landau states with amplitudes near 1 onto the sphere."""
    z = np.asarray(states, dtype=np.complex128)
    r = np.linalg.norm(z, axis=1)
    worst = float(np.max(np.abs(r - 1.0)))
    if worst > AMPLITUDE_BAND:
        raise ValueError(f"amplitude deviates from 1 by {worst:.3e} > {AMPLITUDE_BAND:g}")
    return z / r[:, None]


def sl_tangential_derivative(states, omega, kappa: float) -> np.ndarray:
    """Stuart-Landau derivative with the radial component removed."""
    w = sl_restrict(states)
    F = rhs_stuart_landau(w, omega, kappa)
    radial = np.real(np.sum(np.conj(w) * F, axis=1))
    return F - radial[:, None] * w


# --- lambda <-> lambda-tilde ---------------------------------------------------

def lambda_tilde_convert(kappa, lam) -> np.ndarray:
    kappa = np.asarray(kappa, dtype=np.float64)
    lam = np.asarray(lam, dtype=np.float64)
    if kappa.shape != lam.shape:
        raise ValueError(f"shape mismatch: {kappa.shape} vs {lam.shape}")
    return 0.5 * kappa + lam


def lambda_from_tilde(kappa, lam_tilde) -> np.ndarray:
    kappa = np.asarray(kappa, dtype=np.float64)
    lam_tilde = np.asarray(lam_tilde, dtype=np.float64)
    if kappa.shape != lam_tilde.shape:
        raise ValueError(f"shape mismatch: {kappa.shape} vs {lam_tilde.shape}")
    return lam_tilde - 0.5 * kappa


def to_perturbed(e: Ensemble) -> Ensemble:
    """Re-store a full-model ensemble with lambda-tilde in the lambda block."""
    return e.replace(lam=lambda_tilde_convert(e.kappa, e.lam))


def from_perturbed(e: Ensemble) -> Ensemble:
    return e.replace(lam=lambda_from_tilde(e.kappa, e.lam))
