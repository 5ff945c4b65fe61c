"""Shared primitives: hermitian inner products, coupling laws and state containers.

States are stored as complex128 arrays of shape ``(N, d+1)``; each row is one
particle on the hermitian unit sphere.  Gain matrices are real ``(N, N)``
arrays that always include the diagonal self-gains.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

TOL_SPHERE = 1e-9
TOL_SKEW = 1e-12
DEGENERATE_NORM = 1e-14
MAX_REJECTION_ATTEMPTS = 10_000


class DegenerateStateError(ValueError):
    """Raised when a state is too close to the origin to be projected."""


class RejectionBudgetError(RuntimeError):
    """Raised when no sampled ensemble satisfies a hypothesis predicate."""


class CouplingLaw(enum.Enum):
    ANTI_HEBBIAN = "anti_hebbian"
    HEBBIAN = "hebbian"
    ZERO = "zero"
    NEG_HALF_ANTI_HEBBIAN = "neg_half_anti_hebbian"
    NEG_HALF_HEBBIAN = "neg_half_hebbian"

    @property
    def code(self) -> int:
        return _LAW_CODES[self]

    def from_sqdist(self, s):
        """Evaluate the law given the squared distance ``s = ||w - z||^2``.

        Works elementwise on arrays, so the same definition serves the
        sphere models and the chord-length Kuramoto reduction.
        """
        if self is CouplingLaw.ANTI_HEBBIAN:
            return s * 1.0
        if self is CouplingLaw.HEBBIAN:
            return 1.0 - 0.5 * s
        if self is CouplingLaw.ZERO:
            return s * 0.0
        if self is CouplingLaw.NEG_HALF_ANTI_HEBBIAN:
            return -0.5 * s
        return -0.5 * (1.0 - 0.5 * s)

    def neg_half(self) -> "CouplingLaw":
        """The law equal to minus one half of this one (anti-Hebbian/Hebbian only)."""
        try:
            return {
                CouplingLaw.ANTI_HEBBIAN: CouplingLaw.NEG_HALF_ANTI_HEBBIAN,
                CouplingLaw.HEBBIAN: CouplingLaw.NEG_HALF_HEBBIAN,
            }[self]
        except KeyError:
            raise ValueError(f"{self.value} has no negated-half companion") from None


_LAW_CODES = {law: i for i, law in enumerate(CouplingLaw)}


def hermitian_inner(z, w) -> complex:
    """``<z, w> = sum conj(z_a) w_a`` (conjugate-linear in the first slot)."""
    z = np.asarray(z, dtype=np.complex128)
    w = np.asarray(w, dtype=np.complex128)
    if z.shape != w.shape:
        raise ValueError(f"dimension mismatch: {z.shape} vs {w.shape}")
    return complex(np.vdot(z, w))


def correlation(zi, zj) -> tuple[complex, float, float]:
    """Return ``(h, R, I)`` with ``h = <zi, zj>``, ``R = Re h`` and ``I = Im h``."""
    h = hermitian_inner(zi, zj)
    return h, h.real, h.imag


def gram(states: np.ndarray) -> np.ndarray:
    """Matrix ``H[j, k] = <z_j, z_k>`` for a stack of states."""
    states = np.asarray(states)
    return states.conj() @ states.T


def pairwise_sqdist(states: np.ndarray) -> np.ndarray:
    """Matrix of ``||z_j - z_k||^2`` evaluated from differences (never negative)."""
    diff = states[:, None, :] - states[None, :, :]
    return np.sum(diff.real**2 + diff.imag**2, axis=-1)


def gamma0_eval(law: CouplingLaw, z, w) -> float:
    """Coupling law value ``Gamma(z, w)`` for a single pair."""
    z = np.asarray(z, dtype=np.complex128)
    w = np.asarray(w, dtype=np.complex128)
    if z.shape != w.shape:
        raise ValueError(f"dimension mismatch: {z.shape} vs {w.shape}")
    diff = w - z
    s = float(np.sum(diff.real**2 + diff.imag**2))
    return float(law.from_sqdist(s))


def project_to_sphere(z) -> tuple[np.ndarray, float]:
    """Normalize ``z`` onto the unit sphere; returns ``(z / ||z||, | ||z|| - 1 |)``."""
    z = np.asarray(z, dtype=np.complex128)
    norm = float(np.linalg.norm(z))
    if not norm > DEGENERATE_NORM:
        raise DegenerateStateError(f"cannot project state with norm {norm:.3e}")
    return z / norm, abs(norm - 1.0)


def is_skew_hermitian(omega: np.ndarray, tol: float = TOL_SKEW) -> bool:
    return skew_defect(omega) <= tol


def skew_defect(omega: np.ndarray) -> float:
    """``max |Omega + Omega^dagger|`` entrywise."""
    omega = np.asarray(omega)
    if omega.size == 0:
        return 0.0
    return float(np.max(np.abs(omega + omega.conj().T)))


def random_skew_hermitian(dim: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return scale * 0.5 * (a - a.conj().T)


def random_unit_states(n: int, dim: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal((n, dim)) + 1j * rng.standard_normal((n, dim))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


@dataclass(frozen=True)
class ModelParams:
    omega: np.ndarray
    gamma0: float = 1.0
    gamma1: float = 1.0
    mu0: float = 1.0
    mu1: float = 1.0
    law0: CouplingLaw = CouplingLaw.ANTI_HEBBIAN
    law1: CouplingLaw = CouplingLaw.ZERO

    def __post_init__(self):
        omega = np.array(self.omega, dtype=np.complex128)
        if omega.ndim != 2 or omega.shape[0] != omega.shape[1]:
            raise ValueError(f"omega must be square, got shape {omega.shape}")
        defect = skew_defect(omega)
        if defect > TOL_SKEW:
            raise ValueError(
                f"omega is not skew-hermitian: defect max|omega + omega^H| = {defect:.3e} > {TOL_SKEW:g}"
            )
        omega.setflags(write=False)
        object.__setattr__(self, "omega", omega)
        for name in ("gamma0", "gamma1", "mu0", "mu1"):
            value = float(getattr(self, name))
            if not np.isfinite(value) or value < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {value}")
            object.__setattr__(self, name, value)
        object.__setattr__(self, "law0", CouplingLaw(self.law0))
        object.__setattr__(self, "law1", CouplingLaw(self.law1))

    @classmethod
    def zero_omega(cls, dim: int, **kwargs) -> "ModelParams":
        return cls(omega=np.zeros((dim, dim), dtype=np.complex128), **kwargs)

    @property
    def dim(self) -> int:
        return self.omega.shape[0]

    @property
    def omega_is_zero(self) -> bool:
        return not np.any(self.omega)

    def replace(self, **changes) -> "ModelParams":
        fields = dict(
            omega=self.omega, gamma0=self.gamma0, gamma1=self.gamma1,
            mu0=self.mu0, mu1=self.mu1, law0=self.law0, law1=self.law1,
        )
        fields.update(changes)
        return ModelParams(**fields)


@dataclass(frozen=True)
class Ensemble:
    """Time-stamped particle states with the sphere gains K and rotational gains."""

    t: float
    states: np.ndarray
    kappa: np.ndarray
    lam: np.ndarray

    def __post_init__(self):
        states = np.array(self.states, dtype=np.complex128)
        if states.ndim == 1:
            states = states[None, :]
        n = states.shape[0]
        if n < 1:
            raise ValueError("an ensemble needs at least one particle")
        kappa = np.array(self.kappa, dtype=np.float64)
        lam = np.array(self.lam, dtype=np.float64)
        for name, g in (("kappa", kappa), ("lambda", lam)):
            if g.shape != (n, n):
                raise ValueError(f"{name} must have shape {(n, n)}, got {g.shape}")
            if not np.all(np.isfinite(g)):
                raise ValueError(f"{name} contains non-finite entries")
        if not np.all(np.isfinite(states)):
            raise ValueError("states contain non-finite entries")
        for a in (states, kappa, lam):
            a.setflags(write=False)
        object.__setattr__(self, "t", float(self.t))
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "kappa", kappa)
        object.__setattr__(self, "lam", lam)

    @property
    def n(self) -> int:
        return self.states.shape[0]

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    def sphere_drift(self) -> float:
        return float(np.max(np.abs(np.linalg.norm(self.states, axis=1) - 1.0)))

    def on_sphere(self, tol: float = TOL_SPHERE) -> bool:
        return self.sphere_drift() <= tol

    def replace(self, **changes) -> "Ensemble":
        fields = dict(t=self.t, states=self.states, kappa=self.kappa, lam=self.lam)
        fields.update(changes)
        return Ensemble(**fields)


@dataclass(frozen=True)
class InitRecipe:
    """Seeded recipe for near-aggregate initial data.

    ``lambda_rule`` selects how the rotational block is filled: ``"range"``
    samples uniformly from ``lambda_range``, ``"sl_pair"`` sets
    ``lambda = -kappa / 2`` and ``"uniform_tilde"`` stores the constant
    ``lambda_tilde0`` (for the perturbed variant, whose block holds lambda-tilde).
    """

    n: int
    d: int
    spread: float = 0.1
    kappa_range: tuple[float, float] = (1.0, 2.0)
    lambda_rule: str = "sl_pair"
    lambda_range: tuple[float, float] = (0.0, 0.0)
    lambda_tilde0: float = 0.0
    base: Optional[Sequence[complex]] = None
    symmetric_gains: bool = False

    def __post_init__(self):
        if self.n < 1 or self.d < 0:
            raise ValueError(f"need n >= 1 and d >= 0, got n={self.n}, d={self.d}")
        if self.spread < 0:
            raise ValueError("spread must be nonnegative")
        for name in ("kappa_range", "lambda_range"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValueError(f"{name} is empty: {lo} > {hi}")
        if self.lambda_rule not in ("range", "sl_pair", "uniform_tilde"):
            raise ValueError(f"unknown lambda_rule {self.lambda_rule!r}")


Predicate = Callable[[Ensemble], object]


def _predicate_outcome(result) -> tuple[bool, str]:
    # predicates may return a bool or a report exposing .satisfied / .violated()
    if isinstance(result, (bool, np.bool_)):
        return bool(result), "predicate returned False"
    satisfied = bool(getattr(result, "satisfied"))
    violated = getattr(result, "violated", None)
    detail = ", ".join(violated()) if callable(violated) else "predicate"
    return satisfied, detail


def _draw(recipe: InitRecipe, rng: np.random.Generator) -> Ensemble:
    dim = recipe.d + 1
    if recipe.base is None:
        base = np.zeros(dim, dtype=np.complex128)
        base[0] = 1.0
    else:
        base, _ = project_to_sphere(np.asarray(recipe.base, dtype=np.complex128))
        if base.shape != (dim,):
            raise ValueError(f"base must have {dim} entries")
    n = recipe.n
    noise = rng.standard_normal((n, dim)) + 1j * rng.standard_normal((n, dim))
    # remove the radial component so the perturbation is tangent at the base point
    noise -= np.real(noise @ base.conj())[:, None] * base[None, :]
    raw = base[None, :] + recipe.spread * noise
    states = raw / np.linalg.norm(raw, axis=1, keepdims=True)

    lo, hi = recipe.kappa_range
    kappa = rng.uniform(lo, hi, size=(n, n))
    if recipe.symmetric_gains:
        kappa = np.triu(kappa) + np.triu(kappa, 1).T
    if recipe.lambda_rule == "sl_pair":
        lam = -0.5 * kappa
    elif recipe.lambda_rule == "uniform_tilde":
        lam = np.full((n, n), float(recipe.lambda_tilde0))
    else:
        llo, lhi = recipe.lambda_range
        lam = rng.uniform(llo, lhi, size=(n, n))
        if recipe.symmetric_gains:
            lam = np.triu(lam) + np.triu(lam, 1).T
    return Ensemble(t=0.0, states=states, kappa=kappa, lam=lam)


def sample_initial(recipe: InitRecipe, rng_seed: int, predicate: Optional[Predicate] = None) -> Ensemble:
    """Draw initial data; with a predicate, rejection-sample until it holds."""
    rng = np.random.default_rng(rng_seed)
    if predicate is None:
        return _draw(recipe, rng)
    detail = ""
    for _ in range(MAX_REJECTION_ATTEMPTS):
        e = _draw(recipe, rng)
        ok, detail = _predicate_outcome(predicate(e))
        if ok:
            return e
    raise RejectionBudgetError(
        f"no sample satisfied the hypothesis in {MAX_REJECTION_ATTEMPTS} attempts "
        f"(last violation: {detail})"
    )
