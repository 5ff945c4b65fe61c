"""Fixed-step RK4 integration, the matrix exponential and solution splitting."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import _kernels
from .core import Ensemble, ModelParams
from .diagnostics import DiagnosticsRecord, make_record
from .dynamics import Variant, kernel_args

TAYLOR_DEGREE = 12


class NumericalError(ArithmeticError):
    """A non-finite value appeared during integration."""

    def __init__(self, t: float, step: int, particle: int):
        self.t = t
        self.step = step
        self.particle = particle
        super().__init__(
            f"non-finite value at t={t:.17g} (step {step}) in particle {particle}"
        )


@dataclass(frozen=True)
class IntegratorSettings:
    dt: float
    t_end: float
    renormalize: bool = True
    record_every: int = 1

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValueError(f"dt must be positive and finite, got {self.dt}")
        if not (self.t_end >= 0 and math.isfinite(self.t_end)):
            raise ValueError(f"t_end must be nonnegative and finite, got {self.t_end}")
        if self.t_end > 0 and self.dt > self.t_end:
            raise ValueError(f"dt={self.dt} exceeds t_end={self.t_end}")
        if int(self.record_every) != self.record_every or self.record_every < 1:
            raise ValueError(f"record_every must be an integer >= 1, got {self.record_every}")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))


@dataclass
class Trajectory:
    """Sampled solution. Arrays are stacked along the first (sample) axis."""

    times: np.ndarray
    states: np.ndarray
    kappa: np.ndarray
    lam: np.ndarray
    records: list[DiagnosticsRecord]
    variant: Optional[Variant] = None
    stopped_early: bool = False
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.times)

    def ensemble(self, k: int) -> Ensemble:
        return Ensemble(t=self.times[k], states=self.states[k], kappa=self.kappa[k], lam=self.lam[k])

    def column(self, name: str) -> np.ndarray:
        """One DiagnosticsRecord field across all samples (``None`` becomes NaN)."""
        vals = [getattr(r, name) for r in self.records]
        return np.array([np.nan if v is None else v for v in vals], dtype=np.float64)


def _advance(e: Ensemble, args: tuple, dt: float, n_steps: int, renormalize: bool, step0: int):
    Z, K, L, drift, bad_step, bad_j = _kernels.backend.advance(
        n_steps, dt, np.ascontiguousarray(e.states), np.ascontiguousarray(e.kappa),
        np.ascontiguousarray(e.lam), *args, renormalize,
    )
    if bad_step >= 0:
        step = step0 + int(bad_step) + 1
        raise NumericalError(step * dt, step, int(bad_j))
    return Z, K, L, float(drift)


def step_rk4(e: Ensemble, p: ModelParams, variant: Variant, dt: float,
             renormalize: bool = True, with_drift: bool = False):
    """One classical RK4 step on states and gains together.

    With ``with_drift`` the pre-projection sphere drift is returned as well.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    args = kernel_args(variant, p)
    Z, K, L, drift = _advance(e, args, dt, 1, renormalize, round(e.t / dt))
    out = Ensemble(t=e.t + dt, states=Z, kappa=K, lam=L)
    return (out, drift) if with_drift else out


StopPredicate = Callable[[Ensemble, DiagnosticsRecord], bool]
EnvelopeFn = Callable[[float], float]


def simulate(e0: Ensemble, p: ModelParams, variant: Variant, settings: IntegratorSettings,
             stop: Optional[StopPredicate] = None,
             envelope: Optional[EnvelopeFn] = None) -> Trajectory:
    """Integrate to ``settings.t_end`` sampling every ``record_every`` steps.

    Sample times are ``t0 + k * dt`` computed from the step count, so they do
    not accumulate rounding.  A final sample is always taken at the last step.
    """
    variant = Variant(variant)
    if e0.dim != p.dim:
        raise ValueError(f"state dimension {e0.dim} does not match omega dimension {p.dim}")
    args = kernel_args(variant, p)
    dt = settings.dt
    total = settings.n_steps
    every = int(settings.record_every)

    times, Zs, Ks, Ls, recs = [], [], [], [], []

    def record(e: Ensemble, drift: float):
        env = None if envelope is None else float(envelope(e.t - e0.t))
        rec = make_record(e, p, variant, drift, env)
        times.append(e.t)
        Zs.append(np.array(e.states))
        Ks.append(np.array(e.kappa))
        Ls.append(np.array(e.lam))
        recs.append(rec)
        return rec

    rec = record(e0, e0.sphere_drift())
    stopped = stop is not None and bool(stop(e0, rec))
    e = e0
    done = 0
    while done < total and not stopped:
        chunk = min(every, total - done)
        Z, K, L, drift = _advance(e, args, dt, chunk, settings.renormalize, done)
        done += chunk
        e = Ensemble(t=e0.t + done * dt, states=Z, kappa=K, lam=L)
        rec = record(e, drift)
        if stop is not None and stop(e, rec):
            stopped = True

    return Trajectory(
        times=np.array(times), states=np.array(Zs), kappa=np.array(Ks), lam=np.array(Ls),
        records=recs, variant=variant, stopped_early=stopped and done < total,
        meta={"dt": dt, "backend": _kernels.BACKEND},
    )


def matrix_exponential(omega, t: float = 1.0) -> np.ndarray:
    """``exp(omega * t)`` by scaling and squaring with a degree-12 Taylor polynomial."""
    A = np.asarray(omega, dtype=np.complex128) * t
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    n = A.shape[0]
    I = np.eye(n, dtype=np.complex128)
    norm = float(np.max(np.sum(np.abs(A), axis=0), initial=0.0))
    if norm == 0.0:
        return I
    # two extra halvings keep the scaled norm <= 1/4, where the degree-12
    # remainder 4**-13 / 13! is below double precision
    s = max(0, math.ceil(math.log2(max(1.0, norm)))) + 2
    A = A / 2.0**s
    E = I.copy()
    term = I.copy()
    for k in range(1, TAYLOR_DEGREE + 1):
        term = term @ A / k
        E = E + term
    for _ in range(s):
        E = E @ E
    return E


def splitting_compose(w_traj: Trajectory, omega) -> Trajectory:
    """Rotate each sampled state of an omega-free run by ``exp(omega t)``."""
    omega = np.asarray(omega, dtype=np.complex128)
    states = np.empty_like(w_traj.states)
    for k, t in enumerate(w_traj.times):
        U = matrix_exponential(omega, t)
        states[k] = w_traj.states[k] @ U.T
    return Trajectory(
        times=w_traj.times.copy(), states=states, kappa=w_traj.kappa.copy(),
        lam=w_traj.lam.copy(), records=list(w_traj.records), variant=w_traj.variant,
        stopped_early=w_traj.stopped_early, meta=dict(w_traj.meta),
    )


def rk4_fixed(f: Callable, y0: Sequence[np.ndarray], dt: float, n_steps: int,
              record_every: int = 1) -> tuple[np.ndarray, list[tuple]]:
    """Generic RK4 for a right-hand side acting on a tuple of arrays.

    Returns sample times and the list of sampled tuples (including ``t=0``).
    Used for the standalone models that do not share the ensemble kernel.
    """
    y = tuple(np.array(a) for a in y0)
    times = [0.0]
    out = [tuple(a.copy() for a in y)]
    for step in range(1, n_steps + 1):
        k1 = f(*y)
        k2 = f(*(a + 0.5 * dt * b for a, b in zip(y, k1)))
        k3 = f(*(a + 0.5 * dt * b for a, b in zip(y, k2)))
        k4 = f(*(a + dt * b for a, b in zip(y, k3)))
        y = tuple(a + dt / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
                  for a, b1, b2, b3, b4 in zip(y, k1, k2, k3, k4))
        if step % record_every == 0 or step == n_steps:
            times.append(step * dt)
            out.append(tuple(a.copy() for a in y))
    return np.array(times), out
