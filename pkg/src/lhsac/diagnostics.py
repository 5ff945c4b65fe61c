"""Lyapunov functionals, hypothesis checkers, decay envelopes and rate fits.

Indices are 0-based throughout.  The Lyapunov functional of a pair is

    L_ij = 1/2 ||z_i - z_j||^2 + 1/(4 mu N) sum_k (kappa_ik - kappa_jk)^2

and the diameter functional is ``D = 1/2 max ||z_i - z_j||^2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import CouplingLaw, Ensemble, ModelParams, gram, pairwise_sqdist
from .dynamics import Variant, rhs

GRID_POINTS = 10_000
UNIFORM_TOL = 1e-12
USABLE_D = 1e-12


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    D: float
    L_max: float
    kappa_min: float
    kappa_max: float
    lambda_tilde_max_abs: float
    sphere_drift_max: float
    envelope: Optional[float] = None


@dataclass
class HypothesisReport:
    theorem: str
    satisfied: bool
    margins: dict[str, float]
    witness: tuple[int, int]
    kappa: Optional[float] = None
    kappa_M: Optional[float] = None
    rate: Optional[float] = None
    grid_points: Optional[int] = None
    extras: dict[str, float] = field(default_factory=dict)

    def violated(self) -> list[str]:
        return [name for name, m in self.margins.items() if not m > 0]

    def to_lines(self) -> list[str]:
        lines = [f"theorem={self.theorem}"]
        lines += [f"margin.{name}={value:.17g}" for name, value in self.margins.items()]
        for name in ("kappa", "kappa_M", "rate"):
            value = getattr(self, name)
            if value is not None:
                lines.append(f"{name}={value:.17g}")
        if self.grid_points is not None:
            lines.append(f"grid_points={self.grid_points}")
        lines += [f"{name}={value:.17g}" for name, value in self.extras.items()]
        lines.append(f"satisfied={'true' if self.satisfied else 'false'}")
        lines.append(f"witness={self.witness[0]},{self.witness[1]}")
        return lines


def _require_mu(mu: float) -> float:
    if not mu > 0:
        raise ValueError(f"the Lyapunov functional needs mu > 0, got {mu}")
    return float(mu)


def lyapunov_matrix(e: Ensemble, mu: float) -> np.ndarray:
    """All pairwise ``L_ij`` as an ``(N, N)`` array."""
    mu = _require_mu(mu)
    K = e.kappa
    gain = np.sum((K[:, None, :] - K[None, :, :]) ** 2, axis=-1)
    return 0.5 * pairwise_sqdist(e.states) + gain / (4.0 * mu * e.n)


def lyapunov_L(e: Ensemble, i: int, j: int, mu: float) -> float:
    mu = _require_mu(mu)
    diff = e.states[i] - e.states[j]
    gain = float(np.sum((e.kappa[i] - e.kappa[j]) ** 2))
    return 0.5 * float(np.sum(diff.real**2 + diff.imag**2)) + gain / (4.0 * mu * e.n)


def _lex_argmax(M: np.ndarray) -> tuple[int, int]:
    # np.argmax returns the first maximum in row-major order
    i, j = np.unravel_index(int(np.argmax(M)), M.shape)
    return int(i), int(j)


def diameter_D(e: Ensemble) -> tuple[float, tuple[int, int]]:
    S = 0.5 * pairwise_sqdist(e.states)
    ij = _lex_argmax(S)
    return float(S[ij]), ij


def lambda_tilde_block(e: Ensemble, variant: Variant) -> np.ndarray:
    """The rotational perturbation ``lambda + kappa/2`` as the variant stores it."""
    variant = Variant(variant)
    if variant is Variant.PERTURBED:
        return np.asarray(e.lam)
    if variant is Variant.SL_PAIR:
        return np.zeros_like(e.lam)
    return 0.5 * e.kappa + e.lam


def _dL_dt_parts(e: Ensemble, p: ModelParams, variant: Variant, i: int, j: int) -> float:
    variant = Variant(variant)
    if variant not in (Variant.SL_PAIR, Variant.PERTURBED):
        raise ValueError(f"analytic dL/dt is only available for sl_pair and perturbed, not {variant.value}")
    if p.law0 is not CouplingLaw.ANTI_HEBBIAN:
        raise ValueError("analytic dL/dt assumes the anti-Hebbian law for the kappa block")
    if p.gamma0 != p.gamma1 or p.mu0 != p.mu1:
        raise ValueError("analytic dL/dt assumes gamma0 == gamma1 and mu0 == mu1")
    mu = _require_mu(p.mu0)
    gamma = p.gamma0
    n = e.n
    H = gram(e.states)
    R = H.real
    K = e.kappa
    value = -np.sum((K[i] * R[i] + K[j] * R[j]) * (1.0 - R[i, j])) / n
    value -= gamma / (2.0 * mu * n) * np.sum((K[i] - K[j]) ** 2)
    if variant is Variant.PERTURBED:
        I = H.imag
        lt = e.lam
        value -= 2.0 * I[i, j] / n * np.sum(lt[i] * I[i] - lt[j] * I[j])
    return float(value)


def dL_dt_analytic(e: Ensemble, p: ModelParams, variant: Variant, i: int, j: int) -> float:
    """Closed-form time derivative of ``L_ij`` for the gain-pair variants.

    Valid on the sphere with the anti-Hebbian kappa law.  The perturbed
    variant adds the rotational term carried by lambda-tilde.
    """
    return _dL_dt_parts(e, p, variant, i, j)


def dL_dt_central_difference(e: Ensemble, p: ModelParams, variant: Variant, i: int, j: int,
                             h: float = 1e-5) -> float:
    """Directional central difference of ``L_ij`` along the vector field."""
    mu = _require_mu(p.mu0)
    F = rhs(e, p, variant)

    def shifted(sign):
        return Ensemble(t=e.t, states=e.states + sign * h * F.dstates,
                        kappa=e.kappa + sign * h * F.dkappa, lam=e.lam + sign * h * F.dlambda)

    return (lyapunov_L(shifted(1.0), i, j, mu) - lyapunov_L(shifted(-1.0), i, j, mu)) / (2.0 * h)


def riccati_envelope(D0: float, kappa_m: float, kappa_M: float, lambda0_abs: float, t,
                     form: str = "paper"):
    """Upper envelope for ``D(t)`` from the Riccati inequality
    ``dD/dt < -2 a D + 2 b D^2`` with ``a = 2 kappa_m - kappa_M - 4 |lambda0|``
    and ``b = kappa_M``.

    ``form="paper"`` evaluates ``1 / ((1/D0 - a/b) e^{a t} + a/b)``, the
    closed form stated for the comparison argument.  ``form="bernoulli"``
    evaluates the exact solution of the comparison equation,
    ``1 / ((1/D0 - b/a) e^{2 a t} + b/a)``.
    """
    a = 2.0 * kappa_m - kappa_M - 4.0 * abs(lambda0_abs)
    if not a > 0:
        raise ValueError(
            f"envelope needs 2*kappa_m - kappa_M - 4|lambda0| > 0, got {a:.6g}"
        )
    if not kappa_M > 0:
        raise ValueError(f"envelope needs kappa_M > 0, got {kappa_M}")
    if not D0 > 0:
        raise ValueError(f"envelope needs D0 > 0, got {D0}")
    b = float(kappa_M)
    t = np.asarray(t, dtype=np.float64)
    if form == "paper":
        r = a / b
        out = 1.0 / ((1.0 / D0 - r) * np.exp(a * t) + r)
    elif form == "bernoulli":
        r = b / a
        out = 1.0 / ((1.0 / D0 - r) * np.exp(2.0 * a * t) + r)
    else:
        raise ValueError(f"unknown envelope form {form!r}")
    return float(out) if out.ndim == 0 else out


def kappa_upper_bound(kappa0, gamma: float, mu: float, t):
    """Anti-Hebbian gain bound ``kappa0 e^{-gamma t} + (4 mu / gamma)(1 - e^{-gamma t})``."""
    if not gamma > 0:
        raise ValueError(f"kappa_upper_bound needs gamma > 0, got {gamma}")
    decay = np.exp(-gamma * np.asarray(t, dtype=np.float64))
    out = np.asarray(kappa0) * decay + 4.0 * mu / gamma * (1.0 - decay)
    return float(out) if np.ndim(out) == 0 else out


def lambda_tilde_closed_form(lambda0, gamma: float, t):
    out = np.asarray(lambda0) * np.exp(-gamma * np.asarray(t, dtype=np.float64))
    return float(out) if np.ndim(out) == 0 else out


def sl_pair_defect(traj, gamma: float) -> float:
    """Max deviation of ``kappa + 2 lambda`` from its exponentially decaying initial value."""
    if traj.variant is not None and Variant(traj.variant) is not Variant.FULL:
        raise ValueError("sl_pair_defect needs a full-model trajectory carrying both gain blocks")
    lam = getattr(traj, "lam", None)
    if lam is None:
        raise ValueError("trajectory has no lambda block")
    combo = traj.kappa + 2.0 * lam
    decay = np.exp(-gamma * (traj.times - traj.times[0]))
    expected = decay[:, None, None] * combo[0][None, :, :]
    return float(np.max(np.abs(combo - expected)))


class DecayFitError(ValueError):
    """Too few usable samples to fit a decay rate."""


def fit_decay_rate(traj, window: tuple[float, float], strict: bool = False) -> tuple[float, float]:
    """Least-squares slope of ``-log D`` against ``t`` inside ``window``.

    ``traj`` is a Trajectory or a ``(times, D)`` pair.  Samples with
    ``D <= 1e-12`` carry no reliable rate information and are skipped; with
    ``strict=True`` any such sample inside the window is an error instead.
    """
    if hasattr(traj, "records"):
        t = np.asarray(traj.times, dtype=np.float64)
        D = np.array([r.D for r in traj.records], dtype=np.float64)
    else:
        t, D = (np.asarray(a, dtype=np.float64) for a in traj)
    lo, hi = window
    if not lo < hi:
        raise ValueError(f"empty window [{lo}, {hi}]")
    inside = (t >= lo) & (t <= hi)
    usable = inside & (D > USABLE_D)
    if strict and np.any(inside & ~usable):
        first = float(t[inside & ~usable][0])
        raise DecayFitError(
            f"D underflows {USABLE_D:g} at t={first:.6g}; shrink the window below that time"
        )
    if np.count_nonzero(usable) < 4:
        raise DecayFitError(
            f"only {np.count_nonzero(usable)} samples in [{lo}, {hi}] have D > {USABLE_D:g}; need 4"
        )
    x = t[usable]
    y = -np.log(D[usable])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum(resid**2))
    r2 = 1.0 if ss_tot <= 1e-300 else 1.0 - ss_res / ss_tot
    rate = float(slope)
    if abs(rate) < 1e-12:
        rate = 0.0
    return rate, r2


def make_record(e: Ensemble, p: ModelParams, variant: Variant, drift: float,
                envelope: Optional[float] = None) -> DiagnosticsRecord:
    D, _ = diameter_D(e)
    L_max = float(np.max(lyapunov_matrix(e, p.mu0))) if p.mu0 > 0 else math.nan
    lt = lambda_tilde_block(e, variant)
    return DiagnosticsRecord(
        t=e.t, D=D, L_max=L_max,
        kappa_min=float(np.min(e.kappa)), kappa_max=float(np.max(e.kappa)),
        lambda_tilde_max_abs=float(np.max(np.abs(lt))),
        sphere_drift_max=float(drift), envelope=envelope,
    )


# --- hypothesis checkers -----------------------------------------------------

_THEOREMS = ("T31", "T32", "T33", "T34")


def _regime(p: ModelParams, which: str, variant: Variant) -> None:
    if not p.omega_is_zero:
        raise ValueError(f"{which} assumes omega = 0")
    if p.gamma0 != p.gamma1 or p.mu0 != p.mu1:
        raise ValueError(f"{which} assumes gamma0 == gamma1 and mu0 == mu1")
    if not p.mu0 > 0:
        raise ValueError(f"{which} needs mu > 0")
    want = CouplingLaw.ANTI_HEBBIAN if which in ("T31", "T33") else CouplingLaw.HEBBIAN
    if p.law0 is not want:
        raise ValueError(f"{which} requires the {want.value} law, config has {p.law0.value}")
    if which in ("T32", "T34") and not p.gamma0 > 0:
        raise ValueError(f"{which} needs gamma > 0")
    if which in ("T33", "T34"):
        if p.law1 is not want.neg_half():
            raise ValueError(
                f"{which} needs the lambda-tilde drive to vanish: law1 must be "
                f"{want.neg_half().value}, config has {p.law1.value}"
            )
        if variant not in (Variant.PERTURBED, Variant.FULL):
            raise ValueError(f"{which} needs a variant carrying lambda-tilde, got {variant.value}")
    elif variant not in (Variant.SL_PAIR, Variant.FULL):
        raise ValueError(f"{which} applies to the gain-pair system, got {variant.value}")


def _hebbian_margins(kappa, lam_abs, gamma, mu, kmin0, kmax0, D0, tilde: bool):
    kappa = np.asarray(kappa, dtype=np.float64)
    lower = 2.0 * lam_abs if tilde else 0.0
    kappa_M = 2.0 * mu * (kappa - lower) / (2.0 * mu - gamma * kappa)
    margins = {
        ("kappa_above_2lambda" if tilde else "kappa_positive"): kappa - lower,
        "kappa_below_mu_over_gamma": mu / gamma - kappa,
        "kappa_below_min_kappa0": kmin0 - kappa,
        "kappa_M_dominates": kappa_M - max(kmax0, mu / gamma),
        "D0_below": 1.0 - gamma * kappa / mu - D0,
    }
    rate = 2.0 * kappa - kappa_M - 4.0 * lam_abs
    return margins, kappa_M, rate


def check_theorem(e0: Ensemble, p: ModelParams, which: str, kappa: Optional[float] = None,
                  variant: Optional[Variant] = None) -> HypothesisReport:
    """Evaluate the hypothesis set of one aggregation theorem on initial data.

    ``which`` is one of T31 (anti-Hebbian gain pair), T32 (Hebbian gain pair,
    exponential rate), T33 (anti-Hebbian with rotational perturbation) and
    T34 (Hebbian with rotational perturbation).  For T32/T34 the constant
    kappa is searched on a grid of interior points and the feasible value
    with the fastest envelope rate is reported; pass ``kappa`` to evaluate a
    specific value instead.  Regime mismatches raise ``ValueError``.
    """
    which = which.upper()
    if which not in _THEOREMS:
        raise ValueError(f"unknown theorem {which!r}; choose from {', '.join(_THEOREMS)}")
    if variant is None:
        variant = Variant.PERTURBED if which in ("T33", "T34") else Variant.SL_PAIR
    variant = Variant(variant)
    _regime(p, which, variant)
    gamma, mu = p.gamma0, p.mu0
    K0 = e0.kappa
    kmin0, kmax0 = float(np.min(K0)), float(np.max(K0))
    D0, d_witness = diameter_D(e0)

    lt = lambda_tilde_block(e0, variant)
    lam_abs = float(np.max(np.abs(lt))) if which in ("T33", "T34") else 0.0
    margins: dict[str, float] = {}
    if which in ("T33", "T34"):
        margins["lambda_tilde_uniform"] = UNIFORM_TOL - float(np.max(lt) - np.min(lt))

    if which in ("T31", "T33"):
        L = lyapunov_matrix(e0, mu)
        witness = _lex_argmax(L)
        margins["min_kappa0"] = kmin0
        if which == "T31":
            margins["max_L"] = 1.0 - float(L[witness])
        else:
            ratio = float(np.max(2.0 * np.abs(lt) / K0)) if kmin0 > 0 else math.inf
            margins["lambda_ratio_plus_max_L"] = 1.0 - (ratio + float(L[witness]))
        sat = all(m > 0 for m in margins.values())
        return HypothesisReport(which, sat, margins, witness)

    tilde = which == "T34"
    lo = 2.0 * lam_abs if tilde else 0.0
    hi = min(mu / gamma, kmin0)
    grid = None
    if kappa is None:
        if hi > lo:
            grid = GRID_POINTS
            cand = lo + (hi - lo) * np.arange(1, GRID_POINTS + 1) / (GRID_POINTS + 1)
        else:
            cand = np.array([0.5 * (lo + hi)])
            grid = 0
    else:
        cand = np.array([float(kappa)])
    with np.errstate(divide="ignore", invalid="ignore"):
        ms, kM, rate = _hebbian_margins(cand, lam_abs, gamma, mu, kmin0, kmax0, D0, tilde)
    stacked = np.vstack([np.broadcast_to(v, cand.shape) for v in ms.values()])
    stacked = np.where(np.isnan(stacked), -np.inf, stacked)
    feasible = np.all(stacked > 0, axis=0)
    if np.any(feasible):
        idx = int(np.argmax(np.where(feasible, rate, -np.inf)))
    else:
        # nothing feasible: report the candidate whose worst margin is least bad
        idx = int(np.argmax(np.min(stacked, axis=0)))
    for name, row in zip(ms, stacked):
        margins[name] = float(row[idx])
    sat = all(m > 0 for m in margins.values())
    return HypothesisReport(
        which, sat, margins, d_witness, kappa=float(cand[idx]),
        kappa_M=float(np.broadcast_to(kM, cand.shape)[idx]),
        rate=float(np.broadcast_to(rate, cand.shape)[idx]), grid_points=grid,
        extras={"D0": D0, "lambda_tilde_abs": lam_abs},
    )


def envelope_from_report(report: HypothesisReport, D0: float):
    """Envelope function ``t -> bound`` for a satisfied T32/T34 report."""
    if report.theorem not in ("T32", "T34") or not report.satisfied:
        raise ValueError("an envelope needs a satisfied T32 or T34 report")
    lam_abs = report.extras.get("lambda_tilde_abs", 0.0)
    km, kM = report.kappa, report.kappa_M
    # validate once so failures surface before integration starts
    riccati_envelope(D0, km, kM, lam_abs, 0.0)
    return lambda t: riccati_envelope(D0, km, kM, lam_abs, t)
