"""Hot loops: the ensemble right-hand side and the fixed-step RK4 driver.

Two implementations with identical signatures live here.  The numba one is
used when numba imports and ``LHSAC_NUMBA`` is not set to a false value
(``0``, ``false``, ``no``, ``off``); otherwise the vectorized numpy one is used.
Both are always importable as ``numpy_impl`` / ``numba_impl`` for comparison.

Shared argument conventions
---------------------------
sphere_mode : 0 no sphere coupling, 1 the ``<z_j,z_j> z_k - <z_k,z_j> z_j``
    form, 2 the Stuart-Landau pair form ``z_k - Re<z_j,z_k> z_j``.
rot_on : include ``lambda_jk (<z_j,z_k> - <z_k,z_j>) z_j``.
k_on / l_on : evolve the kappa / lambda blocks (otherwise derivative is zero).
law0, law1 : integer law codes (see ``CouplingLaw.code``).
lmix0, lmix1 : lambda-block drive is ``lmix0 * Gamma0 + lmix1 * Gamma1``.
rates : float array ``[gamma0, gamma1, mu0, mu1]``.
"""
from __future__ import annotations

import os
import types

import numpy as np

_FALSE = {"0", "false", "no", "off"}


def _law_np(code, s):
    if code == 0:
        return s
    if code == 1:
        return 1.0 - 0.5 * s
    if code == 2:
        return np.zeros_like(s)
    if code == 3:
        return -0.5 * s
    return -0.5 * (1.0 - 0.5 * s)


def rhs_np(Z, K, L, omega, rates, sphere_mode, rot_on, k_on, l_on, law0, law1, lmix0, lmix1):
    n = Z.shape[0]
    H = Z.conj() @ Z.T
    dZ = Z @ omega.T
    if sphere_mode == 1:
        norms = H.diagonal().real
        coef = np.sum(K * H.conj(), axis=1)
        dZ = dZ + (norms[:, None] * (K @ Z) - coef[:, None] * Z) / n
    elif sphere_mode == 2:
        coef = np.sum(K * H.real, axis=1)
        dZ = dZ + (K @ Z - coef[:, None] * Z) / n
    if rot_on:
        rot = np.sum(L * (2j * H.imag), axis=1)
        dZ = dZ + rot[:, None] * Z / n
    diff = Z[:, None, :] - Z[None, :, :]
    S = np.sum(diff.real**2 + diff.imag**2, axis=-1)
    g0, g1, m0, m1 = rates
    if k_on:
        dK = -g0 * K + m0 * _law_np(law0, S)
    else:
        dK = np.zeros_like(K)
    if l_on:
        drive = lmix0 * _law_np(law0, S) + lmix1 * _law_np(law1, S)
        dL = -g1 * L + m1 * drive
    else:
        dL = np.zeros_like(L)
    return dZ, dK, dL


def _first_nonfinite_np(Z, K, L):
    bad = ~np.all(np.isfinite(Z), axis=1)
    bad |= ~np.all(np.isfinite(K), axis=1)
    bad |= ~np.all(np.isfinite(L), axis=1)
    idx = np.flatnonzero(bad)
    return int(idx[0]) if idx.size else -1


def advance_np(n_steps, dt, Z, K, L, omega, rates, sphere_mode, rot_on, k_on, l_on,
               law0, law1, lmix0, lmix1, renormalize):
    """Take ``n_steps`` RK4 steps.

    Returns ``(Z, K, L, drift_max, bad_step, bad_particle)``; ``bad_step`` is
    -1 unless a non-finite value appeared, in which case the arrays are the
    last finite ones and ``bad_particle`` names the offending row.
    """
    args = (omega, rates, sphere_mode, rot_on, k_on, l_on, law0, law1, lmix0, lmix1)
    drift_max = 0.0
    half = 0.5 * dt
    for step in range(n_steps):
        a1, b1, c1 = rhs_np(Z, K, L, *args)
        a2, b2, c2 = rhs_np(Z + half * a1, K + half * b1, L + half * c1, *args)
        a3, b3, c3 = rhs_np(Z + half * a2, K + half * b2, L + half * c2, *args)
        a4, b4, c4 = rhs_np(Z + dt * a3, K + dt * b3, L + dt * c3, *args)
        sixth = dt / 6.0
        Zn = Z + sixth * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
        Kn = K + sixth * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
        Ln = L + sixth * (c1 + 2.0 * c2 + 2.0 * c3 + c4)
        bad = _first_nonfinite_np(Zn, Kn, Ln)
        if bad >= 0:
            return Z, K, L, drift_max, step, bad
        norms = np.sqrt(np.sum(Zn.real**2 + Zn.imag**2, axis=1))
        drift_max = max(drift_max, float(np.max(np.abs(norms - 1.0))))
        if renormalize:
            Zn = Zn / norms[:, None]
        Z, K, L = Zn, Kn, Ln
    return Z, K, L, drift_max, -1, -1


numpy_impl = types.SimpleNamespace(name="numpy", rhs=rhs_np, advance=advance_np)


def _build_numba():
    from . import _kernels_nb as nb

    return types.SimpleNamespace(name="numba", rhs=nb.rhs_nb, advance=nb.advance_nb)


def _numba_requested() -> bool:
    return os.environ.get("LHSAC_NUMBA", "1").strip().lower() not in _FALSE


try:
    numba_impl = _build_numba()
except ImportError:  # numba missing: fall back silently
    numba_impl = None

backend = numba_impl if (numba_impl is not None and _numba_requested()) else numpy_impl
BACKEND = backend.name
