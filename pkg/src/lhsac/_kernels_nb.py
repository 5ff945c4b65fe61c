"""Numba versions of the kernels in :mod:`lhsac._kernels` (same signatures).

Kept in a separate module so the jitted functions live at module level,
which numba needs for its on-disk cache to be reused across processes.
"""
import numpy as np
from numba import njit


@njit(cache=True)
def law_nb(code, s):
    if code == 0:
        return s
    if code == 1:
        return 1.0 - 0.5 * s
    if code == 2:
        return 0.0
    if code == 3:
        return -0.5 * s
    return -0.5 * (1.0 - 0.5 * s)


@njit(cache=True)
def rhs_into(Z, K, L, omega, rates, sphere_mode, rot_on, k_on, l_on,
             law0, law1, lmix0, lmix1, dZ, dK, dL):
    n, m = Z.shape
    g0 = rates[0]
    g1 = rates[1]
    m0 = rates[2]
    m1 = rates[3]
    inv_n = 1.0 / n
    acc = np.empty(m, dtype=np.complex128)
    for j in range(n):
        for a in range(m):
            s = 0j
            for b in range(m):
                s += omega[a, b] * Z[j, b]
            dZ[j, a] = s
            acc[a] = 0j
        njj = 0.0
        for a in range(m):
            njj += Z[j, a].real ** 2 + Z[j, a].imag ** 2
        coef = 0j
        rot = 0j
        for k in range(n):
            h = 0j
            sq = 0.0
            for a in range(m):
                h += Z[j, a].conjugate() * Z[k, a]
                dr = Z[j, a].real - Z[k, a].real
                di = Z[j, a].imag - Z[k, a].imag
                sq += dr * dr + di * di
            if sphere_mode != 0:
                kjk = K[j, k]
                for a in range(m):
                    acc[a] += kjk * Z[k, a]
                if sphere_mode == 1:
                    coef += kjk * h.conjugate()
                else:
                    coef += kjk * h.real
            if rot_on:
                rot += L[j, k] * (2j * h.imag)
            if k_on:
                dK[j, k] = -g0 * K[j, k] + m0 * law_nb(law0, sq)
            else:
                dK[j, k] = 0.0
            if l_on:
                drive = lmix0 * law_nb(law0, sq) + lmix1 * law_nb(law1, sq)
                dL[j, k] = -g1 * L[j, k] + m1 * drive
            else:
                dL[j, k] = 0.0
        scale = njj if sphere_mode == 1 else 1.0
        for a in range(m):
            v = 0j
            if sphere_mode != 0:
                v += scale * acc[a] - coef * Z[j, a]
            if rot_on:
                v += rot * Z[j, a]
            dZ[j, a] += v * inv_n


@njit(cache=True)
def rhs_nb(Z, K, L, omega, rates, sphere_mode, rot_on, k_on, l_on, law0, law1, lmix0, lmix1):
    dZ = np.empty_like(Z)
    dK = np.empty_like(K)
    dL = np.empty_like(L)
    rhs_into(Z, K, L, omega, rates, sphere_mode, rot_on, k_on, l_on,
             law0, law1, lmix0, lmix1, dZ, dK, dL)
    return dZ, dK, dL


@njit(cache=True)
def advance_nb(n_steps, dt, Z, K, L, omega, rates, sphere_mode, rot_on, k_on, l_on,
               law0, law1, lmix0, lmix1, renormalize):
    n, m = Z.shape
    Z = Z.copy()
    K = K.copy()
    L = L.copy()
    a1 = np.empty_like(Z); a2 = np.empty_like(Z); a3 = np.empty_like(Z); a4 = np.empty_like(Z)
    b1 = np.empty_like(K); b2 = np.empty_like(K); b3 = np.empty_like(K); b4 = np.empty_like(K)
    c1 = np.empty_like(L); c2 = np.empty_like(L); c3 = np.empty_like(L); c4 = np.empty_like(L)
    Zs = np.empty_like(Z)
    Ks = np.empty_like(K)
    Ls = np.empty_like(L)
    Zn = np.empty_like(Z)
    Kn = np.empty_like(K)
    Ln = np.empty_like(L)
    half = 0.5 * dt
    sixth = dt / 6.0
    drift_max = 0.0
    for step in range(n_steps):
        rhs_into(Z, K, L, omega, rates, sphere_mode, rot_on, k_on, l_on,
                 law0, law1, lmix0, lmix1, a1, b1, c1)
        Zs[:] = Z + half * a1
        Ks[:] = K + half * b1
        Ls[:] = L + half * c1
        rhs_into(Zs, Ks, Ls, omega, rates, sphere_mode, rot_on, k_on, l_on,
                 law0, law1, lmix0, lmix1, a2, b2, c2)
        Zs[:] = Z + half * a2
        Ks[:] = K + half * b2
        Ls[:] = L + half * c2
        rhs_into(Zs, Ks, Ls, omega, rates, sphere_mode, rot_on, k_on, l_on,
                 law0, law1, lmix0, lmix1, a3, b3, c3)
        Zs[:] = Z + dt * a3
        Ks[:] = K + dt * b3
        Ls[:] = L + dt * c3
        rhs_into(Zs, Ks, Ls, omega, rates, sphere_mode, rot_on, k_on, l_on,
                 law0, law1, lmix0, lmix1, a4, b4, c4)
        Zn[:] = Z + sixth * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
        Kn[:] = K + sixth * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
        Ln[:] = L + sixth * (c1 + 2.0 * c2 + 2.0 * c3 + c4)
        for j in range(n):
            ok = True
            for a in range(m):
                if not np.isfinite(Zn[j, a].real) or not np.isfinite(Zn[j, a].imag):
                    ok = False
            for k in range(n):
                if not np.isfinite(Kn[j, k]) or not np.isfinite(Ln[j, k]):
                    ok = False
            if not ok:
                return Z, K, L, drift_max, step, j
        for j in range(n):
            nrm = 0.0
            for a in range(m):
                nrm += Zn[j, a].real ** 2 + Zn[j, a].imag ** 2
            nrm = np.sqrt(nrm)
            dev = abs(nrm - 1.0)
            if dev > drift_max:
                drift_max = dev
            if renormalize:
                for a in range(m):
                    Zn[j, a] = Zn[j, a] / nrm
        Z[:] = Zn
        K[:] = Kn
        L[:] = Ln
    return Z, K, L, drift_max, -1, -1
