import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, strategies as st

from lhsac import _kernels, core
from lhsac.core import CouplingLaw as Law
from lhsac.dynamics import Variant, kernel_args

needs_numba = pytest.mark.skipif(_kernels.numba_impl is None, reason="numba not installed")


def _case(seed, variant, law0, law1):
    rng = np.random.default_rng(seed)
    n, dim = int(rng.integers(1, 7)), int(rng.integers(1, 5))
    omega = np.zeros((dim, dim)) if variant in (Variant.SL_PAIR, Variant.PERTURBED) \
        else core.random_skew_hermitian(dim, rng)
    g, m = rng.uniform(0, 2, 2)
    p = core.ModelParams(omega, g, g, m, m, law0, law1)
    Z = core.random_unit_states(n, dim, rng)
    K = rng.uniform(-1, 2, (n, n))
    L = rng.uniform(-1, 1, (n, n))
    return Z, K, L, kernel_args(variant, p)


@needs_numba
@given(st.integers(0, 2**32 - 1), st.sampled_from(list(Variant)),
       st.sampled_from(list(Law)), st.sampled_from(list(Law)))
def test_rhs_backends_agree(seed, variant, law0, law1):
    Z, K, L, args = _case(seed, variant, law0, law1)
    a = _kernels.numpy_impl.rhs(Z, K, L, *args)
    b = _kernels.numba_impl.rhs(Z, K, L, *args)
    for x, y in zip(a, b):
        assert np.max(np.abs(x - y)) <= 1e-13


@needs_numba
@pytest.mark.parametrize("variant", list(Variant))
@pytest.mark.parametrize("renormalize", [True, False])
def test_advance_backends_agree(variant, renormalize):
    Z, K, L, args = _case(7, variant, Law.HEBBIAN, Law.ANTI_HEBBIAN)
    a = _kernels.numpy_impl.advance(40, 0.01, Z, K, L, *args, renormalize)
    b = _kernels.numba_impl.advance(40, 0.01, Z, K, L, *args, renormalize)
    for x, y in zip(a[:3], b[:3]):
        assert np.max(np.abs(x - y)) <= 1e-12
    assert a[3] == pytest.approx(b[3], abs=1e-13)
    assert a[4:] == b[4:] == (-1, -1)


@pytest.mark.parametrize("impl", ["numpy", "numba"])
def test_advance_reports_nonfinite(impl):
    mod = _kernels.numpy_impl if impl == "numpy" else _kernels.numba_impl
    if mod is None:
        pytest.skip("numba not installed")
    p = core.ModelParams.zero_omega(2, gamma0=0.0, mu0=1e308, law0=Law.HEBBIAN)
    Z = np.array([[1, 0], [0, 1]], dtype=complex)
    K = np.ones((2, 2))
    with np.errstate(all="ignore"):
        out = mod.advance(5, 1.0, Z, K, K.copy(), *kernel_args(Variant.SL_PAIR, p), True)
    assert out[4] >= 0 and out[5] == 0
    assert np.all(np.isfinite(out[1]))


def test_advance_does_not_mutate_inputs():
    Z, K, L, args = _case(3, Variant.FULL, Law.ANTI_HEBBIAN, Law.ZERO)
    copies = [a.copy() for a in (Z, K, L)]
    _kernels.backend.advance(5, 0.01, Z, K, L, *args, True)
    for a, b in zip((Z, K, L), copies):
        assert np.array_equal(a, b)


def test_env_flag_selects_numpy():
    code = "import lhsac._kernels as k; print(k.BACKEND)"
    env = dict(os.environ, LHSAC_NUMBA="0")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"


def test_default_backend_prefers_numba():
    expected = "numba" if _kernels.numba_impl is not None else "numpy"
    if os.environ.get("LHSAC_NUMBA", "1").lower() in ("0", "false", "no", "off"):
        expected = "numpy"
    assert _kernels.BACKEND == expected
