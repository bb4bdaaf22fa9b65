import os
import subprocess
import sys

import numpy as np
import pytest

from qmarkov import _kernels
from qmarkov.channel import random_channel
from qmarkov.classify import pure_state_grid
from qmarkov.invariant import default_state

needs_numba = pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba not installed")


@pytest.fixture
def setup():
    ch = random_channel(3, 2, seed=7)
    return ch, default_state(ch)


@needs_numba
def test_apply_kraus_backends_agree(setup, rng):
    ch, _ = setup
    x = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    a = _kernels.apply_kraus(ch.kraus, x, use_numba=True)
    b = _kernels.apply_kraus(ch.kraus, x, use_numba=False)
    assert np.abs(a - b).max() < 1e-12


@needs_numba
@pytest.mark.parametrize("m", [0, 1, 3])
def test_word_products_backends_agree(setup, m):
    ch, _ = setup
    a = _kernels.word_products(ch.kraus, m, use_numba=True)
    b = _kernels.word_products(ch.kraus, m, use_numba=False)
    assert a.shape == b.shape == (2 ** m, 3, 3)
    assert np.abs(a - b).max() < 1e-12


def test_word_products_order(setup):
    ch, _ = setup
    w = _kernels.word_products(ch.kraus, 2, use_numba=False)
    l0, l1 = ch.kraus
    # index i1*d + i2 holds l_{i1} l_{i2}
    assert np.allclose(w[1], l0 @ l1)
    assert np.allclose(w[2], l1 @ l0)


@needs_numba
def test_trace_norm_series_backends_agree(setup):
    ch, st = setup
    grid = pure_state_grid(3)
    a = _kernels.trace_norm_series(ch.predual_superop, grid, st.rho, 30, use_numba=True)
    b = _kernels.trace_norm_series(ch.predual_superop, grid, st.rho, 30, use_numba=False)
    assert np.abs(a - b).max() < 1e-12


@needs_numba
def test_two_point_series_backends_agree(setup):
    ch, st = setup
    a = _kernels.two_point_series(ch.superop, st.rho, 30, use_numba=True)
    b = _kernels.two_point_series(ch.superop, st.rho, 30, use_numba=False)
    assert np.abs(a - b).max() < 1e-12


@needs_numba
def test_cluster_series_backends_agree(setup, rng):
    ch, st = setup
    r = rng.standard_normal((4, 3, 3)) + 0j
    y = rng.standard_normal((5, 3, 3)) + 0j
    f, g = rng.standard_normal(4) + 0j, rng.standard_normal(5) + 0j
    a = _kernels.cluster_series(r, y, ch.superop, f, g, 10, use_numba=True)
    b = _kernels.cluster_series(r, y, ch.superop, f, g, 10, use_numba=False)
    assert np.abs(a - b).max() < 1e-12


def test_env_flag_selects_numpy():
    env = dict(os.environ, QMARKOV_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", "import qmarkov._kernels as k; print(k.backend())"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"
