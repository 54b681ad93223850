import os
import subprocess
import sys

import numpy as np
import pytest

from sparsedom import kernels
from sparsedom.dyadic import DyadicInterval, Signal, chi_weights


def test_backend_env_flag_selects_numpy():
    env = dict(os.environ, SPARSEDOM_BACKEND="numpy")
    out = subprocess.run(
        [sys.executable, "-c",
         "from sparsedom import kernels; print(kernels.BACKEND)"],
        capture_output=True, text=True, env=env, check=True)
    assert out.stdout.strip() == "numpy"


def test_backends_agree_subtree_profile():
    if kernels.BACKEND != "numba":
        pytest.skip("numba backend not active")
    rng = np.random.default_rng(0)
    for J in (3, 5, 7):
        vals = rng.standard_normal(1 << J) ** 2
        vals[rng.random(1 << J) < 0.4] = 0.0
        vals[0] = 0.0
        for d0 in range(J):
            for i0 in (0, (1 << d0) - 1):
                a = kernels._subtree_profile_nb(vals, J, d0, i0)
                b = kernels._subtree_profile_np(vals, J, d0, i0)
                assert np.allclose(a, b, rtol=1e-13, atol=0)


def test_backends_agree_chi_sums():
    if kernels.BACKEND != "numba":
        pytest.skip("numba backend not active")
    rng = np.random.default_rng(1)
    for J in (3, 6):
        absf = np.abs(rng.standard_normal(1 << J))
        for d in range(J + 1):
            a = kernels._chi_sums_depth_nb(absf, J, d, 8)
            b = kernels._chi_sums_depth_np(absf, J, d, 8)
            assert np.allclose(a, b, rtol=1e-12, atol=0)


def test_chi_sums_match_direct_weights():
    rng = np.random.default_rng(2)
    J = 5
    f = Signal(np.abs(rng.standard_normal(1 << J)))
    for d in (0, 2, 4):
        row = kernels.chi_sums_depth(f.values, J, d, 8)
        for i in (0, (1 << d) // 2, (1 << d) - 1):
            direct = np.dot(f.values, chi_weights(DyadicInterval(d, i), J, 8)) / (1 << J)
            assert row[i] == pytest.approx(direct, rel=1e-12)


def test_interval_sums_pyramid():
    rng = np.random.default_rng(3)
    vals = rng.standard_normal(16)
    heap = kernels.interval_sums(vals)
    for d in range(5):
        B = 1 << (4 - d)
        for i in range(1 << d):
            assert heap[(1 << d) + i] == pytest.approx(np.sum(vals[i * B:(i + 1) * B]), abs=1e-12)


def test_heap_subtree_sums():
    rng = np.random.default_rng(4)
    J = 4
    vals = np.zeros(1 << J)
    vals[1:] = rng.standard_normal((1 << J) - 1)
    out = kernels.heap_subtree_sums(vals, J)
    for d in range(J):
        for i in range(1 << d):
            expect = 0.0
            for dd in range(d, J):
                lo = i << (dd - d)
                expect += np.sum(vals[(1 << dd) + lo:(1 << dd) + lo + (1 << (dd - d))])
            assert out[(1 << d) + i] == pytest.approx(expect, abs=1e-12)


def test_subtree_profile_integral_identity():
    # integral of the profile equals the plain sum of the subtree values
    rng = np.random.default_rng(5)
    J = 6
    vals = np.zeros(1 << J)
    vals[1:] = rng.standard_normal((1 << J) - 1) ** 2
    prof = kernels.subtree_profile(vals, J, 0, 0)
    assert np.sum(prof) / (1 << J) == pytest.approx(np.sum(vals), rel=1e-12)
