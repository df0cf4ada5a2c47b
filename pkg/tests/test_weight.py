import itertools
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jumpgue.errors import ConfigInvalid
from jumpgue.numerics import PrecisionContext
from jumpgue.weight import (WeightParams, gaussian_moment, incomplete_moment, log_partition_constant, moment,
                            moment_list, partition_constant)

CTX = PrecisionContext(256)


def quad_moment(k, params):
    """Oracle: direct quadrature of x^k w(x), split at the jumps."""
    A, B1, B2, s1, s2 = params.values()
    lo, hi = sorted((s1, s2))
    return mp.quad(lambda x: x ** k * params.weight(x), [-mp.inf, lo, hi, mp.inf])


def test_gaussian_moments_closed_form():
    with mp.workprec(200):
        assert moment(0, WeightParams(1, 0, 0, strict=False), CTX) == pytest.approx(mp.sqrt(mp.pi))
        for k in range(0, 12):
            expected = 0 if k % 2 else mp.gamma(mp.mpf(k + 1) / 2)
            assert abs(gaussian_moment(k) - expected) < mp.mpf(2) ** -190


@pytest.mark.parametrize("k", [0, 1, 2, 5, 9])
@pytest.mark.parametrize("vals", [(1, "-0.5", "0.3", "-0.7", "0.9"), (0, 1, -1, "-0.7", "0.9"),
                                  ("0.2", 2, "-1.5", "-2", "1.3")])
def test_moments_against_quadrature(k, vals):
    p = WeightParams(*vals)
    with mp.workprec(120):
        ours = moment(k, p, PrecisionContext(120))
        ref = quad_moment(k, p)
        assert abs(ours - ref) < mp.mpf("1e-28") * max(1, abs(ref))


def test_incomplete_moment_quadrature():
    with mp.workprec(120):
        for k in range(6):
            ref = mp.quad(lambda x: x ** k * mp.exp(-x * x), [mp.mpf("0.4"), mp.inf])
            assert abs(incomplete_moment(k, "0.4", PrecisionContext(120)) - ref) < mp.mpf("1e-30")


def test_moment_list_matches_moment():
    p = WeightParams(1, "-0.5", "0.3", "-0.7", "0.9")
    ms = moment_list(8, p, CTX)
    with CTX.workprec():
        for k in range(9):
            assert ms[k] == moment(k, p, CTX)


def test_c3_three_ways():
    """C_3 = pi^{3/2}/4: closed form, prod of Gaussian norms, 3-fold Gauss-Hermite."""
    with mp.workprec(200):
        c3 = partition_constant(3, PrecisionContext(200))
        assert abs(c3 - mp.pi ** 1.5 / 4) < mp.mpf(2) ** -180
        norms = [mp.sqrt(mp.pi) * mp.factorial(j) / 2 ** j for j in range(3)]
        assert abs(c3 - mp.fprod(norms)) < mp.mpf(2) ** -180
        assert abs(mp.exp(log_partition_constant(3, PrecisionContext(200))) - c3) < mp.mpf(2) ** -180
    x, w = np.polynomial.hermite.hermgauss(6)
    total = 0.0
    for i, j, k in itertools.product(range(6), repeat=3):
        vd = (x[i] - x[j]) * (x[i] - x[k]) * (x[j] - x[k])
        total += w[i] * w[j] * w[k] * vd * vd
    assert total / math.factorial(3) == pytest.approx(float(c3), rel=1e-13)
    assert float(c3) == pytest.approx(1.3920819992, rel=1e-10)


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=15),
       st.floats(min_value=-3, max_value=3, allow_nan=False),
       st.floats(min_value=0.01, max_value=3))
def test_mirror_symmetry_of_moments(k, s1, width):
    p = WeightParams("0.7", "0.6", "-1.1", s1, s1 + width)
    with CTX.workprec():
        a, b = moment(k, p, CTX), moment(k, p.mirrored(), CTX)
        assert abs(a - (-1) ** k * b) <= mp.mpf(2) ** -200 * max(1, abs(a))


def test_relabeling_gives_same_moments():
    p = WeightParams(1, "-0.5", "0.3", "-0.7", "0.9")
    with CTX.workprec():
        for k in range(6):
            assert abs(moment(k, p, CTX) - moment(k, p.relabeled(), CTX)) < mp.mpf(2) ** -240


@pytest.mark.parametrize("kwargs", [
    dict(A=1, B1="-0.5", B2="0.3", s1=1, s2=1),
    dict(A=1, B1="-0.5", B2="0.3", s1=1, s2=0),
    dict(A=1, B1=-2, B2="0.3", s1=0, s2=1),
    dict(A=0, B1=0, B2=0, s1=0, s2=1, strict=False),
    dict(A=1, B1=0, B2="0.3", s1=0, s2=1),
    dict(A="inf", B1=1, B2=1, s1=0, s2=1),
])
def test_invalid_weights_rejected(kwargs):
    with pytest.raises(ConfigInvalid):
        WeightParams(**kwargs)


def test_relaxed_mode_admits_single_jump():
    WeightParams(1, 0, "0.3", 0, 1, strict=False)
