import math

import mpmath as mp
import numpy as np
import pytest

from jumpgue import montecarlo as mc
from jumpgue.errors import ConfigInvalid
from jumpgue.numerics import PrecisionContext


def test_matrix_ensemble_moments():
    rng = np.random.default_rng(1)
    H = mc.sample_gue_matrices(rng, 200_000, 2)
    assert np.allclose(H, np.conj(np.swapaxes(H, 1, 2)))
    tr2 = np.einsum("kij,kji->k", H, H).real
    # density exp(-Tr H^2): E Tr H^2 = n^2 / 2
    assert tr2.mean() == pytest.approx(2.0, abs=0.02)
    one = mc.sample_gue_matrices(rng, 200_000, 1)[:, 0, 0].real
    assert one.var() == pytest.approx(0.5, abs=0.01)


def test_single_eigenvalue_closed_form():
    """n = 1: P(no eigenvalue in (-1/2, 1/2)) = erfc(1/2), by both routes."""
    exact = 0.4795001221869535
    det = mc.gap_probability_det(1, -0.5, 0.5, "none")
    assert float(det) == pytest.approx(exact, rel=1e-14)
    est = mc.gap_probability_mc(mc.MCConfig(1, 200_000, 3, -0.5, 0.5, "none"))
    assert abs(est.p_hat - exact) <= 4 * est.stderr


def test_modes_are_complementary_for_single_eigenvalue():
    ctx = PrecisionContext(200)
    all_in = mc.gap_probability_det(1, -0.5, 0.5, "all", ctx)
    none_in = mc.gap_probability_det(1, -0.5, 0.5, "none", ctx)
    with mp.workprec(200):
        assert abs(all_in + none_in - 1) < mp.mpf("1e-50")


def test_det_against_direct_quadrature_n2():
    """Oracle: 2-fold integral of the eigenvalue density over the complement."""
    with mp.workprec(80):
        mp.mp.dps = 20
        w = lambda x: mp.exp(-x * x)
        f = lambda x, y: (x - y) ** 2 * w(x) * w(y)
        pts = [-mp.inf, -0.5, 0.5, mp.inf]
        total = mp.quad(f, pts, pts)
        inside = mp.quad(f, [-0.5, 0.5], [-0.5, 0.5])
        assert float(mc.gap_probability_det(2, -0.5, 0.5, "all")) == pytest.approx(float(inside / total), rel=1e-12)


def test_deterministic_given_seed():
    cfg = mc.MCConfig(3, 30_000, 11, -0.5, 0.5, chunk=7_000)
    a, b = mc.gap_probabilities_mc(cfg), mc.gap_probabilities_mc(cfg)
    assert a == b
    other = mc.gap_probabilities_mc(mc.MCConfig(3, 30_000, 12, -0.5, 0.5, chunk=7_000))
    assert other != a


def test_spectrum_chunks_cover_samples():
    cfg = mc.MCConfig(2, 45_001, 5, -0.5, 0.5, chunk=20_000)
    sizes = [ev.shape for ev in mc.sample_gue_spectrum(cfg)]
    assert sizes == [(20_000, 2), (20_000, 2), (5_001, 2)]


def test_gap_estimate_stderr():
    est = mc.GapEstimate.from_count(250, 1000, "none_in_interval")
    assert est.p_hat == 0.25
    assert est.stderr == pytest.approx(math.sqrt(0.25 * 0.75 / 1000))


def test_comparison_row_handles_zero_stderr():
    cfg = mc.MCConfig(4, 100, 1, -0.5, 0.5)
    row = mc.comparison_row(cfg, mc.GapEstimate.from_count(0, 100, "all_in_interval"), "5e-8")
    assert row[-1] == "inf"
    row = mc.comparison_row(cfg, mc.GapEstimate.from_count(0, 100, "all_in_interval"), 0)
    assert row[-1] == "0.0"


@pytest.mark.parametrize("kwargs", [
    dict(n=0, samples=10, seed=1, s1=0, s2=1),
    dict(n=65, samples=10, seed=1, s1=0, s2=1),
    dict(n=2, samples=0, seed=1, s1=0, s2=1),
    dict(n=2, samples=10, seed=-1, s1=0, s2=1),
    dict(n=2, samples=10, seed=1, s1=1, s2=0),
    dict(n=2, samples=10, seed=1, s1=0, s2=float("inf")),
    dict(n=2, samples=10, seed=1, s1=0, s2=1, mode="some"),
])
def test_config_validation(kwargs):
    with pytest.raises(ConfigInvalid):
        mc.MCConfig(**kwargs)


def test_mode_aliases():
    assert mc.canonical_mode("none") == "none_in_interval"
    assert mc.canonical_mode("all_in_interval") == "all_in_interval"
