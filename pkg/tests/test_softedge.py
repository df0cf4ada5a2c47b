
import mpmath as mp
import pytest

from jumpgue import softedge as se
from jumpgue.errors import OrderViolation, RateMismatch
from jumpgue.numerics import PrecisionContext


def test_scaled_endpoints_worked_example():
    """n = 100, t1 = -1: sqrt(200) - 1/(sqrt2 100^(1/6)), checked at doubled precision."""
    lo = se.scaled_endpoints(100, -1, 1, PrecisionContext(128))
    hi = se.scaled_endpoints(100, -1, 1, PrecisionContext(256))
    with mp.workprec(256):
        assert abs(lo[0] - hi[0]) < mp.mpf(2) ** -120
        offset = 1 / (mp.sqrt(2) * mp.root(100, 6))
        assert abs(hi[0] - (mp.sqrt(200) - offset)) < mp.mpf(2) ** -250
        assert abs(hi[1] - (mp.sqrt(200) + offset)) < mp.mpf(2) ** -250
    assert float(offset) == pytest.approx(0.3282099, abs=5e-8)
    assert float(hi[0]) == pytest.approx(13.8139257, abs=5e-8)


def test_scaled_endpoints_order():
    with pytest.raises(OrderViolation):
        se.scaled_endpoints(64, 0, 0)
    with pytest.raises(OrderViolation):
        se.scaled_endpoints(64, 1, -1)


def _synthetic(c0, c1, c2, n_list, p="1/3"):
    with mp.workprec(256):
        c0, c1, c2 = mp.mpf(c0), mp.mpf(c1), mp.mpf(c2)
        p = mp.mpf(1) / 3 if p == "1/3" else mp.mpf(p)
        return [c0 + c1 * mp.mpf(n) ** -p + c2 * mp.mpf(n) ** (-2 * p) for n in n_list]


def test_fit_recovers_exact_model():
    n_list = (32, 64, 128, 256)
    c0, c1 = se.fit_inverse_cube_root(n_list, _synthetic("0.7", "-1.3", 0, n_list))
    with mp.workprec(256):
        assert abs(c0 - mp.mpf("0.7")) < mp.mpf("1e-60")
        assert abs(c1 + mp.mpf("1.3")) < mp.mpf("1e-60")


def test_pair_ratios_of_pure_power():
    ratios = se.pair_ratios(_synthetic(1, 2, 0, (32, 64, 128, 256)))
    for r in ratios:
        assert float(r) == pytest.approx(2 ** (-1 / 3), rel=1e-12)


@pytest.mark.parametrize("c2", [0, "0.5", "-3"])
def test_correction_exponent_with_second_correction(c2):
    vals = _synthetic(1, 2, mp.mpf(c2), (32, 64, 128, 256))
    assert se.correction_exponent(vals) == pytest.approx(1 / 3, abs=1e-6)


def test_correction_exponent_three_values_other_rate():
    vals = _synthetic(1, 2, 0, (16, 32, 64), p="0.5")
    assert se.correction_exponent(vals) == pytest.approx(0.5, abs=1e-6)


def test_correction_exponent_rejects_growth():
    with pytest.raises(RateMismatch):
        se.correction_exponent([1, 2, 4, 8])


def test_decay_exponent():
    n_list = (32, 64, 128, 256)
    assert se.decay_exponent(n_list, [3 * n ** -0.5 for n in n_list]) == pytest.approx(0.5)


def test_window_report():
    assert se.window_report("x", 0.4, 1 / 3, 0.2).passed
    assert not se.window_report("x", 0.6, 1 / 3, 0.2).passed


def test_hamiltonian_ii_formula():
    with mp.workprec(100):
        v1, v2, w1, w2, t1, t2 = (mp.mpf(x) for x in ("0.2", "-0.1", "0.3", "-0.5", "-1", "-0.5"))
        expected = v1 * w1 ** 2 + v2 * w2 ** 2 - (v1 + v2) ** 2 - t1 * v1 - t2 * v2
        assert se.hamiltonian_ii(v1, v2, w1, w2, t1, t2) == expected


def test_hii_terms_algebra_and_zero_input():
    with mp.workprec(100):
        d = {k: mp.mpf(v) for k, v in dict(d1="0.3", d2="-0.2", d11="0.7", d22="1.1", d12="-0.4").items()}
        H, t1, t2 = mp.mpf("0.1"), mp.mpf(-1), mp.mpf("-0.5")
        lhs = d["d1"] * (d["d22"] + d["d12"]) ** 2 + d["d2"] * (d["d11"] + d["d12"]) ** 2
        rhs = 4 * d["d1"] * d["d2"] * (t1 * d["d1"] + t2 * d["d2"] - H - (d["d1"] + d["d2"]) ** 2)
        assert abs(mp.fsum(se.hii_pde_terms(H, d, t1, t2)) - (lhs - rhs)) < mp.mpf("1e-28")
        zero = {k: mp.mpf(0) for k in d}
        assert se._normalized("x", None, se.hii_pde_terms(0, zero, t1, t2), 1e-3).rel_residual == 0


def test_scaling_point_row():
    pt = se.scaling_point((1, "-0.5", "0.3"), 8, -1, "-0.5")
    row = pt.csv_row()
    assert len(row) == len(se.CSV_FIELDS)
    assert row[0] == "8"
    # alpha_n is small and beta_n is close to n/2 near the edge
    assert abs(float(pt.beta_n) - 4) < 1


@pytest.mark.slow
def test_extraction_values(edge_extract):
    ext = edge_extract
    assert ext.v1 > 0 > ext.v2
    assert 0 < ext.envelope < 0.2
    with ext.ctx.workprec():
        H = se.hamiltonian_ii(ext.v1, ext.v2, ext.w1, ext.w2, ext.t1, ext.t2)
        assert abs(H - ext.H2) < mp.mpf("1e-40")
    assert len(ext.csv_rows()) == len(ext.n_list)


@pytest.mark.slow
def test_softedge_suite_passes(edge_extract):
    reports = se.softedge_suite(edge_extract)
    failed = [(r.label, r.n, float(r.rel_residual), r.threshold) for r in reports if not r.passed]
    assert not failed


@pytest.mark.slow
def test_hii_square_term_is_needed(edge_extract):
    kept = se.check_hii_pde(edge_extract)[0]
    dropped = se.check_hii_pde(edge_extract, drop_square=True)[0]
    assert kept.passed
    assert dropped.rel_residual > 0.1
