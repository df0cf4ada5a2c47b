import mpmath as mp
import pytest

from jumpgue import painleve4 as p4
from jumpgue.errors import DegenerateResidue
from jumpgue.numerics import PrecisionContext
from jumpgue.ortho import aux_quantities, build_ortho_system
from jumpgue.weight import WeightParams

from conftest import GENERIC, INDICATOR

CTX = PrecisionContext(512)


@pytest.mark.parametrize("vals", [GENERIC, INDICATOR, ("0.3", 2, "-1.5", "-1.2", "0.4")])
@pytest.mark.parametrize("n", [1, 6])
def test_piv_suite_passes(vals, n):
    reports = p4.piv_suite(WeightParams(*vals), n, CTX)
    assert reports
    assert not [(r.label, r.rel_residual) for r in reports if not r.passed]


def test_hamilton_equations_cover_all_components(generic):
    labels = {r.label for r in p4.check_hamilton_equations(generic, 6, CTX)}
    assert {"da1/dx", "da2/dx", "db1/dx", "db2/dx"} <= labels


def test_state_round_trip(generic):
    st = p4.piv_state(generic, 6, CTX)
    sys = build_ortho_system(generic, 7, CTX)
    with mp.workprec(sys.bits):
        aux = aux_quantities(6, sys)
        R1, R2, r1, r2 = p4.residues_from_state(st)
        for got, want in ((R1, aux.R1), (R2, aux.R2), (r1, aux.r1), (r2, aux.r2)):
            assert abs(got - want) < mp.mpf("1e-100") * max(1, abs(want))


def test_hamiltonian_value_is_sigma_shift(generic):
    st = p4.piv_state(generic, 4, CTX)
    with mp.workprec(CTX.bits):
        H = p4.hamiltonian_iv(st.a1, st.a2, st.b1, st.b2, st.x, st.s, st.n)
        assert abs(H - st.H) < mp.mpf("1e-100") * max(1, abs(H))


def test_gradient_matches_rhs(generic):
    st = p4.piv_state(generic, 6, CTX)
    reports = p4.check_hamiltonian_gradient(st)
    assert len(reports) == 4 and all(r.passed for r in reports)


def test_gaussian_limit_is_degenerate():
    p = WeightParams(1, 0, 0, strict=False)
    with pytest.raises(DegenerateResidue):
        p4.piv_state(p, 4, CTX)


def test_single_jump_is_degenerate():
    p = WeightParams(1, "-0.5", 0, "-0.7", "0.9", strict=False)
    with pytest.raises(DegenerateResidue):
        p4.piv_state(p, 4, CTX)
