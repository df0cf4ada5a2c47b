import mpmath as mp
import pytest

from jumpgue import painleve2 as p2
from jumpgue.errors import StepCollapse
from jumpgue.softedge import ANALYSIS_CONTEXT

CTX = ANALYSIS_CONTEXT


def generic_state():
    with CTX.workprec():
        return p2.PIIState.make(-1, "0.5", "0.17", "-0.08", "-0.15", "-0.54")


def airy_state(xi, eta):
    with CTX.workprec():
        xi, eta = mp.mpf(xi), mp.mpf(eta)
        w = [mp.airyai(t, derivative=1) / mp.airyai(t) for t in (xi, xi + eta)]
        return p2.PIIState.make(xi, eta, 0, 0, *w)


def test_rhs_on_zero_state():
    with CTX.workprec():
        st = p2.PIIState.make(1, "0.5", 0, 0, 0, 0)
        assert tuple(p2.pii_rhs(st)) == (0, 0, 1, mp.mpf("1.5"))


def test_hamiltonian_value():
    st = generic_state()
    with CTX.workprec():
        v1, v2, w1, w2 = st.v1, st.v2, st.w1, st.w2
        expected = v1 * w1 ** 2 + v2 * w2 ** 2 - (v1 + v2) ** 2 + v1 - mp.mpf("-0.5") * v2
        assert abs(st.H2 - expected) < mp.mpf("1e-70")


def test_gradient_structure():
    reports = p2.check_pii_gradient(generic_state(), CTX)
    assert len(reports) == 4
    assert all(r.passed for r in reports)


def test_flow_identity_and_sampling():
    start = generic_state()
    with CTX.workprec():
        samples = [mp.mpf("-0.9"), mp.mpf("-0.8")]
        traj = p2.integrate_pii(start, "-0.7", "1e-20", CTX, samples=samples)
        assert [s.xi for s in traj.samples] == samples + [mp.mpf("-0.7")]
        assert traj.final.xi == mp.mpf("-0.7")
    assert p2.flow_identity_report(traj).passed


def test_backward_integration():
    traj = p2.integrate_pii(generic_state(), "-1.4", "1e-18", CTX)
    with CTX.workprec():
        assert traj.final.xi == mp.mpf("-1.4")
    assert p2.flow_identity_report(traj).passed


def test_airy_oracle_and_exact_invariance():
    reports = p2.invariant_subspace_report(airy_state("0.5", "0.3"), "-1", "1e-20", CTX)
    inv = reports[0]
    assert inv.lhs == 0
    assert all(r.passed for r in reports)


def test_pole_detection_near_first_airy_zero():
    start = airy_state(0, "0.5")
    with pytest.raises(StepCollapse) as info:
        p2.integrate_pii(start, -3, "1e-10", CTX)
    with CTX.workprec():
        assert abs(info.value.xi - mp.airyaizero(1)) < mp.mpf("1e-4")


def test_self_convergence_factor():
    report = p2.self_convergence(generic_state(), "-0.6", "1e-14", CTX)
    assert report["state_factor"] >= 8
    assert report["defect_factor"] >= 8


def test_deterministic_trajectory():
    a = p2.integrate_pii(generic_state(), "-0.8", "1e-16", CTX).csv_rows()
    b = p2.integrate_pii(generic_state(), "-0.8", "1e-16", CTX).csv_rows()
    assert a == b


@pytest.mark.slow
def test_match_finite_n(edge_extract):
    rep = p2.match_finite_n(edge_extract, "0.2", tol="1e-15")
    assert rep.passed
    assert 0 < rep.rel_residual < rep.threshold
