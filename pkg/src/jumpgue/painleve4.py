"""Coupled Painleve IV variables at finite n.

With x = (s1+s2)/2, s = (s2-s1)/2 and T = r_{n,1} + r_{n,2} + n,

    a_i = r_{n,i}^2 / (R_{n,i} T),    b_i = R_{n,i} T / r_{n,i},

so that r_{n,i} = a_i b_i and R_{n,i} = a_i b_i^2 / (a1 b1 + a2 b2 + n).
The flow in x is checked pointwise; d/dx is the (1,1) direction in (s1, s2).
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath as mp

from .errors import DegenerateResidue
from .identities import (
    DEFAULT_FD_STEP,
    _aux_field,
    _field,
    _mantissa_bits,
    _point,
    make_report,
    system_at,
)
from .numerics import PrecisionContext, directional_diff, to_real
from .ortho import AuxQuantities, OrthoSystem, aux_quantities, sigma_n
from .weight import WeightParams

TOL_HAMILTON = 1e-15
TOL_HIV = 1e-25
TOL_MAPS = 1e-18
TOL_A_RESIDUE = 1e-25
TOL_GRADIENT = 1e-25


@dataclass(frozen=True)
class PIVState:
    x: object
    s: object
    a1: object
    a2: object
    b1: object
    b2: object
    n: int
    H: object

    @property
    def s1(self):
        return self.x - self.s

    @property
    def s2(self):
        return self.x + self.s


def hamiltonian_iv(a1, a2, b1, b2, x, s, n):
    """-2(a1b1+a2b2+n)(a1+a2) - (a1b1^2+a2b2^2) + 2((x-s)a1b1 + (x+s)a2b2 + nx)."""
    u = a1 * b1 + a2 * b2 + n
    return -2 * u * (a1 + a2) - (a1 * b1 * b1 + a2 * b2 * b2) + 2 * ((x - s) * a1 * b1 + (x + s) * a2 * b2 + n * x)


def piv_rhs(a1, a2, b1, b2, x, s, n):
    """Right-hand sides (da1, da2, db1, db2)/dx of the coupled Painleve IV system."""
    return (
        -2 * a1 * (a1 + a2 + b1 - x + s),
        -2 * a2 * (a1 + a2 + b2 - x - s),
        b1 * b1 + 2 * b1 * (2 * a1 + a2 - x + s) + 2 * (a2 * b2 + n),
        b2 * b2 + 2 * b2 * (a1 + 2 * a2 - x - s) + 2 * (a1 * b1 + n),
    )


def _check_nonzero(value, what, bits):
    if abs(value) < mp.ldexp(mp.mpf(1), -(bits * 3) // 4):
        raise DegenerateResidue(f"{what} vanishes; Painleve IV variables undefined")


def to_piv_state(aux: AuxQuantities, sys: OrthoSystem, n: int) -> PIVState:
    if aux.n != n:
        raise ValueError("aux quantities belong to a different n")
    with mp.workprec(sys.bits):
        for name, v in (("R_n1", aux.R1), ("R_n2", aux.R2), ("r_n1", aux.r1), ("r_n2", aux.r2)):
            _check_nonzero(v, name, sys.bits)
        T = aux.r1 + aux.r2 + n
        a1 = aux.r1 ** 2 / (aux.R1 * T)
        a2 = aux.r2 ** 2 / (aux.R2 * T)
        b1 = aux.R1 * T / aux.r1
        b2 = aux.R2 * T / aux.r2
        x = (aux.s1 + aux.s2) / 2
        s = (aux.s2 - aux.s1) / 2
        return PIVState(x, s, a1, a2, b1, b2, n, hamiltonian_iv(a1, a2, b1, b2, x, s, n))


def residues_from_state(st: PIVState):
    """Inverse map: (R_n1, R_n2, r_n1, r_n2)."""
    u = st.a1 * st.b1 + st.a2 * st.b2 + st.n
    return (st.a1 * st.b1 ** 2 / u, st.a2 * st.b2 ** 2 / u, st.a1 * st.b1, st.a2 * st.b2)


def piv_state(params: WeightParams, n: int, ctx: PrecisionContext) -> PIVState:
    sys = system_at(params, n + 1, ctx)
    return to_piv_state(aux_quantities(n, sys), sys, n)


def check_hamiltonian(params: WeightParams, n: int, ctx: PrecisionContext) -> list:
    """H_IV(a, b) = sigma_n + n(s1+s2), a_i = R_{n-1,i}/2, and the (a,b) -> (R,r) round trip."""
    sys = system_at(params, n + 1, ctx)
    out = []
    with ctx.workprec():
        aux = aux_quantities(n, sys)
        prev = aux_quantities(n - 1, sys)
        st = to_piv_state(aux, sys, n)
        _, _, _, s1, s2 = params.values()
        out.append(make_report("H_IV = sigma_n + n(s1+s2)", n, params, st.H, sigma_n(sys, n, "two_p") + n * (s1 + s2),
                               TOL_HIV))
        out.append(make_report("a_1 = R_(n-1),1/2", n, params, st.a1, prev.R1 / 2, TOL_A_RESIDUE))
        out.append(make_report("a_2 = R_(n-1),2/2", n, params, st.a2, prev.R2 / 2, TOL_A_RESIDUE))
        back = residues_from_state(st)
        for name, got, want in zip(("R_n1", "R_n2", "r_n1", "r_n2"), back, (aux.R1, aux.R2, aux.r1, aux.r2)):
            out.append(make_report(f"round trip {name}", n, params, got, want, TOL_HIV))
    return out


def check_hamilton_equations(params: WeightParams, n: int, ctx: PrecisionContext, step=DEFAULT_FD_STEP) -> list:
    """d/dx of (a1, a2, b1, b2) by directional differences against the Painleve IV right-hand sides."""
    st = piv_state(params, n, ctx)
    pt = _point(params, ctx)
    out = []
    with ctx.workprec():
        rhs = piv_rhs(st.a1, st.a2, st.b1, st.b2, st.x, st.s, n)
        for k, name in enumerate(("a1", "a2", "b1", "b2")):
            f = _aux_field(params, n, n + 1, ctx, lambda a, k=k: _state_component(a, n, k))
            d = directional_diff(f, pt, (1, 1), step, 1, ctx)
            out.append(make_report(f"d{name}/dx", n, params, d.value, rhs[k], TOL_HAMILTON, d.step))
    return out


def _state_component(aux: AuxQuantities, n: int, k: int):
    T = aux.r1 + aux.r2 + n
    if k == 0:
        return aux.r1 ** 2 / (aux.R1 * T)
    if k == 1:
        return aux.r2 ** 2 / (aux.R2 * T)
    if k == 2:
        return aux.R1 * T / aux.r1
    return aux.R2 * T / aux.r2


def check_hamiltonian_gradient(st: PIVState, step="1e-20", ctx: PrecisionContext | None = None) -> list:
    """Canonical form of the flow: da/dx = dH/db and db/dx = -dH/da.

    H_IV is quadratic in each variable, so central differences of the
    closed form are exact up to rounding.  Without ``ctx`` the working
    precision is the mantissa width of the state.
    """
    bits = ctx.bits if ctx else max(mp.mp.prec, *(_mantissa_bits(v) for v in (st.a1, st.a2, st.b1, st.b2)))
    with mp.workprec(bits):
        return _gradient_reports(st, to_real(step))


def _gradient_reports(st: PIVState, h) -> list:
    out = []
    rhs = piv_rhs(st.a1, st.a2, st.b1, st.b2, st.x, st.s, st.n)
    base = dict(a1=st.a1, a2=st.a2, b1=st.b1, b2=st.b2)
    for var, k, sign in (("b1", 0, 1), ("b2", 1, 1), ("a1", 2, -1), ("a2", 3, -1)):
        up, dn = dict(base), dict(base)
        up[var] += h
        dn[var] -= h
        grad = (hamiltonian_iv(x=st.x, s=st.s, n=st.n, **up) - hamiltonian_iv(x=st.x, s=st.s, n=st.n, **dn)) / (2 * h)
        label = f"dH/d{var}" if sign > 0 else f"-dH/d{var}"
        out.append(make_report(label, st.n, None, sign * grad, rhs[k], TOL_GRADIENT))
    return out


def check_recurrence_maps(params: WeightParams, n: int, ctx: PrecisionContext, step=DEFAULT_FD_STEP) -> list:
    """alpha_n, beta_n in (a, b); alpha_{n-1} = a1 + a2 = -(1/2) d/dx ln h_{n-1}."""
    sys = system_at(params, n + 1, ctx)
    st = piv_state(params, n, ctx)
    pt = _point(params, ctx)
    out = []
    with ctx.workprec():
        a1, a2, b1, b2 = st.a1, st.a2, st.b1, st.b2
        u = a1 * b1 + a2 * b2 + n
        out.append(make_report("alpha_n = (a1b1^2+a2b2^2)/(2(a1b1+a2b2+n))", n, params, sys.alpha[n],
                               (a1 * b1 ** 2 + a2 * b2 ** 2) / (2 * u), TOL_MAPS))
        out.append(make_report("beta_n = (a1b1+a2b2+n)/2", n, params, sys.beta[n], u / 2, TOL_MAPS))
        prev = aux_quantities(n - 1, sys)
        out.append(make_report("alpha_(n-1) = a1 + a2 (residue route)", n, params, a1 + a2,
                               (prev.R1 + prev.R2) / 2, TOL_A_RESIDUE))
        f = _field(params, n + 1, ctx, lambda s: mp.log(s.h[n - 1]))
        d = directional_diff(f, pt, (1, 1), step, 1, ctx)
        out.append(make_report("alpha_(n-1) = -(1/2) d/dx ln h_(n-1)", n, params, sys.alpha[n - 1], -d.value / 2,
                               TOL_MAPS, d.step))
    return out


def piv_suite(params: WeightParams, n: int, ctx: PrecisionContext, step=DEFAULT_FD_STEP) -> list:
    reports = check_hamiltonian(params, n, ctx)
    reports += check_hamilton_equations(params, n, ctx, step)
    reports += check_hamiltonian_gradient(piv_state(params, n, ctx), ctx=ctx)
    reports += check_recurrence_maps(params, n, ctx, step)
    return reports
