"""Finite-n verification harness.

Each check evaluates both sides of an identity from separate primitives
and returns :class:`ResidualReport` objects.  Derivatives with respect to
the jump locations are taken by rebuilding the whole orthogonal system at
perturbed (s1, s2); nothing is differentiated from stored values.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from functools import lru_cache

import mpmath as mp

from .errors import DegenerateResidue
from .numerics import PrecisionContext, directional_diff, partial_derivatives, to_real
from .ortho import (
    OrthoSystem,
    aux_quantities,
    build_ortho_system,
    eval_monic_pair,
    ladder_eval,
    sigma_n,
)
from .weight import WeightParams

# acceptance thresholds on rel_residual
TOL_DIFFERENCE = 1e-30
TOL_SIGMA_ROUTES = 1e-28
TOL_CD = 1e-25
TOL_LADDER = 1e-25
TOL_FIRST_DERIV = 1e-18
TOL_SECOND_ORDER = 1e-12

DEFAULT_FD_STEP = "1e-10"


@dataclass(frozen=True)
class ResidualReport:
    """One identity evaluated at one (n, params).

    rel_residual = |lhs - rhs| / max(1, |lhs|, |rhs|, scale); ``scale`` carries
    the largest intermediate term for identities written as ``expr = 0``.
    """

    label: str
    n: int
    params: WeightParams
    lhs: object
    rhs: object
    abs_residual: object
    rel_residual: object
    fd_step: object = None
    threshold: float | None = None
    scale: object = None

    @property
    def passed(self) -> bool:
        return self.threshold is None or self.rel_residual < self.threshold


def make_report(label, n, params, lhs, rhs, threshold=None, fd_step=None, scale=None) -> ResidualReport:
    # never round or subtract at less precision than the operands carry
    with mp.workprec(max(mp.mp.prec, _mantissa_bits(lhs), _mantissa_bits(rhs))):
        lhs, rhs = to_real(lhs), to_real(rhs)
        diff = abs(lhs - rhs)
        denom = max(mp.mpf(1), abs(lhs), abs(rhs))
        if scale is not None:
            scale = to_real(scale)
            denom = max(denom, abs(scale))
        rel = diff / denom
    return ResidualReport(label, n, params, lhs, rhs, diff, rel, fd_step, threshold, scale)


def _mantissa_bits(x) -> int:
    return int(x._mpf_[3]) if isinstance(x, mp.mpf) else 53


def _term_scale(*terms):
    return max(abs(to_real(t)) for t in terms)


def _ratio(r, R, B, bits):
    if B == 0:
        return mp.mpf(0)
    if abs(R) < mp.ldexp(mp.mpf(1), -(bits * 3) // 4):
        raise DegenerateResidue("R_{n,i} vanishes")
    return r * r / R


# --- rebuilt pipelines ---------------------------------------------------------------


@lru_cache(maxsize=4096)
def _system_at(params: WeightParams, n_max: int, bits: int) -> OrthoSystem:
    return build_ortho_system(params, n_max, PrecisionContext(bits), check=False)


def system_at(params: WeightParams, n_max: int, ctx: PrecisionContext, s1=None, s2=None) -> OrthoSystem:
    """Orthogonal system at (s1, s2), memoised per (params, n_max, bits)."""
    if s1 is not None:
        params = params.with_endpoints(s1, s2)
    return _system_at(params, n_max, ctx.bits)


def _field(params, n_max, ctx, getter):
    def f(s1, s2):
        return getter(system_at(params, n_max, ctx, s1, s2))

    return f


def _aux_field(params, n, n_max, ctx, getter):
    return _field(params, n_max, ctx, lambda sys: getter(aux_quantities(n, sys)))


def _point(params, ctx):
    with ctx.workprec():
        return (to_real(params.s1), to_real(params.s2))


_DIRS = {1: (1, 0), 2: (0, 1)}


# --- algebraic checks -----------------------------------------------------------------


def check_difference_system(sys: OrthoSystem, n_range) -> list:
    """Residue difference equations, the alpha/beta representations, the
    partial-sum identity and three-route agreement of sigma_n."""
    out = []
    prm = sys.params
    with mp.workprec(sys.bits):
        _, B1, B2, s1, s2 = prm.values()
        svals = (s1, s2)
        Bs = (B1, B2)
        for n in n_range:
            if not 1 <= n <= sys.n_max - 1:
                raise ValueError(f"n={n} needs 1 <= n <= n_max-1={sys.n_max - 1}")
            a_prev, a, a_next = (aux_quantities(k, sys) for k in (n - 1, n, n + 1))
            beta, alpha = sys.beta[n], sys.alpha[n]
            for i in (1, 2):
                R, Rp, r, rn = a.R[i - 1], a_prev.R[i - 1], a.r[i - 1], a_next.r[i - 1]
                out.append(make_report(f"beta*R_n*R_n-1=r_n^2 [i={i}]", n, prm, beta * R * Rp, r * r,
                                       TOL_DIFFERENCE))
                out.append(make_report(f"r_n+1+r_n=(s-alpha)R_n [i={i}]", n, prm, rn + r,
                                       (svals[i - 1] - alpha) * R, TOL_DIFFERENCE))
            out.append(make_report("alpha_n=(R1+R2)/2", n, prm, alpha, (a.R1 + a.R2) / 2, TOL_DIFFERENCE))
            out.append(make_report("beta_n=(r1+r2+n)/2", n, prm, beta, (a.r1 + a.r2 + n) / 2, TOL_DIFFERENCE))
            partial = mp.mpf(0)
            for j in range(n):
                aj = aux_quantities(j, sys)
                partial += aj.R1 + aj.R2
            rhs = -2 * s1 * a.r1 - 2 * s2 * a.r2 + 2 * beta * (a.R1 + a.R2 + a_prev.R1 + a_prev.R2)
            out.append(make_report("sum_R identity", n, prm, partial, rhs, TOL_DIFFERENCE))
            two_p = sigma_n(sys, n, "two_p")
            out.append(make_report("sigma: sum_R vs two_p", n, prm, -partial, two_p, TOL_SIGMA_ROUTES))
            try:
                q = [_ratio(a.r[i], a.R[i], Bs[i], sys.bits) for i in (0, 1)]
            except DegenerateResidue:
                continue
            closed = 2 * (s1 * a.r1 + s2 * a.r2 - q[0] - q[1]) - (a.r1 + a.r2 + n) * (a.R1 + a.R2)
            out.append(make_report("sigma: closed_form vs two_p", n, prm, closed, two_p, TOL_SIGMA_ROUTES))
    return out


def check_christoffel_darboux(sys: OrthoSystem, n_range, samples: int = 3, seed: int = 7) -> list:
    """sum_{j<n} P_j(x)P_j(y)/h_j against the two-term Christoffel-Darboux kernel."""
    rng = random.Random(seed)
    out = []
    with mp.workprec(sys.bits):
        for n in n_range:
            for _ in range(samples):
                x = mp.mpf(rng.uniform(-2.5, 2.5))
                y = mp.mpf(rng.uniform(-2.5, 2.5))
                if x == y:
                    continue
                lhs = mp.mpf(0)
                px_prev, px = mp.mpf(0), mp.mpf(1)
                py_prev, py = mp.mpf(0), mp.mpf(1)
                for j in range(n):
                    lhs += px * py / sys.h[j]
                    px_prev, px = px, (x - sys.alpha[j]) * px - sys.beta[j] * px_prev
                    py_prev, py = py, (y - sys.alpha[j]) * py - sys.beta[j] * py_prev
                pnx, pmx = eval_monic_pair(n, x, sys)
                pny, pmy = eval_monic_pair(n, y, sys)
                rhs = (pnx * pmy - pmx * pny) / (sys.h[n - 1] * (x - y))
                out.append(make_report("Christoffel-Darboux", n, sys.params, lhs, rhs, TOL_CD))
    return out


def check_ladder_compatibility(params: WeightParams, n: int, z_samples, ctx: PrecisionContext,
                               sys: OrthoSystem | None = None) -> list:
    """(S1) and (S2') at each sample z, with sum_{j<n} A_j(z) accumulated directly."""
    if sys is None:
        sys = build_ortho_system(params, n + 1, ctx)
    out = []
    with mp.workprec(sys.bits):
        auxes = [aux_quantities(k, sys) for k in range(n + 2)]
        for z in z_samples:
            z = to_real(z)
            L = {k: ladder_eval(k, z, auxes[k]) for k in range(n + 2)}
            lhs1 = L[n + 1].Bn_at_z + L[n].Bn_at_z
            rhs1 = (z - sys.alpha[n]) * L[n].An_at_z - 2 * z
            out.append(make_report(f"(S1) z={mp.nstr(z, 6)}", n, params, lhs1, rhs1, TOL_LADDER))
            acc = mp.mpf(0)
            for j in range(n):
                acc += L[j].An_at_z
            Bn = L[n].Bn_at_z
            lhs2 = Bn * Bn + 2 * z * Bn + acc
            rhs2 = sys.beta[n] * L[n].An_at_z * (L[n - 1].An_at_z if n > 0 else 0)
            out.append(make_report(f"(S2') z={mp.nstr(z, 6)}", n, params, lhs2, rhs2, TOL_LADDER))
    return out


# --- first-derivative checks -------------------------------------------------------------


def check_derivative_relations(params: WeightParams, n: int, ctx: PrecisionContext,
                               step=DEFAULT_FD_STEP, richardson: bool = True) -> list:
    """d/ds_i of ln h_n, p(n), alpha_n, beta_n against residue formulas, plus
    d r_{n,1}/ds2 = d r_{n,2}/ds1."""
    if n < 1:
        raise ValueError("n must be >= 1")
    n_max = n + 1
    pt = _point(params, ctx)
    sys = system_at(params, n_max, ctx)
    out = []
    with ctx.workprec():
        aux = {k: aux_quantities(k, sys) for k in (n - 1, n, n + 1)}
        fields = {
            "ln h_n": _field(params, n_max, ctx, lambda s: mp.log(s.h[n])),
            "p(n)": _field(params, n_max, ctx, lambda s: s.p[n]),
            "alpha_n": _field(params, n_max, ctx, lambda s: s.alpha[n]),
            "beta_n": _field(params, n_max, ctx, lambda s: s.beta[n]),
        }
        for i in (1, 2):
            k = i - 1
            rhs = {
                "ln h_n": -aux[n].R[k],
                "p(n)": aux[n].r[k],
                "alpha_n": aux[n].r[k] - aux[n + 1].r[k],
                "beta_n": sys.beta[n] * (aux[n - 1].R[k] - aux[n].R[k]),
            }
            for name, f in fields.items():
                d = directional_diff(f, pt, _DIRS[i], step, 1, ctx, richardson)
                out.append(make_report(f"d/ds{i} {name}", n, params, d.value, rhs[name], TOL_FIRST_DERIV,
                                       d.step))
        r1 = _aux_field(params, n, n_max, ctx, lambda a: a.r1)
        r2 = _aux_field(params, n, n_max, ctx, lambda a: a.r2)
        d21 = directional_diff(r1, pt, (0, 1), step, 1, ctx, richardson)
        d12 = directional_diff(r2, pt, (1, 0), step, 1, ctx, richardson)
        out.append(make_report("d/ds2 r_n1 = d/ds1 r_n2", n, params, d21.value, d12.value, TOL_FIRST_DERIV,
                               d21.step))
    return out


def observed_fd_order(params: WeightParams, n: int, ctx: PrecisionContext, step=DEFAULT_FD_STEP) -> float:
    """Convergence order of plain central differences for d/ds1 ln h_n = -R_{n,1}."""
    with ctx.workprec():
        h = to_real(step)
        res = []
        for hh in (h, h / 2):
            rep = check_derivative_relations(params, n, ctx, hh, richardson=False)[0]
            res.append(rep.abs_residual)
        return float(mp.log(res[0] / res[1], 2))


def check_riccati(params: WeightParams, n: int, ctx: PrecisionContext, step=DEFAULT_FD_STEP) -> list:
    """First-order equations for R_{n,1}+R_{n,2} and r_{n,1}+r_{n,2} in each s_i."""
    n_max = n + 1
    pt = _point(params, ctx)
    sys = system_at(params, n_max, ctx)
    out = []
    with ctx.workprec():
        _, B1, B2, s1, s2 = params.values()
        a = aux_quantities(n, sys)
        S = a.R1 + a.R2
        T = a.r1 + a.r2
        fR = _aux_field(params, n, n_max, ctx, lambda x: x.R1 + x.R2)
        fr = _aux_field(params, n, n_max, ctx, lambda x: x.r1 + x.r2)
        for i, (s, B) in enumerate(((s1, B1), (s2, B2)), start=1):
            k = i - 1
            dR = directional_diff(fR, pt, _DIRS[i], step, 1, ctx)
            rhsR = 4 * a.r[k] + (S - 2 * s) * a.R[k]
            out.append(make_report(f"Riccati d/ds{i}(R1+R2)", n, params, dR.value, rhsR, TOL_FIRST_DERIV, dR.step))
            dr = directional_diff(fr, pt, _DIRS[i], step, 1, ctx)
            rhsr = 2 * _ratio(a.r[k], a.R[k], B, ctx.bits) - (n + T) * a.R[k]
            out.append(make_report(f"Riccati d/ds{i}(r1+r2)", n, params, dr.value, rhsr, TOL_FIRST_DERIV, dr.step))
    return out


# --- second-order checks -----------------------------------------------------------------


def check_coupled_pde_R(params: WeightParams, n: int, ctx: PrecisionContext, step=DEFAULT_FD_STEP) -> list:
    """The two coupled second-order PDEs for (R_{n,1}, R_{n,2}), each written as expr = 0."""
    n_max = n
    pt = _point(params, ctx)
    sys = system_at(params, n_max, ctx)
    with ctx.workprec():
        _, B1, B2, s1, s2 = params.values()
        a = aux_quantities(n, sys)
        R1, R2 = a.R1, a.R2
        F = R1 + R2
        dF = partial_derivatives(_aux_field(params, n, n_max, ctx, lambda x: x.R1 + x.R2), pt, step, ctx,
                                 second=True)
        dR1 = partial_derivatives(_aux_field(params, n, n_max, ctx, lambda x: x.R1), pt, step, ctx)
        dR2 = partial_derivatives(_aux_field(params, n, n_max, ctx, lambda x: x.R2), pt, step, ctx)
        out = []
        for i in (1, 2):
            if i == 1:
                Ri, Rj, si, sj, B = R1, R2, s1, s2, B1
                second = dF["d11"] + dF["d12"]
                di, dj, dRj = dF["d1"], dF["d2"], dR2["d1"]
                inner = 2 * (2 * s1 * R1 + (s1 + s2) * R2 - s1 * s1 + 2 * n + 1)
            else:
                Ri, Rj, si, sj, B = R2, R1, s2, s1, B2
                second = dF["d22"] + dF["d12"]
                di, dj, dRj = dF["d2"], dF["d1"], dR1["d2"]
                inner = 2 * ((s1 + s2) * R1 + 2 * s2 * R2 - s2 * s2 + 2 * n + 1)
            if B == 0:
                continue
            if abs(Ri) < mp.ldexp(mp.mpf(1), -(ctx.bits * 3) // 4):
                raise DegenerateResidue(f"R_(n,{i}) vanishes")
            terms = [
                second,
                -di * (di / (2 * Ri) + Rj),
                2 * (sj - si) * dRj,
                Ri * (dj - mp.mpf(3) / 2 * F * F + inner),
            ]
            out.append(make_report(f"coupled PDE for R_n [eq {i}]", n, params, mp.fsum(terms), 0,
                                   TOL_SECOND_ORDER, mp.mpf(step), _term_scale(*terms)))
    return out


def check_single_jump_ode(params: WeightParams, n: int, ctx: PrecisionContext, step=DEFAULT_FD_STEP) -> ResidualReport:
    """With one jump, R_n(s) solves R'' = R'^2/(2R) + (3/2)R^3 - 4 s R^2 + 2(s^2 - 2n - 1) R."""
    _, B1, B2, _, _ = params.values()
    if (B1 == 0) == (B2 == 0):
        raise ValueError("single-jump ODE needs exactly one of B1, B2 equal to zero")
    i = 1 if B2 == 0 else 2
    pt = _point(params, ctx)
    f = _aux_field(params, n, n, ctx, (lambda a: a.R1) if i == 1 else (lambda a: a.R2))
    with ctx.workprec():
        s = pt[i - 1]
        R = f(*pt)
        d1 = directional_diff(f, pt, _DIRS[i], step, 1, ctx).value
        d2 = directional_diff(f, pt, _DIRS[i], step, 2, ctx).value
        terms = [d1 * d1 / (2 * R), mp.mpf(3) / 2 * R ** 3, -4 * s * R * R, 2 * (s * s - 2 * n - 1) * R]
        return make_report(f"single-jump ODE [i={i}]", n, params, d2, mp.fsum(terms), TOL_SECOND_ORDER,
                           mp.mpf(step), _term_scale(d2, *terms))


def sigma_pde_terms(sig, d: dict, s1, s2, n: int):
    """(lhs, rhs, scale) of ((2 s1 s_1 + 2 s2 s_2 - 2 s)^2 - D1 - D2)^2 = 4 D1 D2."""
    X = 2 * s1 * d["d1"] + 2 * s2 * d["d2"] - 2 * sig
    common = d["d1"] + d["d2"] + 2 * n
    D1 = (d["d11"] + d["d12"]) ** 2 + 4 * d["d1"] ** 2 * common
    D2 = (d["d22"] + d["d12"]) ** 2 + 4 * d["d2"] ** 2 * common
    lhs = (X * X - D1 - D2) ** 2
    rhs = 4 * D1 * D2
    scale = (X * X + abs(D1) + abs(D2)) ** 2
    return lhs, rhs, scale


def check_sigma_pde(params: WeightParams, n: int, ctx: PrecisionContext, step=DEFAULT_FD_STEP) -> ResidualReport:
    """Second-order second-degree PDE for sigma_n, all partials by finite differences of 2 p(n)."""
    f = _field(params, n, ctx, lambda s: 2 * s.p[n])
    pt = _point(params, ctx)
    with ctx.workprec():
        d = partial_derivatives(f, pt, step, ctx, second=True)
        lhs, rhs, scale = sigma_pde_terms(f(*pt), d, pt[0], pt[1], n)
        return make_report("sigma_n PDE", n, params, lhs, rhs, TOL_SECOND_ORDER, mp.mpf(step), scale)


def finite_n_suite(params: WeightParams, n_max: int, ctx: PrecisionContext, deriv_n: int | None = None,
                   z_samples=(-2, "0.1", 3), second_order_ctx: PrecisionContext | None = None) -> list:
    """Everything in this module for one parameter set, as a flat report list."""
    sys = build_ortho_system(params, n_max + 1, ctx)
    n_range = range(1, n_max + 1)
    reports = check_difference_system(sys, n_range)
    reports += check_christoffel_darboux(sys, n_range)
    for n in n_range:
        reports += check_ladder_compatibility(params, n, z_samples, ctx, sys)
    if deriv_n is not None:
        reports += check_derivative_relations(params, deriv_n, ctx)
        reports += check_riccati(params, deriv_n, ctx)
        ctx2 = second_order_ctx or ctx
        reports += check_coupled_pde_R(params, deriv_n, ctx2)
        reports.append(check_sigma_pde(params, deriv_n, ctx2))
    return reports


def worst(reports) -> float:
    return max((float(r.rel_residual) for r in reports), default=0.0)


def log10_or_neg_inf(x) -> float:
    x = float(x)
    return -math.inf if x == 0 else math.log10(x)
