"""Monic orthogonal polynomials for the two-jump Gaussian weight.

The recurrence data come from an LDL^T factorization of the Hankel
moment matrix H = (m_{i+j}).  Because H is Hankel, the columns of L D
are the mixed moments sigma_{k,l} = int P_k(x) x^l w(x) dx, which obey

    sigma_{k,l} = sigma_{k-1,l+1} - alpha_{k-1} sigma_{k-1,l} - beta_{k-1} sigma_{k-2,l},

so the factorization costs O(n^2) instead of O(n^3).  D holds the norms
h_k = sigma_{k,k}; the subdiagonal L_{k+1,k} = sigma_{k,k+1}/h_k is minus
the subleading coefficient p(k+1) of P_{k+1}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath as mp

from .errors import (
    DegenerateResidue,
    NotPositiveDefinite,
    PoleHit,
    PrecisionExhausted,
    QuadratureNotConverged,
)
from .numerics import PrecisionContext, to_real
from .quadrature import panel_rule
from .weight import WeightParams, moment_list

MAX_BITS = 1 << 17
SIGMA_ROUTES = ("sum_R", "two_p", "closed_form")


def auto_bits(n_max: int) -> int:
    """Default precision: Hankel conditioning costs roughly 12 bits per degree."""
    return 64 + 12 * max(n_max, 0)


@dataclass(frozen=True)
class HankelFactor:
    """Diagonal of D and first subdiagonal of L; ``lower`` holds all of L when requested."""

    diag: tuple
    subdiag: tuple
    lower: tuple | None = None


def hankel_ldl(moments, full: bool = False) -> HankelFactor:
    """LDL^T of the Hankel matrix built from ``moments`` = m_0..m_M.

    Returns pivots h_0..h_{M//2} and L_{k+1,k} for k <= (M-1)//2.  Raises
    NotPositiveDefinite on a nonpositive pivot.  Runs at the current mpmath
    precision.
    """
    M = len(moments) - 1
    K = M // 2
    prev = [mp.mpf(0)] * (M + 1)
    cur = [to_real(m) for m in moments]
    diag, sub, alpha, beta = [], [], [], []
    lower = [] if full else None
    for k in range(K + 1):
        if k > 0:
            nxt = [None] * (M + 1)
            a, b = alpha[k - 1], beta[k - 1]
            for l in range(k, M - k + 1):
                v = cur[l + 1] - a * cur[l]
                if k > 1:
                    v -= b * prev[l]
                nxt[l] = v
            prev, cur = cur, nxt
        hk = cur[k]
        if not hk > 0:
            raise NotPositiveDefinite(f"pivot h_{k} = {mp.nstr(hk, 8)} is not positive")
        diag.append(hk)
        if full:
            lower.append(tuple(cur[l] / hk for l in range(k, M - k + 1)))
        if k + 1 <= M - k:
            sub.append(cur[k + 1] / hk)
            alpha.append(sub[k] - (sub[k - 1] if k > 0 else 0))
            beta.append(hk / diag[k - 1] if k > 0 else mp.mpf(0))
    return HankelFactor(tuple(diag), tuple(sub), tuple(lower) if full else None)


@dataclass(frozen=True)
class OrthoSystem:
    """Recurrence ledger at fixed (s1, s2).

    h[0..n_max+1], alpha[0..n_max], beta[0..n_max] (beta[0] = 0),
    p[0..n_max+1] (p[0] = 0) and logD[0..n_max+2] with logD[n] = ln D_n.
    """

    params: WeightParams
    n_max: int
    bits: int
    h: tuple
    alpha: tuple
    beta: tuple
    p: tuple
    logD: tuple

    @property
    def ctx(self) -> PrecisionContext:
        return PrecisionContext(self.bits)


def _assemble(params, n_max, bits, h, p) -> OrthoSystem:
    with mp.workprec(bits):
        alpha = tuple(p[n] - p[n + 1] for n in range(n_max + 1))
        beta = (mp.mpf(0),) + tuple(h[n] / h[n - 1] for n in range(1, n_max + 1))
        logD = [mp.mpf(0)]
        for hj in h:
            logD.append(logD[-1] + mp.log(hj))
        return OrthoSystem(params, n_max, bits, tuple(h), alpha, beta, tuple(p), tuple(logD))


def _factor_system(params: WeightParams, n_max: int, bits: int) -> OrthoSystem:
    ctx = PrecisionContext(bits)
    moments = moment_list(2 * n_max + 2, params, ctx)
    with mp.workprec(bits):
        fac = hankel_ldl(moments)
        h = fac.diag[: n_max + 2]
        p = (mp.mpf(0),) + tuple(-l for l in fac.subdiag[: n_max + 1])
    return _assemble(params, n_max, bits, h, p)


def _agree(a, b, tol, bits) -> bool:
    with mp.workprec(bits):
        floor = mp.ldexp(mp.mpf(1), -(bits // 2))
        return abs(a - b) <= tol * max(abs(a), abs(b)) + floor


def build_ortho_system(params: WeightParams, n_max: int, ctx: PrecisionContext | None = None,
                       check: bool = True) -> OrthoSystem:
    """Factor the Hankel matrix of order n_max + 2 and read off h, p, alpha, beta.

    Without ``ctx`` the precision starts at ``auto_bits(n_max)``.  With
    ``check`` the build is repeated at doubled precision and accepted once
    h_{n_max+1} and p(n_max+1) agree to ``agree_tol``; otherwise the
    precision keeps doubling up to MAX_BITS (PrecisionExhausted).
    """
    if n_max < 0:
        raise ValueError("n_max must be nonnegative")
    if ctx is None:
        ctx = PrecisionContext(auto_bits(n_max))
    bits = ctx.bits
    try:
        sys = _factor_system(params, n_max, bits)
    except NotPositiveDefinite:
        if not check:
            raise
        sys = None
    if not check:
        return sys
    while True:
        if 2 * bits > MAX_BITS:
            raise PrecisionExhausted(f"no agreement up to {bits} bits for n_max={n_max}")
        try:
            ref = _factor_system(params, n_max, 2 * bits)
        except NotPositiveDefinite:
            if 4 * bits > MAX_BITS:
                raise
            ref = None
        if sys is not None and ref is not None:
            if _agree(sys.h[-1], ref.h[-1], ctx.agree_tol, bits) and _agree(
                sys.p[-1], ref.p[-1], ctx.agree_tol, bits
            ):
                return sys
        bits *= 2
        sys = ref


def eval_monic_pair(n: int, x, sys: OrthoSystem):
    """(P_n(x), P_{n-1}(x)) with P_{-1} = 0."""
    if not 0 <= n <= sys.n_max + 1:
        raise ValueError(f"degree {n} outside 0..{sys.n_max + 1}")
    with mp.workprec(sys.bits):
        x = to_real(x)
        prev, cur = mp.mpf(0), mp.mpf(1)
        for j in range(n):
            prev, cur = cur, (x - sys.alpha[j]) * cur - sys.beta[j] * prev
        return cur, prev


def eval_monic(n: int, x, sys: OrthoSystem):
    """P_n(x) by the three-term recurrence."""
    return eval_monic_pair(n, x, sys)[0]


@dataclass(frozen=True)
class AuxQuantities:
    """Residues of the ladder coefficients A_n (R1, R2) and B_n (r1, r2) at s1, s2."""

    n: int
    s1: object
    s2: object
    R1: object
    R2: object
    r1: object
    r2: object
    Pn_at_s1: object
    Pn_at_s2: object
    Pnm1_at_s1: object
    Pnm1_at_s2: object

    @property
    def R(self):
        return (self.R1, self.R2)

    @property
    def r(self):
        return (self.r1, self.r2)


def aux_quantities(n: int, sys: OrthoSystem) -> AuxQuantities:
    """R_{n,i} = B_i P_n(s_i)^2 e^{-s_i^2}/h_n and r_{n,i} = B_i P_n(s_i) P_{n-1}(s_i) e^{-s_i^2}/h_{n-1}."""
    if not 0 <= n <= sys.n_max:
        raise ValueError(f"n={n} outside 0..{sys.n_max}")
    with mp.workprec(sys.bits):
        _, B1, B2, s1, s2 = sys.params.values()
        out = {}
        for i, (B, s) in enumerate(((B1, s1), (B2, s2)), start=1):
            pn, pm = eval_monic_pair(n, s, sys)
            g = B * mp.exp(-s * s)
            out[f"R{i}"] = g * pn * pn / sys.h[n]
            out[f"r{i}"] = g * pn * pm / sys.h[n - 1] if n > 0 else mp.mpf(0)
            out[f"Pn_at_s{i}"] = pn
            out[f"Pnm1_at_s{i}"] = pm
        return AuxQuantities(n=n, s1=s1, s2=s2, **out)


@dataclass(frozen=True)
class LadderCoeffs:
    z: object
    An_at_z: object
    Bn_at_z: object


def ladder_eval(n: int, z, aux: AuxQuantities) -> LadderCoeffs:
    """A_n(z) = R1/(z-s1) + R2/(z-s2) + 2 and B_n(z) = r1/(z-s1) + r2/(z-s2)."""
    z = to_real(z)
    if z == aux.s1 or z == aux.s2:
        raise PoleHit(f"z={z} coincides with a jump")
    d1, d2 = z - aux.s1, z - aux.s2
    return LadderCoeffs(z, aux.R1 / d1 + aux.R2 / d2 + 2, aux.r1 / d1 + aux.r2 / d2)


def _ratio_term(r, R, B, bits):
    # r^2 / R; the term is absent when the jump itself is absent
    if B == 0:
        return mp.mpf(0)
    if abs(R) < mp.ldexp(mp.mpf(1), -(bits * 3) // 4):
        raise DegenerateResidue("R_{n,i} vanishes; r^2/R undefined")
    return r * r / R


def sigma_n(sys: OrthoSystem, n: int, route: str = "two_p"):
    """sigma_n = (d/ds1 + d/ds2) ln D_n by one of three routes.

    ``sum_R``: -sum_{j<n} (R_{j,1} + R_{j,2});  ``two_p``: 2 p(n);
    ``closed_form``: expression in R_{n,i}, r_{n,i} only.  sigma_0 = 0.
    """
    if route not in SIGMA_ROUTES:
        raise ValueError(f"unknown route {route!r}; choose from {SIGMA_ROUTES}")
    if not 0 <= n <= sys.n_max:
        raise ValueError(f"n={n} outside 0..{sys.n_max}")
    with mp.workprec(sys.bits):
        if n == 0:
            return mp.mpf(0)
        if route == "two_p":
            return 2 * sys.p[n]
        if route == "sum_R":
            total = mp.mpf(0)
            for j in range(n):
                a = aux_quantities(j, sys)
                total += a.R1 + a.R2
            return -total
        a = aux_quantities(n, sys)
        _, B1, B2, s1, s2 = sys.params.values()
        q1 = _ratio_term(a.r1, a.R1, B1, sys.bits)
        q2 = _ratio_term(a.r2, a.R2, B2, sys.bits)
        return 2 * (s1 * a.r1 + s2 * a.r2 - q1 - q2) - (a.r1 + a.r2 + n) * (a.R1 + a.R2)


# --- independent route: Stieltjes procedure on a discretised measure -------------


def _tail_cutoff(bits: int, degree: int, s1, s2) -> float:
    # int_L^inf x^deg e^{-x^2} ~ L^(deg-1) e^{-L^2} / 2 < 2^-bits
    L = 4.0
    for _ in range(50):
        L = math.sqrt(bits * math.log(2) + max(degree - 1, 0) * math.log(L) + 2)
    return max(L, abs(float(s1)) + 1, abs(float(s2)) + 1)


def _stieltjes_pass(params: WeightParams, n_max: int, bits: int, width: float, q: int):
    A, B1, B2, s1, s2 = params.values()
    N = n_max + 2
    L = _tail_cutoff(bits, 2 * N + 1, s1, s2)
    xs, ws = panel_rule([mp.mpf(-L), min(s1, s2), max(s1, s2), mp.mpf(L)], width, q, bits)
    wts = []
    for x, w in zip(xs, ws):
        # nodes never sit on a jump (Gauss nodes are interior)
        level = A + (B1 if x > s1 else 0) + (B2 if x > s2 else 0)
        wts.append(w * level * mp.exp(-x * x))
    prev = [mp.mpf(0)] * len(xs)
    cur = [mp.mpf(1)] * len(xs)
    h, alpha, beta = [], [], []
    for k in range(N):
        hk = mp.fsum(w * c * c for w, c in zip(wts, cur))
        ak = mp.fsum(w * x * c * c for w, x, c in zip(wts, xs, cur)) / hk
        bk = hk / h[-1] if k > 0 else mp.mpf(0)
        h.append(hk)
        alpha.append(ak)
        beta.append(bk)
        prev, cur = cur, [(x - ak) * c - bk * pv for x, c, pv in zip(xs, cur, prev)]
    return h, alpha, beta


def stieltjes_oracle(params: WeightParams, n_max: int, ctx: PrecisionContext,
                     tol=None, max_refine: int = 4) -> OrthoSystem:
    """Recurrence data by the Stieltjes procedure on Gauss-Legendre panels.

    Inner products int P_k^2 w and int x P_k^2 w are sums over panels of
    (-L, s1], [s1, s2], [s2, L) whose width is halved until h, alpha, beta
    stabilise to ``tol`` (default 2^{-bits/3}).  Independent of the moment
    route; intended for cross-validation only.
    """
    if n_max > 64:
        raise ValueError("stieltjes_oracle is meant for n_max <= 64")
    bits = ctx.bits + 32
    q = max(20, 2 * (ctx.bits // 12))
    with mp.workprec(bits):
        tol = mp.ldexp(mp.mpf(1), -(ctx.bits // 3)) if tol is None else to_real(tol)
        width = 1.0
        last = _stieltjes_pass(params, n_max, bits, width, q)
        for _ in range(max_refine):
            width /= 2
            new = _stieltjes_pass(params, n_max, bits, width, q)
            worst = max(
                abs(a - b) / max(abs(b), mp.mpf(1))
                for seq_old, seq_new in zip(last, new)
                for a, b in zip(seq_old, seq_new)
            )
            last = new
            if worst <= tol:
                break
        else:
            raise QuadratureNotConverged(f"panel refinement stalled at relative change {mp.nstr(worst, 5)}")
        h, alpha, _ = last
        p = [mp.mpf(0)]
        for k in range(n_max + 1):
            p.append(p[-1] - alpha[k])
    with ctx.workprec():
        return _assemble(params, n_max, ctx.bits, [+v for v in h[: n_max + 2]], [+v for v in p])
