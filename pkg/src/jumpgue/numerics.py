"""Multiprecision plumbing: precision contexts, erfc and directional differences.

All real numbers are ``mpmath.mpf`` values.  mpmath keeps its working
precision in a process-global context, so every routine here enters
``mp.workprec`` explicitly instead of trusting the caller's setting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, NamedTuple

import mpmath as mp

from .errors import StepUnderflow

GUARD_BITS = 32


@dataclass(frozen=True)
class PrecisionContext:
    """Working precision in bits plus the relative tolerance used when a
    result is recomputed at doubled precision to confirm it."""

    bits: int = 256
    agree_tol: float = 1e-20

    def __post_init__(self):
        if int(self.bits) != self.bits or self.bits < 64:
            raise ValueError(f"bits must be an integer >= 64, got {self.bits!r}")
        if not 0 < self.agree_tol < 1:
            raise ValueError(f"agree_tol must lie in (0, 1), got {self.agree_tol!r}")

    def workprec(self, extra: int = 0):
        return mp.workprec(self.bits + extra)

    def doubled(self) -> "PrecisionContext":
        return replace(self, bits=2 * self.bits)

    def with_bits(self, bits: int) -> "PrecisionContext":
        return replace(self, bits=int(bits))

    @property
    def eps(self):
        return mp.ldexp(mp.mpf(1), -self.bits)


DEFAULT_CONTEXT = PrecisionContext()


def to_real(x):
    """Convert int/float/str/mpf to mpf at the current working precision.

    Floats convert exactly; decimal strings round once at the active
    precision.
    """
    if isinstance(x, mp.mpf):
        return +x
    return mp.mpf(x)


def rounded(x, ctx: PrecisionContext):
    with ctx.workprec():
        return +x


def _erf_series(x):
    # erf(x) = 2x e^{-x^2}/sqrt(pi) * sum (2x^2)^k / (2k+1)!!, all terms positive
    x2 = 2 * x * x
    term = mp.mpf(1)
    total = mp.mpf(1)
    eps = mp.mp.eps
    k = 0
    while True:
        k += 1
        term = term * x2 / (2 * k + 1)
        total += term
        if term < eps * total:
            break
    return 2 * x * mp.exp(-x * x) * total / mp.sqrt(mp.pi)


def _erfc_cf(x):
    # Lentz evaluation of erfc(x) = e^{-x^2}/sqrt(pi) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    tiny = mp.ldexp(mp.mpf(1), -4 * mp.mp.prec)
    eps = mp.mp.eps
    f = x
    c = x
    d = mp.mpf(0)
    k = 0
    while True:
        k += 1
        a = mp.mpf(k) / 2
        d = x + a * d
        if d == 0:
            d = tiny
        d = 1 / d
        c = x + a / c
        if c == 0:
            c = tiny
        delta = c * d
        f *= delta
        if abs(delta - 1) < eps:
            break
    return mp.exp(-x * x) / (mp.sqrt(mp.pi) * f)


def _erfc_nonneg(x, bits: int):
    xf = float(x)
    if xf <= 1.5:
        return 1 - _erf_series(x)
    # continued fraction needs roughly (bits ln2 / (2 sqrt2 x))^2 terms
    cf_terms = (bits * math.log(2) / (2 * math.sqrt(2) * xf)) ** 2
    if cf_terms <= 4 * (xf * xf + bits):
        return _erfc_cf(x)
    # series route: 1 - erf cancels about x^2 log2(e) bits
    extra = int(xf * xf * 1.4427) + 16
    with mp.workprec(bits + extra):
        return 1 - _erf_series(+x)


def eval_erfc(x, ctx: PrecisionContext = DEFAULT_CONTEXT):
    """erfc(x) to relative accuracy ~2^{-bits+8}, computed with guard bits.

    Uses the positive-term Taylor series of erf for |x| <= 1.5, and for
    larger |x| either the Laplace continued fraction or the series at
    extended precision, whichever is cheaper.
    """
    wp = ctx.bits + GUARD_BITS
    with mp.workprec(wp):
        x = to_real(x)
        if not mp.isfinite(x):
            raise ValueError("erfc argument must be finite")
        if x >= 0:
            r = _erfc_nonneg(x, wp)
        else:
            r = 2 - _erfc_nonneg(-x, wp)
    with ctx.workprec():
        return +r


class DiffEstimate(NamedTuple):
    value: object
    error: object
    step: object


def default_step(point, ctx: PrecisionContext):
    scale = max(1.0, abs(float(point[0])), abs(float(point[1])))
    with ctx.workprec():
        return mp.ldexp(mp.mpf(1), -ctx.bits // 4) * scale


def directional_diff(
    f: Callable,
    point,
    direction,
    step=None,
    order: int = 1,
    ctx: PrecisionContext = DEFAULT_CONTEXT,
    richardson: bool = True,
) -> DiffEstimate:
    """First or second derivative of ``f(s1, s2)`` along ``direction``.

    Central differences at steps h and h/2.  With ``richardson`` the two
    are combined to cancel the h^2 term; the error estimate is the gap
    between the extrapolated and the finer raw estimate.  Without it the
    raw estimate at h is returned (error estimate still from the pair).
    """
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    with ctx.workprec():
        p1, p2 = to_real(point[0]), to_real(point[1])
        d1, d2 = to_real(direction[0]), to_real(direction[1])
        h = default_step(point, ctx) if step is None else to_real(step)
        if h <= 0:
            raise ValueError("step must be positive")
        if h < mp.ldexp(mp.mpf(1), -(ctx.bits // 2)):
            raise StepUnderflow(f"step {mp.nstr(h, 5)} below 2^-{ctx.bits // 2}")

        def at(t):
            with ctx.workprec():
                return f(p1 + t * d1, p2 + t * d2)

        center = at(0) if order == 2 else None

        def raw(hh):
            fp, fm = at(hh), at(-hh)
            with ctx.workprec():
                if order == 1:
                    return (fp - fm) / (2 * hh)
                return (fp - 2 * center + fm) / (hh * hh)

        coarse = raw(h)
        fine = raw(h / 2)
        with ctx.workprec():
            if richardson:
                value = (4 * fine - coarse) / 3
                error = abs(value - fine)
            else:
                value = coarse
                error = abs(coarse - fine)
            return DiffEstimate(value, error, h)


def partial_derivatives(f: Callable, point, step=None, ctx: PrecisionContext = DEFAULT_CONTEXT,
                        second: bool = False) -> dict:
    """Gradient (and optionally Hessian) of ``f(s1, s2)`` by directional differences.

    The mixed partial comes from the (1,1) direction:
    D_(1,1)^2 f = f_11 + 2 f_12 + f_22.
    """
    out = {}
    out["d1"] = directional_diff(f, point, (1, 0), step, 1, ctx).value
    out["d2"] = directional_diff(f, point, (0, 1), step, 1, ctx).value
    if second:
        f11 = directional_diff(f, point, (1, 0), step, 2, ctx).value
        f22 = directional_diff(f, point, (0, 1), step, 2, ctx).value
        fxx = directional_diff(f, point, (1, 1), step, 2, ctx).value
        with ctx.workprec():
            out["d11"] = f11
            out["d22"] = f22
            out["d12"] = (fxx - f11 - f22) / 2
    return out
