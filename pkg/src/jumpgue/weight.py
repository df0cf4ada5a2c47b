"""The Gaussian weight with two jumps and its moments.

    w(x) = exp(-x^2) * (A + B1*[x > s1] + B2*[x > s2]),   s1 < s2.

Moments are closed form: full Gaussian moments plus incomplete moments
I_k(s) = int_s^inf x^k exp(-x^2) dx, generated by an upward recurrence.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from decimal import Decimal, localcontext

import mpmath as mp

from .errors import ConfigInvalid
from .numerics import DEFAULT_CONTEXT, GUARD_BITS, PrecisionContext, eval_erfc, to_real


def _exact(v):
    """Exact Decimal value of an int/float/str/mpf input, so reflections do not round."""
    if isinstance(v, mp.mpf):
        sign, man, exp, _ = v._mpf_
        d = Decimal(int(man)) * (Decimal(2) ** exp if exp >= 0 else 1 / Decimal(2) ** -exp)
        return -d if sign else d
    return Decimal(v)


def _unexact(v):
    return str(v) if isinstance(v, Decimal) else v


@dataclass(frozen=True)
class WeightParams:
    """Jump heights and locations.

    Values may be ints, floats (taken exactly), decimal strings or mpf;
    they are converted at whatever precision a computation runs.  With
    ``strict`` the standing assumption B1*B2 != 0 is enforced; relaxed
    mode admits the single-jump and pure Gaussian cases.
    """

    A: object = 1
    B1: object = 0
    B2: object = 0
    s1: object = -1
    s2: object = 1
    strict: bool = True
    ordered: bool = True

    def __post_init__(self):
        with mp.workprec(256):
            A, B1, B2, s1, s2 = self.values()
            for name, v in zip(("A", "B1", "B2", "s1", "s2"), (A, B1, B2, s1, s2)):
                if not mp.isfinite(v):
                    raise ConfigInvalid(f"{name} must be finite")
            if not s1 < s2 and (self.ordered or s1 == s2):
                raise ConfigInvalid(f"need s1 < s2, got s1={self.s1}, s2={self.s2}")
            first, second = (B1, B2) if s1 < s2 else (B2, B1)
            levels = (A, A + first, A + first + second)
            if min(levels) < 0:
                raise ConfigInvalid("weight must be nonnegative: need A, A+B1, A+B1+B2 >= 0")
            if max(levels) == 0:
                raise ConfigInvalid("weight vanishes identically")
            if self.strict and B1 * B2 == 0:
                raise ConfigInvalid("strict mode requires B1*B2 != 0 (pass strict=False for degenerate cases)")

    def values(self):
        """(A, B1, B2, s1, s2) as mpf at the current precision."""
        return tuple(to_real(v) for v in (self.A, self.B1, self.B2, self.s1, self.s2))

    def with_endpoints(self, s1, s2) -> "WeightParams":
        return replace(self, s1=s1, s2=s2)

    def relabeled(self) -> "WeightParams":
        """Same weight with the jump labels exchanged, so s1 > s2 afterwards.

        Only meant for symmetry checks; ``ordered`` is switched off.
        """
        return replace(self, B1=self.B2, B2=self.B1, s1=self.s2, s2=self.s1, ordered=False)

    def mirrored(self) -> "WeightParams":
        """Reflection x -> -x, which maps moment k to (-1)^k times itself.

        The reflected weight exp(-x^2)(A + B1 + B2 - B2[x > -s2] - B1[x > -s1])
        is again of two-jump form.
        """
        with localcontext() as dc:
            dc.prec = 10_000
            A, B1, B2, s1, s2 = (_exact(v) for v in (self.A, self.B1, self.B2, self.s1, self.s2))
            return WeightParams(_unexact(A + B1 + B2), _unexact(-B2), _unexact(-B1), _unexact(-s2),
                                _unexact(-s1), self.strict, self.ordered)

    def as_dict(self) -> dict:
        return {"A": self.A, "B1": self.B1, "B2": self.B2, "s1": self.s1, "s2": self.s2,
                "strict": self.strict}

    def weight(self, x):
        A, B1, B2, s1, s2 = self.values()
        x = to_real(x)
        level = A + (B1 if x > s1 else 0) + (B2 if x > s2 else 0)
        return mp.exp(-x * x) * level

    def is_gaussian(self) -> bool:
        return to_real(self.B1) == 0 and to_real(self.B2) == 0


@dataclass(frozen=True)
class MomentTable:
    params: WeightParams
    moments: tuple
    n_max: int
    bits: int

    def __getitem__(self, k):
        return self.moments[k]

    def __len__(self):
        return len(self.moments)


def gaussian_moment(k: int):
    """int x^k exp(-x^2) dx over the real line: sqrt(pi) (k-1)!! / 2^(k/2) for even k."""
    if k % 2:
        return mp.mpf(0)
    val = mp.sqrt(mp.pi)
    for j in range(1, k, 2):
        val = val * j / 2
    return val


def incomplete_moments(kmax: int, s, ctx: PrecisionContext = DEFAULT_CONTEXT) -> list:
    """[I_0(s), ..., I_kmax(s)] with I_k(s) = int_s^inf x^k exp(-x^2) dx."""
    if kmax < 0:
        return []
    with ctx.workprec(GUARD_BITS):
        s = to_real(s)
        e = mp.exp(-s * s)
        out = [mp.sqrt(mp.pi) / 2 * eval_erfc(s, ctx.with_bits(ctx.bits + GUARD_BITS)), e / 2]
        spow = mp.mpf(1)  # s^(k-1)
        for k in range(2, kmax + 1):
            spow *= s
            out.append(spow * e / 2 + (k - 1) * out[k - 2] / 2)
    with ctx.workprec():
        return [+v for v in out[: kmax + 1]]


def incomplete_moment(k: int, s, ctx: PrecisionContext = DEFAULT_CONTEXT):
    if k < 0:
        raise ValueError("k must be nonnegative")
    return incomplete_moments(k, s, ctx)[k]


def moment_list(kmax: int, params: WeightParams, ctx: PrecisionContext = DEFAULT_CONTEXT) -> list:
    with ctx.workprec(GUARD_BITS):
        A, B1, B2, s1, s2 = params.values()
        wide = ctx.with_bits(ctx.bits + GUARD_BITS)
        # jumps summed in order of location so relabelling leaves every bit unchanged
        jumps = sorted(((s, B) for B, s in ((B1, s1), (B2, s2)) if B != 0), key=lambda j: j[0])
        tables = [(B, incomplete_moments(kmax, s, wide)) for s, B in jumps]
        out = []
        for k in range(kmax + 1):
            m = A * gaussian_moment(k) if A != 0 else mp.mpf(0)
            for B, I in tables:
                m += B * I[k]
            out.append(m)
    with ctx.workprec():
        return [+m for m in out]


def moment(k: int, params: WeightParams, ctx: PrecisionContext = DEFAULT_CONTEXT):
    """m_k = A G_k + B1 I_k(s1) + B2 I_k(s2)."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    return moment_list(k, params, ctx)[k]


def moment_table(params: WeightParams, n_max: int, ctx: PrecisionContext = DEFAULT_CONTEXT) -> MomentTable:
    """Moments m_0 .. m_{2 n_max + 2}, enough to factor the Hankel matrix of order n_max + 2."""
    return MomentTable(params, tuple(moment_list(2 * n_max + 2, params, ctx)), n_max, ctx.bits)


def partition_constant(n: int, ctx: PrecisionContext = DEFAULT_CONTEXT):
    """C_n = (2 pi)^(n/2) 2^(-n^2/2) prod_{k=1}^{n-1} k!, the GUE normalisation."""
    if n < 1:
        raise ValueError("n must be >= 1")
    with ctx.workprec(GUARD_BITS):
        val = (2 * mp.pi) ** (mp.mpf(n) / 2) / mp.mpf(2) ** (mp.mpf(n * n) / 2)
        fact = mp.mpf(1)
        for k in range(1, n):
            fact *= k
            val *= fact
    with ctx.workprec():
        return +val


def log_partition_constant(n: int, ctx: PrecisionContext = DEFAULT_CONTEXT):
    with ctx.workprec(GUARD_BITS):
        val = mp.mpf(n) / 2 * mp.log(2 * mp.pi) - mp.mpf(n * n) / 2 * mp.log(2)
        val += sum(mp.loggamma(k + 1) for k in range(1, n))
    with ctx.workprec():
        return +val
