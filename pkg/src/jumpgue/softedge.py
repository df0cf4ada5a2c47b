"""Double scaling at the soft edge.

Jump locations are tied to n by

    s_i = sqrt(2n) + t_i / (sqrt(2) n^(1/6)),

and finite-n data are pushed to n -> infinity by a two-term fit
c0 + c1 n^(-1/3) over a doubling sweep of n.  Derivatives in (t1, t2)
are finite differences of the fitted c0, every stencil point being a full
rebuild of the orthogonal system.

Limit quantities:
    mu1 = lim n^(1/6) R_{n,1},   nu1 = lim n^(1/6) R_{n,2},
    v1 = -mu1/sqrt(2),  v2 = -nu1/sqrt(2),  w_i = v_i' / (2 v_i),
    H2 = v1 w1^2 + v2 w2^2 - (v1+v2)^2 - t1 v1 - t2 v2,
where ' is d/dxi = d/dt1 + d/dt2 at fixed eta = t2 - t1.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import mpmath as mp

from .errors import DegenerateResidue, OrderViolation, RateMismatch
from .identities import ResidualReport, make_report
from .numerics import PrecisionContext, directional_diff, partial_derivatives, to_real
from .ortho import auto_bits, aux_quantities, build_ortho_system, sigma_n
from .weight import WeightParams

DEFAULT_N_LIST = (32, 64, 128, 256)
DEFAULT_DELTA = "1e-3"
ANALYSIS_CONTEXT = PrecisionContext(256)

CORRECTION_EXPONENT = 1 / 3
EXPONENT_WINDOW = 0.2
CONTRACTION = 2 ** (-1 / 3)
CONTRACTION_WINDOW = 0.15
# per-doubling factor window (0.6, 1.0), written as centre and half-width
DOUBLING_CENTRE = 0.8
DOUBLING_HALFWIDTH = 0.2
ALPHA_REMAINDER_EXPONENT = 0.5

CSV_FIELDS = ("n", "t1", "t2", "mu1_hat", "nu1_hat", "sigma_hat", "alpha_n", "beta_n")

_STENCIL_DIRS = ((1, 0), (0, 1), (1, 1))


@dataclass(frozen=True)
class ScalingPoint:
    n: int
    t1: object
    t2: object
    s1: object
    s2: object
    mu1_hat: object
    nu1_hat: object
    sigma_hat: object
    alpha_n: object
    beta_n: object
    bits: int

    def csv_row(self, digits: int = 20) -> list:
        return [str(self.n)] + [mp.nstr(getattr(self, k), digits) for k in CSV_FIELDS[1:]]


def scaled_endpoints(n: int, t1, t2, ctx: PrecisionContext = ANALYSIS_CONTEXT):
    with ctx.workprec():
        t1, t2 = to_real(t1), to_real(t2)
        if not t1 < t2:
            raise OrderViolation(f"need t1 < t2, got t1={mp.nstr(t1, 10)}, t2={mp.nstr(t2, 10)}")
        base = mp.sqrt(2 * mp.mpf(n))
        scale = mp.sqrt(2) * mp.root(mp.mpf(n), 6)
        return base + t1 / scale, base + t2 / scale


def _template_params(template, s1, s2) -> WeightParams:
    A, B1, B2 = template
    strict = to_real(B1) != 0 and to_real(B2) != 0
    return WeightParams(A, B1, B2, s1, s2, strict=strict)


def scaling_point(template, n: int, t1, t2, bits: int | None = None, check: bool = True) -> ScalingPoint:
    """Finite-n proxies at the scaled endpoints; ``bits`` defaults to auto_bits(n)."""
    bits = auto_bits(n) if bits is None else bits
    ctx = PrecisionContext(bits)
    s1, s2 = scaled_endpoints(n, t1, t2, ctx)
    sys = build_ortho_system(_template_params(template, s1, s2), n, ctx, check=check)
    with mp.workprec(sys.bits):
        aux = aux_quantities(n, sys)
        c = mp.root(mp.mpf(n), 6)
        return ScalingPoint(n, to_real(t1), to_real(t2), s1, s2, c * aux.R1, c * aux.R2,
                            sigma_n(sys, n, "two_p") / (mp.sqrt(2) * c), sys.alpha[n], sys.beta[n], sys.bits)


def _sample_job(job):
    template, n, t1, t2, bits, check = job
    return scaling_point(template, n, t1, t2, bits, check)


class EdgeSampler:
    """Memoised scaling points for one (A, B1, B2) template.

    The centre point of each n is built with the 2x-bits agreement check;
    stencil neighbours reuse the centre's validated bit count.
    """

    def __init__(self, template, n_list=DEFAULT_N_LIST, bits: int | None = None, workers: int = 1):
        self.template = tuple(template)
        self.n_list = tuple(int(n) for n in n_list)
        if len(self.n_list) < 3 or any(b <= a for a, b in zip(self.n_list, self.n_list[1:])):
            raise ValueError("n_list needs at least three increasing values")
        self.bits = bits
        self.workers = workers
        self._cache = {}
        self._bits = {}

    def bits_for(self, n: int) -> int:
        if n in self._bits:
            return self._bits[n]
        return auto_bits(n) if self.bits is None else self.bits

    def point(self, n: int, t1, t2) -> ScalingPoint:
        key = (n, t1, t2)
        if key not in self._cache:
            self.prefetch([(n, t1, t2)])
        return self._cache[key]

    def prefetch(self, jobs) -> None:
        todo = [j for j in dict.fromkeys(jobs) if j not in self._cache]
        if not todo:
            return
        # validated builds first: they fix the bit count for each n
        first = [j for j in todo if j[0] not in self._bits]
        seen = set()
        lead = [j for j in first if not (j[0] in seen or seen.add(j[0]))]
        for job, pt in zip(lead, self._run([(self.template, n, t1, t2, self.bits_for(n), True)
                                            for n, t1, t2 in lead])):
            self._bits[pt.n] = pt.bits
            self._cache[job] = pt
        rest = [j for j in todo if j not in self._cache]
        for (n, t1, t2), pt in zip(rest, self._run([(self.template, n, t1, t2, self._bits[n], False)
                                                     for n, t1, t2 in rest])):
            self._cache[(n, t1, t2)] = pt

    def _run(self, jobs):
        if self.workers > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=self.workers) as pool:
                return list(pool.map(_sample_job, jobs))
        return [_sample_job(j) for j in jobs]

    def stencil(self, t1, t2, delta, ctx: PrecisionContext, dirs=_STENCIL_DIRS):
        """All (t1, t2) points the directional differences along ``dirs`` will request."""
        with ctx.workprec():
            p1, p2, h = to_real(t1), to_real(t2), to_real(delta)
            pts = [(p1, p2)]
            for d1, d2 in dirs:
                for t in (h, -h, h / 2, -h / 2):
                    pts.append((p1 + t * d1, p2 + t * d2))
        return pts

    def prefetch_stencil(self, t1, t2, delta, ctx: PrecisionContext, dirs=_STENCIL_DIRS) -> None:
        pts = self.stencil(t1, t2, delta, ctx, dirs)
        self.prefetch([(n, a, b) for n in self.n_list for a, b in pts])


# --- extrapolation and rates ---------------------------------------------------------


def fit_inverse_cube_root(n_list, values, ctx: PrecisionContext = ANALYSIS_CONTEXT):
    """Least-squares (c0, c1) for values ~ c0 + c1 n^(-1/3)."""
    with ctx.workprec():
        xs = [mp.root(mp.mpf(n), 3) ** -1 for n in n_list]
        ys = [to_real(v) for v in values]
        m = len(xs)
        sx, sy = mp.fsum(xs), mp.fsum(ys)
        sxx = mp.fsum(x * x for x in xs)
        sxy = mp.fsum(x * y for x, y in zip(xs, ys))
        det = m * sxx - sx * sx
        c1 = (m * sxy - sx * sy) / det
        c0 = (sy - c1 * sx) / m
        return c0, c1


def pair_ratios(values, ctx: PrecisionContext = ANALYSIS_CONTEXT) -> list:
    """Successive-difference ratios (v[k+2]-v[k+1]) / (v[k+1]-v[k]) along a doubling sweep."""
    with ctx.workprec():
        d = [to_real(b) - to_real(a) for a, b in zip(values, values[1:])]
        return [d[k + 1] / d[k] for k in range(len(d) - 1)]


def correction_exponent(values, ctx: PrecisionContext = ANALYSIS_CONTEXT) -> float:
    """Exponent p of the leading correction n^(-p) along a doubling sweep.

    With four or more values the next correction, taken as n^(-2p), is
    eliminated: successive differences then obey
    d2 - (x + x^2) d1 + x^3 d0 = 0 with x = 2^(-p), solved for the root
    in (0, 1) closest to 2^(-1/3).  When the second correction is nearly
    absent that root is close to double and may split into a complex pair;
    roots within 10 degrees of the real axis count, by modulus.  With three
    values the last ratio is used.
    """
    with ctx.workprec():
        if len(values) < 3:
            raise ValueError("need at least three values")
        if len(values) == 3:
            x = abs(pair_ratios(values, ctx)[-1])
            return -math.log2(float(x))
        d0, d1, d2 = (to_real(b) - to_real(a) for a, b in zip(values[-4:], values[-3:]))
        roots = mp.polyroots([d0, -d1, -d1, d2], maxsteps=200, extraprec=64, error=False)
        real = [float(abs(r)) for r in roots
                if mp.re(r) > 0 and abs(mp.im(r)) <= mp.re(r) * math.tan(math.pi / 18) and abs(r) < 1]
        if not real:
            raise RateMismatch("no contraction factor in (0, 1) fits the sequence")
        x = min(real, key=lambda r: abs(r - CONTRACTION))
        return -math.log2(x)


def decay_exponent(n_list, values) -> float:
    """Least-squares slope p of log|value| ~ -p log n."""
    xs = [math.log(n) for n in n_list]
    ys = [math.log(abs(float(v))) for v in values]
    mx, my = sum(xs) / len(xs), sum(ys) / len(ys)
    return -sum((x - mx) * (y - my) for x, y in zip(xs, ys)) / sum((x - mx) ** 2 for x in xs)


def window_report(label, observed, target, halfwidth, n=None) -> ResidualReport:
    """Report with lhs = observed, rhs = target; passes iff |observed - target| < halfwidth (both below 1)."""
    with mp.workprec(64):
        obs, tgt = mp.mpf(observed), mp.mpf(target)
        diff = abs(obs - tgt)
    return ResidualReport(label, n, None, obs, tgt, diff, diff, None, halfwidth, None)


# --- extraction ----------------------------------------------------------------------


@dataclass
class EdgeExtract:
    """Limit quantities at (t1, t2) with the sweep data they came from."""

    template: tuple
    t1: object
    t2: object
    n_list: tuple
    v1: object
    v2: object
    w1: object
    w2: object
    H2: object
    mu1: object
    nu1: object
    mu2: object
    nu2: object
    v1_xi: object
    v2_xi: object
    H_sigma: object
    rate_estimates: dict
    points: tuple
    delta: object
    ctx: PrecisionContext
    sampler: EdgeSampler = field(repr=False, compare=False, default=None)

    @property
    def envelope(self) -> float:
        """Relative size |c1| n_max^(-1/3) / |c0| of the fitted correction, worst over mu1, nu1."""
        n_top = self.n_list[-1] ** (-1 / 3)
        out = 0.0
        for c0, c1 in ((self.mu1, self.mu2), (self.nu1, self.nu2)):
            if c0 != 0:
                out = max(out, abs(float(c1)) * n_top / abs(float(c0)))
        return out

    @property
    def eta(self):
        return self.t2 - self.t1

    def field(self, key: str):
        """Extrapolated c0 of a ScalingPoint attribute as a function of (t1, t2)."""
        def f(t1, t2):
            vals = [getattr(self.sampler.point(n, t1, t2), key) for n in self.n_list]
            return fit_inverse_cube_root(self.n_list, vals, self.ctx)[0]

        return f

    def proxy(self, n: int, key: str):
        """Finite-n value of a ScalingPoint attribute as a function of (t1, t2)."""
        def f(t1, t2):
            return getattr(self.sampler.point(n, t1, t2), key)

        return f

    def csv_rows(self) -> list:
        return [p.csv_row() for p in self.points]


def _has_jump(template, i: int) -> bool:
    return to_real(template[i]) != 0


def extract_edge(template, t1, t2, n_list=DEFAULT_N_LIST, ctx: PrecisionContext = ANALYSIS_CONTEXT,
                 delta=DEFAULT_DELTA, sampler: EdgeSampler | None = None, workers: int = 1,
                 check_rates: bool = True, dirs=_STENCIL_DIRS) -> EdgeExtract:
    """Extrapolate mu1, nu1 and derive (v, w, H2) at (t1, t2).

    Raises RateMismatch when the observed correction exponent of
    n^(1/6) R_{n,i} is more than 0.2 away from 1/3.  ``dirs`` limits the
    prefetched stencil; (1, 1) alone suffices for (v, w, H2), and other
    directions are then built on demand by the checks.
    """
    template = tuple(template)
    sampler = sampler or EdgeSampler(template, n_list, workers=workers)
    n_list = sampler.n_list
    with ctx.workprec():
        t1, t2 = to_real(t1), to_real(t2)
        if not t1 < t2:
            raise OrderViolation("need t1 < t2")
    sampler.prefetch_stencil(t1, t2, delta, ctx, dirs)
    points = tuple(sampler.point(n, t1, t2) for n in n_list)
    rates = {}
    with ctx.workprec():
        mu1, mu2 = fit_inverse_cube_root(n_list, [p.mu1_hat for p in points], ctx)
        nu1, nu2 = fit_inverse_cube_root(n_list, [p.nu1_hat for p in points], ctx)
        H_sigma, sigma_c1 = fit_inverse_cube_root(n_list, [p.sigma_hat for p in points], ctx)
        for key, i in (("mu1_hat", 1), ("nu1_hat", 2)):
            if not _has_jump(template, i):
                continue
            seq = [getattr(p, key) for p in points]
            rates[key] = {
                "exponent": correction_exponent(seq, ctx),
                "pair_ratios": [float(r) for r in pair_ratios(seq, ctx)],
            }
            rates[key]["naive_exponent"] = -math.log2(abs(rates[key]["pair_ratios"][-1]))
            if check_rates and abs(rates[key]["exponent"] - CORRECTION_EXPONENT) > EXPONENT_WINDOW:
                raise RateMismatch(f"{key}: correction exponent {rates[key]['exponent']:.3f}, expected 1/3")
        rates["sigma_c1"] = float(sigma_c1)
        root2 = mp.sqrt(2)
        v1, v2 = -mu1 / root2, -nu1 / root2

    ext = EdgeExtract(template, t1, t2, n_list, v1, v2, None, None, None, mu1, nu1, mu2, nu2, None, None,
                      H_sigma, rates, points, to_real(delta), ctx, sampler)
    xi = {}
    for key, i in (("mu1_hat", 1), ("nu1_hat", 2)):
        if _has_jump(template, i):
            d = directional_diff(ext.field(key), (t1, t2), (1, 1), delta, 1, ctx)
            with ctx.workprec():
                xi[i] = -d.value / root2
        else:
            xi[i] = mp.mpf(0)
    with ctx.workprec():
        ext.v1_xi, ext.v2_xi = xi[1], xi[2]
        # with B_i = 0 the pair (v_i, w_i) sits on the invariant set v_i = 0; w_i does not enter H2
        ext.w1 = xi[1] / (2 * v1) if _has_jump(template, 1) else mp.mpf(0)
        ext.w2 = xi[2] / (2 * v2) if _has_jump(template, 2) else mp.mpf(0)
        ext.H2 = hamiltonian_ii(v1, v2, ext.w1, ext.w2, t1, t2)
    return ext


def hamiltonian_ii(v1, v2, w1, w2, t1, t2):
    return v1 * w1 * w1 + v2 * w2 * w2 - (v1 + v2) ** 2 - t1 * v1 - t2 * v2


# --- checks --------------------------------------------------------------------------


def _normalized(label, n, terms, threshold) -> ResidualReport:
    """Report for sum(terms) = 0 scaled by the largest term; all-zero input gives 0."""
    total = mp.fsum(terms)
    scale = max(abs(t) for t in terms)
    rel = abs(total) / scale if scale != 0 else mp.mpf(0)
    return ResidualReport(label, n, None, total, mp.mpf(0), abs(total), rel, None, threshold, scale)


def mu_nu_pde_terms(mu, nu, d: dict, t1, t2):
    """Terms of the two coupled PDEs, given partials of F = mu + nu."""
    root2 = mp.sqrt(2)
    s = mu + nu
    one = (d["d11"] + d["d12"], -(d["d1"] ** 2) / (2 * mu), 2 * mu * (root2 * s - t1))
    two = (d["d22"] + d["d12"], -(d["d2"] ** 2) / (2 * nu), 2 * nu * (root2 * s - t2))
    return one, two


def _mu_nu_sum(get_mu, get_nu):
    def f(t1, t2):
        return get_mu(t1, t2) + get_nu(t1, t2)

    return f


def _mu_nu_pde_at(ext: EdgeExtract, get_mu, get_nu, n, threshold) -> list:
    ctx = ext.ctx
    pt = (ext.t1, ext.t2)
    d = partial_derivatives(_mu_nu_sum(get_mu, get_nu), pt, ext.delta, ctx, second=True)
    with ctx.workprec():
        mu, nu = get_mu(*pt), get_nu(*pt)
        one, two = mu_nu_pde_terms(mu, nu, d, ext.t1, ext.t2)
        return [_normalized("mu/nu PDE 1", n, one, threshold), _normalized("mu/nu PDE 2", n, two, threshold)]


def check_mu_nu_pde(ext: EdgeExtract) -> list:
    """Coupled PDEs for (mu1, nu1) and the symmetry d_t2 mu1 = d_t1 nu1.

    Extrapolated residuals are held to the fitted envelope; per-n proxy
    residuals must shrink by a factor in (0.6, 1.0) per doubling.
    """
    ctx = ext.ctx
    env = ext.envelope
    out = _mu_nu_pde_at(ext, ext.field("mu1_hat"), ext.field("nu1_hat"), None, env)
    d_mu = directional_diff(ext.field("mu1_hat"), (ext.t1, ext.t2), (0, 1), ext.delta, 1, ctx)
    d_nu = directional_diff(ext.field("nu1_hat"), (ext.t1, ext.t2), (1, 0), ext.delta, 1, ctx)
    with ctx.workprec():
        r = make_report("d_t2 mu1 = d_t1 nu1", None, None, d_mu.value, d_nu.value, env,
                        scale=max(abs(d_mu.value), abs(d_nu.value)))
        out.append(ResidualReport(r.label, None, None, r.lhs, r.rhs, r.abs_residual,
                                  r.abs_residual / r.scale, ext.delta, env, r.scale))
    per_n = [_mu_nu_pde_at(ext, ext.proxy(n, "mu1_hat"), ext.proxy(n, "nu1_hat"), n, None) for n in ext.n_list]
    out += [r for pair in per_n for r in pair]
    for k in range(2):
        out += _doubling_reports(f"mu/nu PDE {k + 1} per-n residual", ext.n_list,
                                 [pair[k].rel_residual for pair in per_n])
    return out


def _doubling_reports(label, n_list, values) -> list:
    out = []
    for (na, a), (nb, b) in zip(zip(n_list, values), list(zip(n_list, values))[1:]):
        ratio = abs(float(b)) / abs(float(a))
        out.append(window_report(f"{label} factor {na}->{nb}", ratio, DOUBLING_CENTRE, DOUBLING_HALFWIDTH, nb))
    return out


def pii_residual_terms(v, v_xi, v_xixi, v1, v2, t):
    return v_xixi, -(v_xi ** 2) / (2 * v), -2 * v * (2 * (v1 + v2) + t)


def _pii_at(ext: EdgeExtract, get_mu, get_nu, n, threshold) -> list:
    ctx = ext.ctx
    pt = (ext.t1, ext.t2)
    root2 = mp.sqrt(2)
    vals = {}
    for i, get in ((1, get_mu), (2, get_nu)):
        if not _has_jump(ext.template, i):
            continue
        d1 = directional_diff(get, pt, (1, 1), ext.delta, 1, ctx)
        d2 = directional_diff(get, pt, (1, 1), ext.delta, 2, ctx)
        with ctx.workprec():
            vals[i] = (-get(*pt) / root2, -d1.value / root2, -d2.value / root2)
    out = []
    with ctx.workprec():
        v1 = vals[1][0] if 1 in vals else mp.mpf(0)
        v2 = vals[2][0] if 2 in vals else mp.mpf(0)
        for i, t in ((1, ext.t1), (2, ext.t2)):
            if i not in vals:
                continue
            v, vx, vxx = vals[i]
            if abs(v) < mp.mpf(10) ** -12:
                raise DegenerateResidue(f"v{i} vanishes on the stencil")
            out.append(_normalized(f"PII residual i={i}", n, pii_residual_terms(v, vx, vxx, v1, v2, t), threshold))
    return out


def check_pii_residual(ext: EdgeExtract) -> list:
    """v_i'' - v_i'^2/(2 v_i) - 2 v_i (2(v1+v2) + t_i), extrapolated and per n."""
    out = _pii_at(ext, ext.field("mu1_hat"), ext.field("nu1_hat"), None, ext.envelope)
    per_n = [_pii_at(ext, ext.proxy(n, "mu1_hat"), ext.proxy(n, "nu1_hat"), n, None) for n in ext.n_list]
    out += [r for reps in per_n for r in reps]
    for k in range(len(per_n[0])):
        label = per_n[0][k].label
        out += _doubling_reports(f"{label} per-n", ext.n_list, [reps[k].abs_residual for reps in per_n])
    return out


def check_sigma_and_recurrence_asymptotics(ext: EdgeExtract) -> list:
    """Rates of sigma-hat -> H2, alpha_n and beta_n remainders along the sweep."""
    out = []
    ctx = ext.ctx
    ns = ext.n_list
    with ctx.workprec():
        root2 = mp.sqrt(2)
        vsum = ext.v1 + ext.v2
        dev = [abs(p.sigma_hat - ext.H2) for p in ext.points]
        al = [abs(p.alpha_n + vsum / (root2 * mp.root(mp.mpf(p.n), 6))) for p in ext.points]
        be = [abs(p.beta_n - mp.mpf(p.n) / 2 + vsum * mp.cbrt(mp.mpf(p.n)) / 2) for p in ext.points]
        for p, d in zip(ext.points, dev):
            out.append(make_report("sigma_hat vs H2", p.n, None, p.sigma_hat, ext.H2))
        out += _doubling_reports("|sigma_hat - H2|", ns, dev)
        out.append(window_report("alpha_n remainder decay exponent", decay_exponent(ns, al),
                                 ALPHA_REMAINDER_EXPONENT, EXPONENT_WINDOW))
        top = ext.points[-1]
        out.append(window_report("sign(alpha_n) = sign(-(v1+v2))", 0 if (top.alpha_n < 0) == (vsum > 0) else 1,
                                 0, 0.5, top.n))
        # O(1) remainder: growth exponent must stay clear of the n^(1/3) term it corrects
        out.append(window_report("beta_n remainder growth exponent", -decay_exponent(ns, be), 0,
                                 CORRECTION_EXPONENT - EXPONENT_WINDOW))
        for p in ext.points:
            bound = 2 * (abs(ext.v1) + abs(ext.v2)) * mp.mpf(p.n) ** (-mp.mpf(2) / 3)
            gap = abs(p.beta_n / p.n - mp.mpf(1) / 2)
            out.append(ResidualReport("|beta_n/n - 1/2| <= 2(|v1|+|v2|) n^(-2/3)", p.n, None, gap, bound,
                                      gap, gap / bound, None, 1.0, None))
    return out


def hii_pde_terms(H, d: dict, t1, t2, drop_square: bool = False):
    """Terms of the second-order second-degree PDE for H, written as sum = 0:

        H1 (H22 + H12)^2 + H2 (H11 + H12)^2 = 4 H1 H2 (t1 H1 + t2 H2 - H - (H1 + H2)^2).

    This is the leading nontrivial order of the finite-n sigma_n PDE under
    sigma_n = sqrt(2) n^(1/6) H.  ``drop_square`` omits the (H1 + H2)^2
    term, a variant that does not vanish on the limit data.
    """
    square = 0 if drop_square else (d["d1"] + d["d2"]) ** 2
    return (
        d["d1"] * (d["d22"] + d["d12"]) ** 2,
        d["d2"] * (d["d11"] + d["d12"]) ** 2,
        -4 * d["d1"] * d["d2"] * (t1 * d["d1"] + t2 * d["d2"] - H - square),
    )


def _hii_at(ext: EdgeExtract, get_H, n, threshold, drop_square=False) -> ResidualReport:
    pt = (ext.t1, ext.t2)
    d = partial_derivatives(get_H, pt, ext.delta, ext.ctx, second=True)
    label = "H_II PDE without (H1+H2)^2" if drop_square else "H_II PDE"
    with ext.ctx.workprec():
        return _normalized(label, n, hii_pde_terms(get_H(*pt), d, ext.t1, ext.t2, drop_square), threshold)


def check_hii_pde(ext: EdgeExtract, drop_square: bool = False) -> list:
    """H_II PDE on the extrapolated sigma-hat field, plus per-n residuals (must decrease)."""
    out = [_hii_at(ext, ext.field("sigma_hat"), None, ext.envelope, drop_square)]
    per_n = [_hii_at(ext, ext.proxy(n, "sigma_hat"), n, None, drop_square) for n in ext.n_list]
    out += per_n
    for a, b in zip(per_n, per_n[1:]):
        out.append(window_report(f"H_II PDE per-n residual decreases {a.n}->{b.n}",
                                 1 if b.rel_residual >= a.rel_residual else 0, 0, 0.5, b.n))
    return out


def rate_reports(ext: EdgeExtract) -> list:
    """Correction exponent and contraction factor of n^(1/6) R_{n,i}."""
    out = []
    for key, r in ext.rate_estimates.items():
        if not isinstance(r, dict):
            continue
        out.append(window_report(f"{key} correction exponent", r["exponent"], CORRECTION_EXPONENT, EXPONENT_WINDOW))
        out.append(window_report(f"{key} contraction factor (top pair)", r["pair_ratios"][-1], CONTRACTION,
                                 CONTRACTION_WINDOW, ext.n_list[-1]))
    return out


def softedge_suite(ext: EdgeExtract) -> list:
    return (rate_reports(ext) + check_mu_nu_pde(ext) + check_pii_residual(ext)
            + check_sigma_and_recurrence_asymptotics(ext) + check_hii_pde(ext))
