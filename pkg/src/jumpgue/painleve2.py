"""Coupled Painleve II system in xi at fixed eta.

    v_i' = 2 v_i w_i,    w_i' = 2 (v1 + v2) + t_i - w_i^2,    t1 = xi, t2 = xi + eta,

with Hamiltonian H2 = v1 w1^2 + v2 w2^2 - (v1+v2)^2 - t1 v1 - t2 v2, whose
total xi-derivative along solutions is -(v1 + v2).

The integrator is Dormand-Prince 5(4) in mpmath arithmetic, propagating the
fifth-order solution.  A fifth component q' = v1 + v2 is carried along so
that H2(xi) - H2(xi0) + q(xi) measures how well the flow identity survives
discretisation.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath as mp

from .errors import StepCollapse
from .identities import ResidualReport, make_report
from .numerics import PrecisionContext, to_real
from .softedge import ANALYSIS_CONTEXT, EdgeExtract, extract_edge

TOL_GRADIENT = 1e-25
DEFAULT_TOL = "1e-20"
MAX_STEPS = 100_000
# smallest admissible step relative to max(1, |xi|); below it the trajectory is treated as singular
MIN_STEP = "1e-12"
TRAJECTORY_FIELDS = ("xi", "v1", "v2", "w1", "w2", "H2")


@dataclass(frozen=True)
class PIIState:
    xi: object
    eta: object
    v1: object
    v2: object
    w1: object
    w2: object
    H2: object

    @classmethod
    def make(cls, xi, eta, v1, v2, w1, w2) -> "PIIState":
        xi, eta, v1, v2, w1, w2 = (to_real(x) for x in (xi, eta, v1, v2, w1, w2))
        return cls(xi, eta, v1, v2, w1, w2, pii_hamiltonian(v1, v2, w1, w2, xi, eta))

    @property
    def t1(self):
        return self.xi

    @property
    def t2(self):
        return self.xi + self.eta

    def csv_row(self, digits: int = 30) -> list:
        return [mp.nstr(getattr(self, k), digits) for k in TRAJECTORY_FIELDS]


def pii_hamiltonian(v1, v2, w1, w2, xi, eta):
    t2 = xi + eta
    return v1 * w1 * w1 + v2 * w2 * w2 - (v1 + v2) ** 2 - xi * v1 - t2 * v2


def _rhs(xi, eta, v1, v2, w1, w2):
    s = 2 * (v1 + v2)
    return (2 * v1 * w1, 2 * v2 * w2, s + xi - w1 * w1, s + xi + eta - w2 * w2)


def pii_rhs(state: PIIState):
    """(dv1, dv2, dw1, dw2)/dxi."""
    return _rhs(state.xi, state.eta, state.v1, state.v2, state.w1, state.w2)


def check_pii_gradient(state: PIIState, ctx: PrecisionContext = ANALYSIS_CONTEXT, step="1e-30") -> list:
    """The right-hand side equals (dH/dw1, dH/dw2, -dH/dv1, -dH/dv2).

    H2 is quadratic in each variable, so central differences are exact up
    to rounding.
    """
    out = []
    with ctx.workprec():
        h = to_real(step)
        rhs = pii_rhs(state)
        base = dict(v1=state.v1, v2=state.v2, w1=state.w1, w2=state.w2)
        for var, k, sign in (("w1", 0, 1), ("w2", 1, 1), ("v1", 2, -1), ("v2", 3, -1)):
            up, dn = dict(base), dict(base)
            up[var] += h
            dn[var] -= h
            grad = (pii_hamiltonian(xi=state.xi, eta=state.eta, **up)
                    - pii_hamiltonian(xi=state.xi, eta=state.eta, **dn)) / (2 * h)
            label = f"dH2/d{var}" if sign > 0 else f"-dH2/d{var}"
            out.append(make_report(label, None, None, sign * grad, rhs[k], TOL_GRADIENT))
    return out


# Dormand-Prince 5(4) tableau
_C = ("0", "1/5", "3/10", "4/5", "8/9", "1", "1")
_A = (
    (),
    ("1/5",),
    ("3/40", "9/40"),
    ("44/45", "-56/15", "32/9"),
    ("19372/6561", "-25360/2187", "64448/6561", "-212/729"),
    ("9017/3168", "-355/33", "46732/5247", "49/176", "-5103/18656"),
    ("35/384", "0", "500/1113", "125/192", "-2187/6784", "11/84"),
)
_B5 = ("35/384", "0", "500/1113", "125/192", "-2187/6784", "11/84", "0")
_B4 = ("5179/57600", "0", "7571/16695", "393/640", "-92097/339200", "187/2100", "1/40")


def _frac(s):
    num, _, den = s.partition("/")
    return mp.mpf(int(num)) / int(den or 1)


def _tableau():
    c = [_frac(x) for x in _C]
    a = [[_frac(x) for x in row] for row in _A]
    e = [_frac(x) - _frac(y) for x, y in zip(_B5, _B4)]
    b = [_frac(x) for x in _B5]
    return c, a, b, e


@dataclass
class Trajectory:
    """Accepted steps, requested samples and the flow-identity defect."""

    states: list
    samples: list
    defects: list
    rejected: int
    tol: object

    @property
    def final(self) -> PIIState:
        return self.states[-1]

    @property
    def max_defect(self):
        return max(abs(d) for d in self.defects)

    def csv_rows(self) -> list:
        return [s.csv_row() for s in self.samples]


def integrate_pii(initial: PIIState, xi_end, tol=DEFAULT_TOL, ctx: PrecisionContext = ANALYSIS_CONTEXT,
                  samples=None, h0=None, max_steps: int = MAX_STEPS, min_step=MIN_STEP) -> Trajectory:
    """Adaptive DP5(4) from initial.xi to xi_end in either direction.

    Per-step error control on max_i |err_i| / max(1, |y_i|) <= tol.  Steps
    are shortened to land on each requested sample point, so samples are
    exact trajectory points rather than interpolants.  Raises StepCollapse
    when the step falls below max(2^(-bits/2), min_step) * max(1, |xi|),
    which is how a pole of the transcendent shows up, or after
    ``max_steps`` steps.
    """
    with ctx.workprec():
        tol = to_real(tol)
        if not tol > 0:
            raise ValueError("tol must be positive")
        c, a, b, e = _tableau()
        xi, eta = to_real(initial.xi), to_real(initial.eta)
        end = to_real(xi_end)
        direction = 1 if end >= xi else -1
        targets = sorted({to_real(s) for s in (samples or [])} | {end}, reverse=direction < 0)
        targets = [t for t in targets if (t - xi) * direction >= 0]
        y = [to_real(initial.v1), to_real(initial.v2), to_real(initial.w1), to_real(initial.w2), mp.mpf(0)]
        H0 = pii_hamiltonian(y[0], y[1], y[2], y[3], xi, eta)
        first = PIIState(xi, eta, y[0], y[1], y[2], y[3], H0)
        states, defects, out_samples = [first], [mp.mpf(0)], []
        span = abs(end - xi)
        h = to_real(h0) if h0 is not None else (span / 16 if span > 0 else mp.mpf(0))
        h = min(h, mp.mpf("0.05")) if span > 0 else h
        rejected = 0
        steps = 0
        rel_floor = max(mp.ldexp(mp.mpf(1), -(ctx.bits // 2)), to_real(min_step))

        def f(x, yy):
            d = _rhs(x, eta, yy[0], yy[1], yy[2], yy[3])
            return d + (yy[0] + yy[1],)

        for target in targets:
            while (target - xi) * direction > 0:
                steps += 1
                if steps > max_steps:
                    raise StepCollapse(f"more than {max_steps} steps before xi = {mp.nstr(target, 8)}", xi)
                floor = rel_floor * max(1, abs(xi))
                if h < floor:
                    raise StepCollapse(f"step underflow at xi = {mp.nstr(xi, 12)} (step {mp.nstr(h, 5)})", +xi)
                hs = min(h, abs(target - xi)) * direction
                k = []
                for i in range(7):
                    yi = [y[j] + hs * mp.fsum(a[i][m] * k[m][j] for m in range(i)) for j in range(5)]
                    k.append(f(xi + c[i] * hs, yi))
                ynew = [y[j] + hs * mp.fsum(b[m] * k[m][j] for m in range(7)) for j in range(5)]
                err = max(abs(hs * mp.fsum(e[m] * k[m][j] for m in range(7))) / max(1, abs(ynew[j]))
                          for j in range(5))
                if not mp.isfinite(err):
                    h = abs(hs) / 4
                    rejected += 1
                    continue
                if err <= tol:
                    xi = target if abs(hs) == abs(target - xi) else xi + hs
                    y = ynew
                    H = pii_hamiltonian(y[0], y[1], y[2], y[3], xi, eta)
                    states.append(PIIState(xi, eta, y[0], y[1], y[2], y[3], H))
                    defects.append(H - H0 + y[4])
                else:
                    rejected += 1
                factor = mp.mpf("0.9") * (tol / err) ** (mp.mpf(1) / 5) if err > 0 else mp.mpf(5)
                h = abs(hs) * min(mp.mpf(5), max(mp.mpf("0.2"), factor))
            if samples is not None:
                out_samples.append(states[-1])
        return Trajectory(states, out_samples, defects, rejected, tol)


def flow_identity_report(traj: Trajectory) -> ResidualReport:
    """Largest |H2(xi) - H2(xi0) + int (v1+v2)| along the trajectory, against 10 tol."""
    d = traj.max_defect
    return ResidualReport("flow identity dH2/dxi + (v1+v2) = 0", None, None, d, mp.mpf(0), d, d, None,
                          float(10 * traj.tol), None)


def invariant_subspace_report(initial: PIIState, xi_end, tol=DEFAULT_TOL,
                              ctx: PrecisionContext = ANALYSIS_CONTEXT) -> list:
    """v = 0 stays exactly 0, and w_i follows Ai'/Ai (the Riccati solution w' = t - w^2)."""
    traj = integrate_pii(initial, xi_end, tol, ctx)
    out = []
    with ctx.workprec():
        vmax = max(max(abs(s.v1), abs(s.v2)) for s in traj.states)
        out.append(ResidualReport("v = 0 invariant", None, None, vmax, mp.mpf(0), vmax, vmax, None, 1e-300, None))
        fin = traj.final
        for name, t, w in (("w1", fin.t1, fin.w1), ("w2", fin.t2, fin.w2)):
            ref = mp.airyai(t, derivative=1) / mp.airyai(t)
            out.append(make_report(f"{name} = Ai'/Ai", None, None, w, ref, float(10 * to_real(tol))))
    return out


def self_convergence(initial: PIIState, xi_end, tol=DEFAULT_TOL, ctx: PrecisionContext = ANALYSIS_CONTEXT) -> dict:
    """Error reduction per tol-decade.

    Runs at tol, tol/10 and tol/100; 'state_factor' compares the end-state
    gaps to the tol/100 run, 'defect_factor' the flow-identity defects.
    """
    with ctx.workprec():
        tol = to_real(tol)
        runs = [integrate_pii(initial, xi_end, tol / 10 ** k, ctx) for k in range(3)]

        def gap(r):
            ref = runs[2].final
            s = r.final
            return max(abs(s.v1 - ref.v1), abs(s.v2 - ref.v2), abs(s.w1 - ref.w1), abs(s.w2 - ref.w2))

        g0, g1 = gap(runs[0]), gap(runs[1])
        d0, d1 = runs[0].max_defect, runs[1].max_defect
        return {
            "state_gap": (float(g0), float(g1)),
            "state_factor": float(g0 / g1) if g1 else float("inf"),
            "defect": (float(d0), float(d1)),
            "defect_factor": float(d0 / d1) if d1 else float("inf"),
        }


def state_from_extract(ext: EdgeExtract) -> PIIState:
    with ext.ctx.workprec():
        return PIIState.make(ext.t1, ext.t2 - ext.t1, ext.v1, ext.v2, ext.w1, ext.w2)


def match_finite_n(ext: EdgeExtract, xi_span, ctx: PrecisionContext | None = None, tol=DEFAULT_TOL,
                   fractions=(-1, 1)) -> ResidualReport:
    """Integrate from the extracted state and compare (v1, v2, H2) with fresh extractions.

    Fresh extractions sit at xi0 + f * xi_span for f in ``fractions``.
    The deviation at each point is max |difference| over (v1, v2, H2)
    divided by the largest of |v1|, |v2|, |H2| there; the threshold is the
    largest fitted envelope among the extractions involved.
    """
    ctx = ctx or ext.ctx
    start = state_from_extract(ext)
    with ctx.workprec():
        span = to_real(xi_span)
        eta = start.eta
        points = sorted({start.xi + to_real(fr) * span for fr in fractions})
    worst, env = mp.mpf(0), ext.envelope
    details = []
    for sign in (-1, 1):
        side = [p for p in points if (p - start.xi) * sign > 0]
        if not side:
            continue
        end = side[-1] if sign > 0 else side[0]
        traj = integrate_pii(start, end, tol, ctx, samples=side)
        for st in traj.samples:
            fresh = extract_edge(ext.template, st.xi, st.xi + eta, ext.n_list, ext.ctx, ext.delta, ext.sampler,
                                 dirs=((1, 1),))
            env = max(env, fresh.envelope)
            with ctx.workprec():
                scale = max(abs(fresh.v1), abs(fresh.v2), abs(fresh.H2))
                dev = max(abs(st.v1 - fresh.v1), abs(st.v2 - fresh.v2), abs(st.H2 - fresh.H2)) / scale
            details.append((st.xi, dev))
            worst = max(worst, dev)
    rep = ResidualReport("PII trajectory vs finite-n extraction", ext.n_list[-1], None, worst, mp.mpf(0),
                         worst, worst, None, env, None)
    return rep
