"""Command-line front end.

    jumpgue verify --A 1 --B1 -0.5 --B2 0.3 --s1 -0.7 --s2 0.9 --n-max 20 --output report.json
    jumpgue montecarlo --n 3 --s1 -0.5 --s2 0.5 --samples 1000000 --seed 42 --csv mc.csv

Exit status: 0 when every check passes, 1 when any fails, 2 for invalid
configuration, 3 when precision escalation gives up.  Outputs are written
atomically and carry no timestamps, so equal inputs give equal bytes.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile

import mpmath as mp

from . import identities, montecarlo, painleve2, painleve4, softedge
from .errors import ConfigInvalid, JumpGUEError, PrecisionExhausted
from .numerics import PrecisionContext, to_real
from .ortho import auto_bits, build_ortho_system, stieltjes_oracle
from .weight import WeightParams, moment_list

ENV_BITS = "JGL_PRECISION_BITS"
JSON_DIGITS = 40
ORACLE_TOL = 1e-25
COMMANDS = ("moments", "recurrence", "verify", "painleve4", "softedge", "integrate-pii", "montecarlo")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_PRECISION = 0, 1, 2, 3


# --- serialisation -------------------------------------------------------------------


def real_str(x) -> str:
    """40 significant digits, printed at no less precision than ``x`` carries."""
    if isinstance(x, str):
        return x
    if isinstance(x, float):
        x = repr(x)
    bits = x._mpf_[3] if isinstance(x, mp.mpf) else 0
    with mp.workprec(max(140, bits)):
        return mp.nstr(to_real(x), JSON_DIGITS, strip_zeros=False)


def check_dict(r) -> dict:
    return {
        "label": r.label,
        "n": r.n,
        "lhs": real_str(r.lhs),
        "rhs": real_str(r.rhs),
        "rel_residual": real_str(r.rel_residual),
        "threshold": None if r.threshold is None else real_str(r.threshold),
        "pass": bool(r.passed),
    }


def report_json(command: str, params: dict, bits, reports) -> str:
    doc = {
        "command": command,
        "params": params,
        "precision_bits": bits,
        "checks": [check_dict(r) for r in reports],
    }
    return json.dumps(doc, indent=2) + "\n"


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".jumpgue-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# --- configuration -------------------------------------------------------------------


def resolve_bits(requested, auto: int) -> int:
    """Explicit --precision-bits wins; otherwise JGL_PRECISION_BITS, otherwise ``auto``."""
    if requested not in (None, "auto"):
        bits = requested
    elif os.environ.get(ENV_BITS):
        bits = os.environ[ENV_BITS]
    else:
        return auto
    try:
        bits = int(bits)
    except (TypeError, ValueError):
        raise ConfigInvalid(f"precision bits must be an integer or 'auto', got {bits!r}") from None
    if bits < 64:
        raise ConfigInvalid("precision bits must be >= 64")
    return bits


def bits_overridden(requested) -> bool:
    return requested not in (None, "auto") or bool(os.environ.get(ENV_BITS))


def weight_params(args) -> WeightParams:
    return WeightParams(args.A, args.B1, args.B2, args.s1, args.s2, strict=not args.relaxed)


def params_dict(args, keys=("A", "B1", "B2", "s1", "s2")) -> dict:
    out = {k: str(getattr(args, k)) for k in keys}
    if "A" in keys:
        out["strict"] = not args.relaxed
    return out


def int_list(text) -> list:
    if isinstance(text, (list, tuple)):
        return [int(x) for x in text]
    try:
        return [int(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _weight_args(p, s_defaults=("-0.7", "0.9")):
    g = p.add_argument_group("weight")
    g.add_argument("--A", default="1", help="constant level (decimal string, kept exact)")
    g.add_argument("--B1", default="-0.5")
    g.add_argument("--B2", default="0.3")
    g.add_argument("--s1", default=s_defaults[0])
    g.add_argument("--s2", default=s_defaults[1])
    g.add_argument("--relaxed", action="store_true", help="admit B1*B2 = 0")


def _common_args(p):
    p.add_argument("--config", help="JSON file of option defaults (keys are option names with '_')")
    p.add_argument("--precision-bits", default="auto")
    p.add_argument("--fd-step", default=identities.DEFAULT_FD_STEP)
    p.add_argument("--tolerance", default=None, help="integrator tolerance (integrate-pii)")
    p.add_argument("--output", help="JSON report path")
    p.add_argument("--csv", help="CSV data path")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="jumpgue", description="Gaussian weight with two jumps: checks and sweeps.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("moments", help="moments m_k of the weight")
    _weight_args(p)
    _common_args(p)
    p.add_argument("--k", type=int, action="append", help="moment index (repeatable)")
    p.add_argument("--digits", type=int, default=30)

    p = sub.add_parser("recurrence", help="alpha_n, beta_n, h_n, ln D_n up to n-max")
    _weight_args(p)
    _common_args(p)
    p.add_argument("--n-max", type=int, default=20)
    p.add_argument("--oracle", action="store_true", help="cross-check against the Stieltjes quadrature route")

    p = sub.add_parser("verify", help="finite-n identity suite")
    _weight_args(p)
    _common_args(p)
    p.add_argument("--n-max", type=int, default=20)
    p.add_argument("--deriv-n", type=int, default=8)

    p = sub.add_parser("painleve4", help="coupled Painleve IV checks at one n")
    _weight_args(p)
    _common_args(p)
    p.add_argument("--n", type=int, default=6)

    for name in ("softedge", "integrate-pii"):
        p = sub.add_parser(name, help="soft-edge extraction" if name == "softedge" else
                           "integrate the coupled Painleve II system from an extraction")
        _weight_args(p)
        _common_args(p)
        p.add_argument("--t1", default="-1")
        p.add_argument("--t2", default="-0.5")
        p.add_argument("--n-list", type=int_list, default=list(softedge.DEFAULT_N_LIST))
        p.add_argument("--delta", default=softedge.DEFAULT_DELTA)
        p.add_argument("--workers", type=int, default=1)
        if name == "integrate-pii":
            p.add_argument("--xi-end", default="-0.7")
            p.add_argument("--sample-step", default="0.05")
            p.add_argument("--match-span", default=None, help="compare with fresh extractions at xi0 +- span")

    p = sub.add_parser("montecarlo", help="GUE gap probabilities, sampled and exact")
    _common_args(p)
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--s1", type=float, default=-0.5)
    p.add_argument("--s2", type=float, default=0.5)
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--mode", choices=("none", "all", "both"), default="both")
    return ap


def parse_args(argv):
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigInvalid(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(cfg, dict):
            raise ConfigInvalid("config file must hold a JSON object")
        cfg.pop("command", None)
        unknown = sorted(k for k in cfg if not hasattr(args, k))
        if unknown:
            raise ConfigInvalid(f"unknown config keys: {', '.join(unknown)}")
        # command-line flags win over the file: re-parse with the file as defaults
        sub = ap._subparsers._group_actions[0].choices[args.command]
        sub.set_defaults(**cfg)
        args = ap.parse_args(argv)
        if isinstance(args.n_list if hasattr(args, "n_list") else None, (list, tuple)):
            args.n_list = int_list(args.n_list)
    return args


# --- commands ------------------------------------------------------------------------


def cmd_moments(args):
    params = weight_params(args)
    ks = args.k or [0]
    if min(ks) < 0:
        raise ConfigInvalid("--k must be nonnegative")
    bits = resolve_bits(args.precision_bits, max(128, int(args.digits * 3.33) + 32))
    ctx = PrecisionContext(bits)
    ms = moment_list(max(ks), params, ctx)
    rows = []
    with ctx.workprec():
        for k in ks:
            print(f"m_{k} = {mp.nstr(ms[k], args.digits)}")
            rows.append([str(k), mp.nstr(ms[k], args.digits)])
    return params_dict(args), bits, [], (("k", "m_k"), rows)


def cmd_recurrence(args):
    params = weight_params(args)
    bits = resolve_bits(args.precision_bits, auto_bits(args.n_max))
    ctx = PrecisionContext(bits)
    sys_ = build_ortho_system(params, args.n_max, ctx, check=not bits_overridden(args.precision_bits))
    reports = []
    with mp.workprec(sys_.bits):
        rows = [[str(n), real_str(sys_.alpha[n]), real_str(sys_.beta[n]), real_str(sys_.h[n]),
                 real_str(sys_.logD[n])] for n in range(args.n_max + 1)]
        if args.oracle:
            oracle = stieltjes_oracle(params, args.n_max, ctx)
            for n in range(args.n_max + 1):
                reports.append(identities.make_report("alpha_n Stieltjes", n, params, sys_.alpha[n],
                                                      oracle.alpha[n], ORACLE_TOL))
                if n:
                    reports.append(identities.make_report("beta_n Stieltjes", n, params, sys_.beta[n],
                                                          oracle.beta[n], ORACLE_TOL))
    return params_dict(args), sys_.bits, reports, (("n", "alpha_n", "beta_n", "h_n", "lnD_n"), rows)


def cmd_verify(args):
    params = weight_params(args)
    bits = resolve_bits(args.precision_bits, 512)
    second = resolve_bits(args.precision_bits, 768)
    ctx = PrecisionContext(bits)
    reports = identities.finite_n_suite(params, args.n_max, ctx, args.deriv_n, second_order_ctx=PrecisionContext(second))
    _, B1, B2, _, _ = params.values()
    if B1 * B2 != 0:
        reports += painleve4.piv_suite(params, args.deriv_n, ctx, args.fd_step)
    elif B1 != 0 or B2 != 0:
        reports.append(identities.check_single_jump_ode(params, args.deriv_n, PrecisionContext(second), args.fd_step))
    return params_dict(args), bits, reports, None


def cmd_painleve4(args):
    params = weight_params(args)
    bits = resolve_bits(args.precision_bits, 512)
    reports = painleve4.piv_suite(params, args.n, PrecisionContext(bits), args.fd_step)
    return params_dict(args), bits, reports, None


def _extract(args, dirs=None):
    template = (args.A, args.B1, args.B2)
    bits = int(resolve_bits(args.precision_bits, 0)) or None
    sampler = softedge.EdgeSampler(template, args.n_list, bits=bits, workers=args.workers)
    kw = {} if dirs is None else {"dirs": dirs}
    ext = softedge.extract_edge(template, args.t1, args.t2, args.n_list, softedge.ANALYSIS_CONTEXT, args.delta,
                                sampler, **kw)
    return ext, bits or "auto"


def cmd_softedge(args):
    ext, bits = _extract(args)
    reports = softedge.softedge_suite(ext)
    rows = ext.csv_rows()
    return params_dict(args, ("A", "B1", "B2", "t1", "t2")), bits, reports, (softedge.CSV_FIELDS, rows)


def cmd_integrate_pii(args):
    ext, bits = _extract(args, dirs=((1, 1),))
    ctx = ext.ctx
    tol = args.tolerance or painleve2.DEFAULT_TOL
    start = painleve2.state_from_extract(ext)
    with ctx.workprec():
        end, step = to_real(args.xi_end), abs(to_real(args.sample_step))
        if step == 0:
            raise ConfigInvalid("--sample-step must be nonzero")
        count = int(mp.floor(abs(end - start.xi) / step))
        sign = 1 if end >= start.xi else -1
        samples = [start.xi + sign * k * step for k in range(1, count + 1)] + [end]
    traj = painleve2.integrate_pii(start, end, tol, ctx, samples=samples)
    reports = painleve2.check_pii_gradient(start, ctx) + [painleve2.flow_identity_report(traj)]
    if args.match_span is not None:
        reports.append(painleve2.match_finite_n(ext, args.match_span, ctx, tol))
    rows = [start.csv_row()] + traj.csv_rows()
    keys = ("A", "B1", "B2", "t1", "t2", "xi_end")
    return params_dict(args, keys), bits, reports, (painleve2.TRAJECTORY_FIELDS, rows)


def cmd_montecarlo(args):
    modes = montecarlo.MODES if args.mode == "both" else (montecarlo.canonical_mode(args.mode),)
    cfg = montecarlo.MCConfig(args.n, args.samples, args.seed, args.s1, args.s2, modes[0])
    bits = resolve_bits(args.precision_bits, auto_bits(args.n))
    est = montecarlo.gap_probabilities_mc(cfg)
    rows, reports = [], []
    for mode in modes:
        p_det = montecarlo.gap_probability_det(args.n, args.s1, args.s2, mode, PrecisionContext(bits))
        row = montecarlo.comparison_row(cfg, est[mode], p_det)
        rows.append(row)
        dist = float(row[-1])
        reports.append(identities.ResidualReport(f"|p_hat - p_det| / stderr ({mode})", args.n, None,
                                                 est[mode].p_hat, p_det, abs(est[mode].p_hat - float(p_det)),
                                                 dist, None, 4.0, None))
    keys = {"n": str(args.n), "s1": repr(args.s1), "s2": repr(args.s2), "samples": str(args.samples),
            "seed": str(args.seed), "mode": args.mode}
    return keys, bits, reports, (montecarlo.CSV_FIELDS, rows)


HANDLERS = {
    "moments": cmd_moments,
    "recurrence": cmd_recurrence,
    "verify": cmd_verify,
    "painleve4": cmd_painleve4,
    "softedge": cmd_softedge,
    "integrate-pii": cmd_integrate_pii,
    "montecarlo": cmd_montecarlo,
}


def run(argv=None) -> int:
    try:
        args = parse_args(argv)
        params, bits, reports, table = HANDLERS[args.command](args)
    except ConfigInvalid as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PrecisionExhausted as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except JumpGUEError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    if args.output:
        write_atomic(args.output, report_json(args.command, params, bits, reports))
    if args.csv and table is not None:
        write_atomic(args.csv, csv_text(*table))
    failed = [r for r in reports if not r.passed]
    for r in failed:
        where = "" if r.n is None else f" (n={r.n})"
        print(f"FAIL {r.label}{where}: rel_residual {mp.nstr(to_real(r.rel_residual), 6)} "
              f"threshold {r.threshold}", file=sys.stderr)
    if reports:
        print(f"{len(reports) - len(failed)}/{len(reports)} checks passed")
    return EXIT_FAIL if failed else EXIT_OK


def main(argv=None) -> None:
    sys.exit(run(argv))
