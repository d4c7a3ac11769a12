"""Command-line front end; every command writes one CSV.

Each CSV starts with a ``#`` line recording the full configuration,
followed by a header row.  Floats are written with repr, so identical
configurations give identical files (wall-clock columns excepted).
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
import traceback
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .amplitudes import named_amplitude
from .filonq import q1, q2
from .moments1 import Params1, compute_sigma1, cutoff_sigma1
from .moments2 import Params2, compute_sigma2, regime_test_sigma2
from .oracle import reference_I1, reference_I2, reference_sigma1, reference_sigma2
from .recsolve import RecurrenceError

ORACLE_MAX_OMEGA = 500.0
REF_P = 6


class UsageError(ValueError):
    pass


# -- argument handling ----------------------------------------------------------------

def _omega_range(text):
    try:
        lo, hi, count = text.split(":")
        lo, hi, count = float(lo), float(hi), int(count)
    except ValueError:
        raise argparse.ArgumentTypeError("expected lo:hi:count")
    if not (0 < lo <= hi) or count < 1:
        raise argparse.ArgumentTypeError("need 0 < lo <= hi and count >= 1")
    return lo, hi, count


def _int_list(text):
    try:
        vals = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError("expected a comma separated list of integers")
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _common():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--omega", type=float)
    p.add_argument("--omega-range", type=_omega_range, metavar="LO:HI:COUNT",
                   help="log-spaced frequencies")
    p.add_argument("--beta", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--s", type=_int_list, help="derivative order(s), comma separated")
    p.add_argument("--nu", type=int)
    p.add_argument("--N", type=int, dest="N")
    p.add_argument("--p", type=_int_list, help="spline degree parameter(s)")
    p.add_argument("--Ng", type=int, dest="Ng")
    p.add_argument("--sigma-grading", type=float, default=0.3)
    p.add_argument("--eps", type=float)
    p.add_argument("--omega0", type=float, default=2.0)
    p.add_argument("--gh-nodes", type=int)
    p.add_argument("--gl-nodes", type=int)
    p.add_argument("--amp", default="demo1", help="demo1, one, c2spline or cheb:<n>")
    p.add_argument("--theta", type=float, default=math.pi / 4, help="incident angle (scatter)")
    p.add_argument("--out", help="output file (default stdout)")
    return p


def build_parser():
    parser = argparse.ArgumentParser(prog="hankel-filon",
                                     description="Filon quadrature for Hankel-kernel integrals")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    parent = _common()
    helps = {
        "eval1": "single Q1 value with oracle error",
        "eval2": "single Q2 value with oracle error",
        "moments1": "sigma1 moment table",
        "moments2": "sigma2 moment table",
        "converge1": "Q1 error against the oracle over an omega sweep",
        "converge2": "Q2 error against the oracle over an omega sweep",
        "stability": "forward recursion against the BVP, both against the oracle",
        "scatter": "screen scattering: assembly time and L1 self-convergence",
    }
    for name, text in helps.items():
        sub.add_parser(name, parents=[parent], help=text)
    return parser


def _need(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        flags = ", ".join("--" + m.replace("_", "-") for m in missing)
        raise UsageError(f"{args.command} needs {flags}")


def _omegas(args):
    if args.omega_range is not None:
        lo, hi, count = args.omega_range
        return list(np.geomspace(lo, hi, count)) if count > 1 else [lo]
    if args.omega is not None:
        return [args.omega]
    raise UsageError(f"{args.command} needs --omega or --omega-range")


def _config_line(args):
    items = []
    for k in sorted(vars(args)):
        v = getattr(args, k)
        if v is None or k == "out":
            continue
        if isinstance(v, (list, tuple)):
            v = ":".join(map(str, v)) if k == "omega_range" else ",".join(map(str, v))
        items.append(f"{k}={v}")
    return "hankel-filon " + " ".join(items)


def _f(x):
    return repr(float(x))


# -- commands -------------------------------------------------------------------------

def _amp_fn(spec):
    return lambda x: spec.values(x)


def _extra_freq(name):
    return float(name.split(":", 1)[1]) if name.startswith("cheb:") else 0.0


def _ref1(amp_name, spec, omega, beta):
    if omega > ORACLE_MAX_OMEGA:
        return complex("nan+nanj")
    return complex(reference_I1(_amp_fn(spec), Params1(omega, beta), extra_freq=_extra_freq(amp_name)))


def _ref2(amp_name, spec, omega, alpha, beta):
    if omega > ORACLE_MAX_OMEGA:
        return complex("nan+nanj")
    return complex(reference_I2(_amp_fn(spec), Params2(omega, alpha, beta), extra_freq=_extra_freq(amp_name)))


def _eval_rows(args, which):
    if which == 1:
        _need(args, "beta")
        spec = named_amplitude(args.amp, shifted=True)
    else:
        _need(args, "alpha", "beta")
        spec = named_amplitude(args.amp, shifted=False)
    nu = args.nu if args.nu is not None else (8 if which == 1 else 9)
    s_list = args.s or [0]
    rows = []
    for omega in _omegas(args):
        for s in s_list:
            info = {}
            if which == 1:
                val = q1(spec, s, nu, Params1(omega, args.beta), info)
                ref = _ref1(args.amp, spec, omega, args.beta)
            else:
                val = q2(spec, s, nu, Params2(omega, args.alpha, args.beta), info)
                ref = _ref2(args.amp, spec, omega, args.alpha, args.beta)
            err = abs(val - ref)
            rows.append([_f(omega), s, info["s"], nu, info["degree"], _f(val.real), _f(val.imag),
                         _f(ref.real), _f(ref.imag), _f(err), _f(err / abs(ref))])
    header = ["omega", "s", "s_used", "nu", "degree", "re", "im", "ref_re", "ref_im", "abs_err", "rel_err"]
    return header, rows, []


def _moments(args, which):
    if which == 1:
        _need(args, "omega", "beta", "N")
        return compute_sigma1(Params1(args.omega, args.beta), args.N, m_gh=args.gh_nodes)
    _need(args, "omega", "alpha", "beta", "N")
    kw = {} if args.eps is None else {"eps": args.eps}
    return compute_sigma2(Params2(args.omega, args.alpha, args.beta), args.N,
                          m_gl=args.gl_nodes, m_gh=args.gh_nodes, **kw)


def fit_slope(omegas, errors):
    """Least-squares slope of log(error) against log(omega)."""
    w, e = np.asarray(omegas, float), np.asarray(errors, float)
    ok = (e > 0) & np.isfinite(e)
    if ok.sum() < 2:
        return math.nan
    return float(np.polyfit(np.log(w[ok]), np.log(e[ok]), 1)[0])


def _converge(args, which):
    if args.omega_range is None:
        raise UsageError(f"{args.command} needs --omega-range")
    if which == 1:
        _need(args, "beta")
        spec = named_amplitude(args.amp, shifted=True)
    else:
        _need(args, "alpha", "beta")
        spec = named_amplitude(args.amp, shifted=False)
    nu = args.nu if args.nu is not None else (8 if which == 1 else 9)
    s_list = args.s or [0, 1, 2]
    omegas = _omegas(args)
    if max(omegas) > ORACLE_MAX_OMEGA:
        raise UsageError(f"oracle references need omega <= {ORACLE_MAX_OMEGA:g}")

    def one(omega):
        if which == 1:
            ref = _ref1(args.amp, spec, omega, args.beta)
            vals = [q1(spec, s, nu, Params1(omega, args.beta)) for s in s_list]
        else:
            ref = _ref2(args.amp, spec, omega, args.alpha, args.beta)
            vals = [q2(spec, s, nu, Params2(omega, args.alpha, args.beta)) for s in s_list]
        return ref, vals

    with ThreadPoolExecutor() as ex:
        results = list(ex.map(one, omegas))       # map keeps the input order
    rows, errs = [], {s: [] for s in s_list}
    for omega, (ref, vals) in zip(omegas, results):
        for s, v in zip(s_list, vals):
            e = abs(v - ref)
            errs[s].append(e)
            rows.append([_f(omega), s, _f(v.real), _f(v.imag), _f(ref.real), _f(ref.imag), _f(e)])
    trailer = [f"slope s={s}: {fit_slope(omegas, errs[s]):.4f} (expected {-(s + 2)})" for s in s_list]
    return ["omega", "s", "re", "im", "ref_re", "ref_im", "abs_err"], rows, trailer


def _forward_table(compute, N):
    """Forced forward recursion; shortened when the values overflow."""
    n = N
    while n >= 0:
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                return compute(n).values
        except RecurrenceError:
            n = int(n * 0.9) if n > 20 else n - 1
    return np.zeros(0, dtype=complex)


def _stability(args):
    _need(args, "omega", "beta", "N")
    if args.omega > ORACLE_MAX_OMEGA:
        raise UsageError(f"oracle references need omega <= {ORACLE_MAX_OMEGA:g}")
    N = args.N
    ns = np.unique(np.r_[np.arange(0, N + 1, max(1, N // 100)), N])
    if args.alpha is None:
        p = Params1(args.omega, args.beta)
        bvp = compute_sigma1(p, N, m_gh=args.gh_nodes, method="bvp").values
        fwd = _forward_table(lambda n: compute_sigma1(p, n, m_gh=args.gh_nodes, method="forward"), N)
        ref = reference_sigma1(p, ns)
        trailer = [f"predicted cutoff n = {cutoff_sigma1(p):.1f}"]
    else:
        p = Params2(args.omega, args.alpha, args.beta)
        kw = {} if args.eps is None else {"eps": args.eps}
        bvp = compute_sigma2(p, N, method="bvp", **kw).values
        fwd = _forward_table(lambda n: compute_sigma2(p, n, method="forward", **kw), N)
        ref = reference_sigma2(p, ns)
        trailer = [f"regime at N: {regime_test_sigma2(p, N, **kw)}"]
    rows = []
    for n, r in zip(ns, np.atleast_1d(ref)):
        fe = abs(fwd[n] - r) / abs(r) if n < len(fwd) else math.inf
        rows.append([int(n), _f(r.real), _f(r.imag), _f(abs(bvp[n] - r) / abs(r)), _f(fe)])
    return ["n", "ref_re", "ref_im", "bvp_rel_err", "forward_rel_err"], rows, trailer


def _scatter(args):
    from .scatter2d import REPORT_HEADER, run_scatter

    p_list = args.p or [3]
    if min(p_list) < 1:
        raise UsageError("--p must be >= 1")
    ref_p = max(REF_P, max(p_list) + 1)
    rows = []
    kw = dict(sigma=args.sigma_grading, theta=args.theta, omega0=args.omega0)
    if args.eps is not None:
        kw["eps"] = args.eps
    for omega in _omegas(args):
        _, ref = run_scatter(omega, ref_p, None if args.Ng is None else 2 * ref_p, **kw)
        for p in p_list:
            row, _ = run_scatter(omega, p, args.Ng, reference=ref, **kw)
            rows.append([_f(row.omega), row.p, row.Ng, row.dofs, _f(row.assembly_seconds),
                         _f(row.residual), _f(row.rel_l1_vs_ref)])
    return REPORT_HEADER.split(","), rows, [f"reference: p={ref_p}, N_g={2 * ref_p}"]


# -- entry point ----------------------------------------------------------------------

def _write(args, header, rows, trailer, fh):
    fh.write(f"# {_config_line(args)}\n")
    wr = csv.writer(fh, lineterminator="\n")
    wr.writerow(header)
    wr.writerows(rows)
    for line in trailer:
        fh.write(f"# {line}\n")


def dispatch(args, fh) -> None:
    cmd = args.command
    if cmd in ("moments1", "moments2"):
        table = _moments(args, 1 if cmd == "moments1" else 2)
        table.to_csv(fh, comment=_config_line(args))
        return
    if cmd in ("eval1", "eval2"):
        out = _eval_rows(args, 1 if cmd == "eval1" else 2)
    elif cmd in ("converge1", "converge2"):
        out = _converge(args, 1 if cmd == "converge1" else 2)
    elif cmd == "stability":
        out = _stability(args)
    else:
        out = _scatter(args)
    _write(args, *out, fh)


def _origin(exc) -> str:
    """Innermost package module on the traceback."""
    mod = type(exc).__module__.rsplit(".", 1)[-1]
    pkg_dir = os.path.dirname(os.path.abspath(__file__))
    for frame, _ in traceback.walk_tb(exc.__traceback__):
        path = os.path.abspath(frame.f_code.co_filename)
        if os.path.dirname(path) == pkg_dir:
            mod = os.path.splitext(os.path.basename(path))[0]
    return mod


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    buf = io.StringIO()
    try:
        dispatch(args, buf)
    except UsageError as exc:
        print(f"hankel-filon: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:        # operation errors carry their module of origin
        mod = _origin(exc)
        print(f"hankel-filon: {mod}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    text = buf.getvalue()
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
