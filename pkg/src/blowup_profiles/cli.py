"""Command-line front end.

Every command prints one JSON report (``schema: 1``) to stdout or ``--out``
and optionally writes a CSV trace with ``--trace``. Errors are reported as
``{"error", "module", "detail"}`` with exit code 2 (domain/regime),
3 (numerical) or 4 (I/O).
"""

from __future__ import annotations

import argparse
import enum
import json
import math
import sys
import traceback
import warnings
from dataclasses import fields, is_dataclass

import numpy as np

from . import classifier, dynamics, params as params_mod, pohozaev
from .errors import BlowupError, DomainError, NumericalError, RegimeError, ToleranceNotMet

SCHEMA = 1
EXIT_OK, EXIT_DOMAIN, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4


# --- deterministic JSON ------------------------------------------------------------


def _plain(obj):
    """Reduce ``obj`` to JSON-ready builtins (floats kept as floats)."""
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, (bool, type(None), str)):
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return [_plain(x) for x in obj.tolist()]
    if is_dataclass(obj):
        return {f.name: _plain(getattr(obj, f.name)) for f in fields(obj) if not f.name.startswith("_")}
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(x) for x in obj]
    return str(obj)


def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return '"NaN"'
    if math.isinf(x):
        return '"Infinity"' if x > 0 else '"-Infinity"'
    text = format(x, ".17g")
    if not any(c in text for c in ".en"):
        text += ".0"
    return text


def dumps(obj, indent: int = 2) -> str:
    """JSON text with every float printed to 17 significant digits."""

    def enc(o, level):
        pad = " " * (indent * (level + 1))
        end = " " * (indent * level)
        if isinstance(o, float):
            return _fmt_float(o)
        if isinstance(o, dict):
            if not o:
                return "{}"
            items = [f"{pad}{json.dumps(k)}: {enc(v, level + 1)}" for k, v in o.items()]
            return "{\n" + ",\n".join(items) + "\n" + end + "}"
        if isinstance(o, list):
            if not o:
                return "[]"
            return "[\n" + ",\n".join(pad + enc(v, level + 1) for v in o) + "\n" + end + "]"
        return json.dumps(o, ensure_ascii=False)

    return enc(_plain(obj), 0) + "\n"


# --- argument parsing ----------------------------------------------------------------


class UsageError(DomainError):
    module = "cli"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(("arguments", message), message=message)


def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("problem")
    g.add_argument("--n", type=int, default=4)
    g.add_argument("--s", type=float, default=1.0)
    g.add_argument("--q", type=float, default=2.5)
    g.add_argument("--mu", type=float, default=0.0)
    g.add_argument("--tol", type=float, default=1e-12)
    g.add_argument("--out", metavar="FILE")
    g.add_argument("--trace", metavar="FILE")
    g.add_argument("--space", choices=["r", "ef"], default="ef")
    g.add_argument("--verify", action="store_true")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="blowup-profiles", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    common = _common()

    sub.add_parser("constants", parents=[common], help="exponents, thresholds and recurrence constant")

    p = sub.add_parser("solve", parents=[common], help="integrate the Emden-Fowler ODE")
    p.add_argument("--v0", type=float, required=True)
    p.add_argument("--dv0", type=float, default=0.0)
    p.add_argument("--t0", type=float, default=0.0)
    p.add_argument("--tend", type=float, required=True)
    p.add_argument("--stride", type=float, help="sample spacing in t for the trace")

    p = sub.add_parser("phase", parents=[common], help="critical-case orbit classification")
    p.add_argument("--v0", type=float, required=True)
    p.add_argument("--dv0", type=float, default=0.0)
    p.add_argument("--tend", type=float, default=40.0)

    p = sub.add_parser("pohozaev", parents=[common], help="Pohozaev-type integral")
    p.add_argument("--source", choices=["bubble", "vk", "homoclinic", "trajectory"], default="bubble")
    p.add_argument("--lam", type=float, default=1.0)
    p.add_argument("--K", type=float, help="level of the periodic profile (default K_ns/2)")
    p.add_argument("--v0", type=float, default=1.0)
    p.add_argument("--dv0", type=float, default=0.0)
    p.add_argument("--t0", type=float, default=0.0)
    p.add_argument("--tend", type=float, default=5.0)
    p.add_argument("--radii", default="0.1,1,10", help="comma-separated radii")
    p.add_argument("--r1", type=float, help="inner radius of the identity check")
    p.add_argument("--r2", type=float, help="outer radius of the identity check")
    p.add_argument("--asymptotic", action="store_true", help="estimate the r -> 0 limit")

    p = sub.add_parser("classify", parents=[common], help="classify an r,u trace")
    p.add_argument("--input", required=True, metavar="CSV")
    p.add_argument("--r-tail", type=float, default=1e-6)

    p = sub.add_parser("mb", parents=[common], help="multi-bump radii and bubble sum")
    p.add_argument("--r0", type=float, default=0.9)
    p.add_argument("--count", type=int, default=6)
    p.add_argument("--samples-per-unit", type=float, default=40.0, help="trace density per unit of t")

    sub.add_parser("crit", parents=[common], help="critical-case thresholds and equilibria")
    return parser


# --- commands ------------------------------------------------------------------------


def _params(ns) -> params_mod.ProblemParams:
    return params_mod.ProblemParams(ns.n, ns.s, ns.q, ns.mu)


def _write_trace(ns, params, t, v, dv):
    if not ns.trace:
        return None
    t, v, dv = (np.asarray(x, dtype=float) for x in (t, v, dv))
    if ns.space == "ef":
        classifier.write_trace_csv(ns.trace, ["t", "v", "dv"], [t, v, dv])
    else:
        # u = e^{a t} v directly; u' is not needed and overflows first.
        r, u = np.exp(-t), v * np.exp(params.table.half * t)
        order = np.argsort(-r)
        classifier.write_trace_csv(ns.trace, ["r", "u"], [r[order], u[order]])
    return ns.trace


def _verify(ok: bool, what: str, **detail):
    if not ok:
        raise ToleranceNotMet(f"verification failed: {what}", **detail)


def cmd_constants(ns, p):
    tab = p.table
    reg = params_mod.regime_of(p)
    out = {
        "two_star_s": tab.two_star_s,
        "two_star": tab.two_star,
        "p": tab.p,
        "c_ns": tab.c_ns,
        "K_ns": tab.K_ns,
        "gamma": tab.gamma,
        "omega": tab.omega,
        "v_bar": tab.v_bar,
        "eps0": classifier.convexity_threshold(p),
        "mu0": params_mod.mu_zero(p),
        "regime": reg,
    }
    mu1 = params_mod.mu_one(p)
    out["mu1_printed"], out["mu1_operational"], out["mu1_consistent"] = mu1.printed, mu1.operational, mu1.consistent
    if reg.mb_admissible:
        rc = params_mod.mb_recurrence_constant(p)
        out.update(K=rc.K, beta=rc.beta, K_explicit=rc.K_explicit, radial_integral=rc.radial_integral)
        if ns.verify:
            _verify(abs(rc.K - rc.K_explicit) <= 1e-10 * rc.K, "recurrence constant routes disagree")
    if reg.nd_admissible and p.mu > 0:
        nd = params_mod.nd_profile(p)
        out.update(p_nd=nd.p_nd, nd_coeff=nd.coeff)
    return out, {}


def cmd_solve(ns, p):
    traj = dynamics.integrate(p, dynamics.PhaseState(ns.t0, ns.v0, ns.dv0), ns.tend, tol=ns.tol, stride=ns.stride)
    out = {"final": traj.final._asdict(), "halt_reason": traj.halt_reason, "t_span": traj.t_span,
           "samples": len(traj.t)}
    if ns.verify:
        _verify(traj.drift <= 1e3 * ns.tol * max(1.0, abs(traj.v).max() ** p.table.two_star_s),
                "invariant drift", drift=traj.drift)
    _write_trace(ns, p, traj.t, traj.v, traj.dv)
    return out, {"drift": traj.drift}


def cmd_phase(ns, p):
    state = dynamics.PhaseState(0.0, ns.v0, ns.dv0)
    cls = dynamics.crit_classify_orbit(p, state, tol=max(ns.tol, 1e-9))
    out = {"orbit": cls, "equilibria": dynamics.crit_equilibria(p) if p.mu > 0 else None}
    traj = dynamics.integrate(p, state, ns.tend, tol=ns.tol)
    out["halt_reason"] = traj.halt_reason
    if ns.verify and cls.tag is dynamics.OrbitTag.PERIODIC:
        # One period later the orbit must come back to its start.
        v, dv = traj.v - ns.v0, traj.dv - ns.dv0
        dist = np.hypot(v, dv)
        k = int(np.argmax(dist))
        ret = k + int(np.argmin(dist[k:]))
        _verify(dist[ret] < 1e-2, "periodic orbit does not return", distance=float(dist[ret]))
        out["first_return"] = float(traj.t[ret])
    _write_trace(ns, p, traj.t, traj.v, traj.dv)
    return out, {"drift": traj.drift}


def _radii(text):
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(("radii", "comma-separated numbers")) from exc
    if not vals:
        raise UsageError(("radii", "at least one radius"))
    return vals


def cmd_pohozaev(ns, p):
    tab = p.table
    if ns.source == "bubble":
        src = dynamics.ClosedFormProfile.bubble(p, ns.lam)
    elif ns.source == "homoclinic":
        src = dynamics.ClosedFormProfile.homoclinic(p)
    elif ns.source == "vk":
        src = dynamics.ClosedFormProfile.periodic(p, ns.K if ns.K is not None else tab.K_ns / 2)
    else:
        src = dynamics.integrate(p, dynamics.PhaseState(ns.t0, ns.v0, ns.dv0), ns.tend, tol=ns.tol)
    radii = _radii(ns.radii)
    values = [float(pohozaev.pohozaev_at(p, src, r)) for r in radii]
    out = {"source": ns.source, "radii": radii, "P": values, "omega": tab.omega}
    diag = {}
    if ns.verify:
        radial = [float(pohozaev.pohozaev_at(p, src, r, form="radial")) for r in radii]
        gap = max(abs(a - b) for a, b in zip(values, radial))
        _verify(gap <= 1e-8 * tab.omega * max(1.0, max(map(abs, values))), "EF and radial forms differ", gap=gap)
    if ns.r1 is not None or ns.r2 is not None:
        if ns.source != "trajectory":
            raise UsageError(("r1, r2", "identity check needs --source trajectory"))
        if ns.r1 is None or ns.r2 is None:
            raise UsageError(("r1, r2", "both radii"))
        rep = pohozaev.identity_residual(p, src, ns.r1, ns.r2)
        out["identity"] = rep
        diag["bulk_error"] = rep.bulk_error
    if ns.asymptotic:
        asym = pohozaev.asymptotic_pohozaev(p, src, tol=max(ns.tol, 1e-12))
        out["asymptotic"] = {"value": asym.value, "levels": asym.levels, "rate": asym.rate,
                             "expected_rate": asym.expected_rate}
    if isinstance(src, dynamics.Trajectory):
        diag["drift"] = src.drift
        _write_trace(ns, p, src.t, src.v, src.dv)
    return out, diag


def cmd_classify(ns, p):
    trace = classifier.read_trace_csv(p, ns.input)
    res = classifier.classify(p, trace, classifier.ClassifyTolerances(r_tail=ns.r_tail))
    out = {"tag": res.tag, "liminf": res.liminf_est, "limsup": res.limsup_est, "windows": res.windows,
           "nd_limit": res.nd_limit_est, "note": res.note}
    if res.radii is not None:
        out["maxima"] = res.radii.maxima
        out["minima"] = res.radii.minima
    if res.tag is classifier.ProfileTag.MB and len(res.radii.maxima) >= 3:
        fit = classifier.mb_fit(p, res.radii.maxima, res.radii.minima)
        out.update(beta_hat=fit.beta_hat, K_hat=fit.K_hat, beta_expected=fit.beta_expected,
                   K_expected=fit.K_expected, tau_check=fit.tau_check)
    return out, {}


def cmd_mb(ns, p):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        radii = classifier.mb_generate(p, ns.r0, ns.count)
    fit = classifier.mb_fit(p, radii) if len(radii) >= 3 else None
    out = {"radii": radii, "truncated": len(radii) < ns.count, "fit": fit,
           "warnings": [str(w.message) for w in caught]}
    if ns.verify and fit is not None:
        _verify(abs(fit.beta_deviation) <= 1e-10 * max(1.0, fit.beta_expected)
                and abs(fit.K_hat / fit.K_expected - 1.0) <= 1e-10,
                "mb_fit does not recover the recurrence")
    if ns.trace:
        src = classifier.BubbleSum(p, radii)
        t_hi = -math.log(radii[-1]) + 10.0
        t_lo = -math.log(ns.r0) - 2.0
        t = np.linspace(t_lo, t_hi, max(3, int((t_hi - t_lo) * ns.samples_per_unit)))
        v, dv = src.ef_state(t)
        _write_trace(ns, p, t, v, dv)
    return out, {}


def cmd_crit(ns, p):
    th = params_mod.critical_thresholds(p)
    out = {"thresholds": th}
    if th.v_plus is not None:
        F_plus = float(params_mod.crit_F(p, th.v_plus))
        out["F_v_plus"] = F_plus
        out["E_separatrix"] = -F_plus
        out["E_center"] = -float(params_mod.crit_F(p, th.v_minus))
    if not th.mu1_consistent:
        out["mu1_flag"] = "printed and operational mu1 disagree"
    return out, {}


COMMANDS = {
    "constants": cmd_constants,
    "solve": cmd_solve,
    "phase": cmd_phase,
    "pohozaev": cmd_pohozaev,
    "classify": cmd_classify,
    "mb": cmd_mb,
    "crit": cmd_crit,
}


# --- dispatch ------------------------------------------------------------------------


def _error_module(exc) -> str:
    name = getattr(type(exc), "module", None)
    if isinstance(exc, BlowupError) and name and name != "blowup_profiles":
        return name
    for frame in reversed(traceback.extract_tb(exc.__traceback__)):
        parts = frame.filename.replace("\\", "/").split("/")
        if "blowup_profiles" in parts:
            return parts[-1].removesuffix(".py")
    return "cli"


def _exit_code(exc) -> int:
    if isinstance(exc, (DomainError, RegimeError)):
        return EXIT_DOMAIN
    if isinstance(exc, OSError):
        return EXIT_IO
    if isinstance(exc, (NumericalError, ArithmeticError)):
        return EXIT_NUMERIC
    if isinstance(exc, (BlowupError, ValueError)):
        return EXIT_DOMAIN
    return EXIT_NUMERIC


def _emit(text: str, out_path: str | None):
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run(argv=None) -> int:
    """Parse ``argv``, run the command, print the report; returns the exit code."""
    out_path = None
    try:
        ns = build_parser().parse_args(argv)
        out_path = ns.out
        p = _params(ns)
        results, diag = COMMANDS[ns.command](ns, p)
        report = {
            "schema": SCHEMA,
            "command": ns.command,
            "params": {"n": p.n, "s": p.s, "q": p.q, "mu": p.mu, "tol": ns.tol},
            "results": results,
            "diagnostics": diag,
            "exit_code": EXIT_OK,
        }
        if ns.trace:
            report["trace"] = {"path": ns.trace, "space": ns.space}
        _emit(dumps(report), out_path)
        return EXIT_OK
    except Exception as exc:  # every failure becomes a JSON error object
        code = _exit_code(exc)
        detail = dict(getattr(exc, "detail", {}) or {})
        detail.setdefault("message", str(exc))
        err = {"schema": SCHEMA, "error": type(exc).__name__, "module": _error_module(exc),
               "detail": detail, "exit_code": code}
        text = dumps(err)
        try:
            _emit(text, out_path)
        except OSError:
            sys.stdout.write(text)
            code = EXIT_IO
        return code


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
