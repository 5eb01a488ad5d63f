"""Command-line entry point: expansions, point counts, unit roots, CM
eigenbases, series identities, congruence scenarios, and the 1/pi check.

Exit codes: 0 if every requested (non-observation) check passed, 1 on a
computation error, 2 on a usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor

from gmpy2 import mpq

from . import asdcheck, elliptic, exactnum, modforms
from .modforms import FormId
from .qseries import QSeries


# ---------------------------------------------------------------------------
# parsing helpers
# ---------------------------------------------------------------------------


class UsageError(ValueError):
    pass


def _parse_exact(text: str):
    """Parse an exact scalar: integer, fraction, or quadratic expression
    such as ``17-12*sqrt(2)`` (returned as a QuadElem)."""
    text = text.strip()
    try:
        return mpq(text)
    except ValueError:
        pass
    import sympy as sp

    try:
        expr = sp.nsimplify(sp.sympify(text, rational=True))
        return elliptic.from_sympy(sp.expand(expr))
    except Exception as exc:  # noqa: BLE001 - report as usage error
        raise UsageError(f"cannot parse exact value {text!r}: {exc}") from exc


def _parse_primes(text: str) -> list[int]:
    try:
        ps = [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise UsageError(f"bad prime list {text!r}") from exc
    if not ps or any(p < 2 for p in ps):
        raise UsageError(f"bad prime list {text!r}")
    return ps


_FAMILIES = ("thm1.6", "ex1.3", "legendre", "thm1.7")


def _curve_from_args(args) -> elliptic.Curve:
    fam = args.family
    if fam == "thm1.7":
        if args.jval is None:
            raise UsageError("family thm1.7 requires --jval")
        return elliptic.family_thm17(_parse_exact(args.jval))
    if args.u is None:
        raise UsageError(f"family {fam} requires --u")
    u = _parse_exact(args.u)
    if fam == "thm1.6":
        return elliptic.family_thm16(u)
    if fam == "ex1.3":
        return elliptic.family_ex13(u)
    return elliptic.family_legendre(u)


# ---------------------------------------------------------------------------
# coefficient cache
# ---------------------------------------------------------------------------


def _cache_dir(args) -> str | None:
    return args.cache or os.environ.get("ASDLAB_CACHE") or None


def _cache_path(cache: str, key: str, N: int) -> str:
    safe = re.sub(r"[^A-Za-z0-9._-]+", "_", key)
    return os.path.join(cache, f"{safe}_N{N}.json")


def series_to_cache_dict(key: str, qs: QSeries) -> dict:
    return {
        "form_id": key,
        "mu": qs.mu,
        "trunc": qs.trunc,
        "lo": qs.lo,
        "coeffs": [str(mpq(c)) for c in qs.coeffs],
    }


def series_from_cache_dict(data: dict) -> QSeries:
    coeffs = [mpq(c) for c in data["coeffs"]]
    return QSeries(int(data["mu"]), int(data["lo"]), coeffs, int(data["trunc"]))


def cached_build(form: FormId, N: int, cache: str | None) -> QSeries:
    if cache is None:
        return modforms.build(form, N)
    path = _cache_path(cache, form.key, N)
    if os.path.exists(path):
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        if data.get("form_id") == form.key and int(data.get("trunc", -1)) >= N:
            return series_from_cache_dict(data)
    qs = modforms.build(form, N)
    os.makedirs(cache, exist_ok=True)
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(series_to_cache_dict(form.key, qs), fh)
    os.replace(tmp, path)
    return qs


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------


def _emit(args, data: dict, table_lines: list[str]):
    """Emit either the JSON document or its table rendering (same data)."""
    if args.json:
        print(json.dumps(data, sort_keys=True, default=str))
    else:
        for line in table_lines:
            print(line)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_expand(args) -> int:
    params = {}
    for name in ("u", "c1", "c2", "jval"):
        val = getattr(args, name)
        if val is not None:
            params[name] = _parse_exact(val)
    if args.k is not None:
        params["k"] = args.k
    N = args.n
    form = FormId.of(args.form, **params)
    qs = cached_build(form, N + 1, _cache_dir(args))
    data = series_to_cache_dict(form.key, qs)
    header = f"form={form.key} mu={qs.mu} lo={qs.lo} trunc={qs.trunc}"
    _emit(args, data, [header, ",".join(data["coeffs"])])
    return 0


def cmd_count(args) -> int:
    curve = _curve_from_args(args)
    a_p, count = elliptic.reduce_and_count(curve, args.p)
    if args.r > 1:
        count = elliptic.count_ext(a_p, args.p, args.r)
    data = {
        "family": args.family,
        "u": args.u,
        "jval": args.jval,
        "p": args.p,
        "r": args.r,
        "a_p": a_p,
        "count": count,
    }
    _emit(args, data, [
        f"family={args.family} u={args.u or args.jval} p={args.p} r={args.r}",
        f"a_p={a_p} count={count}",
    ])
    return 0


def cmd_unitroot(args) -> int:
    curve = _curve_from_args(args)
    a_p, _ = elliptic.reduce_and_count(curve, args.p)
    mu = exactnum.unit_root(a_p, args.p, args.precision)
    data = {
        "family": args.family,
        "u": args.u,
        "jval": args.jval,
        "p": args.p,
        "precision": args.precision,
        "a_p": a_p,
        "unit_root": int(mu.residue),
    }
    _emit(args, data, [
        f"family={args.family} u={args.u or args.jval} p={args.p}",
        f"a_p={a_p} unit_root={mu.residue} (mod {args.p}^{args.precision})",
    ])
    return 0


def cmd_eigenbasis(args) -> int:
    if args.pi is None:
        if args.family != "thm1.6":
            raise UsageError("--pi is required unless --family thm1.6")
        c1, c2 = asdcheck._eigen_coeffs(_parse_exact(args.u))
    else:
        curve = _curve_from_args(args)
        pi = _parse_exact(args.pi)
        if not isinstance(pi, exactnum.QuadElem):
            raise UsageError("--pi must be a proper quadratic element, e.g. '2*sqrt(-1)'")
        v1, v2 = elliptic.cm_eigenbasis(curve, pi)
        vec = v2 if v2.c2 != 0 else v1
        c1, c2 = vec.c1, vec.c2
    data = {"family": args.family, "u": args.u, "pi": args.pi,
            "c1": str(c1), "c2": str(c2)}
    _emit(args, data, [f"family={args.family} u={args.u}", f"c1={c1} c2={c2}"])
    return 0


def cmd_identities(args) -> int:
    results = {name: modforms.verify_identity(name, args.upto)
               for name in modforms.IDENTITY_NAMES}
    n_pass = sum(results.values())
    data = {"upto": args.upto, "results": results,
            "summary": {"pass": n_pass, "fail": len(results) - n_pass}}
    lines = [f"{name}: {'pass' if ok else 'FAIL'}" for name, ok in results.items()]
    lines.append(f"{n_pass}/{len(results)} pass (to {args.upto} coefficients)")
    _emit(args, data, lines)
    return 0 if n_pass == len(results) else 1


def _scenario_overrides(args) -> dict:
    over = {}
    if args.p is not None:
        over["p_list"] = _parse_primes(args.p)
    if args.mmax is not None:
        over["m_max"] = args.mmax
    if args.smax is not None:
        over["s_max"] = args.smax
    if args.coeffs is not None:
        over["N"] = args.coeffs
    if args.observe:
        over["observe"] = True
    return over


def _run_one_scenario(name: str, overrides: dict) -> asdcheck.CongruenceReport:
    import inspect

    fn = asdcheck._REGISTRY[name]
    sig = inspect.signature(fn)
    has_var_kw = any(p.kind == inspect.Parameter.VAR_KEYWORD
                     for p in sig.parameters.values())
    if not has_var_kw:
        unknown = set(overrides) - set(sig.parameters)
        if unknown:
            raise UsageError(
                f"scenario {name} does not accept {', '.join(sorted(unknown))}")
    return asdcheck.scenario(name, **overrides)


def cmd_scenario(args) -> int:
    names = asdcheck.scenario_names() if args.name == "all" else [args.name]
    for name in names:
        if name not in asdcheck._REGISTRY:
            raise UsageError(f"unknown scenario {name!r}; known: "
                             + ", ".join(asdcheck.scenario_names()))
    overrides = _scenario_overrides(args)
    if args.jobs > 1 and len(names) > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            futures = {name: pool.submit(_run_one_scenario, name, overrides)
                       for name in names}
        reports = [futures[name].result() for name in names]
    else:
        reports = [_run_one_scenario(name, overrides) for name in names]
    all_ok = True
    for rep in reports:
        data = rep.to_dict()
        lines = [f"scenario {data['scenario']}: "
                 f"pass={data['summary']['pass']} fail={data['summary']['fail']} "
                 f"skip={data['summary']['skip']}"]
        for c in data["checks"]:
            if not c["pass"] or args.verbose:
                tag = " (observation)" if c.get("observation") else ""
                part = f" part={c['part']}" if "part" in c else ""
                lines.append(
                    f"  p={c['p']}{part} m={c['m']} s={c['s']} "
                    f"required={c['required']} achieved={c['achieved']} "
                    f"{'pass' if c['pass'] else 'FAIL'}{tag}")
        for s in data["skipped"]:
            lines.append(f"  skip p={s['p']}: {s['reason']}")
        _emit(args, data, lines)
        all_ok = all_ok and rep.all_pass
    return 0 if all_ok else 1


def cmd_picheck(args) -> int:
    import mpmath as mp

    u = _parse_exact(args.u)
    c1 = _parse_exact(args.c1)
    c2 = _parse_exact(args.c2)
    a, lam, total = elliptic.ramanujan_pi(u, c1, c2, args.k)
    data = {"u": args.u, "c1": str(c1), "c2": str(c2), "k": args.k,
            "a": str(a), "lambda": str(lam),
            "partial_sum": mp.nstr(total, 30)}
    lines = [f"u={args.u} c1={c1} c2={c2} K={args.k}",
             f"a={a} lambda={lam}",
             f"partial_sum={mp.nstr(total, 30)}"]
    if args.target is not None:
        import sympy as sp

        with mp.workdps(40):
            target = mp.mpf(str(sp.N(sp.sympify(args.target), 40)))
            err = abs(total - target)
        data["target"] = args.target
        data["abs_error"] = mp.nstr(err, 10)
        lines.append(f"target={args.target} abs_error={mp.nstr(err, 10)}")
    _emit(args, data, lines)
    return 0


# ---------------------------------------------------------------------------
# argument parser
# ---------------------------------------------------------------------------


def _add_output_flags(sub):
    sub.add_argument("--json", action="store_true", help="emit the JSON report")
    sub.add_argument("--cache", default=None, metavar="DIR",
                     help="coefficient cache directory (or env ASDLAB_CACHE)")


def _add_curve_flags(sub):
    sub.add_argument("--family", choices=_FAMILIES, default="thm1.6")
    sub.add_argument("--u", default=None, help="family parameter (exact)")
    sub.add_argument("--jval", default=None, help="j-value for family thm1.7")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="asdlab",
        description="Exact congruence checks on modular form expansions.")
    sp = ap.add_subparsers(dest="command", required=True)

    p = sp.add_parser("expand", help="print an exact q-expansion")
    p.add_argument("form", help="form id, e.g. theta2, C4, h2, lambda")
    p.add_argument("--n", "--coeffs", dest="n", type=int, default=20,
                   help="highest index to expand to")
    p.add_argument("--u", default=None)
    p.add_argument("--c1", default=None)
    p.add_argument("--c2", default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--jval", default=None)
    _add_output_flags(p)
    p.set_defaults(fn=cmd_expand)

    p = sp.add_parser("count", help="point count over F_p or F_{p^r}")
    _add_curve_flags(p)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--r", type=int, default=1)
    _add_output_flags(p)
    p.set_defaults(fn=cmd_count)

    p = sp.add_parser("unitroot", help="p-adic unit root of T^2 - a_p T + p")
    _add_curve_flags(p)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--precision", type=int, default=12,
                   help="p-adic digits carried")
    _add_output_flags(p)
    p.set_defaults(fn=cmd_unitroot)

    p = sp.add_parser("eigenbasis", help="CM eigenbasis coefficients (c1, c2)")
    _add_curve_flags(p)
    p.add_argument("--pi", default=None,
                   help="CM generator, e.g. '2*sqrt(-1)' (optional for thm1.6)")
    _add_output_flags(p)
    p.set_defaults(fn=cmd_eigenbasis)

    p = sp.add_parser("identities", help="verify the exact series identities")
    p.add_argument("--upto", type=int, default=200)
    _add_output_flags(p)
    p.set_defaults(fn=cmd_identities)

    p = sp.add_parser("scenario", help="run a congruence scenario (or 'all')")
    p.add_argument("name")
    p.add_argument("--p", default=None, help="comma-separated prime list")
    p.add_argument("--mmax", type=int, default=None)
    p.add_argument("--smax", type=int, default=None)
    p.add_argument("--coeffs", type=int, default=None, metavar="N",
                   help="series truncation override")
    p.add_argument("--precision", type=int, default=None,
                   help="accepted for symmetry; scenarios carry their own guard")
    p.add_argument("--observe", action="store_true",
                   help="record mismatches without failing")
    p.add_argument("--verbose", action="store_true",
                   help="list every check, not just failures")
    p.add_argument("--jobs", type=int, default=1,
                   help="scenario-level thread fan-out")
    _add_output_flags(p)
    p.set_defaults(fn=cmd_scenario)

    p = sp.add_parser("picheck", help="partial sums of the 1/pi series")
    p.add_argument("--u", required=True)
    p.add_argument("--c1", default="1")
    p.add_argument("--c2", required=True)
    p.add_argument("--k", type=int, default=40, help="number of terms")
    p.add_argument("--target", default=None,
                   help="exact expression to compare the sum against")
    _add_output_flags(p)
    p.set_defaults(fn=cmd_picheck)

    return ap


_COMPUTATION_ERRORS = (
    elliptic.SingularCurve, elliptic.BadReduction, elliptic.NonIntegralModel,
    elliptic.InvalidKernel, elliptic.NoKernelFound, elliptic.NotAnEndomorphism,
    elliptic.RepeatedEigenvalues, elliptic.NotNearInteger,
    elliptic.DivergentParameter,
    asdcheck.InsufficientCoefficients, asdcheck.NonIntegralAtP,
    asdcheck.ConfigurationError, asdcheck.FitError,
    exactnum.NonResidue, exactnum.SupersingularInput, exactnum.NoSolution,
    modforms.PoleAtCuspParameter, modforms.SingularJ,
    ArithmeticError, KeyError,
)


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except UsageError as exc:
        print(json.dumps({"error": "usage", "message": str(exc)}), file=sys.stderr)
        return 2
    except _COMPUTATION_ERRORS as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
