"""Command-line front end.

Every run prints one JSON report (or writes it to ``--output``).  Exit status
is 0 on success, 1 when a verification fails and 2 on bad input.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import asymptotic, extcore
from .extcore import (
    DoubleMetric,
    FiniteSpace,
    MetricError,
    MetricViolation,
    compose,
    matrix_to_json,
    triangle_violations,
)
from .repalgebra import DecompositionError, build_rep, decompose
from .rook import rook_monoid, rook_order, table_to_rook, is_star_isomorphism
from .semigroup import (
    canonical_class,
    enumerate_semigroup,
    hasse_dot,
    idempotent_dot,
    natural_order,
    verify_inverse_semigroup,
)

MAX_POINTS = 512
MAX_COMPONENTS = 4
MAX_SIZE = 1024

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2

CLAIMS = {
    "validate": "a cross matrix defines a metric on the double iff it is positive and satisfies the four triangle families",
    "compose": "composition of metrics on doubles is the min-plus product of cross matrices",
    "enumerate": "quasi-isometry classes of metrics on the double of a finite extended space form an inverse *-semigroup isomorphic to the rook monoid on its components",
    "order": "the natural order on idempotent classes (e <= f iff fe = e)",
    "repr": "the left regular representation by partial isometries generates a finite-dimensional algebra that splits into matrix blocks",
    "fit": "two metric families are quasi-isometric iff fitted constants stay bounded as the window grows",
    "criterion": "a selfadjoint d is idempotent iff -alpha + d(x,x')/beta <= d(x,X') for some alpha, beta",
    "separation": "subsets separated linearly away from a base point have product equivalent to the zero class",
    "demo": "worked examples on Z",
}


class InputError(Exception):
    """Bad or oversized input (exit status 2)."""


# ---------------------------------------------------------------------------
# input


def _load(path: str):
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise InputError(f"no such file: {path}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON in {path}: {exc}") from exc


def _check_keys(obj, allowed, what):
    if not isinstance(obj, dict):
        raise InputError(f"{what} must be a JSON object")
    extra = set(obj) - set(allowed)
    if extra:
        raise InputError(f"unknown keys in {what}: {', '.join(sorted(extra))}")


def _space(obj, what, extra_keys=()) -> FiniteSpace:
    _check_keys(obj, {"n", "dist", *extra_keys}, what)
    if "dist" not in obj:
        raise InputError(f"{what} has no 'dist'")
    dist = obj["dist"]
    if not isinstance(dist, list) or len(dist) > MAX_POINTS:
        raise InputError(f"{what}: distance matrix must be a list of at most {MAX_POINTS} rows")
    return FiniteSpace.from_json(obj)


def _metric(path: str) -> DoubleMetric:
    obj = _load(path)
    space = _space(obj, path, ("cross",))
    if "cross" not in obj:
        raise InputError(f"{path} has no 'cross'")
    return extcore.validate_double(space, obj["cross"])


def _finite_space(path: str) -> FiniteSpace:
    space = _space(_load(path), path)
    if space.k > MAX_COMPONENTS:
        raise InputError(f"{space.k} components; at most {MAX_COMPONENTS} supported")
    return space


def _cross(path: str, space: FiniteSpace | None = None):
    obj = _load(path)
    if isinstance(obj, dict):
        _check_keys(obj, {"n", "dist", "cross"}, path)
        if space is not None and "dist" in obj and not _space(obj, path, ("cross",)).same_as(space):
            raise InputError(f"{path}: 'dist' does not match the given space")
        obj = obj.get("cross")
    if not isinstance(obj, list):
        raise InputError(f"{path}: expected a cross matrix")
    return obj


# ---------------------------------------------------------------------------
# commands


def cmd_validate(args):
    space = _space(_load(args.space), args.space)
    cross = extcore.ext_matrix(_cross(args.cross, space))
    if cross.shape != (space.n, space.n):
        raise InputError(f"cross matrix has shape {cross.shape}, space has {space.n} points")
    try:
        d = extcore.validate_double(space, cross)
    except MetricViolation as exc:
        viol = sorted(exc.violations, key=lambda v: (v.family, v.i, v.j, v.k))
        return EXIT_FAIL, {
            "valid": False,
            "violations": [v.to_json() for v in viol],
        }
    except MetricError as exc:
        return EXIT_FAIL, {"valid": False, "violations": [], "error": str(exc)}
    assert not triangle_violations(space, space, d.cross)
    return EXIT_OK, {"valid": True, "pattern": canonical_class(d).key}


def cmd_compose(args):
    a, b = _metric(args.a), _metric(args.b)
    if not a.space.same_as(b.space):
        raise InputError("metrics live on different spaces")
    c = compose(a, b)
    return EXIT_OK, {
        "order": "a∘b: b is applied first",
        "cross": matrix_to_json(c.cross),
        "pattern": canonical_class(c).key,
        "valid": c.is_valid(),
    }


def _table(path):
    space = _finite_space(path)
    t = enumerate_semigroup(space)
    return space, t


def cmd_enumerate(args):
    space, t = _table(args.space)
    rep = verify_inverse_semigroup(t)
    els, mul, star = rook_monoid(space.k)
    rook_ok = is_star_isomorphism(t, table_to_rook(t), mul, star)
    if args.dot:
        Path(args.dot).write_text(hasse_dot(t))
    res = {
        "classes": len(t.patterns),
        "rook_order": rook_order(space.k),
        "table": t.to_json(),
        "idempotents": t.idempotents(),
        "checks": rep.checks,
        "failures": rep.failures,
        "rook_isomorphic": rook_ok,
    }
    return (EXIT_OK if rep.ok and rook_ok else EXIT_FAIL), res


def cmd_order(args):
    _, t = _table(args.space)
    idem = t.idempotents()
    below = [[e, f] for e in idem for f in idem if e != f and natural_order(t, e, f)]
    if args.dot:
        Path(args.dot).write_text(idempotent_dot(t))
    return EXIT_OK, {
        "elements": [p.key for p in t.patterns],
        "idempotents": idem,
        "below": below,
        "unit": t.unit,
        "zero": t.zero,
    }


def cmd_repr(args):
    _, t = _table(args.space)
    try:
        summary = decompose(build_rep(t), seed=args.seed)
    except DecompositionError as exc:
        return EXIT_FAIL, {"verified": False, "error": str(exc)}
    res = summary.to_json()
    res["violations"] = summary.violations
    return (EXIT_OK if summary.verified else EXIT_FAIL), res


def _config(args, allowed):
    if not getattr(args, "config", None):
        return {}
    obj = _load(args.config)
    _check_keys(obj, allowed, args.config)
    return obj


def _sizes(values):
    sizes = [int(s) for s in values]
    if not sizes or any(s < 2 or s > MAX_SIZE for s in sizes) or sizes != sorted(set(sizes)):
        raise InputError(f"sizes must be increasing integers in [2, {MAX_SIZE}]")
    return sizes


def _betas(values):
    betas = [float(b) for b in values]
    if not betas or any(b < 1 for b in betas):
        raise InputError("betas must be >= 1")
    return [int(b) if b.is_integer() else b for b in betas]


def _family(name, reg, fraction=None):
    try:
        fam = asymptotic.get_family(name, reg)
    except KeyError as exc:
        raise InputError(str(exc.args[0])) from exc
    return fam.with_inner_fraction(fraction) if fraction is not None else fam


def _series_opts(args, allowed):
    cfg = _config(args, allowed)
    sizes = _sizes(cfg.get("sizes", args.sizes))
    betas = _betas(cfg.get("betas", args.betas))
    frac = cfg.get("inner_fraction")
    if frac is not None and not (isinstance(frac, (int, float)) and 0 < frac <= 1):
        raise InputError("inner_fraction must lie in (0, 1]")
    return cfg, sizes, betas, frac


def cmd_fit(args):
    cfg, sizes, betas, frac = _series_opts(args, {"family", "against", "sizes", "betas", "inner_fraction"})
    reg = asymptotic.builtin_families()
    name = cfg.get("family", args.family)
    if not name:
        raise InputError("fit needs --family")
    f1 = _family(name, reg, frac)
    f2 = _family(cfg.get("against", args.against), reg, frac)
    series = asymptotic.fit_series(f1, f2, sizes, betas)
    if args.csv:
        Path(args.csv).write_text(asymptotic.series_csv(series))
    return EXIT_OK, series.to_json()


def cmd_criterion(args):
    cfg, sizes, betas, frac = _series_opts(args, {"family", "sizes", "betas", "inner_fraction"})
    reg = asymptotic.builtin_families()
    name = cfg.get("family", args.family)
    if not name:
        raise InputError("criterion needs --family")
    fam = _family(name, reg, frac)
    sa = asymptotic.fit_series(fam, asymptotic.adjoint_family(fam), sizes, betas)
    if sa.verdict != asymptotic.STABLE:
        return EXIT_FAIL, {"selfadjoint": sa.to_json(), "error": "family is not selfadjoint"}
    series = asymptotic.criterion_series(fam, sizes, betas, adjoint_check=sa)
    if args.csv:
        Path(args.csv).write_text(asymptotic.series_csv(series))
    return EXIT_OK, {"selfadjoint": sa.to_json(), "criterion": series.to_json()}


def cmd_separation(args):
    sizes = _sizes(args.sizes)
    if not 0 < args.angle <= 180:
        raise InputError("angle must lie in (0, 180] degrees")
    if args.beta < 1:
        raise InputError("beta must be >= 1")
    rep = asymptotic.separation_check(args.angle, args.beta, sizes)
    return (EXIT_FAIL if rep.verdict == "fails" else EXIT_OK), rep.to_json()


DEMOS = ("partial-isometry", "neighborhood", "idempotent", "two-rays")


def cmd_demo(args):
    sizes = _sizes(args.sizes)
    betas = _betas(args.betas)
    reg = asymptotic.builtin_families()
    if args.name == "partial-isometry":
        rep = asymptotic.partial_isometry_demo(sizes, betas)
        return (EXIT_OK if rep.ok else EXIT_FAIL), rep.to_json()
    if args.name == "neighborhood":
        near = asymptotic.neighborhood_check(reg["even"], reg["odd"], sizes, betas)
        far = asymptotic.neighborhood_check(reg["nonneg"], reg["nonpos"], sizes, betas)
        ok = near.agrees and far.agrees
        return (EXIT_OK if ok else EXIT_FAIL), {"even_odd": near.to_json(), "nonneg_nonpos": far.to_json()}
    if args.name == "idempotent":
        crit = asymptotic.criterion_series(reg["idem"], sizes, betas)
        square = asymptotic.fit_series(reg["idem2"], reg["idem"], sizes, betas)
        unit = asymptotic.fit_series(reg["idem"], reg["unit"], sizes, betas)
        return EXIT_OK, {"criterion": crit.to_json(), "square": square.to_json(), "vs_unit": unit.to_json()}
    fam = reg["two_rays"]
    sa = asymptotic.fit_series(fam, asymptotic.adjoint_family(fam), sizes, betas)
    crit = asymptotic.criterion_series(fam, sizes, betas, adjoint_check=sa)
    return EXIT_OK, {"selfadjoint": sa.to_json(), "criterion": crit.to_json()}


# ---------------------------------------------------------------------------
# driver


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="metricsemigroup", description=__doc__.splitlines()[0])
    p.add_argument("--threads", type=int, default=1, help="worker threads for float kernels (0 = auto)")
    p.add_argument("--output", "-o", help="write the report here instead of stdout")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", help="check a cross matrix against a space")
    s.add_argument("space")
    s.add_argument("cross")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("compose", help="compose two double metrics (b first)")
    s.add_argument("a")
    s.add_argument("b")
    s.set_defaults(func=cmd_compose)

    for name, func, helptext in (
        ("enumerate", cmd_enumerate, "all classes and their multiplication table"),
        ("order", cmd_order, "natural order on idempotents"),
    ):
        s = sub.add_parser(name, help=helptext)
        s.add_argument("space")
        s.add_argument("--dot", help="write a Graphviz diagram here")
        s.set_defaults(func=func)

    s = sub.add_parser("repr", help="block decomposition of the regular representation")
    s.add_argument("space")
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_repr)

    sizes = [str(n) for n in asymptotic.DEFAULT_SIZES]
    betas = [str(b) for b in asymptotic.DEFAULT_BETAS]
    for name, func in (("fit", cmd_fit), ("criterion", cmd_criterion)):
        s = sub.add_parser(name, help=f"{name} series on a built-in family")
        s.add_argument("--family")
        if name == "fit":
            s.add_argument("--against", default="unit")
        s.add_argument("--sizes", nargs="+", default=sizes)
        s.add_argument("--betas", nargs="+", default=betas)
        s.add_argument("--config", help="JSON file with family/sizes/betas/inner_fraction")
        s.add_argument("--csv", help="also write size,beta,alpha,verdict rows here")
        s.set_defaults(func=func)

    s = sub.add_parser("separation", help="two rays in the plane")
    s.add_argument("--angle", type=float, required=True)
    s.add_argument("--beta", type=float, default=3.0)
    s.add_argument("--sizes", nargs="+", default=["16", "32", "64", "128"])
    s.set_defaults(func=cmd_separation)

    s = sub.add_parser("demo", help="worked examples: " + ", ".join(DEMOS))
    s.add_argument("name", choices=DEMOS)
    s.add_argument("--sizes", nargs="+", default=sizes)
    s.add_argument("--betas", nargs="+", default=betas)
    s.set_defaults(func=cmd_demo)
    return p


def render(report: dict) -> str:
    return json.dumps(report, indent=2, ensure_ascii=True) + "\n"


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        extcore.set_threads(args.threads)
        status, result = args.func(args)
    except (InputError, MetricError, ValueError) as exc:
        status, result = EXIT_INPUT, {"error": str(exc)}
    report = {
        "command": args.command,
        "claim": CLAIMS[args.command],
        "status": {EXIT_OK: "ok", EXIT_FAIL: "verification-failed", EXIT_INPUT: "input-error"}[status],
        "result": result,
    }
    text = render(report)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    raise SystemExit(main())
