"""Command-line front end.

Subcommands: ``eval``, ``spectrum``, ``verify``, ``classify``, ``resolve``.
Tables are CSV (default) or JSON; every number is written with 17
significant digits.  Exit codes: 0 success, 2 input error, 3 numerical
failure, 4 verification failure.
"""

from __future__ import annotations

import argparse
import cmath
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from .errors import ExtcalcError
from .herglotz import HerglotzEvaluator, boundary_density, eval_M, eval_s, eval_s_by_ratio
from .measure import (SURROGATE_TAG, Measure, default_quad_tol, load_measure, random_atomic_measure)
from .model import ModelVector, deficiency_element, load_vector
from .resolvent import (Extension, apply_resolvent, cal_M_via_resolvent, deficiency_norm, krein_p,
                        resolvent_residual)
from .spectral import SearchRegion, classify_spectral_point, find_eigenvalues
from .triple import (DissipativeTriple, eval_cal_M, eval_S, load_triple, parse_complex, range_disk,
                     verify_linear_relation)

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_VERIFY = 0, 2, 3, 4

COLUMNS = ("re_z", "im_z", "re_v", "im_v", "abs_v", "arg_v", "error")
FUNCTIONS = ("M", "s", "S", "calM", "p")
SUITES = ("cayley", "dissipative_wt", "linear_relation", "resolvent", "disk", "density", "norms")

SUITE_TOL = {
    "cayley": 1e-9,
    "dissipative_wt": 1e-9,
    "linear_relation": 1e-10,
    "resolvent": 1e-9,
    "disk": 1e-10,
    "density": 1e-6,
    "norms": 1e-12,
}


class _InputError(ExtcalcError, ValueError):
    pass


# ---------------------------------------------------------------------------
# output


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def _json(obj, indent=0) -> str:
    """JSON text with floats at 17 significant digits (non-finite as null)."""
    pad, inner = "  " * indent, "  " * (indent + 1)
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format(float(obj), ".17g") if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        import json
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{_json(str(k))}: {_json(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(_json(v) for v in obj) + "]"
        return "[\n" + ",\n".join(inner + _json(v, indent + 1) for v in obj) + "\n" + pad + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _csv_field(x) -> str:
    text = _fmt(x)
    if any(c in text for c in ',"\n'):
        text = '"' + text.replace('"', '""') + '"'
    return text


def _emit(args, columns, rows, meta=None):
    """Write rows (dicts keyed by ``columns``) as CSV or JSON."""
    meta = dict(meta or {})
    if args.out == "json":
        doc = dict(meta)
        doc["columns"] = list(columns)
        doc["rows"] = [{c: r.get(c) for c in columns} for r in rows]
        text = _json(doc) + "\n"
    else:
        lines = [f"# {t}" for t in meta.get("tags", ())]
        lines.append(",".join(columns))
        lines += [",".join(_csv_field(r.get(c)) for c in columns) for r in rows]
        text = "\n".join(lines) + "\n"
    _write(args, text)


def _write(args, text):
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _value_row(z, v=None, error=None):
    row = {"re_z": z.real, "im_z": z.imag, "error": error}
    if v is not None:
        row.update(re_v=v.real, im_v=v.imag, abs_v=abs(v), arg_v=cmath.phase(v))
    return row


# ---------------------------------------------------------------------------
# input


def _floats(text, n, what):
    try:
        parts = [float(p) for p in text.split(",")]
    except ValueError:
        raise _InputError(f"{what}: expected {n} comma-separated numbers, got {text!r}") from None
    if len(parts) != n or not all(map(math.isfinite, parts)):
        raise _InputError(f"{what}: expected {n} finite comma-separated numbers, got {text!r}")
    return parts


def _grid(text):
    re0, re1, n, im0, im1, m = _floats(text, 6, "--grid")
    if n < 1 or m < 1 or n != int(n) or m != int(m):
        raise _InputError("--grid counts must be positive integers")
    return [complex(x, y) for y in np.linspace(im0, im1, int(m)) for x in np.linspace(re0, re1, int(n))]


def _load_measure(args) -> Measure:
    if args.triple:
        return load_triple(args.triple).measure
    if args.measure:
        return load_measure(args.measure)
    raise _InputError("provide --measure or --triple")


def _kappa(args, required=True):
    if args.kappa is not None:
        return parse_complex(args.kappa)
    if args.triple:
        return load_triple(args.triple).kappa
    if required:
        raise _InputError("this command needs --kappa or --triple")
    return None


def _load_triple(args) -> DissipativeTriple:
    mu = _load_measure(args)
    return DissipativeTriple(mu, _kappa(args))


# ---------------------------------------------------------------------------
# subcommands


def cmd_eval(args) -> int:
    mu = _load_measure(args)
    name = args.function
    h = HerglotzEvaluator(mu)
    if name in ("S", "calM"):
        t = DissipativeTriple(mu, _kappa(args))
        fn = (lambda z: eval_S(t, z)) if name == "S" else (lambda z: eval_cal_M(t, z))
    elif name == "p":
        ext = Extension(mu, _kappa(args))
        fn = lambda z: krein_p(ext, z).value
    elif name == "M":
        fn = lambda z: eval_M(h, z)
    else:
        fn = lambda z: eval_s(h, z)
    rows, code = [], EXIT_OK
    for z in _grid(args.grid):
        try:
            rows.append(_value_row(z, complex(fn(z))))
        except (ExtcalcError, ArithmeticError, ValueError) as exc:
            rows.append(_value_row(z, error=f"{type(exc).__name__}: {exc}"))
            code = max(code, EXIT_INPUT if isinstance(exc, ValueError) else EXIT_NUMERIC)
    _emit(args, COLUMNS, rows, {"function": name, "tags": list(mu.tags)})
    return code


def cmd_spectrum(args) -> int:
    t = _load_triple(args)
    re0, re1, im0, im1 = _floats(args.region, 4, "--region")
    region = SearchRegion(re0, re1, im0, im1, refine_tol=args.tol or 1e-10)
    res = find_eigenvalues(t, region)
    cols = ("re_z", "im_z", "abs_S", "multiplicity", "boundary_suspect")
    rows = [{"re_z": r.z.real, "im_z": r.z.imag, "abs_S": r.residual, "multiplicity": r.multiplicity,
             "boundary_suspect": r.boundary_suspect} for r in res.roots]
    for note in res.notes:
        print(f"note: {note}", file=sys.stderr)
    _emit(args, cols, rows, {"verdict": res.verdict, "winding": res.winding, "notes": list(res.notes),
                             "tags": list(t.tags)})
    return EXIT_OK


def cmd_classify(args) -> int:
    mu = _load_measure(args)
    if args.epsilons:
        grid = [float(e) for e in args.epsilons.split(",")]
        res = classify_spectral_point(mu, args.lambda0, grid)
    else:
        res = classify_spectral_point(mu, args.lambda0)
    cols = ("point", "verdict", "epsilon_found", "gap")
    row = {"point": res.point, "verdict": res.verdict, "epsilon_found": res.epsilon_found,
           "gap": res.gap}
    _emit(args, cols, [row], {"tags": list(mu.tags)})
    return EXIT_OK


def cmd_resolve(args) -> int:
    t = _load_triple(args)
    if args.z is None:
        raise _InputError("resolve needs --z")
    z = parse_complex(args.z)
    h = load_vector(args.vector, len(t.measure.atoms)) if args.vector else None
    if h is None:
        raise _InputError("resolve needs --vector")
    u = apply_resolvent(t, z, h)
    res = resolvent_residual(t, z, h, u)
    cols = ("location", "re_v", "im_v", "residual")
    rows = [{"location": x, "re_v": v.real, "im_v": v.imag, "residual": res}
            for x, v in zip(t.measure.locations, u.values)]
    _emit(args, cols, rows, {"z": [z.real, z.imag], "residual": res, "tags": list(t.tags)})
    return EXIT_OK


# ---------------------------------------------------------------------------
# verification suites


@dataclass
class VerifyReport:
    suite: str
    tolerance: float
    records: list = field(default_factory=list)
    tags: tuple = ()

    @property
    def cases(self) -> int:
        return len(self.records)

    @property
    def max_residual(self) -> float:
        vals = [r["residual"] for r in self.records]
        if not vals:
            return 0.0
        return math.inf if any(v is None or not math.isfinite(v) for v in vals) else max(vals)

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tolerance

    def add(self, residual, **info):
        self.records.append(dict(info, residual=residual))

    def to_dict(self):
        return {"suite": self.suite, "cases": self.cases, "max_residual": self.max_residual,
                "tolerance": self.tolerance, "passed": self.passed, "tags": list(self.tags),
                "records": self.records}


def _random_upper(rng, n):
    re = rng.uniform(-6.0, 6.0, n)
    im = 10.0 ** rng.uniform(-2.0, 1.0, n)
    return [complex(a, b) for a, b in zip(re, im)]


def _random_kappa(rng):
    return complex(0.95 * math.sqrt(rng.uniform()) * cmath.exp(2j * math.pi * rng.uniform()))


def _guard(report, fn, **info):
    try:
        report.add(float(fn()), **info)
    except (ExtcalcError, ArithmeticError) as exc:
        report.add(None, error=f"{type(exc).__name__}: {exc}", **info)


def run_suite(suite: str, rng: np.random.Generator, samples: int,
              mu: Measure | None = None, kappa: complex | None = None,
              tol: float | None = None) -> VerifyReport:
    """Run one invariant suite; without ``mu``, random atomic measures are drawn."""
    if suite not in SUITES:
        raise _InputError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    report = VerifyReport(suite, SUITE_TOL[suite] if tol is None else tol,
                          tags=mu.tags if mu is not None else (SURROGATE_TAG,))
    n_measures = 1 if mu is not None else max(1, min(10, samples // 10))
    per = max(1, math.ceil(samples / n_measures))
    for j in range(n_measures):
        m = mu if mu is not None else random_atomic_measure(rng)
        k = kappa if kappa is not None else _random_kappa(rng)
        pts = _random_upper(rng, per)
        if suite == "cayley":
            h = HerglotzEvaluator(m)
            for z in pts:
                _guard(report, lambda: abs(eval_s(h, z) - eval_s_by_ratio(h, z)), z=[z.real, z.imag])
        elif suite == "dissipative_wt":
            t = DissipativeTriple(m, k)
            for z in pts:
                _guard(report, lambda: abs(eval_cal_M(t, z) - cal_M_via_resolvent(t, z)),
                       z=[z.real, z.imag])
        elif suite == "linear_relation":
            t = DissipativeTriple(m, k)
            for z in pts:
                _guard(report, lambda: verify_linear_relation(t, z), z=[z.real, z.imag])
        elif suite == "resolvent":
            t = DissipativeTriple(m, k)
            n = len(m.atoms)
            for z in pts:
                z = z if rng.uniform() < 0.5 else z.conjugate()
                hv = ModelVector(rng.normal(size=n) + 1j * rng.normal(size=n))
                _guard(report, lambda: resolvent_residual(t, z, hv), z=[z.real, z.imag])
        elif suite == "disk":
            t = DissipativeTriple(m, k)
            disk = range_disk(k)
            lo, hi = disk.im_bounds

            def violation(z):
                w = eval_cal_M(t, z)
                return max(0.0, -disk.margin(w), lo - w.imag, w.imag - hi)
            for z in pts:
                _guard(report, lambda: violation(z), z=[z.real, z.imag])
        elif suite == "density":
            t = DissipativeTriple(m, k)
            a = abs(k)
            lo, hi = (1 - a) / (1 + a) / math.pi, (1 + a) / (1 - a) / math.pi
            support = m.locations if m.atoms else np.array([0.0])
            for lam in rng.uniform(support.min() - 1.0, support.max() + 1.0, per):
                def violation(lam=lam):
                    f = boundary_density(t.cal_M, lam)
                    return max(0.0, lo - f, f - hi)
                _guard(report, violation, lam=float(lam))
        elif suite == "norms":
            for z in pts:
                if m.is_atomic:
                    _guard(report, lambda: abs(deficiency_norm(m, z) - deficiency_element(m, z).norm(m)),
                           z=[z.real, z.imag], check="norm")
            _guard(report, lambda: abs(deficiency_norm(m, 1j) ** 2 - m.normalization_integral()),
                   z=[0.0, 1.0], check="g_i")
        if mu is not None:
            break
    return report


def cmd_verify(args) -> int:
    rng = np.random.default_rng(args.seed)
    mu = kappa = None
    if args.measure or args.triple:
        mu = _load_measure(args)
        kappa = _kappa(args, required=False)
    report = run_suite(args.suite, rng, args.samples, mu, kappa, args.tol)
    _write(args, _json(report.to_dict()) + "\n")
    return EXIT_OK if report.passed else EXIT_VERIFY


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="extcalc",
        description="Weyl-Titchmarsh, Livšic and characteristic functions of rank-one "
                    "dissipative extensions.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, kappa=True):
        p.add_argument("--measure", metavar="FILE", help="measure description (JSON)")
        p.add_argument("--triple", metavar="FILE", help="triple description (JSON)")
        if kappa:
            p.add_argument("--kappa", metavar="C", help='von Neumann parameter, e.g. "0.5-0.25i"')
        p.add_argument("--out", choices=("csv", "json"), default="csv")
        p.add_argument("--output", metavar="FILE", help="write to FILE instead of stdout")

    p = sub.add_parser("eval", help="evaluate M, s, S, calM or p on a grid")
    common(p)
    p.add_argument("--function", choices=FUNCTIONS, required=True)
    p.add_argument("--grid", required=True, metavar="re0,re1,n,im0,im1,m")
    p.set_defaults(run=cmd_eval)

    p = sub.add_parser("spectrum", help="eigenvalues of the dissipative extension in a rectangle")
    common(p)
    p.add_argument("--region", required=True, metavar="re0,re1,im0,im1")
    p.add_argument("--tol", type=float, help="residual bound |S(z0)| for refined roots")
    p.set_defaults(run=cmd_spectrum)

    p = sub.add_parser("verify", help="run an invariant suite and report the worst residual")
    common(p)
    p.add_argument("--suite", choices=SUITES, required=True)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, help="override the suite tolerance")
    p.set_defaults(run=cmd_verify)

    p = sub.add_parser("classify", help="quasi-regular or spectral-core point")
    common(p, kappa=False)
    p.add_argument("--lambda0", type=float, required=True)
    p.add_argument("--epsilons", metavar="e1,e2,...", help="epsilon grid (default 2^-k, k=0..20)")
    p.set_defaults(run=cmd_classify)

    p = sub.add_parser("resolve", help="apply the resolvent of the extension to a vector")
    common(p)
    p.add_argument("--z", required=True, metavar="C")
    p.add_argument("--vector", required=True, metavar="FILE")
    p.set_defaults(run=cmd_resolve)
    return parser


_NUMERIC_FLAGS = ("--region", "--grid", "--kappa", "--z", "--lambda0", "--epsilons")


def _glue_negative_values(argv):
    # "--region -2,2,0.1,3" would otherwise read "-2,2,0.1,3" as an option
    out, it = [], iter(argv)
    for tok in it:
        if tok in _NUMERIC_FLAGS:
            nxt = next(it, None)
            if nxt is None:
                out.append(tok)
            elif nxt.startswith("-") and len(nxt) > 1 and (nxt[1].isdigit() or nxt[1] in ".i"):
                out.append(f"{tok}={nxt}")
            else:
                out.extend([tok, nxt])
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(_glue_negative_values(sys.argv[1:] if argv is None else list(argv)))
    try:
        default_quad_tol()  # validate EXTCALC_QUAD_TOL early
        return args.run(args)
    except ValueError as exc:
        print(f"extcalc: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ArithmeticError as exc:
        print(f"extcalc: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"extcalc: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
