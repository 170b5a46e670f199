"""Command-line entry point.

Every report is a JSON object holding the command, a config echo, the
package version, an optional timestamp and the result.  ``approx-recip``
can emit CSV instead.  Exit codes: 0 success, 1 domain or validation
error (including non-finite output), 2 parse, I/O or usage error.
Vertex, variable and literal numbers on the command line and in reports
are 1-based.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import logging
import math
import os
import sys
from typing import Sequence

import numpy as np

from . import __version__
from .instances import CnfFormula, Graph, InteriorPoint, ParseError, ValidationError, read_cnf, read_graph

log = logging.getLogger("cycleagg")

SEED_ENV = "CYCLEAGG_SEED"


class NonFiniteError(ValueError):
    pass


def cplx(v) -> dict:
    v = complex(v)
    return {"re": v.real, "im": v.imag}


def parse_complex(text: str) -> complex:
    """``re,im`` or a single real number."""
    parts = text.split(",")
    try:
        if len(parts) == 1:
            return complex(float(parts[0]), 0.0)
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise argparse.ArgumentTypeError(f"expected 're,im' or a real number, got {text!r}")


def parse_exp_bound(text: str) -> float:
    """``e-30`` means exp(-30); plain numbers are taken literally."""
    t = text.strip()
    try:
        if t.startswith("e"):
            return math.exp(float(t[1:]))
        return float(t)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad bound {text!r}") from None


def parse_sweep(text: str) -> tuple[float, float]:
    lo, sep, hi = text.partition(":")
    if not sep:
        raise argparse.ArgumentTypeError("sweep must look like LO:HI, e.g. e-30:e1")
    return parse_exp_bound(lo), parse_exp_bound(hi)


def _point(spec: str, n: int) -> np.ndarray:
    """``zero`` or a file with n numbers (whitespace/comma separated or a JSON list)."""
    if spec == "zero":
        return np.zeros(n)
    with open(spec) as fh:
        text = fh.read()
    try:
        vals = json.loads(text)
    except json.JSONDecodeError:
        try:
            vals = [float(t) for t in text.replace(",", " ").split()]
        except ValueError as exc:
            raise ParseError(f"{spec}: {exc}") from None
    if not isinstance(vals, list) or len(vals) != n:
        raise ValidationError(f"{spec}: expected {n} coordinates")
    return np.asarray(InteriorPoint(tuple(float(v) for v in vals)))


def _check_finite(obj, path="result"):
    if isinstance(obj, float):
        if not math.isfinite(obj):
            raise NonFiniteError(f"non-finite value at {path}")
    elif isinstance(obj, dict):
        for k, v in obj.items():
            _check_finite(v, f"{path}.{k}")
    elif isinstance(obj, (list, tuple)):
        for i, v in enumerate(obj):
            _check_finite(v, f"{path}[{i}]")


def _config(args: argparse.Namespace) -> dict:
    skip = {"func", "no_timestamp", "verbose"}
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in skip:
            continue
        if isinstance(v, complex):
            v = cplx(v)
        elif isinstance(v, list):
            v = [cplx(x) if isinstance(x, complex) else x for x in v]
        elif isinstance(v, tuple):
            v = list(v)
        out[k] = v
    return out


def _envelope(args, result) -> dict:
    d = {"command": args.command, "version": __version__, "config": _config(args)}
    if not args.no_timestamp:
        d["timestamp"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    d["result"] = result
    return d


def _emit(args, text: str) -> None:
    if args.out and args.out not in ("json", "csv"):
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_json(args, result) -> None:
    _check_finite(result)
    _emit(args, json.dumps(_envelope(args, result), indent=2, sort_keys=False) + "\n")


# --- subcommands ----------------------------------------------------------------------

def cmd_mis_potential(args) -> int:
    from .walkagg import walk_potential

    g = read_graph(args.graph)
    w = _point(args.w, g.n)
    deriv = "hessian" if args.hess else "gradient" if args.grad else "none"
    reports = [walk_potential(g, z, w, deriv, method=args.method).to_json() for z in args.z]
    _emit_json(args, {"n": g.n, "m": g.m, "evaluations": reports})
    return 0


def cmd_sat_potential(args) -> int:
    from .mobiusagg import lp_sufficiency_flag, mobius_report

    f = read_cnf(args.formula)
    x = _point(args.x, f.n)
    evals = []
    for z in args.z:
        if f.m == 0:
            evals.append({"z": cplx(z), "phi": cplx(0)})
            continue
        rep = mobius_report(f, z, x, args.orientation)
        evals.append({"z": cplx(z), "phi": cplx(rep.phi), "kmax": rep.kmax, "matrix_products": rep.n_matmul})
    _emit_json(args, {
        "n": f.n, "m": f.m, "matrix_dim": 2 * f.n,
        "lp_sufficiency_flag": lp_sufficiency_flag(f, args.orientation),
        "evaluations": evals,
    })
    return 0


def cmd_verify_cert(args) -> int:
    from .proofkernel import SosCertificate, motzkin_certificate, robinson_certificate, verify_sos_certificate

    builtin = {"motzkin": motzkin_certificate, "robinson": robinson_certificate}
    if args.certificate in builtin and not os.path.exists(args.certificate):
        cert = builtin[args.certificate]()
    else:
        try:
            cert = SosCertificate.load(args.certificate)
        except (json.JSONDecodeError, KeyError) as exc:
            raise ParseError(f"{args.certificate}: malformed certificate ({exc})") from None
    rep = verify_sos_certificate(cert, args.strategy, tol=args.tol, samples=args.samples, seed=args.seed)
    out = rep.to_json()
    out["name"] = cert.name
    _emit_json(args, out)
    return 0


def cmd_approx_recip(args) -> int:
    from .expsup import reciprocal_superposition, relative_error_sweep

    sup = reciprocal_superposition(args.a, args.m, args.M)
    lo, hi = args.sweep
    s, approx, exact, rel = relative_error_sweep(sup, lo, hi, args.points)
    fmt = args.format or (args.out if args.out in ("json", "csv") else "csv")
    if fmt == "csv":
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["s", "approx", "exact", "rel_err"])
        for row in zip(s, approx, exact, rel):
            if not all(math.isfinite(v) for v in row):
                raise NonFiniteError("non-finite value in sweep")
            wr.writerow([repr(float(v)) for v in row])
        _emit(args, buf.getvalue())
    else:
        _emit_json(args, {
            "terms": len(sup),
            "coefficients": list(sup.coeffs),
            "rates": list(sup.rates),
            "max_rel_err": float(rel.max()),
            "sweep": [{"s": float(a), "approx": float(b), "exact": float(c), "rel_err": float(d)}
                      for a, b, c, d in zip(s, approx, exact, rel)],
        })
    return 0


def cmd_oracle(args) -> int:
    from . import oracles

    sub = args.oracle
    if sub == "walks":
        g = read_graph(args.graph)
        w = _point(args.w, g.n)
        recs = oracles.enumerate_walks(g, args.z, w, args.length, args.i - 1 if args.i else None,
                                       args.j - 1 if args.j else None, closed=args.closed)
        res = {"count": len(recs), "sum": cplx(oracles.walk_sum(recs)),
               "walks": [{"vertices": [v + 1 for v in r.vertices], "value": cplx(r.value)} for r in recs]}
    elif sub == "cycles":
        g = read_graph(args.graph)
        cyc = oracles.enumerate_odd_cycles(g, args.max_len)
        res = {"count": len(cyc), "cycles": [[v + 1 for v in c] for c in cyc]}
    elif sub == "mobius":
        f = read_cnf(args.formula)
        x = _point(args.x, f.n)
        res = {
            "printed": cplx(oracles.enumerate_mobius_walks(f, args.z, x, args.k_max, "printed", args.orientation)),
            "distinct": cplx(oracles.enumerate_mobius_walks(f, args.z, x, args.k_max, "distinct", args.orientation)),
        }
    elif sub == "assignments":
        f = read_cnf(args.formula)
        scan = oracles.enumerate_assignments(f)
        res = {"satisfiable": scan.satisfiable, "min_f": scan.min_f, "argmin": list(scan.argmin),
               "min_violated": scan.min_violated}
    elif sub == "sphere":
        pts = oracles.sphere_sample(args.dim, args.count, args.seed)
        res = {"points": pts.tolist()}
    else:  # pragma: no cover - argparse restricts choices
        raise ValueError(sub)
    _emit_json(args, res)
    return 0


def _parse_subdivision(items: Sequence[str]) -> dict[tuple[int, int], int]:
    out = {}
    for it in items:
        try:
            edge, length = it.split(":")
            i, j = (int(t) - 1 for t in edge.split("-"))
            out[(min(i, j), max(i, j))] = int(length)
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad subdivision {it!r}; expected I-J:LENGTH") from None
    return out


def cmd_lift_ineq(args) -> int:
    from .formulation import LinearInequality, SubdivisionMap, lift_inequality_by_subdivision, odd_cycle_inequality

    g = read_graph(args.graph)
    if args.cycle:
        ineq = odd_cycle_inequality([int(t) - 1 for t in args.cycle.split(",")], g)
    else:
        with open(args.ineq) as fh:
            try:
                ineq = LinearInequality.from_json(json.load(fh))
            except (json.JSONDecodeError, KeyError) as exc:
                raise ParseError(f"{args.ineq}: malformed inequality ({exc})") from None
    smap = SubdivisionMap.build(g, _parse_subdivision(args.subdivide))
    lifted = lift_inequality_by_subdivision(ineq, smap)
    g2 = smap.graph()
    _emit_json(args, {
        "base": ineq.to_json(),
        "lifted": lifted.to_json(),
        "graph": {"n": g2.n, "edges": [[i + 1, j + 1] for i, j in sorted(g2.edges)]},
    })
    return 0


def cmd_classify_chain(args) -> int:
    from .formulation import (TAUTOLOGY, ChainKind, classify_chain, clause_inequality, fold_chain,
                              mobius_implied_inequality, mobius_sharper_inequality)

    f = read_cnf(args.formula)
    chain = list(f.clauses)
    kind = classify_chain(chain)
    res = {"classification": kind.value, "clauses": [[l.to_dimacs() for l in c] for c in chain]}
    if kind in (ChainKind.OPEN_PATH, ChainKind.ORDINARY_CYCLE, ChainKind.MOBIUS_CYCLE):
        folded = fold_chain(chain)
        res["joined"] = "tautology" if folded is TAUTOLOGY else [l.to_dimacs() for l in folded]
        if folded is not TAUTOLOGY:
            res["joined_inequality"] = clause_inequality(folded).to_json()
    if kind is ChainKind.MOBIUS_CYCLE:
        res["sharper"] = mobius_sharper_inequality(chain).to_json()
        res["implied"] = mobius_implied_inequality(chain).to_json()
    _emit_json(args, res)
    return 0


# --- parser -------------------------------------------------------------------------------

def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        log.warning("ignoring non-integer %s=%r", SEED_ENV, raw)
        return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--seed", type=int, default=_default_seed(),
                        help=f"random seed (default: ${SEED_ENV} or 0)")
    common.add_argument("--no-timestamp", action="store_true", help="omit the timestamp field")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="cycleagg", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    zhelp = "evaluation point z as re,im (repeatable)"

    s = sub.add_parser("mis-potential", parents=[common], help="odd-cycle walk potential of a graph")
    s.add_argument("graph")
    s.add_argument("--z", type=parse_complex, action="append", required=True, help=zhelp)
    s.add_argument("--w", default="zero", help="'zero' or a file of n coordinates in (-1, 1)")
    s.add_argument("--grad", action="store_true")
    s.add_argument("--hess", action="store_true")
    s.add_argument("--method", choices=["auto", "power", "eigen"], default="auto")
    s.set_defaults(func=cmd_mis_potential)

    s = sub.add_parser("sat-potential", parents=[common], help="mobius-cycle potential of a 3-CNF formula")
    s.add_argument("formula")
    s.add_argument("--z", type=parse_complex, action="append", required=True, help=zhelp)
    s.add_argument("--x", default="zero", help="'zero' or a file of n coordinates in (-1, 1)")
    s.add_argument("--orientation", choices=["printed", "symmetric"], default="printed")
    s.set_defaults(func=cmd_sat_potential)

    s = sub.add_parser("verify-cert", parents=[common], help="check a sum-of-squares certificate")
    s.add_argument("certificate", help="JSON file, or the built-in name motzkin / robinson")
    s.add_argument("--strategy", choices=["exact", "numeric"], default="exact")
    s.add_argument("--tol", type=float, default=1e-9)
    s.add_argument("--samples", type=int, default=1000)
    s.set_defaults(func=cmd_verify_cert)

    s = sub.add_parser("approx-recip", parents=[common], help="exponential-sum approximation of 1/s")
    s.add_argument("--a", type=float, default=0.5)
    s.add_argument("--m", type=int, default=2)
    s.add_argument("--M", type=int, default=60)
    s.add_argument("--sweep", type=parse_sweep, default=(math.exp(-30), math.exp(1)))
    s.add_argument("--points", type=int, default=200)
    s.add_argument("--format", choices=["csv", "json"])
    s.set_defaults(func=cmd_approx_recip)

    s = sub.add_parser("oracle", help="brute-force reference computations")
    osub = s.add_subparsers(dest="oracle", required=True)
    o = osub.add_parser("walks", parents=[common])
    o.add_argument("graph")
    o.add_argument("--length", type=int, required=True)
    o.add_argument("--z", type=parse_complex, default=complex(0))
    o.add_argument("--w", default="zero")
    o.add_argument("--closed", action="store_true")
    o.add_argument("--i", type=int)
    o.add_argument("--j", type=int)
    o = osub.add_parser("cycles", parents=[common])
    o.add_argument("graph")
    o.add_argument("--max-len", type=int)
    o = osub.add_parser("mobius", parents=[common])
    o.add_argument("formula")
    o.add_argument("--z", type=parse_complex, default=complex(1))
    o.add_argument("--x", default="zero")
    o.add_argument("--k-max", type=int)
    o.add_argument("--orientation", choices=["printed", "symmetric"], default="printed")
    o = osub.add_parser("assignments", parents=[common])
    o.add_argument("formula")
    o = osub.add_parser("sphere", parents=[common])
    o.add_argument("--dim", type=int, required=True)
    o.add_argument("--count", type=int, default=10)
    s.set_defaults(func=cmd_oracle)

    s = sub.add_parser("lift-ineq", parents=[common], help="lift an inequality to an odd subdivision")
    s.add_argument("graph")
    grp = s.add_mutually_exclusive_group(required=True)
    grp.add_argument("--cycle", help="odd cycle as comma-separated vertices")
    grp.add_argument("--ineq", help="JSON inequality {coeffs, rhs, sense}")
    s.add_argument("--subdivide", action="append", default=[], help="I-J:LENGTH (odd), repeatable")
    s.set_defaults(func=cmd_lift_ineq)

    s = sub.add_parser("classify-chain", parents=[common], help="classify the clauses of a CNF file as a chain")
    s.add_argument("formula")
    s.set_defaults(func=cmd_classify_chain)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with 2 on usage errors
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ParseError, OSError, argparse.ArgumentTypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, ArithmeticError) as exc:
        # ValidationError, RangeError-free domain errors, NonFiniteError, oracle guards
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
