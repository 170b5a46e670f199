"""Checking positivity proofs.

Three kinds of evidence are handled here:

* proof trees built from constants, squares, sums, products, reduction
  modulo a variety, composition, division and odd radicals;
* sum-of-squares certificates ``f == sum c_i S_i^2`` modulo a variety;
* the clause polynomial encoding of 3-SAT, whose minimum over the +-1
  cube is zero exactly when the formula is satisfiable.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .instances import CnfFormula
from .polyalg import Polynomial

log = logging.getLogger(__name__)

REAL = "real"
POSITIVE = "positive"  # non-negative orthant


# --- proof trees ----------------------------------------------------------------

@dataclass(frozen=True)
class Const:
    alpha: Fraction
    variables: tuple[str, ...]


@dataclass(frozen=True)
class Square:
    g: Polynomial


@dataclass(frozen=True)
class Sum:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Product:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class ModVariety:
    """Conclude ``target >= 0`` on V from ``child`` when ``target - child`` vanishes on V.

    Equivalence is established by explicit multipliers
    (``target - child == sum a_j g_j``) or, failing that, by reduction
    modulo a sphere relation found among ``relations``.
    """

    child: "Node"
    target: Polynomial
    relations: tuple[Polynomial, ...]
    multipliers: tuple[Polynomial, ...] | None = None


@dataclass(frozen=True)
class Compose:
    """``h(y) = f(g_1(y), ..., g_n(y))``.

    With ``domain=REAL`` the f-proof must hold on all of R^n.  With
    ``domain=POSITIVE`` it may hold on the orthant only, and every ``g_i``
    needs its own non-negativity proof in ``inner_proofs``.
    """

    f: "Node"
    substitution: Mapping[str, Polynomial]
    variables: tuple[str, ...]
    domain: str = REAL
    inner_proofs: tuple["Node", ...] = ()

    def __hash__(self):
        return id(self)


@dataclass(frozen=True)
class Divide:
    """From ``f >= 0`` and ``g > 0`` with ``f == g h``, conclude ``h >= 0``."""

    f: "Node"
    g: "Node"


@dataclass(frozen=True)
class OddRadical:
    """From ``f >= 0`` with ``f == g^(2k+1)``, conclude ``g >= 0``."""

    f: "Node"
    k: int


@dataclass(frozen=True)
class Lemma:
    """A named, separately established inequality; counts as one unit of proof length."""

    name: str

    @property
    def entry(self) -> "LemmaEntry":
        return LEMMAS[self.name]


Node = Const | Square | Sum | Product | ModVariety | Compose | Divide | OddRadical | Lemma


@dataclass(frozen=True)
class LemmaEntry:
    poly: Polynomial
    domain: str
    proof: Node | None  # checked when registered
    witness: str = ""


class ProofRejected(Exception):
    def __init__(self, node, reason: str):
        self.node = node
        self.reason = reason
        super().__init__(f"{type(node).__name__}: {reason}")


@dataclass
class ProofResult:
    conclusion: Polynomial | None
    accepted: bool
    strict: bool = False
    domain: str = REAL
    length: int = 0
    reason: str = ""
    failing_node: object = None

    def __bool__(self):
        return self.accepted


@dataclass
class _Fact:
    poly: Polynomial
    strict: bool
    domain: str
    length: int


def description_length(p: Polynomial) -> int:
    """Size of a polynomial as written: its number of terms (at least 1)."""
    return max(1, len(p.terms))


def check_proof(tree: Node) -> ProofResult:
    """Verify a proof tree bottom-up.

    Returns the concluded polynomial (``>= 0``, or ``> 0`` when ``strict``)
    and the proof length: one per node, plus the description length of
    every substitution made by a composition.  Invoking a :class:`Lemma`
    costs one unit regardless of how long its own proof is.
    """
    try:
        fact = _check(tree)
    except ProofRejected as exc:
        return ProofResult(None, False, reason=exc.reason, failing_node=exc.node)
    return ProofResult(fact.poly, True, fact.strict, fact.domain, fact.length)


def _combine_domain(a: str, b: str, node) -> str:
    if a == b:
        return a
    if {a, b} == {REAL, POSITIVE}:
        return POSITIVE
    raise ProofRejected(node, f"incompatible domains {a!r} and {b!r}")


def _check(node) -> _Fact:
    if isinstance(node, Const):
        a = Fraction(node.alpha)
        if a <= 0:
            raise ProofRejected(node, f"constant {a} is not positive")
        return _Fact(Polynomial.const(node.variables, a), True, REAL, 1)
    if isinstance(node, Square):
        return _Fact(node.g * node.g, False, REAL, 1)
    if isinstance(node, (Sum, Product)):
        l, r = _check(node.left), _check(node.right)
        if l.poly.vars != r.poly.vars:
            raise ProofRejected(node, "operands use different variables")
        dom = _combine_domain(l.domain, r.domain, node)
        if isinstance(node, Sum):
            return _Fact(l.poly + r.poly, l.strict or r.strict, dom, 1 + l.length + r.length)
        return _Fact(l.poly * r.poly, l.strict and r.strict, dom, 1 + l.length + r.length)
    if isinstance(node, Lemma):
        if node.name not in LEMMAS:
            raise ProofRejected(node, f"unknown lemma {node.name!r}")
        e = LEMMAS[node.name]
        return _Fact(e.poly, False, e.domain, 1)
    if isinstance(node, ModVariety):
        return _check_mod(node)
    if isinstance(node, Compose):
        return _check_compose(node)
    if isinstance(node, Divide):
        f, g = _check(node.f), _check(node.g)
        if not g.strict:
            raise ProofRejected(node, "divisor is not certified strictly positive")
        if f.poly.vars != g.poly.vars:
            raise ProofRejected(node, "operands use different variables")
        h = f.poly.divide_exact(g.poly)
        if h is None:
            raise ProofRejected(node, "divisor does not divide the dividend exactly")
        return _Fact(h, f.strict, _combine_domain(f.domain, g.domain, node), 1 + f.length + g.length)
    if isinstance(node, OddRadical):
        if node.k < 0:
            raise ProofRejected(node, "k must be non-negative")
        f = _check(node.f)
        g = f.poly.odd_root(2 * node.k + 1)
        if g is None:
            raise ProofRejected(node, f"not a perfect {2 * node.k + 1}-th power")
        return _Fact(g, f.strict, f.domain, 1 + f.length)
    raise ProofRejected(node, f"unknown node type {type(node).__name__}")


def _check_mod(node: ModVariety) -> _Fact:
    c = _check(node.child)
    target = node.target
    if target.vars != c.poly.vars or any(g.vars != target.vars for g in node.relations):
        raise ProofRejected(node, "variable mismatch")
    diff = target - c.poly
    if node.multipliers is not None:
        if len(node.multipliers) != len(node.relations):
            raise ProofRejected(node, "one multiplier per relation required")
        combo = target.zero()
        for a, g in zip(node.multipliers, node.relations):
            combo = combo + a * g
        if diff != combo:
            raise ProofRejected(node, "target - child is not the stated combination of relations")
    else:
        sphere = next((s for s in (sphere_variables(g) for g in node.relations) if s), None)
        if sphere is None:
            raise ProofRejected(node, "no multipliers and no sphere relation to reduce by")
        if diff.reduce_mod_sphere(sphere[-1], sphere):
            raise ProofRejected(node, "target and child differ on the sphere")
    return _Fact(target, c.strict, "variety", 1 + c.length)


def _check_compose(node: Compose) -> _Fact:
    f = _check(node.f)
    subs = dict(node.substitution)
    if set(subs) != set(f.poly.vars):
        raise ProofRejected(node, "substitution must cover exactly the variables of f")
    if node.domain not in (REAL, POSITIVE):
        raise ProofRejected(node, f"unknown domain {node.domain!r}")
    if f.domain == "variety":
        raise ProofRejected(node, "composition with a variety-restricted fact is not supported")
    length = 1 + f.length + sum(description_length(g) for g in subs.values())
    if node.domain == REAL:
        if f.domain != REAL:
            raise ProofRejected(node, "f is only known non-negative on the orthant; use the positive variant")
    else:
        if len(node.inner_proofs) != len(f.poly.vars):
            raise ProofRejected(node, "positive variant needs a proof for every inner polynomial")
        for v, pf in zip(f.poly.vars, node.inner_proofs):
            inner = _check(pf)
            if inner.domain != REAL or inner.poly != subs[v]:
                raise ProofRejected(node, f"inner proof does not establish {v} := {subs[v]} >= 0 on R^m")
            length += inner.length
    try:
        h = f.poly.compose(subs, node.variables)
    except ValueError as exc:
        raise ProofRejected(node, str(exc)) from None
    return _Fact(h, False, REAL, length)


def sphere_variables(g: Polynomial) -> tuple[str, ...] | None:
    """If ``g`` is ``sum_{v in S} v^2 - 1`` (either sign) return S, else ``None``."""
    for sign in (1, -1):
        h = g.scalar_mul(sign)
        if h.terms.get((0,) * len(h.vars)) != -1:
            continue
        names = []
        ok = True
        for m, c in h.terms.items():
            if not any(m):
                continue
            idx = [i for i, e in enumerate(m) if e]
            if c != 1 or len(idx) != 1 or m[idx[0]] != 2:
                ok = False
                break
            names.append(h.vars[idx[0]])
        if ok and names:
            return tuple(v for v in h.vars if v in names)
    return None


# --- lemma library ------------------------------------------------------------

LEMMAS: dict[str, LemmaEntry] = {}


def register_lemma(name: str, poly: Polynomial, domain: str = REAL, proof: Node | None = None,
                   witness: str = "") -> None:
    """Add a named lemma.  Real-domain lemmas must come with a proof that
    is checked here and must conclude exactly ``poly``."""
    if domain == REAL:
        if proof is None:
            raise ValueError("real-domain lemmas need a proof")
        res = check_proof(proof)
        if not res or res.conclusion != poly:
            raise ValueError(f"lemma {name!r}: proof does not establish the stated polynomial")
    LEMMAS[name] = LemmaEntry(poly, domain, proof, witness)


def _install_lemmas():
    # Lagrange identity: (a^2+b^2)(c^2+d^2) - (ac+bd)^2 = (ad-bc)^2
    v = ("a", "b", "c", "d")
    a, b, c, d = Polynomial.gens(v)
    register_lemma("cauchy_schwarz_2", (a * a + b * b) * (c * c + d * d) - (a * c + b * d) ** 2,
                   REAL, Square(a * d - b * c))
    v = ("a1", "a2", "a3", "b1", "b2", "b3")
    a1, a2, a3, b1, b2, b3 = Polynomial.gens(v)
    cs3 = (a1 * a1 + a2 * a2 + a3 * a3) * (b1 * b1 + b2 * b2 + b3 * b3) - (a1 * b1 + a2 * b2 + a3 * b3) ** 2
    pf = Sum(Square(a1 * b2 - a2 * b1), Sum(Square(a1 * b3 - a3 * b1), Square(a2 * b3 - a3 * b2)))
    register_lemma("cauchy_schwarz_3", cs3, REAL, pf)
    # x^3 + y^3 + z^3 - 3xyz = (x+y+z)/2 * ((x-y)^2 + (y-z)^2 + (z-x)^2), non-negative on the orthant
    v = ("x", "y", "z")
    x, y, z = Polynomial.gens(v)
    amgm = x ** 3 + y ** 3 + z ** 3 - 3 * x * y * z
    assert amgm == (x + y + z) * ((x - y) ** 2 + (y - z) ** 2 + (z - x) ** 2).scalar_mul(Fraction(1, 2))
    register_lemma("am_gm_3", amgm, POSITIVE, None, "(x+y+z)/2 * sum of squared differences")


_install_lemmas()


# --- SOS certificates ---------------------------------------------------------------

@dataclass
class SosCertificate:
    """``f == sum c_i S_i^2 (+ sum a_j g_j)`` with every ``g_j`` vanishing on V."""

    f: Polynomial
    squares: list[tuple[Fraction, Polynomial]]
    relations: list[Polynomial] = field(default_factory=list)
    multipliers: list[Polynomial] | None = None
    name: str = ""

    def __post_init__(self):
        self.squares = [(Fraction(c), s) for c, s in self.squares]
        for c, _ in self.squares:
            if c <= 0:
                raise ValueError(f"square weight {c} is not positive")
        for p in [s for _, s in self.squares] + list(self.relations) + list(self.multipliers or []):
            if p.vars != self.f.vars:
                raise ValueError("all certificate polynomials must share f's variables")
        if self.multipliers is not None and len(self.multipliers) != len(self.relations):
            raise ValueError("one multiplier per relation")

    @property
    def variables(self) -> tuple[str, ...]:
        return self.f.vars

    def residual(self) -> Polynomial:
        r = self.f
        for c, s in self.squares:
            r = r - (s * s).scalar_mul(c)
        if self.multipliers is not None:
            for a, g in zip(self.multipliers, self.relations):
                r = r - a * g
        return r

    def to_json(self) -> dict:
        d = {
            "variables": list(self.variables),
            "f": str(self.f),
            "squares": [[str(c), str(s)] for c, s in self.squares],
            "relations": [str(g) for g in self.relations],
        }
        if self.name:
            d["name"] = self.name
        if self.multipliers is not None:
            d["multipliers"] = [str(a) for a in self.multipliers]
        return d

    @classmethod
    def from_json(cls, d: Mapping) -> "SosCertificate":
        v = tuple(d["variables"])
        P = lambda s: Polynomial.parse(str(s), v)  # noqa: E731
        mult = d.get("multipliers")
        return cls(
            P(d["f"]),
            [(Fraction(str(c)), P(s)) for c, s in d["squares"]],
            [P(g) for g in d.get("relations", [])],
            None if mult is None else [P(a) for a in mult],
            d.get("name", ""),
        )

    @classmethod
    def load(cls, path) -> "SosCertificate":
        with open(path) as fh:
            return cls.from_json(json.load(fh))

    def with_weight(self, i: int, c) -> "SosCertificate":
        sq = list(self.squares)
        sq[i] = (Fraction(c), sq[i][1])
        return SosCertificate(self.f, sq, list(self.relations), self.multipliers, self.name)


@dataclass
class SosReport:
    accepted: bool
    strategy: str
    residual_norm: float
    residual: Polynomial | None = None
    samples: int = 0
    warnings: list[str] = field(default_factory=list)

    @property
    def verdict(self) -> str:
        return "Accept" if self.accepted else "Reject"

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "strategy": self.strategy,
            "residual_norm": self.residual_norm,
            "residual": None if self.residual is None else str(self.residual),
            "samples": self.samples,
            "warnings": self.warnings,
        }


def verify_sos_certificate(cert: SosCertificate, strategy: str = "exact", tol: float = 1e-9,
                           samples: int = 1000, seed: int = 0) -> SosReport:
    """Check a certificate.

    ``exact``: the residual ``f - sum c_i S_i^2`` (minus the multiplier
    combination, if given) is reduced modulo the sphere relation and must
    vanish identically.  If variables outside the sphere survive the
    reduction, falls back to ``numeric`` with a warning.

    ``numeric``: ``max |residual|`` over seeded points of V must not exceed ``tol``.
    """
    if strategy not in ("exact", "numeric"):
        raise ValueError(f"unknown strategy {strategy!r}")
    r = cert.residual()
    warnings: list[str] = []
    if strategy == "exact":
        sphere = next((s for s in (sphere_variables(g) for g in cert.relations) if s), None)
        if sphere is None and cert.relations:
            warnings.append("no sphere relation among the relations; using numeric sampling on V")
        elif sphere is None:
            return SosReport(r.is_zero(), "exact", 0.0 if r.is_zero() else _max_coeff(r), r)
        else:
            red = r.reduce_mod_sphere(sphere[-1], sphere)
            if red.is_zero():
                return SosReport(True, "exact", 0.0, red)
            extra = red.used_vars() - set(sphere)
            non_sphere_relations = [g for g in cert.relations if sphere_variables(g) is None]
            if extra and non_sphere_relations:
                warnings.append(f"residual still involves {sorted(extra)} after sphere reduction; "
                                "falling back to numeric sampling on V")
            else:
                return SosReport(False, "exact", _max_coeff(red), red)
    for w in warnings:
        log.warning(w)
    pts = sample_variety(cert.relations, cert.variables, samples, seed)
    vals = np.array([abs(complex(r.eval(p))) for p in pts]) if len(pts) else np.zeros(0)
    norm = float(vals.max()) if vals.size else float("inf")
    ok = bool(vals.size) and norm <= tol
    if not vals.size:
        warnings.append("could not locate any points on V")
    return SosReport(ok, "numeric", norm, None, len(pts), warnings)


def _max_coeff(p: Polynomial) -> float:
    return float(max((abs(c) for c in p.terms.values()), default=0))


def sample_variety(relations: Sequence[Polynomial], variables: Sequence[str], count: int, seed: int = 0,
                   max_tries: int | None = None) -> list[np.ndarray]:
    """Seeded points of the real variety cut out by ``relations``.

    Sphere coordinates start on the unit sphere and other variables at
    Gaussian values.  When relations beyond the sphere are present each
    start is pushed onto V by least squares and kept only if every
    relation is below 1e-10.
    """
    from scipy.optimize import least_squares

    rng = np.random.default_rng(seed)
    variables = tuple(variables)
    sphere = next((s for s in (sphere_variables(g) for g in relations) if s), ())
    sidx = [variables.index(v) for v in sphere]
    others = [g for g in relations if sphere_variables(g) is None]
    compiled = [_compile(g) for g in relations]
    grads = [[_compile(g.diff(v)) for v in variables] for g in relations]

    def start():
        p = rng.standard_normal(len(variables))
        if sidx:
            p[sidx] /= np.linalg.norm(p[sidx])
        return p

    if not others:
        return [start() for _ in range(count)]
    pts = []
    tries = 0
    limit = max_tries or 20 * count
    while len(pts) < count and tries < limit:
        tries += 1
        sol = least_squares(lambda p: np.array([g(p) for g in compiled]), start(),
                            jac=lambda p: np.array([[d(p) for d in row] for row in grads]),
                            xtol=1e-15, ftol=1e-15, gtol=1e-15, method="lm")
        if max(abs(g(sol.x)) for g in compiled) < 1e-10:
            pts.append(sol.x)
    return pts


def _compile(p: Polynomial):
    monos = np.array(list(p.terms.keys()), dtype=float).reshape(len(p.terms), len(p.vars))
    coefs = np.array([float(c) for c in p.terms.values()])

    def f(x):
        x = np.asarray(x, dtype=float)
        return float(coefs @ np.prod(x[None, :] ** monos, axis=1)) if len(coefs) else 0.0

    return f


# --- SAT encoding and critical points ------------------------------------------------------

def sat_variables(n: int) -> tuple[str, ...]:
    return tuple(f"x{i + 1}" for i in range(n))


def clause_polynomial(clause, variables: Sequence[str]) -> Polynomial:
    """``prod (1 - v(l))`` over the literals: 0 if some literal is true, 8 if all are false."""
    p = Polynomial.const(variables, 1)
    for l in clause:
        xv = Polynomial.var(variables, variables[l.var])
        p = p * (1 - xv if l.positive else 1 + xv)
    return p


def sat_nonneg_encoding(formula: CnfFormula) -> Polynomial:
    """Sum of clause polynomials; on the +-1 cube it equals 8 x (number of violated clauses)."""
    v = sat_variables(formula.n)
    f = Polynomial(v)
    for c in formula.clauses:
        f = f + clause_polynomial(c, v)
    return f


def critical_point_relations(f: Polynomial, multiplier: str = "lam") -> list[Polynomial]:
    """``df/dx_i - lam * x_i`` for each variable, then ``sum x_i^2 - 1``.

    The returned polynomials live in ``f.vars + (multiplier,)``.
    """
    if multiplier in f.vars:
        raise ValueError(f"{multiplier!r} already used as a variable")
    v = f.vars + (multiplier,)
    F = f.extend(v)
    lam = Polynomial.var(v, multiplier)
    rels = [F.diff(x) - lam * Polynomial.var(v, x) for x in f.vars]
    sphere = Polynomial.const(v, -1)
    for x in f.vars:
        sphere = sphere + Polynomial.var(v, x) ** 2
    return rels + [sphere]


# --- shipped certificates ---------------------------------------------------------------------

def motzkin_certificate() -> SosCertificate:
    v = ("x", "y", "z")
    P = lambda s: Polynomial.parse(s, v)  # noqa: E731
    return SosCertificate(
        P("z^6 + x^4 y^2 + x^2 y^4 - 3 x^2 y^2 z^2"),
        [
            (Fraction(1, 4), P("x y (x^2 - y^2)")),
            (Fraction(1), P("x^4 + y^4 - 2x^2 - 2y^2 + x^2 y^2 + 1")),
            (Fraction(1), P("x z (x^2 + 2y^2 - 1)")),
            (Fraction(1), P("y z (2x^2 + y^2 - 1)")),
            (Fraction(3, 4), P("x y (3x^2 + 3y^2 - 2)")),
        ],
        [P("x^2 + y^2 + z^2 - 1")],
        name="motzkin",
    )


def robinson_certificate() -> SosCertificate:
    v = ("x", "y", "z")
    P = lambda s: Polynomial.parse(s, v)  # noqa: E731
    return SosCertificate(
        P("x^6 + y^6 + z^6 - (x^4 y^2 + x^2 y^4 + y^4 z^2 + y^2 z^4 + z^4 x^2 + z^2 x^4) + 3 x^2 y^2 z^2"),
        [
            (Fraction(1), P("-x^3 y + x y^3")),
            (Fraction(3, 4), P("-1 + 3x^2 - 2x^4 - 4x^2 y^2 + 2y^2")),
            (Fraction(1, 4), P("1 - x^2 - 2x^4 + 4x^2 y^2 - 4y^2 + 4y^4")),
            (Fraction(1), P("-2x^3 z - x y^2 z + x z")),
            (Fraction(1), P("-x^2 y z - 2y^3 z + y z")),
        ],
        [P("x^2 + y^2 + z^2 - 1")],
        name="robinson",
    )
