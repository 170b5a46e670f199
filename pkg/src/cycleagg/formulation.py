"""Inequality systems for independent set and 3-SAT, clause joins, chains,
and the projectively invariant distance/metric.

Independent-set vectors use the +-1 encoding: ``w_i = +1`` when vertex
``i`` is in the set, ``-1`` otherwise.  SAT assignments use +1 for true.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .instances import Clause, Graph, Literal, ValidationError


class UnsupportedCaseError(ValueError):
    pass


@dataclass(frozen=True)
class LinearInequality:
    """``sum coeffs[k] * x_k  (<= | >=)  rhs`` with a sparse coefficient map."""

    coeffs: Mapping[int, float]
    rhs: float
    sense: str = "<="

    def __post_init__(self):
        if self.sense not in ("<=", ">="):
            raise ValueError(f"sense must be '<=' or '>=', got {self.sense!r}")
        clean = {int(k): v for k, v in self.coeffs.items() if v != 0}
        if not clean:
            raise ValidationError("inequality needs at least one nonzero coefficient")
        object.__setattr__(self, "coeffs", dict(sorted(clean.items())))

    def lhs(self, x: Sequence[float]) -> float:
        return sum(c * x[k] for k, c in self.coeffs.items())

    def slack(self, x: Sequence[float]) -> float:
        """Non-negative exactly when ``x`` satisfies the inequality."""
        v = self.lhs(x)
        return self.rhs - v if self.sense == "<=" else v - self.rhs

    def holds(self, x: Sequence[float], tol: float = 0.0) -> bool:
        return self.slack(x) >= -tol

    def scaled(self, factor: float) -> "LinearInequality":
        if factor <= 0:
            raise ValueError("scaling factor must be positive")
        return LinearInequality({k: factor * c for k, c in self.coeffs.items()}, factor * self.rhs, self.sense)

    def __add__(self, other: "LinearInequality") -> "LinearInequality":
        if self.sense != other.sense:
            raise ValueError("cannot add inequalities of opposite sense")
        coeffs = dict(self.coeffs)
        for k, c in other.coeffs.items():
            coeffs[k] = coeffs.get(k, 0) + c
        return LinearInequality(coeffs, self.rhs + other.rhs, self.sense)

    def to_json(self) -> dict:
        return {"coeffs": {str(k + 1): c for k, c in self.coeffs.items()}, "rhs": self.rhs, "sense": self.sense}

    @classmethod
    def from_json(cls, d: Mapping) -> "LinearInequality":
        return cls({int(k) - 1: v for k, v in d["coeffs"].items()}, d["rhs"], d["sense"])


# --- independent set ----------------------------------------------------------

def edge_inequalities(g: Graph, halved: bool = False) -> list[LinearInequality]:
    """``w_i + w_j <= 0`` for every edge; ``halved`` gives ``(w_i + w_j)/2 <= 0``,
    the per-edge weighting used when summing around a cycle."""
    c = 0.5 if halved else 1.0
    return [LinearInequality({i: c, j: c}, 0.0) for i, j in sorted(g.edges)]


def odd_cycle_inequality(cycle: Sequence[int], g: Graph | None = None) -> LinearInequality:
    """At most k of the 2k+1 cycle vertices are independent: ``sum w <= -1``.

    If ``g`` is given the cycle's edges are checked against it.
    """
    cyc = list(cycle)
    if len(cyc) < 3 or len(cyc) % 2 == 0:
        raise ValidationError(f"odd cycle needs odd length >= 3, got {len(cyc)}")
    if len(set(cyc)) != len(cyc):
        raise ValidationError("cycle repeats a vertex")
    if g is not None:
        for a, b in zip(cyc, cyc[1:] + cyc[:1]):
            if not g.has_edge(a, b):
                raise ValidationError(f"({a}, {b}) is not an edge")
    return LinearInequality({v: 1.0 for v in cyc}, -1.0)


@dataclass(frozen=True)
class SubdivisionMap:
    """Odd subdivision of a base graph.

    ``paths`` maps a base edge ``(i, j)`` (``i < j``) to the tuple of new
    interior vertices placed on it, listed from ``i`` towards ``j``.  The
    replacement path has ``len(interior) + 1`` edges, which must be odd.
    New vertices are numbered from ``base.n`` upward.
    """

    base: Graph
    paths: Mapping[tuple[int, int], tuple[int, ...]] = field(default_factory=dict)

    def __post_init__(self):
        used: set[int] = set()
        for e, interior in self.paths.items():
            if e not in self.base.edges:
                raise ValidationError(f"{e} is not a base edge")
            if (len(interior) + 1) % 2 == 0:
                raise ValidationError(f"replacement path for {e} has even length {len(interior) + 1}")
            for v in interior:
                if v < self.base.n or v in used:
                    raise ValidationError(f"new vertex {v} reused or clashes with a base vertex")
                used.add(v)
        if used and used != set(range(self.base.n, self.base.n + len(used))):
            raise ValidationError("new vertices must be numbered contiguously from base.n")

    @classmethod
    def build(cls, base: Graph, lengths: Mapping[tuple[int, int], int]) -> "SubdivisionMap":
        """Subdivide each listed edge into a path with the given (odd) number of edges."""
        nxt = base.n
        paths = {}
        for e in sorted(lengths):
            key = (min(e), max(e))
            extra = lengths[e] - 1
            paths[key] = tuple(range(nxt, nxt + extra))
            nxt += extra
        return cls(base, paths)

    @property
    def n(self) -> int:
        return self.base.n + sum(len(p) for p in self.paths.values())

    def graph(self) -> Graph:
        edges = []
        for i, j in sorted(self.base.edges):
            seq = [i, *self.paths.get((i, j), ()), j]
            edges += list(zip(seq, seq[1:]))
        return Graph.from_edges(self.n, edges)


def lift_inequality_by_subdivision(ineq: LinearInequality, smap: SubdivisionMap) -> LinearInequality:
    """Transport a unit-coefficient ``<=`` inequality from the base graph to its
    odd subdivision: every original and new vertex gets coefficient 1, the
    right-hand side is kept."""
    if ineq.sense != "<=":
        raise UnsupportedCaseError("only '<=' inequalities in the independent-set encoding can be lifted")
    if any(c != 1 for c in ineq.coeffs.values()):
        raise UnsupportedCaseError("lifting is only defined here for unit base coefficients")
    if any(not 0 <= k < smap.base.n for k in ineq.coeffs):
        raise ValidationError("inequality refers to vertices outside the base graph")
    support = set(ineq.coeffs)
    coeffs = {k: 1.0 for k in support}
    for (i, j), interior in smap.paths.items():
        if i in support and j in support:
            coeffs.update({v: 1.0 for v in interior})
    return LinearInequality(coeffs, ineq.rhs, "<=")


def nonconvex_objective(w: Sequence[float], beta: float) -> float:
    w = np.asarray(w, dtype=float)
    return float(w.sum() + beta * np.dot(w, w))


def round_to_hypercube(w: Sequence[float]) -> np.ndarray:
    """Nearest +-1 vertex, coordinate-wise; exact zeros go to +1."""
    w = np.asarray(w, dtype=float)
    return np.where(w >= 0, 1.0, -1.0)


# --- SAT ---------------------------------------------------------------------

class Tautology:
    """Marker returned by :func:`join_clauses` when the resolvent contains l and ~l."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "TAUTOLOGY"


TAUTOLOGY = Tautology()


def clause_inequality(c: Clause) -> LinearInequality:
    """``sum v(l) >= 2 - len(c)``; for three literals this is ``>= -1``.

    All-false is the only +-1 pattern reaching ``-len(c)``, and the next
    attainable value is ``2 - len(c)``.
    """
    coeffs: dict[int, float] = {}
    for l in c:
        coeffs[l.var] = coeffs.get(l.var, 0.0) + (1.0 if l.positive else -1.0)
    return LinearInequality(coeffs, 2.0 - len(c), ">=")


def join_clauses(c1: Clause, c2: Clause, pivot: int) -> Clause | Tautology:
    """Resolve on variable ``pivot`` (0-based)."""
    p1 = [l for l in c1 if l.var == pivot]
    p2 = [l for l in c2 if l.var == pivot]
    if len(p1) != 1 or len(p2) != 1:
        raise ValidationError(f"pivot x{pivot + 1} must occur exactly once in each clause")
    if p1[0].positive == p2[0].positive:
        raise ValidationError(f"pivot x{pivot + 1} has the same polarity in both clauses")
    out: list[Literal] = []
    for l in [*c1, *c2]:
        if l.var == pivot or l in out:
            continue
        if -l in out:
            return TAUTOLOGY
        out.append(l)
    return Clause(tuple(out))


class ChainKind(enum.Enum):
    OPEN_PATH = "OpenPath"
    ORDINARY_CYCLE = "OrdinaryCycle"
    MOBIUS_CYCLE = "MobiusCycle"
    INVALID = "Invalid"


def classify_chain(chain: Sequence[Clause]) -> ChainKind:
    """Classify a clause sequence of the form

        (l1 v l2 v ~l3), (l3 v l4 v ~l5), ..., (l_{2k-1} v l_{2k} v ~l_{2k+1})

    Consecutive clauses link through their last/first literals, which must
    be complementary.  l1..l_{2k} sit on distinct variables; the closing
    literal l_{2k+1} is free (open path), equal to l1 (ordinary cycle) or
    to ~l1 (mobius cycle).
    """
    if not chain or any(len(c) != 3 for c in chain):
        return ChainKind.INVALID
    for a, b in zip(chain, chain[1:]):
        if a.literals[2] != -b.literals[0]:
            return ChainKind.INVALID
    l1 = chain[0].literals[0]
    inner = [l1] + [c.literals[1] for c in chain] + [c.literals[2] for c in chain[:-1]]
    if len({l.var for l in inner}) != len(inner):
        return ChainKind.INVALID
    closing = -chain[-1].literals[2]  # l_{2k+1}
    if closing.var != l1.var:
        return ChainKind.OPEN_PATH
    return ChainKind.ORDINARY_CYCLE if closing == l1 else ChainKind.MOBIUS_CYCLE


def fold_chain(chain: Sequence[Clause]) -> Clause | Tautology:
    """Join the clauses of a chain left to right along the linking variables."""
    acc: Clause | Tautology = chain[0]
    for c in chain[1:]:
        if acc is TAUTOLOGY:
            return acc
        acc = join_clauses(acc, c, c.literals[0].var)
    return acc


def _mobius_parts(chain: Sequence[Clause]):
    if classify_chain(chain) is not ChainKind.MOBIUS_CYCLE:
        raise ValidationError("chain is not a mobius cycle")
    l1 = chain[0].literals[0]
    evens = [c.literals[1] for c in chain]
    return l1, evens, len(chain)


def _literal_sum(lits, weights=None) -> dict[int, float]:
    coeffs: dict[int, float] = {}
    for i, l in enumerate(lits):
        wgt = 1.0 if weights is None else weights[i]
        coeffs[l.var] = coeffs.get(l.var, 0.0) + (wgt if l.positive else -wgt)
    return coeffs


def mobius_sharper_inequality(chain: Sequence[Clause]) -> LinearInequality:
    """``v(l1) + v(l2) + v(l4) + ... + v(l_2k) >= 1 - k`` for a mobius chain of k clauses."""
    l1, evens, k = _mobius_parts(chain)
    return LinearInequality(_literal_sum([l1, *evens]), 1.0 - k, ">=")


def mobius_implied_inequality(chain: Sequence[Clause]) -> LinearInequality:
    """Sum of the chain's clause inequalities: ``2 v(l1) + v(l2) + ... + v(l_2k) >= -k``."""
    l1, evens, k = _mobius_parts(chain)
    return LinearInequality(_literal_sum([l1, *evens], [2.0] + [1.0] * len(evens)), -float(k), ">=")


def mobius_chain(k: int, l1: Literal, others: Sequence[Literal]) -> list[Clause]:
    """Build a k-clause mobius chain.  ``others`` supplies l2, l3, ..., l_2k
    (2k - 1 literals on distinct variables, none on l1's variable)."""
    if len(others) != 2 * k - 1:
        raise ValueError("need 2k-1 further literals")
    lits = [l1, *others, -l1]  # l1 .. l_{2k+1}
    return [Clause((lits[2 * i], lits[2 * i + 1], -lits[2 * i + 2])) for i in range(k)]


# --- projective distance ------------------------------------------------------

def _check_p(p: int) -> None:
    if p < 2 or p % 2:
        raise ValueError("p must be an even integer >= 2")


def projective_distance(x: Sequence[float], y: Sequence[float], p: int = 2, mode: str = "simplex") -> float:
    """Projectively invariant distance.

    ``simplex``: x, y interior points of the unit simplex,
    ``d = 1/2 * (sum (x_i/y_i - y_i/x_i)^p)^(1/p)``.
    ``slack``: x, y are positive slack vectors ``s, t``,
    ``d^p = sum (1/2 (s_i/t_i - t_i/s_i))^p``.
    """
    _check_p(p)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError("dimension mismatch")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("coordinates must be strictly positive")
    r = x / y - y / x
    if mode == "simplex":
        if not (np.isclose(x.sum(), 1.0) and np.isclose(y.sum(), 1.0)):
            raise ValueError("simplex points must sum to 1")
        return float(0.5 * np.sum(r ** p) ** (1.0 / p))
    if mode == "slack":
        return float(np.sum((0.5 * r) ** p) ** (1.0 / p))
    raise ValueError(f"unknown mode {mode!r}")


def metric_form(x: Sequence[float], dx: Sequence[float], p: int = 2) -> float:
    """``sum (dx_i / x_i)^p``."""
    _check_p(p)
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("coordinates must be strictly positive")
    return float(np.sum((np.asarray(dx, dtype=float) / x) ** p))
