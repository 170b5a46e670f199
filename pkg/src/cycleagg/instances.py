"""Problem instances: undirected graphs, 3-CNF formulas, interior points.

External files use DIMACS conventions (1-based vertex and variable
numbers).  Everything in memory is 0-based: vertex ``i`` in a file is
``i - 1`` here, and variable ``k`` in a CNF file is ``k - 1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


class ParseError(ValueError):
    """Malformed input text.  Carries the offending 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class RangeError(ParseError):
    """An index in the input lies outside the declared range."""


class ValidationError(ValueError):
    """Input is well formed but violates a structural requirement."""


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on vertices ``0..n-1``.

    Edges are stored as sorted pairs ``(i, j)`` with ``i < j``.
    """

    n: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self):
        if self.n < 0:
            raise ValidationError("vertex count must be non-negative")
        for i, j in self.edges:
            if not (0 <= i < j < self.n):
                raise ValidationError(f"bad edge ({i}, {j}) for n={self.n}")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]], *, one_based: bool = False) -> "Graph":
        off = 1 if one_based else 0
        seen: set[tuple[int, int]] = set()
        for a, b in edges:
            a, b = a - off, b - off
            if a == b:
                raise ValidationError(f"self-loop at vertex {a + off}")
            if not (0 <= a < n and 0 <= b < n):
                raise ValidationError(f"edge ({a + off}, {b + off}) out of range for n={n}")
            e = (min(a, b), max(a, b))
            if e in seen:
                raise ValidationError(f"duplicate edge ({a + off}, {b + off})")
            seen.add(e)
        return cls(n, frozenset(seen))

    @classmethod
    def cycle(cls, n: int) -> "Graph":
        return cls.from_edges(n, [(i, (i + 1) % n) for i in range(n)])

    @classmethod
    def petersen(cls) -> "Graph":
        outer = [(i, (i + 1) % 5) for i in range(5)]
        spokes = [(i, i + 5) for i in range(5)]
        inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
        return cls.from_edges(10, outer + spokes + inner)

    @classmethod
    def random(cls, n: int, p: float, seed: int | None = None) -> "Graph":
        """Erdos-Renyi G(n, p) with a seeded numpy generator."""
        rng = np.random.default_rng(seed)
        iu, ju = np.triu_indices(n, k=1)
        keep = rng.random(iu.size) < p
        return cls(n, frozenset(zip(iu[keep].tolist(), ju[keep].tolist())))

    @property
    def m(self) -> int:
        return len(self.edges)

    def neighbors(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for i, j in sorted(self.edges):
            adj[i].append(j)
            adj[j].append(i)
        return adj

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.n, self.n))
        if self.edges:
            idx = np.array(sorted(self.edges))
            a[idx[:, 0], idx[:, 1]] = 1.0
            a[idx[:, 1], idx[:, 0]] = 1.0
        return a

    def has_edge(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in self.edges


@dataclass(frozen=True, order=True)
class Literal:
    """A variable (0-based) with a polarity; ``positive=False`` is the complement."""

    var: int
    positive: bool = True

    def __neg__(self) -> "Literal":
        return Literal(self.var, not self.positive)

    def value(self, x: Sequence[float]) -> float:
        """v(l): x_var for a positive literal, -x_var for a negated one."""
        return x[self.var] if self.positive else -x[self.var]

    @classmethod
    def from_dimacs(cls, k: int) -> "Literal":
        if k == 0:
            raise ValueError("0 is not a literal")
        return cls(abs(k) - 1, k > 0)

    def to_dimacs(self) -> int:
        return (self.var + 1) * (1 if self.positive else -1)

    def __str__(self) -> str:
        return f"x{self.var + 1}" if self.positive else f"~x{self.var + 1}"


@dataclass(frozen=True)
class Clause:
    """Disjunction of literals, in the order given.

    Formulas hold 3-literal clauses only; longer clauses arise from joins.
    """

    literals: tuple[Literal, ...]

    def __iter__(self):
        return iter(self.literals)

    def __len__(self) -> int:
        return len(self.literals)

    def variables(self) -> tuple[int, ...]:
        return tuple(l.var for l in self.literals)

    def satisfied_by(self, assignment: Sequence[float]) -> bool:
        """``assignment`` holds +1 (true) / -1 (false) per variable."""
        return any(l.value(assignment) > 0 for l in self.literals)

    @classmethod
    def of(cls, *ks: int) -> "Clause":
        """Build from DIMACS-style signed 1-based integers."""
        return cls(tuple(Literal.from_dimacs(k) for k in ks))

    def __str__(self) -> str:
        return " v ".join(str(l) for l in self.literals)


@dataclass(frozen=True)
class CnfFormula:
    n: int
    clauses: tuple[Clause, ...]

    def __post_init__(self):
        for idx, c in enumerate(self.clauses):
            _check_3clause(c, self.n, f"clause {idx + 1}")

    @property
    def m(self) -> int:
        return len(self.clauses)

    @classmethod
    def from_dimacs_clauses(cls, n: int, clauses: Iterable[Sequence[int]]) -> "CnfFormula":
        return cls(n, tuple(Clause.of(*c) for c in clauses))

    @classmethod
    def random(cls, n: int, m: int, seed: int | None = None) -> "CnfFormula":
        rng = np.random.default_rng(seed)
        out = []
        for _ in range(m):
            vs = rng.choice(n, size=3, replace=False)
            signs = rng.random(3) < 0.5
            out.append(Clause(tuple(Literal(int(v), bool(s)) for v, s in zip(vs, signs))))
        return cls(n, tuple(out))

    def relabel(self, perm: Sequence[int]) -> "CnfFormula":
        """Rename variable ``v`` to ``perm[v]``."""
        return CnfFormula(self.n, tuple(
            Clause(tuple(Literal(perm[l.var], l.positive) for l in c)) for c in self.clauses))


def _check_3clause(c: Clause, n: int, where: str) -> None:
    if len(c) != 3:
        raise ValidationError(f"{where}: expected 3 literals, got {len(c)}")
    vs = c.variables()
    if len(set(vs)) != 3:
        raise ValidationError(f"{where}: repeated variable")
    for v in vs:
        if not 0 <= v < n:
            raise ValidationError(f"{where}: variable {v + 1} out of range 1..{n}")


@dataclass(frozen=True)
class InteriorPoint:
    coords: tuple[float, ...]

    def __post_init__(self):
        a = np.asarray(self.coords, dtype=float)
        if not np.all(np.isfinite(a)) or np.any(np.abs(a) >= 1):
            raise ValidationError("interior point coordinates must lie strictly inside (-1, 1)")

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.coords, dtype=dtype)

    def __len__(self) -> int:
        return len(self.coords)


def _lines(text: str):
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        yield no, line


def _ints(fields: Sequence[str], no: int) -> list[int]:
    try:
        return [int(f) for f in fields]
    except ValueError:
        raise ParseError(f"expected integers, got {' '.join(fields)!r}", no) from None


def parse_graph(text: str) -> Graph:
    """Read a DIMACS edge-format document (``p edge n m`` then ``e i j`` lines)."""
    n = None
    declared_m = None
    edges: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    for no, line in _lines(text):
        fields = line.split()
        if fields[0] == "p":
            if n is not None:
                raise ParseError("second problem line", no)
            if len(fields) != 4 or fields[1] not in ("edge", "col"):
                raise ParseError(f"bad problem line {line!r}", no)
            n, declared_m = _ints(fields[2:], no)
        elif fields[0] == "e":
            if n is None:
                raise ParseError("edge before problem line", no)
            if len(fields) != 3:
                raise ParseError(f"bad edge line {line!r}", no)
            a, b = _ints(fields[1:], no)
            if not (1 <= a <= n and 1 <= b <= n):
                raise RangeError(f"endpoint out of range 1..{n} in {line!r}", no)
            if a == b:
                raise ParseError(f"self-loop {line!r}", no)
            e = (min(a, b) - 1, max(a, b) - 1)
            if e in seen:
                raise ParseError(f"duplicate edge {line!r}", no)
            seen.add(e)
            edges.append(e)
        else:
            raise ParseError(f"unrecognised line {line!r}", no)
    if n is None:
        raise ParseError("missing problem line 'p edge n m'")
    if declared_m != len(edges):
        raise ParseError(f"problem line declares {declared_m} edges, found {len(edges)}")
    return Graph(n, frozenset(edges))


def parse_cnf(text: str) -> CnfFormula:
    """Read a DIMACS CNF document restricted to 3-SAT.

    Clause literals may span lines; each clause ends at a ``0`` token.
    """
    n = None
    declared_m = None
    clauses: list[Clause] = []
    pending: list[int] = []
    pending_line = None
    for no, line in _lines(text):
        if line.startswith("%"):
            break
        fields = line.split()
        if fields[0] == "p":
            if n is not None:
                raise ParseError("second problem line", no)
            if len(fields) != 4 or fields[1] != "cnf":
                raise ParseError(f"bad problem line {line!r}", no)
            n, declared_m = _ints(fields[2:], no)
            continue
        if n is None:
            raise ParseError("clause before problem line", no)
        for k in _ints(fields, no):
            if k == 0:
                c = _make_clause(pending, n, pending_line or no)
                clauses.append(c)
                pending, pending_line = [], None
            else:
                if pending_line is None:
                    pending_line = no
                pending.append(k)
    if n is None:
        raise ParseError("missing problem line 'p cnf n m'")
    if pending:
        raise ParseError("last clause not terminated by 0", pending_line)
    if declared_m != len(clauses):
        raise ParseError(f"problem line declares {declared_m} clauses, found {len(clauses)}")
    return CnfFormula(n, tuple(clauses))


def _make_clause(ks: list[int], n: int, no: int) -> Clause:
    for k in ks:
        if abs(k) > n:
            raise RangeError(f"variable {abs(k)} out of range 1..{n}", no)
    c = Clause.of(*ks)
    try:
        _check_3clause(c, n, "clause")
    except ValidationError as exc:
        raise ValidationError(f"line {no}: {exc}") from None
    return c


def render_graph(g: Graph) -> str:
    lines = [f"p edge {g.n} {g.m}"]
    lines += [f"e {i + 1} {j + 1}" for i, j in sorted(g.edges)]
    return "\n".join(lines) + "\n"


def render_cnf(f: CnfFormula) -> str:
    lines = [f"p cnf {f.n} {f.m}"]
    for c in f.clauses:
        lines.append(" ".join(str(l.to_dimacs()) for l in c) + " 0")
    return "\n".join(lines) + "\n"


def read_graph(path) -> Graph:
    with open(path) as fh:
        return parse_graph(fh.read())


def read_cnf(path) -> CnfFormula:
    with open(path) as fh:
        return parse_cnf(fh.read())
