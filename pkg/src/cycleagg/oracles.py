"""Brute-force references for the closed-form expressions.

Everything here enumerates explicitly and refuses inputs above a size
guard rather than truncating.  Nothing in this module uses matrix powers.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Callable, Sequence

import numpy as np

from .instances import CnfFormula, Graph

WALK_MAX_LEN, WALK_MAX_N = 8, 10
CYCLE_MAX_N = 12
MOBIUS_MAX_N, MOBIUS_MAX_M = 6, 8
ASSIGN_MAX_N = 20
INDSET_MAX_N = 24


class GuardError(ValueError):
    """Instance exceeds an oracle's size guard."""


@dataclass(frozen=True)
class WalkRecord:
    vertices: tuple[int, ...]
    value: complex

    @property
    def length(self) -> int:
        return len(self.vertices) - 1


def _guard(cond: bool, what: str) -> None:
    if not cond:
        raise GuardError(what)


def _edge_kernel(z: complex, w) -> Callable[[int, int], complex]:
    return lambda i, j: complex(np.exp(0.5 * z * (w[i] + w[j])))


def enumerate_walks(g: Graph, z: complex, w, l: int, i: int | None = None, j: int | None = None,
                    closed: bool = False) -> list[WalkRecord]:
    """All rooted directed walks with ``l`` edges, from i to j or closed.

    With ``closed=True`` every start vertex is used (i and j ignored); the
    record values then sum to ``tr(A^l)``.
    """
    _guard(l <= WALK_MAX_LEN and g.n <= WALK_MAX_N,
           f"walk oracle limited to l <= {WALK_MAX_LEN}, n <= {WALK_MAX_N} (got l={l}, n={g.n})")
    if l < 1:
        raise ValueError("l must be at least 1")
    w = np.asarray(w, dtype=float)
    k = _edge_kernel(z, w)
    nbrs = g.neighbors()
    starts = range(g.n) if closed else [i]
    out: list[WalkRecord] = []

    def extend(path: list[int], val: complex):
        if len(path) == l + 1:
            end = path[0] if closed else j
            if path[-1] == end:
                out.append(WalkRecord(tuple(path), val))
            return
        last = path[-1]
        for t in nbrs[last]:
            path.append(t)
            extend(path, val * k(last, t))
            path.pop()

    for s in starts:
        extend([s], 1 + 0j)
    return out


def walk_sum(records: Sequence[WalkRecord]) -> complex:
    """Sum of record values in a fixed (lexicographic) order."""
    return sum((r.value for r in sorted(records, key=lambda r: r.vertices)), 0j)


def closed_walk_sum(g: Graph, z: complex, w, l: int) -> complex:
    """``tr(A^l)`` by dynamic programming over walks; no matrix products.

    Same quantity as summing :func:`enumerate_walks` records, but without
    materialising them, so it serves as a fast second oracle.
    """
    _guard(g.n <= 64, "dynamic-programming walk oracle limited to n <= 64")
    w = np.asarray(w, dtype=float)
    k = _edge_kernel(z, w)
    nbrs = g.neighbors()
    total = 0j
    for s in range(g.n):
        cur = {s: 1 + 0j}
        for _ in range(l):
            nxt: dict[int, complex] = {}
            for v, val in cur.items():
                for t in nbrs[v]:
                    nxt[t] = nxt.get(t, 0) + val * k(v, t)
            cur = nxt
        total += cur.get(s, 0)
    return total


def canonical_cycle(c: Sequence[int]) -> tuple[int, ...]:
    """Least rotation of the lexicographically smaller direction."""
    c = list(c)
    n = len(c)
    rots = []
    for seq in (c, c[::-1]):
        rots += [tuple(seq[r:] + seq[:r]) for r in range(n)]
    return min(rots)


def enumerate_odd_cycles(g: Graph, max_len: int | None = None) -> list[tuple[int, ...]]:
    """Every simple cycle of odd length ``3 <= len <= max_len``, once each, canonical form."""
    _guard(g.n <= CYCLE_MAX_N, f"cycle oracle limited to n <= {CYCLE_MAX_N} (got {g.n})")
    max_len = g.n if max_len is None else max_len
    nbrs = g.neighbors()
    found: set[tuple[int, ...]] = set()

    # each cycle is grown from its smallest vertex
    def grow(path: list[int], on: set[int]):
        last = path[-1]
        for t in nbrs[last]:
            if t == path[0] and len(path) >= 3 and len(path) % 2 == 1:
                found.add(canonical_cycle(path))
            elif t > path[0] and t not in on and len(path) < max_len:
                on.add(t)
                path.append(t)
                grow(path, on)
                path.pop()
                on.discard(t)

    for s in range(g.n):
        grow([s], {s})
    return sorted(found, key=lambda c: (len(c), c))


def independent_sets(g: Graph):
    """Yield every independent set as a +-1 vector (+1 = in the set)."""
    _guard(g.n <= INDSET_MAX_N, f"independent-set oracle limited to n <= {INDSET_MAX_N}")
    nbrs = g.neighbors()
    n = g.n
    chosen = [False] * n

    def rec(v: int):
        if v == n:
            yield np.array([1.0 if c else -1.0 for c in chosen])
            return
        yield from rec(v + 1)
        if not any(chosen[u] for u in nbrs[v] if u < v):
            chosen[v] = True
            yield from rec(v + 1)
            chosen[v] = False

    yield from rec(0)


def _clause_kernel(c, z, x) -> complex:
    return complex(np.exp(-z * (1.0 + sum(l.value(x) for l in c))))


def _literal_edges(f: CnfFormula, z, x, orientation: str) -> dict[int, list[tuple[int, complex]]]:
    """Adjacency lists of the literal digraph, one entry per (clause, edge) so parallel edges stay separate."""
    # written out again here rather than imported so the oracle stays independent of mobiusagg
    def nd(l):
        return 2 * l.var + (0 if l.positive else 1)

    adj: dict[int, list[tuple[int, complex]]] = {u: [] for u in range(2 * f.n)}
    for c in f.clauses:
        kern = _clause_kernel(c, z, x)
        a, b, d = (nd(l) for l in c)
        es = [(a, b ^ 1), (a, d ^ 1), (b, d ^ 1), (a ^ 1, b), (a ^ 1, d), (b ^ 1, d)]
        if orientation == "symmetric":
            es += [(q ^ 1, p ^ 1) for p, q in es]
        for p, q in es:
            adj[p].append((q, kern))
    return adj


def enumerate_mobius_walks(f: CnfFormula, z: complex, x, k_max: int | None = None,
                           normalization: str = "printed", orientation: str = "printed") -> complex:
    """Sum over directed walks ``u -> bar(u)`` of length ``2..k_max`` of
    (edge kernel product) x (closing weight).

    The closing weight for a walk ending at ``bar(u)`` is ``exp(z[1 + v(u)])``
    where ``v(u)`` is the value of literal ``u``.  With
    ``normalization="printed"`` each walk of length k is divided by 2k;
    ``"distinct"`` leaves the raw sum.  Parallel edges are walked
    separately.  Branches that can no longer reach ``bar(u)`` are pruned.
    """
    _guard(f.n <= MOBIUS_MAX_N and f.m <= MOBIUS_MAX_M,
           f"mobius oracle limited to n <= {MOBIUS_MAX_N}, m <= {MOBIUS_MAX_M}")
    if normalization not in ("printed", "distinct"):
        raise ValueError("normalization must be 'printed' or 'distinct'")
    k_max = f.m if k_max is None else k_max
    x = np.asarray(x, dtype=float)
    adj = _literal_edges(f, z, x, orientation)
    n2 = 2 * f.n
    # dist_to[t][v]: fewest edges from v to t (for pruning)
    dist_to = []
    for t in range(n2):
        d = {t: 0}
        frontier = [t]
        rev = {v: [] for v in range(n2)}
        for v, lst in adj.items():
            for q, _ in lst:
                rev[q].append(v)
        while frontier:
            nxt = []
            for v in frontier:
                for p in rev[v]:
                    if p not in d:
                        d[p] = d[v] + 1
                        nxt.append(p)
            frontier = nxt
        dist_to.append(d)

    total = 0j
    for u in range(n2):
        target = u ^ 1
        val_u = x[u // 2] if u % 2 == 0 else -x[u // 2]
        close = complex(np.exp(z * (1 + val_u)))
        reach = dist_to[target]
        acc = [0j] * (k_max + 1)

        def walk(v: int, depth: int, val: complex):
            if depth >= 2 and v == target:
                acc[depth] += val
            if depth == k_max:
                return
            for q, kern in adj[v]:
                if reach.get(q, k_max + 1) <= k_max - depth - 1:
                    walk(q, depth + 1, val * kern)

        walk(u, 0, 1 + 0j)
        for k in range(2, k_max + 1):
            total += close * acc[k] / (2 * k if normalization == "printed" else 1)
    return total


def count_mobius_walks(f: CnfFormula, k_max: int | None = None, orientation: str = "printed") -> int:
    """Number of directed walks ``u -> bar(u)`` with length 1..k_max."""
    k_max = f.m if k_max is None else k_max
    adj = _literal_edges(f, 0, np.zeros(f.n), orientation)
    count = 0
    for u in range(2 * f.n):
        cur = {u: 1}
        for _ in range(k_max):
            nxt: dict[int, int] = {}
            for v, c in cur.items():
                for q, _ in adj[v]:
                    nxt[q] = nxt.get(q, 0) + c
            cur = nxt
            count += cur.get(u ^ 1, 0)
    return count


@dataclass
class AssignmentScan:
    satisfiable: bool
    min_f: int
    argmin: tuple[int, ...]
    min_violated: int


def enumerate_assignments(f: CnfFormula) -> AssignmentScan:
    """Scan all ``2^n`` +-1 assignments of the clause-polynomial sum.

    Each clause contributes ``prod (1 - v(l))``, which is 8 when every
    literal is false and 0 otherwise.
    """
    _guard(f.n <= ASSIGN_MAX_N, f"assignment oracle limited to n <= {ASSIGN_MAX_N} (got {f.n})")
    best = None
    for bits in product((1, -1), repeat=f.n):
        fval = 0
        viol = 0
        for c in f.clauses:
            term = 1
            for l in c:
                term *= 1 - (bits[l.var] if l.positive else -bits[l.var])
            fval += term
            viol += term != 0
        if best is None or fval < best[0]:
            best = (fval, bits, viol)
            if fval == 0:
                break
    fval, bits, viol = best
    return AssignmentScan(fval == 0, fval, bits, viol)


def sphere_sample(n: int, count: int, seed: int = 0) -> np.ndarray:
    """``count`` uniform points on the unit sphere in R^n (normalised Gaussians)."""
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((count, n))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


_FD_STENCILS = {
    # order: (offsets, weights) for the first derivative
    2: ((-1, 1), (-0.5, 0.5)),
    4: ((-2, -1, 1, 2), (1 / 12, -2 / 3, 2 / 3, -1 / 12)),
}


def finite_difference(f: Callable, point, h: float = 1e-5, order: int = 2, direction=None):
    """Central-difference directional derivative of ``f`` at ``point``.

    ``order`` is the accuracy order (2 or 4).  Without ``direction`` and
    for scalar ``point`` this is the ordinary derivative.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    if order not in _FD_STENCILS:
        raise ValueError(f"order must be one of {sorted(_FD_STENCILS)}")
    offs, wts = _FD_STENCILS[order]
    x = np.asarray(point, dtype=float)
    d = np.ones_like(x) if direction is None else np.asarray(direction, dtype=float)
    acc = 0
    for o, wt in zip(offs, wts):
        acc = acc + wt * f(x + o * h * d)
    return acc / h


def second_difference(f: Callable, point, i: int, j: int, h: float = 1e-5):
    """Central estimate of ``d^2 f / dx_i dx_j``."""
    x = np.asarray(point, dtype=float)
    ei = np.zeros_like(x)
    ej = np.zeros_like(x)
    ei[i] = h
    ej[j] = h
    if i == j:
        return (f(x + ei) - 2 * f(x) + f(x - ei)) / (h * h)
    return (f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)) / (4 * h * h)


__all__ = [
    "WalkRecord", "GuardError", "enumerate_walks", "walk_sum", "closed_walk_sum", "canonical_cycle",
    "enumerate_odd_cycles", "independent_sets", "enumerate_mobius_walks", "count_mobius_walks",
    "enumerate_assignments", "AssignmentScan", "sphere_sample", "finite_difference", "second_difference",
]
