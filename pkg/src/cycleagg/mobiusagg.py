"""Combined effect of all mobius cycles of a 3-SAT formula.

Literal nodes: variable ``v`` (0-based) owns node ``2v`` (positive) and
``2v + 1`` (negated), so ``bar(i) = i ^ 1``.

Each clause ``C = l1 v l2 v l3`` has slack ``s = 1 + v(l1) + v(l2) + v(l3)``
and kernel ``psi_C = exp(-z s)``; the kernel labels the six directed
edges (l1, ~l2), (l1, ~l3), (l2, ~l3), (~l1, l2), (~l1, l3), (~l2, l3).
Summing parallel edges gives the clause matrix A.  A walk from ``u`` to
``bar(u)`` is closed by the completion matrix ``M_c``, whose entry
``exp(z[1 + v(u)])`` turns the implied-slack kernel of a mobius chain
into the kernel of its sharper inequality.  Then

    B   = sum_{k=2}^{m} A^k / (2k)
    phi = tr(M_c B)
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .instances import CnfFormula, Literal

PRINTED, SYMMETRIC = "printed", "symmetric"


def node(l: Literal) -> int:
    return 2 * l.var + (0 if l.positive else 1)


def bar(i: int) -> int:
    return i ^ 1


def literal_of(i: int) -> Literal:
    return Literal(i // 2, i % 2 == 0)


def _x(f: CnfFormula, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (f.n,):
        raise ValueError(f"x has shape {x.shape}, expected ({f.n},)")
    return x


def clause_edges(c, orientation: str = PRINTED) -> list[tuple[int, int]]:
    """Directed literal-node edges contributed by one clause.

    ``printed`` gives the six edges listed with the construction.  They are
    closed under ``(i, j) -> (bar(i), bar(j))`` but not under the reversal
    ``(i, j) -> (bar(j), bar(i))``.  ``symmetric`` adds the six reversed
    partners, i.e. every ``(a, ~b)`` and ``(~a, b)`` for distinct literals
    a, b of the clause, which is closed under both maps.
    """
    l1, l2, l3 = (node(l) for l in c)
    e = [(l1, bar(l2)), (l1, bar(l3)), (l2, bar(l3)),
         (bar(l1), l2), (bar(l1), l3), (bar(l2), l3)]
    if orientation == SYMMETRIC:
        e += [(bar(j), bar(i)) for i, j in e]
    elif orientation != PRINTED:
        raise ValueError(f"orientation must be {PRINTED!r} or {SYMMETRIC!r}")
    return e


def clause_kernel(c, z: complex, x) -> complex:
    s = 1.0 + sum(l.value(x) for l in c)
    return complex(np.exp(-z * s))


def clause_matrix(f: CnfFormula, z: complex, x, orientation: str = PRINTED) -> np.ndarray:
    x = _x(f, x)
    a = np.zeros((2 * f.n, 2 * f.n), dtype=complex)
    for c in f.clauses:
        k = clause_kernel(c, z, x)
        for i, j in clause_edges(c, orientation):
            a[i, j] += k
    return a


def mobius_completion(f: CnfFormula, z: complex, x) -> np.ndarray:
    """``M[i, bar i] = exp(z[1 - x_v])`` and ``M[bar i, i] = exp(z[1 + x_v])`` for ``i`` the positive node of v."""
    x = _x(f, x)
    n2 = 2 * f.n
    m = np.zeros((n2, n2), dtype=complex)
    pos = np.arange(0, n2, 2)
    m[pos, pos + 1] = np.exp(z * (1 - x))
    m[pos + 1, pos] = np.exp(z * (1 + x))
    return m


def walk_matrix(a: np.ndarray, kmax: int) -> tuple[np.ndarray, int]:
    """``sum_{k=2}^{kmax} A^k / (2k)`` and the number of matrix products used."""
    b = np.zeros_like(a)
    if kmax < 2:
        return b, 0
    p = a @ a
    n_mul = 1
    for k in range(2, kmax + 1):
        b += p / (2 * k)
        if k < kmax:
            p = p @ a
            n_mul += 1
    return b, n_mul


@dataclass
class MobiusReport:
    z: complex
    phi: complex
    dim: int
    kmax: int
    n_matmul: int


def mobius_report(f: CnfFormula, z: complex, x, orientation: str = PRINTED) -> MobiusReport:
    a = clause_matrix(f, z, x, orientation)
    b, n_mul = walk_matrix(a, f.m)
    mc = mobius_completion(f, z, x)
    # only the (i, bar i) entries of M_c are nonzero, so tr(M_c B) = sum_i M_c[i, bar i] B[bar i, i]
    idx = np.arange(2 * f.n)
    phi = complex(np.sum(mc[idx, idx ^ 1] * b[idx ^ 1, idx]))
    return MobiusReport(z, phi, 2 * f.n, f.m, n_mul)


def mobius_potential(f: CnfFormula, z: complex, x, orientation: str = PRINTED) -> complex:
    """``phi(z, x) = tr(M_c B)``; zero for the empty formula."""
    if f.m == 0:
        return 0j
    return mobius_report(f, z, x, orientation).phi


def literal_digraph(f: CnfFormula, orientation: str = PRINTED) -> list[set[int]]:
    succ = [set() for _ in range(2 * f.n)]
    for c in f.clauses:
        for i, j in clause_edges(c, orientation):
            succ[i].add(j)
    return succ


def lp_sufficiency_flag(f: CnfFormula, orientation: str = PRINTED) -> bool:
    """True iff no directed walk of length 1..m joins any literal node to its complement.

    A mobius chain of k clauses is such a walk of length k, so True means
    the formula has no mobius cycles and its linear relaxation suffices.
    """
    succ = literal_digraph(f, orientation)
    for u in range(2 * f.n):
        dist = {u: 0}
        queue = deque([u])
        while queue:
            v = queue.popleft()
            if dist[v] >= f.m:
                continue
            for t in succ[v]:
                if t == bar(u):
                    return False
                if t not in dist:
                    dist[t] = dist[v] + 1
                    queue.append(t)
    return True


__all__ = [
    "node", "bar", "literal_of", "clause_edges", "clause_kernel", "clause_matrix",
    "mobius_completion", "walk_matrix", "mobius_potential", "mobius_report", "MobiusReport",
    "literal_digraph", "lp_sufficiency_flag", "PRINTED", "SYMMETRIC",
]
