"""Combined effect of all odd-cycle inequalities of a graph.

Each edge inequality ``(w_i + w_j)/2 <= 0`` has slack
``s_ij = -(w_i + w_j)/2`` and exponential kernel ``exp(-z s_ij)``; the
edge matrix ``A(z, w)`` holds these kernels.  Products of kernels along a
walk are entries of matrix powers, so

    psi_l      = tr(A^l) / (2l)                  closed walks of length l
    B(z, w)    = sum_{k=1}^{kmax} A^(2k+1) / (2(2k+1)),  kmax = (n-1)//2
    psi        = tr B
    psi_sharp  = e^z tr B                        odd-cycle (sharper) slacks

Derivatives in ``w`` go through join products with the identity.
Vertex indices are 0-based throughout this module.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .instances import Graph
from .jproduct import Tensor, join, matrix_join_member

log = logging.getLogger(__name__)

# below this size B is accumulated by repeated multiplication; above it via an eigendecomposition
POWER_METHOD_MAX_N = 96


def _w(g: Graph, w) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.shape != (g.n,):
        raise ValueError(f"w has shape {w.shape}, expected ({g.n},)")
    return w


def edge_matrix(g: Graph, z: complex, w: Sequence[float]) -> np.ndarray:
    """``A_ij = exp((z/2)(w_i + w_j))`` on edges, zero elsewhere."""
    w = _w(g, w)
    a = np.zeros((g.n, g.n), dtype=complex)
    if g.edges:
        e = np.array(sorted(g.edges))
        vals = np.exp(0.5 * z * (w[e[:, 0]] + w[e[:, 1]]))
        a[e[:, 0], e[:, 1]] = vals
        a[e[:, 1], e[:, 0]] = vals
    return a


def k_max(n: int) -> int:
    return (n - 1) // 2


def walk_sum_pair(g: Graph, z: complex, w, l: int, i: int, j: int) -> complex:
    """``(A^l)_ij``: kernel products summed over all walks of length ``l`` from i to j."""
    if l < 1:
        raise ValueError("walk length must be at least 1")
    return complex(np.linalg.matrix_power(edge_matrix(g, z, w), l)[i, j])


def closed_walks(g: Graph, z: complex, w, l: int) -> complex:
    """``psi_l = tr(A^l) / (2l)``."""
    if l < 3:
        raise ValueError("closed walks of interest have length >= 3")
    a = edge_matrix(g, z, w)
    return complex(np.trace(np.linalg.matrix_power(a, l)) / (2 * l))


@dataclass
class WalkPotentialReport:
    z: complex
    n: int
    kmax: int
    method: str
    psi_l: dict[int, complex]
    B: np.ndarray
    psi: complex
    psi_sharp: complex
    gradient: np.ndarray | None = None
    hessian: np.ndarray | None = None
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        from .cli import cplx  # serialisation helper lives with the CLI
        d = {
            "z": cplx(self.z),
            "n": self.n,
            "kmax": self.kmax,
            "method": self.method,
            "psi_l": {str(l): cplx(v) for l, v in self.psi_l.items()},
            "psi": cplx(self.psi),
            "psi_sharp": cplx(self.psi_sharp),
        }
        if self.gradient is not None:
            d["gradient"] = [cplx(v) for v in self.gradient]
        if self.hessian is not None:
            d["hessian"] = [[cplx(v) for v in row] for row in self.hessian]
        return d


def _odd_power_sum_power_method(a: np.ndarray, kmax: int):
    """B and the per-length traces by accumulating odd powers (``kmax`` products after A^2)."""
    n = a.shape[0]
    b = np.zeros_like(a)
    traces = {}
    if kmax < 1:
        return b, traces
    a2 = a @ a
    p = a2 @ a
    for k in range(1, kmax + 1):
        l = 2 * k + 1
        b += p / (2 * l)
        traces[l] = np.trace(p)
        if k < kmax:
            p = p @ a2
    return b, traces


def _odd_power_sum_eigen(a: np.ndarray, kmax: int):
    """Same quantities from an eigendecomposition; O(n^3)."""
    ls = np.arange(3, 2 * kmax + 2, 2)
    if np.allclose(a.imag, 0):
        lam, v = np.linalg.eigh(a.real)
        vinv = v.T
    else:
        lam, v = np.linalg.eig(a)
        vinv = np.linalg.inv(v)
        cond = np.linalg.cond(v)
        if cond > 1e8:
            log.warning("eigenvector matrix is ill-conditioned (cond=%.2e); using repeated products", cond)
            return None
    if kmax < 1:
        return np.zeros_like(a), {}
    pw = lam[None, :] ** ls[:, None]  # (len(ls), n)
    traces = {int(l): complex(pw[i].sum()) for i, l in enumerate(ls)}
    f = (pw / (2 * ls[:, None])).sum(axis=0)
    b = (v * f[None, :]) @ vinv
    return b.astype(complex), traces


def odd_walk_matrix(a: np.ndarray, method: str = "auto"):
    """``B = sum_{k=1}^{kmax} A^(2k+1) / (2(2k+1))`` plus the traces ``tr A^l``."""
    n = a.shape[0]
    kmax = k_max(n)
    if method == "auto":
        method = "power" if n <= POWER_METHOD_MAX_N else "eigen"
    if method == "eigen":
        out = _odd_power_sum_eigen(a, kmax)
        if out is not None:
            return out + ("eigen",)
        method = "power"
    if method != "power":
        raise ValueError(f"unknown method {method!r}")
    return _odd_power_sum_power_method(a, kmax) + ("power",)


def walk_potential(g: Graph, z: complex, w, derivatives: str = "none", method: str = "auto") -> WalkPotentialReport:
    """Aggregate all closed odd walks of length <= n.

    ``derivatives`` is ``none``, ``gradient`` or ``hessian``.  The gradient
    uses ``d psi_sharp / d w_p = (z/2) e^z sum_k (A^(2k+1))_pp``.  The
    Hessian needs every power of A up to n, so costs O(n^4) time and
    O(n^3) memory.
    """
    if g.n < 3:
        raise ValueError("need at least 3 vertices")
    if derivatives not in ("none", "gradient", "hessian"):
        raise ValueError(f"derivatives must be none/gradient/hessian, got {derivatives!r}")
    a = edge_matrix(g, z, w)
    kmax = k_max(g.n)
    b, traces, used = odd_walk_matrix(a, method)
    psi_l = {l: complex(t / (2 * l)) for l, t in traces.items()}
    psi = complex(np.trace(b))
    ez = np.exp(z)
    rep = WalkPotentialReport(z, g.n, kmax, used, psi_l, b, psi, complex(ez * psi))
    if derivatives in ("gradient", "hessian"):
        # diag(sum_k A^(2k+1)) from B would need the 1/(2l) weights undone, so recompute
        diag = _odd_power_diag(a, kmax, used)
        rep.gradient = 0.5 * z * ez * diag
    if derivatives == "hessian":
        rep.hessian = sharp_hessian(a, z)
    return rep


def _odd_power_diag(a: np.ndarray, kmax: int, method: str) -> np.ndarray:
    if method == "eigen" and np.allclose(a.imag, 0):
        lam, v = np.linalg.eigh(a.real)
        ls = np.arange(3, 2 * kmax + 2, 2)
        f = (lam[None, :] ** ls[:, None]).sum(axis=0)
        return ((v * v) @ f).astype(complex)
    d = np.zeros(a.shape[0], dtype=complex)
    if kmax < 1:
        return d
    a2 = a @ a
    p = a2 @ a
    for k in range(1, kmax + 1):
        d += np.diag(p)
        if k < kmax:
            p = p @ a2
    return d


def sharp_hessian(a: np.ndarray, z: complex) -> np.ndarray:
    """Hessian of ``e^z tr B`` in w.

    With ``P_i = A^i`` (``P_0 = I``) and A symmetric,
    ``H = (z^2/4) e^z sum_{l odd} [2 sum_{i=0}^{l} P_i o P_{l-i} - 2 I o P_l]``,
    where ``o`` is the entrywise product.
    """
    n = a.shape[0]
    kmax = k_max(n)
    top = 2 * kmax + 1
    powers = [np.eye(n, dtype=complex)]
    for _ in range(top):
        powers.append(powers[-1] @ a)
    h = np.zeros((n, n), dtype=complex)
    for k in range(1, kmax + 1):
        l = 2 * k + 1
        conv = sum(powers[i] * powers[l - i] for i in range(l + 1))
        h += (2 * conv - 2 * np.diag(np.diag(powers[l])))
    return 0.25 * z * z * np.exp(z) * h


# --- derivatives through join products --------------------------------------------

def _unit_join_derivative(a: np.ndarray, p: int) -> np.ndarray:
    """``I (J)_p A + A (J)_p I``: row p plus column p of A."""
    eye = np.eye(a.shape[0], dtype=complex)
    return matrix_join_member(eye, a, p) + matrix_join_member(a, eye, p)


def edge_matrix_derivative(g: Graph, z: complex, w, p: int) -> np.ndarray:
    """``dA/dw_p = (z/2) {I (J)_p A + A (J)_p I}``; entrywise ``(z/2) A_ij (d_ip + d_jp)``."""
    if not 0 <= p < g.n:
        raise IndexError(f"vertex {p} out of range")
    return 0.5 * z * _unit_join_derivative(edge_matrix(g, z, w), p)


def edge_matrix_second_derivative(g: Graph, z: complex, w, p: int, q: int) -> np.ndarray:
    """``d^2 A / dw_p dw_q = (z/2) {dA/dw_p (J)_q I + I (J)_q dA/dw_p}``."""
    dp = edge_matrix_derivative(g, z, w, p)
    return 0.5 * z * _unit_join_derivative(dp, q)


def power_derivative(g: Graph, z: complex, w, k: int, p: int, q: int | None = None) -> np.ndarray:
    """First (``q is None``) or second derivative of ``A^k`` in the coordinates of w.

    Product-rule recurrence on ``A^k = A^(k-1) A``:

        d_p A^k      = d_p A^(k-1) A + A^(k-1) d_p A
        d_pq A^k     = d_pq A^(k-1) A + d_p A^(k-1) d_q A + d_q A^(k-1) d_p A + A^(k-1) d_pq A
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    a = edge_matrix(g, z, w)
    dp = edge_matrix_derivative(g, z, w, p)
    n = g.n
    if q is None:
        pk = np.eye(n, dtype=complex)  # A^(j-1)
        d = np.zeros((n, n), dtype=complex)
        for _ in range(k):
            d = d @ a + pk @ dp
            pk = pk @ a
        return d
    dq = edge_matrix_derivative(g, z, w, q)
    dpq = edge_matrix_second_derivative(g, z, w, p, q)
    pk = np.eye(n, dtype=complex)
    d1p = np.zeros((n, n), dtype=complex)
    d1q = np.zeros((n, n), dtype=complex)
    d2 = np.zeros((n, n), dtype=complex)
    for _ in range(k):
        d2 = d2 @ a + d1p @ dq + d1q @ dp + pk @ dpq
        d1p = d1p @ a + pk @ dp
        d1q = d1q @ a + pk @ dq
        pk = pk @ a
    return d2


def join_weights(k: int, order: int = 1, n: int = 8, seed: int = 0) -> dict:
    """Recover the fixed weights in the closed-form derivative of ``A^k``.

    The derivative is written as a weighted sum over compositions alpha of k:

        order 1:  d_p A^k      = (z/2) sum_a W(a) A^a1 (J)_p A^a2
        order 2:  d_pq A^k     = (z^2/4)(1/2!) sum_a W(a) [A^a1 (J)_p A^a2 (J)_q A^a3
                                                            + A^a1 (J)_q A^a2 (J)_p A^a3]

    Weights are fitted by least squares against :func:`power_derivative` on a
    random instance and snapped to nearby rationals.  Returns the weights
    per composition, the weights grouped by rank (number of nonzero parts)
    where that grouping is consistent (else ``None``), and the fit residual.
    """
    rng = np.random.default_rng(seed)
    g = Graph.random(n, 0.6, seed=seed)
    w = rng.uniform(-0.9, 0.9, n)
    z = 0.7 + 0.4j
    a = edge_matrix(g, z, w)
    powers = [np.eye(n, dtype=complex)]
    for _ in range(k):
        powers.append(powers[-1] @ a)
    if order == 1:
        alphas = [(i, k - i) for i in range(k + 1)]
        pairs = [(p, None) for p in range(n)]
        scale = 0.5 * z
    elif order == 2:
        alphas = [(i, j, k - i - j) for i in range(k + 1) for j in range(k + 1 - i)]
        pairs = [(p, q) for p in range(n) for q in range(n)]
        scale = 0.25 * z * z * 0.5
    else:
        raise ValueError("order must be 1 or 2")
    rows, rhs = [], []
    for p, q in pairs:
        target = power_derivative(g, z, w, k, p, q)
        cols = []
        for al in alphas:
            if order == 1:
                m = matrix_join_member(powers[al[0]], powers[al[1]], p)
            else:
                m = _triple_member(powers, al, p, q) + _triple_member(powers, al, q, p)
            cols.append((scale * m).ravel())
        rows.append(np.array(cols).T)
        rhs.append(target.ravel())
    mat = np.vstack(rows)
    vec = np.concatenate(rhs)
    sol, *_ = np.linalg.lstsq(mat, vec, rcond=None)
    resid = float(np.linalg.norm(mat @ sol - vec) / max(np.linalg.norm(vec), 1e-300))
    weights = {al: Fraction(float(s.real)).limit_denominator(64) for al, s in zip(alphas, sol)}
    by_rank: dict[int, set] = {}
    for al, wt in weights.items():
        by_rank.setdefault(sum(1 for x in al if x), set()).add(wt)
    consistent = all(len(v) == 1 for v in by_rank.values())
    return {
        "weights": weights,
        "by_rank": {r: next(iter(v)) for r, v in by_rank.items()} if consistent else None,
        "residual": resid,
    }


def _triple_member(powers, al, p, q) -> np.ndarray:
    """Member (p, q) of ``A^a1 (J)_p A^a2 (J)_q A^a3``."""
    t1 = Tensor.matrix(powers[al[0]], "i", "r")
    t2 = Tensor.matrix(powers[al[1]], "r", "s")
    t3 = Tensor.matrix(powers[al[2]], "s", "j")
    return join(join(t1, t2, ["r"], select={"r": p}), t3, ["s"], select={"s": q}).data


# --- superposed potentials -------------------------------------------------------

def sharp_trace(g: Graph, z: complex, w, method: str = "auto") -> complex:
    """``e^z tr B(z, w)`` alone."""
    a = edge_matrix(g, z, w)
    b, _, _ = odd_walk_matrix(a, method)
    return complex(np.exp(z) * np.trace(b))


def superposed_potential(g: Graph, w, sup, method: str = "auto") -> complex:
    """``sum_i c_i e^z tr B(z) |_{z = lambda_i}`` for an exponential superposition."""
    total = 0j
    for c, lam in zip(sup.coeffs, sup.rates):
        total += c * sharp_trace(g, lam, w, method)
    return total


def cycle_kernel_sum(g: Graph, z: complex, w, cycles: Sequence[Sequence[int]]) -> complex:
    """``sum over the given cycles of exp(-z s)`` with ``s = -sum of w on the cycle``
    (the implied-inequality slack of the cycle)."""
    w = _w(g, w)
    return complex(sum(np.exp(z * w[list(c)].sum()) for c in cycles))


def kernel_scaling_residual(z: complex, s: float, h: float = 1e-6) -> float:
    """Relative size of ``s dpsi/ds - z dpsi/dz`` for ``psi = exp(-z s)``, by central differences.

    Both sides equal ``-z s psi`` exactly.
    """
    psi = lambda zz, ss: np.exp(-zz * ss)  # noqa: E731
    dps = (psi(z, s + h) - psi(z, s - h)) / (2 * h)
    dpz = (psi(z + h, s) - psi(z - h, s)) / (2 * h)
    scale = max(abs(z * s * psi(z, s)), 1e-300)
    return float(abs(s * dps - z * dpz) / scale)


__all__ = [
    "edge_matrix", "walk_sum_pair", "closed_walks", "walk_potential", "WalkPotentialReport",
    "edge_matrix_derivative", "edge_matrix_second_derivative", "power_derivative", "join_weights",
    "superposed_potential", "sharp_trace", "sharp_hessian", "odd_walk_matrix", "k_max",
    "cycle_kernel_sum", "kernel_scaling_residual",
]

