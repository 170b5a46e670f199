"""Join products of small dense tensors.

A join multiplies two tensors entrywise along *repeated* indices without
summing over them.  The repeated indices survive in the output as
*family* axes: they label an indexed family of tensors rather than
tensor slots.  Summing a family axis away (:func:`contract`) recovers the
ordinary contracted product.

Axis order of ``join(A, B, r)``: A's remaining axes, then the family
axes ``r`` (in the order given), then B's remaining axes.  With this
layout reversing all axes gives ``[A (J) B]^T == B^T (J) A^T``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

UP, DOWN = "up", "down"  # contravariant, covariant


@dataclass(frozen=True)
class Index:
    name: str
    variance: str = UP
    family: bool = False

    def __post_init__(self):
        if self.variance not in (UP, DOWN):
            raise ValueError(f"variance must be {UP!r} or {DOWN!r}")


class Tensor:
    """Dense complex array with one :class:`Index` label per axis."""

    __slots__ = ("data", "labels")

    def __init__(self, data, labels: Sequence[Index | str]):
        data = np.asarray(data, dtype=complex)
        labels = tuple(l if isinstance(l, Index) else Index(l) for l in labels)
        if data.ndim != len(labels):
            raise ValueError(f"{data.ndim}-dimensional data but {len(labels)} labels")
        names = [l.name for l in labels]
        if len(set(names)) != len(names):
            raise ValueError(f"index names must be unique, got {names}")
        self.data = data
        self.labels = labels

    @classmethod
    def matrix(cls, m, row: str, col: str) -> "Tensor":
        """Matrix with an upper row index and a lower column index."""
        return cls(m, [Index(row, UP), Index(col, DOWN)])

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(l.name for l in self.labels)

    @property
    def rank(self) -> int:
        """Number of genuine tensor indices (family axes excluded)."""
        return sum(not l.family for l in self.labels)

    @property
    def family_names(self) -> tuple[str, ...]:
        return tuple(l.name for l in self.labels if l.family)

    def axis(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"index {name!r} not found in {self.names}") from None

    def __add__(self, other: "Tensor") -> "Tensor":
        _same_layout(self, other)
        return Tensor(self.data + other.data, self.labels)

    def __sub__(self, other: "Tensor") -> "Tensor":
        _same_layout(self, other)
        return Tensor(self.data - other.data, self.labels)

    def __mul__(self, c) -> "Tensor":
        return Tensor(c * self.data, self.labels)

    __rmul__ = __mul__

    def allclose(self, other: "Tensor", rtol=1e-10, atol=1e-12) -> bool:
        return self.labels == other.labels and np.allclose(self.data, other.data, rtol=rtol, atol=atol)

    def relabel(self, mapping: Mapping[str, str]) -> "Tensor":
        return Tensor(self.data, [Index(mapping.get(l.name, l.name), l.variance, l.family) for l in self.labels])

    def member(self, **at: int) -> "Tensor":
        """The family member at the given family-index values."""
        data, labels = self.data, list(self.labels)
        for name, val in at.items():
            ax = [l.name for l in labels].index(name)
            if not labels[ax].family:
                raise ValueError(f"{name!r} is a tensor index, not a family index")
            data = np.take(data, val, axis=ax)
            del labels[ax]
        return Tensor(data, labels)

    def __repr__(self):
        lab = ",".join(("(%s)" % l.name) if l.family else (l.name + ("^" if l.variance == UP else "_"))
                       for l in self.labels)
        return f"Tensor[{lab}] shape={self.data.shape}"


def _same_layout(a: Tensor, b: Tensor) -> None:
    if a.labels != b.labels or a.data.shape != b.data.shape:
        raise ValueError("tensors must share labels and shape")


def join(a: Tensor, b: Tensor, repeated: Sequence[str], select: Mapping[str, int] | None = None) -> Tensor:
    """``C[..a.., (r), ..b..] = A[..., r] * B[r, ...]``, no summation over ``r``.

    Each repeated index must appear as a tensor index in both operands
    with opposite variance and equal dimension.  ``select`` picks single
    family members up front (cheaper than building the whole family).
    """
    repeated = list(repeated)
    if len(set(repeated)) != len(repeated):
        raise ValueError("repeated indices listed twice")
    select = dict(select or {})
    if set(select) - set(repeated):
        raise ValueError("can only select family members of repeated indices")
    for r in repeated:
        la, lb = a.labels[a.axis(r)], b.labels[b.axis(r)]
        if la.family or lb.family:
            raise ValueError(f"{r!r} is already a family index")
        if la.variance == lb.variance:
            raise ValueError(f"index {r!r} must be contravariant in one operand and covariant in the other")
        if a.data.shape[a.axis(r)] != b.data.shape[b.axis(r)]:
            raise ValueError(f"dimension mismatch on {r!r}")
    a_free = [l for l in a.labels if l.name not in repeated]
    b_free = [l for l in b.labels if l.name not in repeated]
    clash = {l.name for l in a_free} & {l.name for l in b_free}
    if clash:
        raise ValueError(f"non-repeated index names shared by both operands: {sorted(clash)}")
    kept = [r for r in repeated if r not in select]

    def operand(t: Tensor):
        data = t.data
        names = list(t.names)
        for r, v in select.items():
            ax = names.index(r)
            data = np.take(data, [v], axis=ax)  # keep a length-1 axis for alignment
        return data, names

    da, na = operand(a)
    db, nb = operand(b)
    # einsum over symbolic letters; selected axes have length one and are squeezed after
    letters = {}
    for name in na + [n for n in nb if n not in na]:
        letters[name] = chr(ord("a") + len(letters)) if len(letters) < 26 else chr(ord("A") + len(letters) - 26)
    out_names = [l.name for l in a_free] + repeated + [l.name for l in b_free]
    spec = "".join(letters[n] for n in na) + "," + "".join(letters[n] for n in nb) + "->" + \
        "".join(letters[n] for n in out_names)
    data = np.einsum(spec, da, db)
    sel_axes = tuple(out_names.index(r) for r in select)
    if sel_axes:
        data = data.squeeze(axis=sel_axes)
    # family axes carry no variance
    fam = [Index(r, UP, True) for r in kept]
    labels = a_free + fam + b_free
    return Tensor(data, labels)


def contract(t: Tensor, indices: Sequence[str] | None = None) -> Tensor:
    """Sum over family axes (all of them by default)."""
    names = t.family_names if indices is None else tuple(indices)
    data, labels = t.data, list(t.labels)
    for name in names:
        ax = [l.name for l in labels].index(name)
        if not labels[ax].family:
            raise ValueError(f"{name!r} is not a family index")
        data = data.sum(axis=ax)
        del labels[ax]
    return Tensor(data, labels)


def transpose(t: Tensor) -> Tensor:
    """Reverse the order of all axes: ``C^T_{kji} = C_{ijk}``."""
    return Tensor(np.transpose(t.data), t.labels[::-1])


def product(a: Tensor, b: Tensor, repeated: Sequence[str]) -> Tensor:
    """Ordinary contracted product, as a join followed by summation."""
    return contract(join(a, b, repeated), repeated)


def matrix_join_member(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    """Member ``p`` of the matrix join ``A (J)_q B``: ``A[:, p] B[p, :]`` (outer product)."""
    A = Tensor.matrix(a, "i", "q")
    B = Tensor.matrix(b, "q", "j")
    return join(A, B, ["q"], select={"q": p}).data
