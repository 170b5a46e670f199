"""Exact multivariate polynomials over the rationals.

A :class:`Polynomial` lives in a fixed, ordered variable universe and is
stored as a map from dense exponent tuples to nonzero ``Fraction``
coefficients.  Operations between polynomials require the same universe;
use :meth:`Polynomial.extend` to embed into a larger one.
"""

from __future__ import annotations

import re
from fractions import Fraction
from numbers import Number, Rational
from typing import Iterable, Mapping, Sequence

Monomial = tuple[int, ...]


def _frac(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, (int, Rational)):
        return Fraction(c)
    if isinstance(c, str):
        return Fraction(c.strip())
    if isinstance(c, float):
        return Fraction(c)
    raise TypeError(f"cannot use {type(c).__name__} as an exact coefficient")


class Polynomial:
    __slots__ = ("vars", "terms")

    def __init__(self, variables: Sequence[str], terms: Mapping[Monomial, object] | None = None):
        self.vars: tuple[str, ...] = tuple(variables)
        if len(set(self.vars)) != len(self.vars):
            raise ValueError("duplicate variable names")
        clean: dict[Monomial, Fraction] = {}
        for mono, c in (terms or {}).items():
            mono = tuple(int(e) for e in mono)
            if len(mono) != len(self.vars):
                raise ValueError(f"exponent vector {mono} does not match {len(self.vars)} variables")
            if any(e < 0 for e in mono):
                raise ValueError("negative exponent")
            c = _frac(c)
            if c:
                clean[mono] = clean.get(mono, Fraction(0)) + c
        self.terms: dict[Monomial, Fraction] = {m: c for m, c in sorted(clean.items(), reverse=True) if c}

    # construction ------------------------------------------------------------

    @classmethod
    def const(cls, variables: Sequence[str], c) -> "Polynomial":
        return cls(variables, {(0,) * len(variables): c})

    @classmethod
    def var(cls, variables: Sequence[str], name: str) -> "Polynomial":
        variables = tuple(variables)
        e = [0] * len(variables)
        e[variables.index(name)] = 1
        return cls(variables, {tuple(e): 1})

    @classmethod
    def gens(cls, variables: Sequence[str]) -> tuple["Polynomial", ...]:
        return tuple(cls.var(variables, v) for v in variables)

    @classmethod
    def parse(cls, text: str, variables: Sequence[str]) -> "Polynomial":
        return _Parser(text, tuple(variables)).parse()

    def zero(self) -> "Polynomial":
        return Polynomial(self.vars)

    def extend(self, variables: Sequence[str]) -> "Polynomial":
        """Embed into a universe containing all current variables."""
        variables = tuple(variables)
        pos = [variables.index(v) for v in self.vars]
        out = {}
        for mono, c in self.terms.items():
            e = [0] * len(variables)
            for p, k in zip(pos, mono):
                e[p] = k
            out[tuple(e)] = c
        return Polynomial(variables, out)

    # queries -----------------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def degree(self) -> int:
        return max((sum(m) for m in self.terms), default=-1)

    def degree_in(self, name: str) -> int:
        i = self.vars.index(name)
        return max((m[i] for m in self.terms), default=-1)

    def used_vars(self) -> set[str]:
        return {v for i, v in enumerate(self.vars) if any(m[i] for m in self.terms)}

    def leading(self) -> tuple[Monomial, Fraction]:
        """Lex-largest term."""
        mono = next(iter(self.terms))
        return mono, self.terms[mono]

    def coefficients(self) -> list[Fraction]:
        return list(self.terms.values())

    def constant_value(self) -> Fraction | None:
        """The value if the polynomial is constant, else ``None``."""
        if not self.terms:
            return Fraction(0)
        if len(self.terms) == 1:
            mono, c = self.leading()
            if not any(mono):
                return c
        return None

    # arithmetic --------------------------------------------------------------

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.vars != self.vars:
                raise ValueError(f"variable mismatch: {self.vars} vs {other.vars}")
            return other
        if isinstance(other, (Number, str)):
            return Polynomial.const(self.vars, _frac(other))
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return Polynomial(self.vars, out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.vars, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out: dict[Monomial, Fraction] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = tuple(a + b for a, b in zip(m1, m2))
                out[m] = out.get(m, 0) + c1 * c2
        return Polynomial(self.vars, out)

    __rmul__ = __mul__

    def scalar_mul(self, c) -> "Polynomial":
        c = _frac(c)
        return Polynomial(self.vars, {m: c * v for m, v in self.terms.items()})

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("exponent must be a non-negative integer")
        result = Polynomial.const(self.vars, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self.vars == other.vars and self.terms == other.terms
        if isinstance(other, Number):
            return self.constant_value() == other
        return NotImplemented

    def __hash__(self):
        return hash((self.vars, tuple(self.terms.items())))

    # calculus / composition --------------------------------------------------

    def diff(self, name: str) -> "Polynomial":
        i = self.vars.index(name)
        out = {}
        for m, c in self.terms.items():
            if m[i]:
                e = list(m)
                e[i] -= 1
                out[tuple(e)] = c * m[i]
        return Polynomial(self.vars, out)

    def substitute(self, name: str, replacement: "Polynomial") -> "Polynomial":
        """``self`` with variable ``name`` replaced by ``replacement`` (same universe)."""
        replacement = self._coerce(replacement)
        i = self.vars.index(name)
        powers = {}
        out = self.zero()
        for m, c in self.terms.items():
            k = m[i]
            if k not in powers:
                powers[k] = replacement ** k
            e = list(m)
            e[i] = 0
            out = out + Polynomial(self.vars, {tuple(e): c}) * powers[k]
        return out

    def compose(self, mapping: Mapping[str, "Polynomial"], variables: Sequence[str]) -> "Polynomial":
        """Simultaneous substitution into a new universe ``variables``.

        Every variable of ``self`` must be mapped.
        """
        variables = tuple(variables)
        missing = [v for v in self.vars if v not in mapping]
        if missing:
            raise ValueError(f"no substitution given for {missing}")
        images = [mapping[v] if isinstance(mapping[v], Polynomial) else Polynomial.const(variables, mapping[v])
                  for v in self.vars]
        for g in images:
            if g.vars != variables:
                raise ValueError("substituted polynomials must live in the target universe")
        cache: dict[tuple[int, int], Polynomial] = {}

        def pw(i, k):
            if (i, k) not in cache:
                cache[(i, k)] = images[i] ** k
            return cache[(i, k)]

        out = Polynomial(variables)
        for m, c in self.terms.items():
            t = Polynomial.const(variables, c)
            for i, k in enumerate(m):
                if k:
                    t = t * pw(i, k)
            out = out + t
        return out

    def reduce_mod_sphere(self, pivot: str, over: Iterable[str] | None = None) -> "Polynomial":
        """Rewrite ``pivot^2 -> 1 - sum_{u != pivot} u^2`` (u ranging over ``over``,
        default all variables) until the pivot degree is at most 1."""
        over = tuple(self.vars if over is None else over)
        if pivot not in over:
            raise ValueError("pivot must be one of the sphere variables")
        i = self.vars.index(pivot)
        rest = Polynomial.const(self.vars, 1)
        for v in over:
            if v != pivot:
                rest = rest - Polynomial.var(self.vars, v) ** 2
        powers: dict[int, Polynomial] = {}
        out = self.zero()
        for m, c in self.terms.items():
            q, r = divmod(m[i], 2)
            if q not in powers:
                powers[q] = rest ** q
            e = list(m)
            e[i] = r
            out = out + Polynomial(self.vars, {tuple(e): c}) * powers[q]
        return out

    def divide_exact(self, g: "Polynomial") -> "Polynomial | None":
        """Quotient ``h`` with ``self == g * h``, or ``None`` if ``g`` does not divide.

        Lex-order division by a single polynomial; the remainder is unique, so
        a nonzero remainder means no exact quotient exists.
        """
        g = self._coerce(g)
        if g.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        lm, lc = g.leading()
        r = self
        q = self.zero()
        while r:
            m, c = r.leading()
            if any(a < b for a, b in zip(m, lm)):
                return None
            t = Polynomial(self.vars, {tuple(a - b for a, b in zip(m, lm)): c / lc})
            q = q + t
            r = r - t * g
        return q

    def odd_root(self, n: int) -> "Polynomial | None":
        """``g`` with ``g**n == self`` for odd ``n``, or ``None``."""
        if n < 1 or n % 2 == 0:
            raise ValueError("root index must be a positive odd integer")
        if n == 1 or not self:
            return self
        d = self.degree()
        if d % n:
            return None
        lm, lc = self.leading()
        if any(e % n for e in lm):
            return None
        rc = _rational_root(lc, n)
        if rc is None:
            return None
        g = Polynomial(self.vars, {tuple(e // n for e in lm): rc})
        denom = g ** (n - 1) * n
        dm, dc = denom.leading()
        # every term of g has degree <= d/n, so the loop is finite
        for _ in range(_count_monomials(len(self.vars), d // n) + 1):
            r = self - g ** n
            if not r:
                return g
            m, c = r.leading()
            if any(a < b for a, b in zip(m, dm)):
                return None
            e = tuple(a - b for a, b in zip(m, dm))
            if sum(e) > d // n:
                return None
            g = g + Polynomial(self.vars, {e: c / dc})
        return None

    # evaluation / formatting --------------------------------------------------

    def eval(self, point: Sequence | Mapping[str, object]):
        """Evaluate at a point (sequence in variable order, or name->value map).

        Rational inputs give an exact ``Fraction``; floats/complex give floats.
        """
        if isinstance(point, Mapping):
            point = [point[v] for v in self.vars]
        point = list(point)
        if len(point) != len(self.vars):
            raise ValueError(f"point has {len(point)} coordinates, expected {len(self.vars)}")
        exact = all(isinstance(p, (int, Fraction)) for p in point)
        if exact:
            point = [Fraction(p) for p in point]
        total = Fraction(0) if exact else 0.0
        for m, c in self.terms.items():
            t = c if exact else float(c)
            for x, k in zip(point, m):
                if k:
                    t = t * x ** k
            total = total + t
        return total

    def __call__(self, *point):
        return self.eval(point)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for m, c in self.terms.items():
            mono = " ".join(v if k == 1 else f"{v}^{k}" for v, k in zip(self.vars, m) if k)
            sign = "-" if c < 0 else "+"
            a = abs(c)
            if not mono:
                body = str(a)
            elif a == 1:
                body = mono
            else:
                body = f"{a} * {mono}"
            parts.append((sign, body))
        s = " ".join(f"{sg} {b}" for sg, b in parts)
        return s[2:] if s.startswith("+ ") else "-" + s[2:]

    def __repr__(self) -> str:
        return f"Polynomial({list(self.vars)}, {str(self)!r})"


def _count_monomials(nvars: int, deg: int) -> int:
    from math import comb
    return comb(nvars + deg, nvars)


def _iroot(a: int, n: int) -> int | None:
    if a < 0:
        return None
    if a < 2:
        return a
    x = int(round(a ** (1.0 / n))) if a.bit_length() < 1000 else 1 << (a.bit_length() // n + 1)
    while True:
        y = ((n - 1) * x + a // x ** (n - 1)) // n
        if y >= x:
            break
        x = y
    for cand in (x - 1, x, x + 1):
        if cand >= 0 and cand ** n == a:
            return cand
    return None


def _rational_root(c: Fraction, n: int) -> Fraction | None:
    sign = -1 if c < 0 else 1
    p = _iroot(abs(c.numerator), n)
    q = _iroot(c.denominator, n)
    if p is None or q is None:
        return None
    return sign * Fraction(p, q)


class _Parser:
    """Recursive descent over ``+ - * ^ ( )``, rationals ``p/q`` and names.

    Juxtaposition (``2 x y``) is read as multiplication.
    """

    _tok = re.compile(r"\s*(?:(\d+(?:\.\d+)?(?:/\d+)?)|([A-Za-z_][A-Za-z_0-9]*)|(\*\*|[-+*^()]))")

    def __init__(self, text: str, variables: tuple[str, ...]):
        self.vars = variables
        self.toks = []
        pos = 0
        text = text.strip()
        while pos < len(text):
            m = self._tok.match(text, pos)
            if not m or m.end() == pos:
                raise ValueError(f"cannot parse polynomial near {text[pos:pos + 10]!r}")
            num, name, op = m.groups()
            if num is not None:
                self.toks.append(("num", num))
            elif name is not None:
                if name not in variables:
                    raise ValueError(f"unknown variable {name!r}")
                self.toks.append(("var", name))
            else:
                self.toks.append(("op", "^" if op == "**" else op))
            pos = m.end()
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self):
        t = self.peek()
        self.i += 1
        return t

    def parse(self) -> Polynomial:
        if not self.toks:
            raise ValueError("empty polynomial")
        p = self.expr()
        if self.i != len(self.toks):
            raise ValueError(f"unexpected token {self.peek()[1]!r}")
        return p

    def expr(self) -> Polynomial:
        kind, val = self.peek()
        if kind == "op" and val in "+-":
            self.take()
            p = self.term()
            if val == "-":
                p = -p
        else:
            p = self.term()
        while self.peek() in (("op", "+"), ("op", "-")):
            _, op = self.take()
            t = self.term()
            p = p + t if op == "+" else p - t
        return p

    def term(self) -> Polynomial:
        p = self.power()
        while True:
            kind, val = self.peek()
            if kind == "op" and val == "*":
                self.take()
                p = p * self.power()
            elif kind in ("num", "var") or (kind == "op" and val == "("):
                p = p * self.power()
            else:
                return p

    def power(self) -> Polynomial:
        base = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            kind, val = self.take()
            if kind != "num" or not val.isdigit():
                raise ValueError("exponent must be a non-negative integer")
            base = base ** int(val)
        return base

    def atom(self) -> Polynomial:
        kind, val = self.take()
        if kind == "num":
            return Polynomial.const(self.vars, Fraction(val))
        if kind == "var":
            return Polynomial.var(self.vars, val)
        if (kind, val) == ("op", "("):
            p = self.expr()
            if self.take() != ("op", ")"):
                raise ValueError("missing ')'")
            return p
        if kind == "op" and val == "-":
            return -self.power()
        raise ValueError(f"unexpected token {val!r}")
