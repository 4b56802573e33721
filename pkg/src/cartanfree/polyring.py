"""Exact polynomials in h_1..h_n, shift automorphisms, and shift operators.

Everything here is immutable and exact: coefficients are
:class:`fractions.Fraction` and polynomials are stored sparsely as a map
from exponent tuples to nonzero coefficients.

A shift vector ``s`` stands for the algebra automorphism
``sigma_s: h_k -> h_k - s_k``.  A :class:`PolyShiftOp` ``(A, s)`` acts on
columns of polynomials by ``v -> A . sigma_s(v)``; this is how every root
vector acts on a U(h)-free module.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from math import comb
from typing import Iterable, Mapping, Sequence

from .errors import InputError

Rational = Fraction
Exponent = tuple[int, ...]
ShiftVector = tuple[int, ...]


def as_rational(value) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise InputError(f"not a rational: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InputError(f"not a rational literal: {value!r}") from exc
    raise InputError(f"not an exact rational: {value!r} ({type(value).__name__})")


def rational_str(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _grlex_key(exp: Exponent):
    return (sum(exp), exp)


class MultiPoly:
    """Sparse polynomial with rational coefficients in ``n`` variables."""

    __slots__ = ("n", "_terms", "_hash")

    def __init__(self, n: int, terms: Mapping[Exponent, object] | None = None):
        if n < 0:
            raise InputError("variable count must be nonnegative")
        self.n = n
        clean: dict[Exponent, Fraction] = {}
        for exp, c in (terms or {}).items():
            exp = tuple(int(e) for e in exp)
            if len(exp) != n or any(e < 0 for e in exp):
                raise InputError(f"bad exponent vector {exp} for {n} variables")
            c = as_rational(c)
            if c:
                clean[exp] = clean.get(exp, Fraction(0)) + c
                if not clean[exp]:
                    del clean[exp]
        self._terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, n: int, terms: dict[Exponent, Fraction]) -> "MultiPoly":
        # terms already canonical (no zero coefficients, right length)
        p = cls.__new__(cls)
        p.n = n
        p._terms = terms
        p._hash = None
        return p

    @classmethod
    def const(cls, n: int, c=1) -> "MultiPoly":
        c = as_rational(c)
        return cls._raw(n, {(0,) * n: c} if c else {})

    @classmethod
    def zero(cls, n: int) -> "MultiPoly":
        return cls._raw(n, {})

    @classmethod
    def var(cls, n: int, i: int) -> "MultiPoly":
        """The variable h_{i+1} (0-based index ``i``)."""
        if not 0 <= i < n:
            raise InputError(f"variable index {i} out of range for n={n}")
        exp = tuple(1 if k == i else 0 for k in range(n))
        return cls._raw(n, {exp: Fraction(1)})

    @classmethod
    def linear(cls, n: int, coeffs: Sequence, const=0) -> "MultiPoly":
        """``sum coeffs[k] h_k + const``."""
        if len(coeffs) != n:
            raise InputError("coefficient vector has wrong length")
        terms = {tuple(1 if j == k else 0 for j in range(n)): c for k, c in enumerate(coeffs)}
        terms[(0,) * n] = const
        return cls(n, terms)

    # -- inspection ---------------------------------------------------------

    @property
    def terms(self) -> dict[Exponent, Fraction]:
        return dict(self._terms)

    def items(self) -> list[tuple[Exponent, Fraction]]:
        """Terms in canonical (descending graded-lex) order."""
        return sorted(self._terms.items(), key=lambda t: _grlex_key(t[0]), reverse=True)

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((sum(e) for e in self._terms), default=-1)

    def degree_in(self, i: int) -> int:
        return max((e[i] for e in self._terms), default=-1)

    def is_constant(self) -> bool:
        return all(not any(e) for e in self._terms)

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise InputError(f"{self} is not constant")
        return self._terms.get((0,) * self.n, Fraction(0))

    def leading(self) -> tuple[Exponent, Fraction]:
        if not self._terms:
            raise InputError("zero polynomial has no leading term")
        return max(self._terms.items(), key=lambda t: _grlex_key(t[0]))

    # -- arithmetic ---------------------------------------------------------

    def _coerce(self, other) -> "MultiPoly":
        if isinstance(other, MultiPoly):
            if other.n != self.n:
                raise InputError(f"variable count mismatch: {self.n} vs {other.n}")
            return other
        return MultiPoly.const(self.n, as_rational(other))

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self._terms)
        for e, c in other._terms.items():
            v = out.get(e, 0) + c
            if v:
                out[e] = v
            else:
                out.pop(e, None)
        return MultiPoly._raw(self.n, out)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly._raw(self.n, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, MultiPoly):
            c = as_rational(other)
            if not c:
                return MultiPoly.zero(self.n)
            return MultiPoly._raw(self.n, {e: c * v for e, v in self._terms.items()})
        other = self._coerce(other)
        out: dict[Exponent, Fraction] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return MultiPoly._raw(self.n, {e: c for e, c in out.items() if c})

    __rmul__ = __mul__

    def __truediv__(self, other):
        c = as_rational(other)
        if not c:
            raise ZeroDivisionError("division of polynomial by zero")
        return self * (1 / c)

    def __pow__(self, k: int):
        if k < 0:
            raise InputError("negative power of a polynomial")
        out = MultiPoly.const(self.n, 1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, MultiPoly):
            return self.n == other.n and self._terms == other._terms
        try:
            return self == MultiPoly.const(self.n, as_rational(other))
        except InputError:
            return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.n, frozenset(self._terms.items())))
        return self._hash

    # -- substitution -------------------------------------------------------

    def shift(self, s: Sequence[int]) -> "MultiPoly":
        return shift_apply(s, self)

    def evaluate(self, point: Sequence) -> Fraction:
        return poly_eval(self, point)

    def substitute(self, i: int, value) -> "MultiPoly":
        """Set h_{i+1} := value, keeping the variable count (partial evaluation)."""
        value = as_rational(value)
        out: dict[Exponent, Fraction] = {}
        for e, c in self._terms.items():
            e2 = e[:i] + (0,) + e[i + 1:]
            out[e2] = out.get(e2, 0) + c * value ** e[i]
        return MultiPoly._raw(self.n, {e: c for e, c in out.items() if c})

    def compose(self, images: Sequence["MultiPoly"]) -> "MultiPoly":
        """Ring homomorphism h_k -> images[k]."""
        if len(images) != self.n:
            raise InputError("need one image per variable")
        m = images[0].n if images else 0
        out = MultiPoly.zero(m)
        powers: dict[tuple[int, int], MultiPoly] = {}
        for e, c in self._terms.items():
            term = MultiPoly.const(m, c)
            for k, ek in enumerate(e):
                if ek:
                    if (k, ek) not in powers:
                        powers[(k, ek)] = images[k] ** ek
                    term = term * powers[(k, ek)]
            out = out + term
        return out

    # -- serialization ------------------------------------------------------

    def to_json(self) -> list[dict]:
        return [{"exponents": list(e), "coeff": rational_str(c)} for e, c in self.items()]

    @classmethod
    def from_json(cls, data, n: int | None = None) -> "MultiPoly":
        if not isinstance(data, list):
            raise InputError("polynomial must be a list of terms")
        terms: dict[Exponent, Fraction] = {}
        for t in data:
            try:
                exp = tuple(t["exponents"])
                c = t["coeff"]
            except (TypeError, KeyError) as exc:
                raise InputError(f"bad term {t!r}") from exc
            if not all(isinstance(x, int) for x in exp):
                raise InputError(f"exponents must be integers: {exp!r}")
            if n is None:
                n = len(exp)
            terms[exp] = terms.get(exp, 0) + as_rational(c if isinstance(c, (str, int)) else str(c))
        if n is None:
            raise InputError("cannot infer variable count of an empty polynomial")
        return cls(n, terms)

    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for e, c in self.items():
            mono = "*".join(
                f"h{k + 1}" if p == 1 else f"h{k + 1}^{p}" for k, p in enumerate(e) if p
            )
            mag = abs(c)
            if not mono:
                body = rational_str(mag)
            elif mag == 1:
                body = mono
            else:
                body = f"{rational_str(mag)}*{mono}"
            parts.append(("-" if c < 0 else "+", body))
        sign, body = parts[0]
        s = ("-" if sign == "-" else "") + body
        for sign, body in parts[1:]:
            s += f" {sign} {body}"
        return s

    def __repr__(self):
        return f"MultiPoly({self.n}, {str(self)!r})"


_binom_cache: dict[tuple[int, int], list[tuple[int, Fraction]]] = {}


def _shifted_power(e: int, s: int) -> list[tuple[int, Fraction]]:
    # (h - s)^e = sum_j C(e, j) h^j (-s)^(e-j)
    key = (e, s)
    if key not in _binom_cache:
        _binom_cache[key] = [
            (j, Fraction(comb(e, j) * (-s) ** (e - j))) for j in range(e + 1) if comb(e, j) * (-s) ** (e - j)
        ]
    return _binom_cache[key]


def shift_apply(s: Sequence[int], p: MultiPoly) -> MultiPoly:
    """Apply sigma_s: substitute h_k -> h_k - s_k and expand."""
    s = tuple(s)
    if len(s) != p.n:
        raise InputError(f"shift of length {len(s)} applied to polynomial in {p.n} variables")
    if not any(s):
        return p
    out: dict[Exponent, Fraction] = {}
    for e, c in p._terms.items():
        factors = [_shifted_power(ek, sk) if sk else [(ek, Fraction(1))] for ek, sk in zip(e, s)]
        for combo in itertools.product(*factors):
            exp = tuple(j for j, _ in combo)
            v = c
            for _, f in combo:
                v *= f
            out[exp] = out.get(exp, 0) + v
    return MultiPoly._raw(p.n, {e: c for e, c in out.items() if c})


def poly_eval(p: MultiPoly, point: Sequence) -> Fraction:
    """Exact evaluation at a rational point."""
    point = [as_rational(x) for x in point]
    if len(point) != p.n:
        raise InputError(f"point of length {len(point)} for polynomial in {p.n} variables")
    total = Fraction(0)
    for e, c in p._terms.items():
        v = c
        for x, k in zip(point, e):
            if k:
                v *= x ** k
        total += v
    return total


# -- polynomial matrices ------------------------------------------------------

PolyMatrix = tuple[tuple[MultiPoly, ...], ...]


def as_poly_matrix(rows, n: int) -> PolyMatrix:
    out = []
    for row in rows:
        out.append(tuple(x if isinstance(x, MultiPoly) else MultiPoly.const(n, x) for x in row))
    d = len(out)
    if any(len(r) != d for r in out):
        raise InputError("action matrix must be square")
    for r in out:
        for x in r:
            if x.n != n:
                raise InputError("matrix entry has wrong variable count")
    return tuple(out)


def identity_matrix(n: int, d: int) -> PolyMatrix:
    one, zero = MultiPoly.const(n, 1), MultiPoly.zero(n)
    return tuple(tuple(one if i == j else zero for j in range(d)) for i in range(d))


def zero_matrix(n: int, d: int) -> PolyMatrix:
    zero = MultiPoly.zero(n)
    return tuple(tuple(zero for _ in range(d)) for _ in range(d))


def mat_mul(a: PolyMatrix, b: PolyMatrix, n: int) -> PolyMatrix:
    d = len(a)
    out = []
    for i in range(d):
        row = []
        for j in range(d):
            acc = MultiPoly.zero(n)
            for k in range(d):
                if a[i][k] and b[k][j]:
                    acc = acc + a[i][k] * b[k][j]
            row.append(acc)
        out.append(tuple(row))
    return tuple(out)


def mat_map(f, a: PolyMatrix) -> PolyMatrix:
    return tuple(tuple(f(x) for x in row) for row in a)


def mat_add(a: PolyMatrix, b: PolyMatrix) -> PolyMatrix:
    return tuple(tuple(x + y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def mat_is_zero(a: PolyMatrix) -> bool:
    return all(x.is_zero() for row in a for x in row)


class PolyShiftOp:
    """The operator ``v -> A . sigma_s(v)`` on rank-d columns of polynomials."""

    __slots__ = ("matrix", "shift", "n", "d")

    def __init__(self, matrix, shift: Sequence[int], n: int | None = None):
        shift = tuple(int(x) for x in shift)
        if n is None:
            n = len(shift)
        if len(shift) != n:
            raise InputError(f"shift vector length {len(shift)} != variable count {n}")
        if isinstance(matrix, MultiPoly):
            matrix = ((matrix,),)
        self.matrix = as_poly_matrix(matrix, n)
        self.shift = shift
        self.n = n
        self.d = len(self.matrix)

    @classmethod
    def identity(cls, n: int, d: int = 1) -> "PolyShiftOp":
        return cls(identity_matrix(n, d), (0,) * n)

    @classmethod
    def zero(cls, n: int, d: int = 1, shift=None) -> "PolyShiftOp":
        return cls(zero_matrix(n, d), shift if shift is not None else (0,) * n)

    def _check(self, other: "PolyShiftOp"):
        if (self.n, self.d) != (other.n, other.d):
            raise InputError(
                f"operator shape mismatch: (n={self.n}, d={self.d}) vs (n={other.n}, d={other.d})"
            )

    def compose(self, other: "PolyShiftOp") -> "PolyShiftOp":
        return op_compose(self, other)

    __matmul__ = compose

    def __add__(self, other: "PolyShiftOp") -> "PolyShiftOp":
        self._check(other)
        if self.shift != other.shift:
            raise InputError("cannot add operators with different shifts; use OpSum")
        return PolyShiftOp(mat_add(self.matrix, other.matrix), self.shift, self.n)

    def __neg__(self):
        return PolyShiftOp(mat_map(lambda x: -x, self.matrix), self.shift, self.n)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "PolyShiftOp":
        c = as_rational(c)
        return PolyShiftOp(mat_map(lambda x: x * c, self.matrix), self.shift, self.n)

    def is_zero(self) -> bool:
        return mat_is_zero(self.matrix)

    def trace(self) -> MultiPoly:
        acc = MultiPoly.zero(self.n)
        for i in range(self.d):
            acc = acc + self.matrix[i][i]
        return acc

    def apply(self, column: Sequence[MultiPoly]) -> tuple[MultiPoly, ...]:
        """Act on a column vector of polynomials."""
        if len(column) != self.d:
            raise InputError("column has wrong length")
        shifted = [shift_apply(self.shift, v) for v in column]
        return tuple(
            sum((self.matrix[i][j] * shifted[j] for j in range(self.d)), MultiPoly.zero(self.n))
            for i in range(self.d)
        )

    def __eq__(self, other):
        if not isinstance(other, PolyShiftOp):
            return NotImplemented
        return self.shift == other.shift and self.matrix == other.matrix

    def __hash__(self):
        return hash((self.shift, self.matrix))

    def __repr__(self):
        if self.d == 1:
            return f"PolyShiftOp({self.matrix[0][0]}, shift={self.shift})"
        return f"PolyShiftOp(d={self.d}, shift={self.shift})"

    def to_json(self) -> dict:
        return {
            "shift": list(self.shift),
            "matrix": [[x.to_json() for x in row] for row in self.matrix],
        }


def op_compose(a: PolyShiftOp, b: PolyShiftOp) -> PolyShiftOp:
    """``a o b``: the operator v -> a(b(v)), i.e. (A . sigma_a(B), s_a + s_b)."""
    a._check(b)
    shifted_b = mat_map(lambda x: shift_apply(a.shift, x), b.matrix)
    return PolyShiftOp(
        mat_mul(a.matrix, shifted_b, a.n),
        tuple(x + y for x, y in zip(a.shift, b.shift)),
        a.n,
    )


class OpSum:
    """A formal sum of shift operators, one summand per distinct shift.

    Elements of U(g) generally do not have a single shift; a sum whose
    summands all have shift zero is an element acting within U(g)_0.
    """

    __slots__ = ("n", "d", "parts")

    def __init__(self, n: int, d: int, parts: Iterable[PolyShiftOp] = ()):
        self.n, self.d = n, d
        acc: dict[ShiftVector, PolyShiftOp] = {}
        for op in parts:
            if (op.n, op.d) != (n, d):
                raise InputError("summand shape mismatch")
            acc[op.shift] = acc[op.shift] + op if op.shift in acc else op
        self.parts = {s: op for s, op in sorted(acc.items()) if not op.is_zero()}

    @classmethod
    def of(cls, op: PolyShiftOp) -> "OpSum":
        return cls(op.n, op.d, [op])

    def __add__(self, other: "OpSum | PolyShiftOp") -> "OpSum":
        other = other if isinstance(other, OpSum) else OpSum.of(other)
        return OpSum(self.n, self.d, [*self.parts.values(), *other.parts.values()])

    def __neg__(self):
        return OpSum(self.n, self.d, [-op for op in self.parts.values()])

    def __sub__(self, other):
        other = other if isinstance(other, OpSum) else OpSum.of(other)
        return self + (-other)

    def scale(self, c) -> "OpSum":
        return OpSum(self.n, self.d, [op.scale(c) for op in self.parts.values()])

    def compose(self, other: "OpSum | PolyShiftOp") -> "OpSum":
        other = other if isinstance(other, OpSum) else OpSum.of(other)
        return OpSum(
            self.n, self.d, [op_compose(a, b) for a in self.parts.values() for b in other.parts.values()]
        )

    __matmul__ = compose

    def is_zero(self) -> bool:
        return not self.parts

    def shifts(self) -> list[ShiftVector]:
        return list(self.parts)

    def single(self) -> PolyShiftOp:
        """The unique summand, or the zero operator with shift 0 for an empty sum."""
        if not self.parts:
            return PolyShiftOp.zero(self.n, self.d)
        if len(self.parts) > 1:
            raise InputError(f"formal sum has {len(self.parts)} distinct shifts")
        return next(iter(self.parts.values()))

    def __eq__(self, other):
        if isinstance(other, PolyShiftOp):
            other = OpSum.of(other)
        if not isinstance(other, OpSum):
            return NotImplemented
        return self.parts == other.parts

    def __repr__(self):
        return f"OpSum({list(self.parts.values())!r})"
