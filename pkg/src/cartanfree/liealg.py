"""Matrix realization of sp(2n), its roots, and h-stabilizing automorphisms.

The basis follows the fixed normalization

    X_{2e_i}      = 2 e_{i,n+i}          X_{-2e_i}     = -2 e_{n+i,i}
    X_{e_i+e_j}   = e_{i,n+j} + e_{j,n+i}
    X_{-e_i-e_j}  = -e_{n+i,j} - e_{n+j,i}
    X_{e_i-e_j}   = e_{i,j} - e_{n+j,n+i}
    h_i           = e_{i,i} - e_{n+i,n+i}

Roots are integer tuples in the epsilon coordinates.  A small sl(2)
fixture with h = (e11 - e22)/2 and roots +-1 is provided for
cross-checking against the rank-one case.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations

import numpy as np
import sympy

from .errors import CartanFreeError, InputError
from .polyring import as_rational, rational_str

Root = tuple[int, ...]
Coords = dict[int, Fraction]


def _zeros(size: int) -> np.ndarray:
    return np.full((size, size), Fraction(0), dtype=object)


def _unit(size: int, i: int, j: int, c=1) -> np.ndarray:
    m = _zeros(size)
    m[i, j] = Fraction(c)
    return m


def _identity(size: int) -> np.ndarray:
    m = _zeros(size)
    for i in range(size):
        m[i, i] = Fraction(1)
    return m


def _is_zero(m: np.ndarray) -> bool:
    return not any(x != 0 for x in m.flat)


def _equal(a: np.ndarray, b: np.ndarray) -> bool:
    return a.shape == b.shape and all(x == y for x, y in zip(a.flat, b.flat))


Sparse = dict[tuple[int, int], Fraction]


def _to_sparse(m: np.ndarray) -> Sparse:
    return {(r, c): as_rational(v) for (r, c), v in np.ndenumerate(m) if v != 0}


def _sp_mul(a: Sparse, b: Sparse) -> Sparse:
    rows: dict[int, list[tuple[int, Fraction]]] = {}
    for (k, c), v in b.items():
        rows.setdefault(k, []).append((c, v))
    out: Sparse = {}
    for (r, k), v in a.items():
        for c, w in rows.get(k, ()):
            out[(r, c)] = out.get((r, c), 0) + v * w
    return {key: v for key, v in out.items() if v}


def _sp_axpy(acc: Sparse, m: Sparse, c) -> Sparse:
    out = dict(acc)
    for key, v in m.items():
        out[key] = out.get(key, 0) + c * v
    return {key: v for key, v in out.items() if v}


def _sp_comm(a: Sparse, b: Sparse) -> Sparse:
    return _sp_axpy(_sp_mul(a, b), _sp_mul(b, a), -1)


def mat_exp_nilpotent(x: np.ndarray) -> np.ndarray:
    """exp(x) for a nilpotent rational matrix, as a finite sum."""
    size = x.shape[0]
    out = _identity(size)
    term = _identity(size)
    for k in range(1, size + 1):
        term = (term @ x) * Fraction(1, k)
        if _is_zero(term):
            return out
        out = out + term
    raise InputError("matrix is not nilpotent")


def _rational_inverse(m: list[list[Fraction]]) -> list[list[Fraction]]:
    sm = sympy.Matrix([[sympy.Rational(x.numerator, x.denominator) for x in row] for row in m])
    if sm.det() == 0:
        raise CartanFreeError("singular matrix")
    inv = sm.inv()
    return [[Fraction(int(inv[i, j].p), int(inv[i, j].q)) for j in range(inv.cols)] for i in range(inv.rows)]


def root_label(root: Root) -> str:
    """``(2,0) -> '2e1'``, ``(1,-1) -> 'e1-e2'``."""
    parts = []
    for k, c in enumerate(root):
        if not c:
            continue
        sign = "-" if c < 0 else "+"
        mag = "" if abs(c) == 1 else str(abs(c))
        parts.append(f"{sign}{mag}e{k + 1}")
    s = "".join(parts)
    return s[1:] if s.startswith("+") else s


_TERM = re.compile(r"([+-]?)(\d*)e(\d+)")


def parse_root(text: str, n: int) -> Root:
    text = text.replace(" ", "")
    pos, coords = 0, [0] * n
    while pos < len(text):
        m = _TERM.match(text, pos)
        if not m or m.end() == pos:
            raise InputError(f"cannot parse root {text!r}")
        sign = -1 if m.group(1) == "-" else 1
        mag = int(m.group(2)) if m.group(2) else 1
        k = int(m.group(3)) - 1
        if not 0 <= k < n:
            raise InputError(f"root {text!r} refers to e{k + 1} but n={n}")
        coords[k] += sign * mag
        pos = m.end()
    if not any(coords):
        raise InputError(f"empty root {text!r}")
    return tuple(coords)


def sp_roots(n: int) -> list[Root]:
    """All roots of C_n: +-2e_i and +-e_i+-e_j, i < j."""
    roots = []
    for i in range(n):
        for s in (2, -2):
            r = [0] * n
            r[i] = s
            roots.append(tuple(r))
    for i, j in combinations(range(n), 2):
        for si in (1, -1):
            for sj in (1, -1):
                r = [0] * n
                r[i], r[j] = si, sj
                roots.append(tuple(r))
    return sorted(roots, reverse=True)


class SpBasis:
    """A basis of a matrix Lie algebra split into Cartan part and root vectors.

    ``elements[k]`` is an exact square matrix; ``roots[k]`` is its root, or
    ``None`` for the Cartan elements, which come first and are dual to the
    epsilon coordinates.
    """

    def __init__(self, name, n, labels, matrices, roots, simple_roots, is_member):
        self.name = name
        self.n = n
        self.labels = tuple(labels)
        self.elements = tuple(matrices)
        self.roots = tuple(roots)
        self.simple_roots = tuple(simple_roots)
        self._is_member = is_member
        self.cartan = tuple(k for k, r in enumerate(self.roots) if r is None)
        self.root_index = {r: k for k, r in enumerate(self.roots) if r is not None}
        self._label_index = {lab: k for k, lab in enumerate(self.labels)}
        self._sparse = [_to_sparse(m) for m in self.elements]
        self._pivots = self._find_pivots()

    @property
    def dim(self) -> int:
        return len(self.elements)

    @property
    def size(self) -> int:
        return self.elements[0].shape[0]

    @property
    def root_set(self) -> frozenset[Root]:
        return frozenset(self.root_index)

    def _find_pivots(self) -> list[tuple[int, int]]:
        # Each element owns a matrix position where every other element vanishes;
        # this makes coordinate extraction a lookup.
        pivots = []
        for k, m in enumerate(self._sparse):
            for pos in sorted(m):
                if all(pos not in o for j, o in enumerate(self._sparse) if j != k):
                    pivots.append(pos)
                    break
            else:
                raise CartanFreeError(f"no pivot for basis element {self.labels[k]}")
        return pivots

    def index(self, label: str) -> int:
        """Basis index for a label such as ``'X(2e1)'``, ``'X(e2-e1)'`` or ``'h1'``."""
        label = label.strip()
        if label in self._label_index:
            return self._label_index[label]
        m = re.fullmatch(r"X\((.+)\)", label)
        if m:
            root = parse_root(m.group(1), self.n)
            if root in self.root_index:
                return self.root_index[root]
            raise InputError(f"{root_label(root)} is not a root of {self.name}")
        m = re.fullmatch(r"h(\d+)", label)
        if m and 1 <= int(m.group(1)) <= self.n:
            return self.cartan[int(m.group(1)) - 1]
        raise InputError(f"unknown basis label {label!r}")

    def root_vector(self, root: Root) -> np.ndarray:
        return self.elements[self.root_index[tuple(root)]]

    def is_member(self, m: np.ndarray) -> bool:
        return self._is_member(m)

    def expand(self, m: np.ndarray) -> Coords:
        """Exact coordinates of a matrix in this basis."""
        if m.shape != (self.size, self.size):
            raise InputError(f"matrix of shape {m.shape} is not {self.size}x{self.size}")
        return self._expand_sparse(_to_sparse(m))

    def _expand_sparse(self, m: Sparse) -> Coords:
        coords: Coords = {}
        recon: Sparse = {}
        for k, pos in enumerate(self._pivots):
            v = m.get(pos, 0) / self._sparse[k][pos]
            if v:
                coords[k] = v
                recon = _sp_axpy(recon, self._sparse[k], v)
        if recon != m:
            raise InputError("matrix is not in the span of the basis")
        return coords

    def _combine_sparse(self, coords: Coords) -> Sparse:
        out: Sparse = {}
        for k, c in coords.items():
            out = _sp_axpy(out, self._sparse[k], c)
        return out

    def combine(self, coords: Coords) -> np.ndarray:
        out = _zeros(self.size)
        for (r, c), v in self._combine_sparse(coords).items():
            out[r, c] = v
        return out

    def bracket(self, x: np.ndarray, y: np.ndarray) -> Coords:
        """Coordinates of xy - yx."""
        for m in (x, y):
            if not self.is_member(m):
                raise InputError(f"matrix is not an element of {self.name}")
        return self.expand(x @ y - y @ x)

    @cached_property
    def structure_constants(self) -> dict[tuple[int, int], Coords]:
        """``[b_i, b_j]`` in coordinates, for all ordered pairs i < j."""
        out = {}
        for i, j in combinations(range(self.dim), 2):
            out[(i, j)] = self._expand_sparse(_sp_comm(self._sparse[i], self._sparse[j]))
        return out

    def bracket_coords(self, i: int, j: int) -> Coords:
        if i == j:
            return {}
        if i < j:
            return self.structure_constants[(i, j)]
        return {k: -c for k, c in self.structure_constants[(j, i)].items()}

    def weight_of(self, k: int) -> Root:
        """Root of element k, with the zero vector for Cartan elements."""
        r = self.roots[k]
        return r if r is not None else (0,) * self.n

    def to_json(self) -> dict:
        def mat(m):
            return [[rational_str(as_rational(x)) for x in row] for row in m]

        return {
            "algebra": self.name,
            "n": self.n,
            "dim": self.dim,
            "basis": [
                {"label": lab, "root": list(r) if r is not None else None, "matrix": mat(m)}
                for lab, r, m in zip(self.labels, self.roots, self.elements)
            ],
            "structure_constants": [
                {
                    "left": self.labels[i],
                    "right": self.labels[j],
                    "bracket": {self.labels[k]: rational_str(c) for k, c in sorted(coords.items())},
                }
                for (i, j), coords in self.structure_constants.items()
                if coords
            ],
        }


def _symplectic_form(n: int) -> np.ndarray:
    s = _zeros(2 * n)
    for i in range(n):
        s[i, n + i] = Fraction(1)
        s[n + i, i] = Fraction(-1)
    return s


def build_sp2n(n: int) -> SpBasis:
    """The fixed basis of sp(2n): h_1..h_n followed by the 2n^2 root vectors."""
    if not isinstance(n, int) or n < 1:
        raise InputError(f"rank must be a positive integer, got {n!r}")
    size = 2 * n
    labels, mats, roots = [], [], []
    for i in range(n):
        labels.append(f"h{i + 1}")
        mats.append(_unit(size, i, i) - _unit(size, n + i, n + i))
        roots.append(None)
    for root in sp_roots(n):
        nz = [k for k, c in enumerate(root) if c]
        if len(nz) == 1:
            i = nz[0]
            m = _unit(size, i, n + i, 2) if root[i] > 0 else _unit(size, n + i, i, -2)
        else:
            i, j = nz
            a, b = root[i], root[j]
            if a > 0 and b > 0:
                m = _unit(size, i, n + j) + _unit(size, j, n + i)
            elif a < 0 and b < 0:
                m = -_unit(size, n + i, j) - _unit(size, n + j, i)
            else:
                p, q = (i, j) if a > 0 else (j, i)  # root e_p - e_q
                m = _unit(size, p, q) - _unit(size, n + q, n + p)
        labels.append(f"X({root_label(root)})")
        mats.append(m)
        roots.append(root)
    s = _symplectic_form(n)

    def is_member(a: np.ndarray) -> bool:
        return a.shape == (size, size) and _equal(s @ a, -(a.T @ s))

    simple = [tuple(1 if k == i else -1 if k == i + 1 else 0 for k in range(n)) for i in range(n - 1)]
    simple.append(tuple(2 if k == n - 1 else 0 for k in range(n)))
    return SpBasis("sp", n, labels, mats, roots, simple, is_member)


def build_sl2() -> SpBasis:
    """sl(2) with h = (e11 - e22)/2, e = e12 (root +1), f = e21 (root -1)."""
    h = _unit(2, 0, 0, Fraction(1, 2)) - _unit(2, 1, 1, Fraction(1, 2))
    e, f = _unit(2, 0, 1), _unit(2, 1, 0)

    def is_member(a: np.ndarray) -> bool:
        return a.shape == (2, 2) and a[0, 0] + a[1, 1] == 0

    return SpBasis("sl2", 1, ["h", "e", "f"], [h, e, f], [None, (1,), (-1,)], [(1,)], is_member)


def root_lattice_contains(basis: SpBasis, v) -> bool:
    """Membership in the integer span of the roots.

    For C_n this is the lattice of integer vectors with even coordinate sum;
    for the sl(2) fixture it is all of Z.
    """
    v = [as_rational(x) for x in v]
    if any(x.denominator != 1 for x in v):
        return False
    if all(sum(r) % 2 == 0 for r in basis.root_index):
        return sum(v) % 2 == 0
    return True


# -- automorphisms -------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class AutomorphismTable:
    """Images of every basis element, as coordinate maps in the same basis."""

    basis: SpBasis
    images: tuple[Coords, ...]
    h_stable: bool
    name: str = "auto"
    root_images: dict = field(default_factory=dict)

    @classmethod
    def from_images(cls, basis: SpBasis, images, name: str = "auto") -> "AutomorphismTable":
        images = tuple({k: as_rational(c) for k, c in img.items() if c} for img in images)
        if len(images) != basis.dim:
            raise InputError("need one image per basis element")
        mats = [basis._combine_sparse(img) for img in images]
        for i, j in combinations(range(basis.dim), 2):
            lhs = _sp_comm(mats[i], mats[j])
            rhs: Sparse = {}
            for k, c in basis.bracket_coords(i, j).items():
                rhs = _sp_axpy(rhs, mats[k], c)
            if lhs != rhs:
                raise InputError(
                    f"{name} does not preserve [{basis.labels[i]}, {basis.labels[j]}]"
                )
        rank = sympy.Matrix(
            [[sympy.Rational(img.get(k, 0).numerator, img.get(k, 0).denominator) if img.get(k) else 0
              for k in range(basis.dim)] for img in images]
        ).rank()
        if rank != basis.dim:
            raise InputError(f"{name} is not invertible")
        cartan = set(basis.cartan)
        h_stable = all(set(images[k]) <= cartan for k in basis.cartan)
        root_images = {}
        for r, k in basis.root_index.items():
            img = images[k]
            if len(img) == 1:
                (j, c), = img.items()
                if basis.roots[j] is not None:
                    root_images[r] = (basis.roots[j], c)
        return cls(basis, images, h_stable, name, root_images)

    def image_matrix(self, k: int) -> np.ndarray:
        return self.basis.combine(self.images[k])

    def cartan_matrix(self) -> list[list[Fraction]]:
        """``W`` with tau(h_i) = sum_j W[j][i] h_j (requires h-stability)."""
        if not self.h_stable:
            raise InputError(f"{self.name} does not stabilize the Cartan subalgebra")
        n = self.basis.n
        w = [[Fraction(0)] * n for _ in range(n)]
        for i, k in enumerate(self.basis.cartan):
            for j, c in self.images[k].items():
                w[self.basis.cartan.index(j)][i] = c
        return w

    def image_of_root(self, root: Root) -> tuple[Root, Fraction]:
        """``(beta, c)`` with tau(X_root) = c X_beta."""
        try:
            return self.root_images[tuple(root)]
        except KeyError:
            raise InputError(f"{self.name} does not map X({root_label(root)}) to a single root vector")

    def compose(self, other: "AutomorphismTable") -> "AutomorphismTable":
        """``self o other``."""
        if other.basis is not self.basis:
            raise InputError("automorphisms of different bases")
        images = []
        for img in other.images:
            acc: Coords = {}
            for j, c in img.items():
                for k, d in self.images[j].items():
                    acc[k] = acc.get(k, 0) + c * d
            images.append({k: v for k, v in acc.items() if v})
        return AutomorphismTable.from_images(self.basis, images, f"{self.name}*{other.name}")


def identity_auto(basis: SpBasis) -> AutomorphismTable:
    return AutomorphismTable.from_images(basis, [{k: Fraction(1)} for k in range(basis.dim)], "id")


def conjugation_auto(basis: SpBasis, g: np.ndarray, g_inv: np.ndarray, name: str) -> AutomorphismTable:
    if not _equal(g @ g_inv, _identity(basis.size)):
        raise InputError("g_inv is not the inverse of g")
    gs, gis = _to_sparse(g), _to_sparse(g_inv)
    images = [basis._expand_sparse(_sp_mul(_sp_mul(gs, m), gis)) for m in basis._sparse]
    return AutomorphismTable.from_images(basis, images, name)


def weyl_twist_auto(basis: SpBasis, k: int) -> AutomorphismTable:
    """phi_k = exp(ad X_k) exp(-ad X_{-k}) exp(ad X_k), k 1-based.

    Here X_k = X_{2e_k}/2 and X_{-k} = -X_{-2e_k}/2.  Since
    exp(ad x)(y) = exp(x) y exp(-x), phi_k is conjugation by
    g = exp(X_k) exp(-X_{-k}) exp(X_k).  Signs of the root-vector images are
    whatever the conjugation produces.
    """
    if basis.name != "sp":
        raise InputError("Weyl twists are defined for the sp(2n) basis only")
    if not 1 <= k <= basis.n:
        raise InputError(f"twist index {k} out of range 1..{basis.n}")
    long_root = tuple(2 if i == k - 1 else 0 for i in range(basis.n))
    xk = basis.root_vector(long_root) * Fraction(1, 2)
    xmk = basis.root_vector(tuple(-c for c in long_root)) * Fraction(-1, 2)
    g = mat_exp_nilpotent(xk) @ mat_exp_nilpotent(-xmk) @ mat_exp_nilpotent(xk)
    g_inv = mat_exp_nilpotent(-xk) @ mat_exp_nilpotent(xmk) @ mat_exp_nilpotent(-xk)
    return conjugation_auto(basis, g, g_inv, f"weyl:{k}")


def reflect(root: Root, k: int) -> Root:
    """w_k: negate coordinate k (1-based)."""
    return tuple(-c if i == k - 1 else c for i, c in enumerate(root))


def diag_twist_scalars(c, roots=None) -> dict[Root, Fraction]:
    """c_alpha = prod_i c_i^{alpha_i} for every root (default: roots of C_n)."""
    c = [as_rational(x) for x in c]
    if any(x == 0 for x in c):
        raise InputError("diagonal twist scalars must be nonzero")
    roots = sp_roots(len(c)) if roots is None else roots
    out = {}
    for r in roots:
        v = Fraction(1)
        for ci, ai in zip(c, r):
            v *= ci ** ai
        out[tuple(r)] = v
    return out


def diagonal_auto(basis: SpBasis, c) -> AutomorphismTable:
    """The automorphism fixing h pointwise and scaling X_alpha by c_alpha."""
    if len(c) != basis.n:
        raise InputError(f"need {basis.n} scalars, got {len(c)}")
    scal = diag_twist_scalars(c, basis.root_index)
    images = [
        {k: Fraction(1)} if r is None else {k: scal[r]} for k, r in enumerate(basis.roots)
    ]
    label = ",".join(rational_str(as_rational(x)) for x in c)
    return AutomorphismTable.from_images(basis, images, f"diag:{label}")


# -- Casimir -------------------------------------------------------------------


@dataclass(frozen=True)
class CasimirElement:
    """sum of coefficient * x_i x_j over basis-index words (i, j)."""

    terms: tuple[tuple[Fraction, tuple[int, int]], ...]

    def words(self):
        return [(c, list(w)) for c, w in self.terms]


def casimir(basis: SpBasis) -> CasimirElement:
    """Casimir element for the trace form tr(XY) of the matrix realization."""
    dim = basis.dim
    gram = [[as_rational(np.trace(a @ b)) for b in basis.elements] for a in basis.elements]
    try:
        inv = _rational_inverse(gram)
    except CartanFreeError as exc:
        raise CartanFreeError("trace form is degenerate") from exc
    # dual basis x^i = sum_j inv[j][i] x_j
    terms = []
    for i in range(dim):
        for j in range(dim):
            if inv[j][i]:
                terms.append((inv[j][i], (i, j)))
    return CasimirElement(tuple(terms))
