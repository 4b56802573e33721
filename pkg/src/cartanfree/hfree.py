"""U(h)-free modules of finite rank given by root-indexed action tables.

A rank-d module is stored as ``root -> A_root`` with ``A_root`` a d x d
matrix of polynomials in h_1..h_n.  The root vector X_root acts by the
shift operator ``(A_root, root)``, i.e. ``v -> A_root . sigma_root(v)``,
and h_i acts on each coordinate by multiplication with h_i.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .errors import InputError, UnsupportedError
from .liealg import (
    AutomorphismTable,
    SpBasis,
    _rational_inverse,
    build_sl2,
    build_sp2n,
    diagonal_auto,
    root_label,
    sp_roots,
)
from .polyring import (
    MultiPoly,
    OpSum,
    PolyMatrix,
    PolyShiftOp,
    as_poly_matrix,
    as_rational,
    identity_matrix,
    mat_map,
    shift_apply,
)

Root = tuple[int, ...]

_HALF = Fraction(1, 2)


class HFreeModule:
    """Action table of a U(h)-free module of rank ``d`` over ``n`` Cartan variables."""

    def __init__(self, n: int, actions: Mapping[Root, object], name: str = ""):
        self.n = n
        acts: dict[Root, PolyMatrix] = {}
        d = None
        for root, mat in actions.items():
            root = tuple(int(x) for x in root)
            if len(root) != n or not any(root):
                raise InputError(f"bad root {root} for n={n}")
            if isinstance(mat, (MultiPoly, int, Fraction)):
                mat = [[mat]]
            mat = as_poly_matrix(mat, n)
            if d is None:
                d = len(mat)
            elif len(mat) != d:
                raise InputError("action matrices have inconsistent sizes")
            acts[root] = mat
        if d is None:
            raise InputError("empty action table")
        self.d = d
        self.actions = dict(sorted(acts.items(), reverse=True))
        self.name = name

    def poly(self, root: Root) -> MultiPoly:
        """The single action polynomial of a rank-1 module."""
        if self.d != 1:
            raise UnsupportedError("poly() needs a rank-1 module")
        return self.actions[tuple(root)][0][0]

    def op(self, root: Root) -> PolyShiftOp:
        root = tuple(root)
        if root not in self.actions:
            raise InputError(f"no action given for root {root_label(root)}")
        return PolyShiftOp(self.actions[root], root, self.n)

    def cartan_op(self, i: int) -> PolyShiftOp:
        """Multiplication by h_{i+1} on every coordinate."""
        return PolyShiftOp(
            mat_map(lambda x: x * MultiPoly.var(self.n, i), identity_matrix(self.n, self.d)),
            (0,) * self.n,
            self.n,
        )

    def element_op(self, basis: SpBasis, k: int) -> PolyShiftOp:
        r = basis.roots[k]
        if r is None:
            return self.cartan_op(basis.cartan.index(k))
        return self.op(r)

    def replace(self, root: Root, mat) -> "HFreeModule":
        acts = dict(self.actions)
        acts[tuple(root)] = mat
        return HFreeModule(self.n, acts, self.name)

    def __eq__(self, other):
        if not isinstance(other, HFreeModule):
            return NotImplemented
        return (self.n, self.d, self.actions) == (other.n, other.d, other.actions)

    def __hash__(self):
        return hash((self.n, self.d, tuple(self.actions.items())))

    def __repr__(self):
        return f"HFreeModule(n={self.n}, d={self.d}{', ' + self.name if self.name else ''})"

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "d": self.d,
            "actions": [
                {"root": list(r), "matrix": [[p.to_json() for p in row] for row in m]}
                for r, m in self.actions.items()
            ],
        }

    @classmethod
    def from_json(cls, data) -> "HFreeModule":
        if isinstance(data, str):
            data = json.loads(data)
        try:
            n, d, actions = int(data["n"]), int(data["d"]), data["actions"]
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"module JSON needs integer 'n', 'd' and an 'actions' list: {exc}") from exc
        table = {}
        for entry in actions:
            try:
                root = tuple(entry["root"])
                mat = [[MultiPoly.from_json(p, n) for p in row] for row in entry["matrix"]]
            except (KeyError, TypeError) as exc:
                raise InputError(f"bad action entry {entry!r}") from exc
            if len(mat) != d:
                raise InputError(f"matrix for root {root} is not {d}x{d}")
            if root in table:
                raise InputError(f"duplicate root {root}")
            table[root] = mat
        return cls(n, table)


def basis_for(module: HFreeModule) -> SpBasis:
    """The Lie algebra basis whose root set matches the module's table."""
    roots = frozenset(module.actions)
    if module.n == 1 and roots == {(1,), (-1,)}:
        return build_sl2()
    if roots == frozenset(sp_roots(module.n)):
        return build_sp2n(module.n)
    missing = frozenset(sp_roots(module.n)) - roots
    if missing:
        raise InputError(
            "action table does not cover the roots of sp(2n); missing "
            + ", ".join(root_label(r) for r in sorted(missing, reverse=True))
        )
    extra = roots - frozenset(sp_roots(module.n))
    raise InputError("action table has non-roots: " + ", ".join(map(str, sorted(extra))))


# -- constructors ----------------------------------------------------------------


def make_M0(n: int) -> HFreeModule:
    """The rank-1 module on C[h_1..h_n] with

    X_{2e_i}     -> (h_i - 1/2)(h_i - 3/2),   X_{-2e_i}    -> 1,
    X_{e_i+e_j}  -> (h_i - 1/2)(h_j - 1/2),   X_{-e_i-e_j} -> 1,
    X_{e_i-e_j}  -> (h_i - 1/2).
    """
    if not isinstance(n, int) or n < 1:
        raise InputError("n must be a positive integer")
    h = [MultiPoly.var(n, i) for i in range(n)]
    table = {}
    for r in sp_roots(n):
        pos = [k for k, c in enumerate(r) if c > 0]
        if not pos:
            table[r] = MultiPoly.const(n, 1)
        elif len(pos) == 1 and r[pos[0]] == 2:
            i = pos[0]
            table[r] = (h[i] - _HALF) * (h[i] - Fraction(3, 2))
        elif len(pos) == 2:
            i, j = pos
            table[r] = (h[i] - _HALF) * (h[j] - _HALF)
        else:
            table[r] = h[pos[0]] - _HALF
    return HFreeModule(n, table, "M0")


def make_sl2_example() -> HFreeModule:
    """sl(2) on C[h]: e . p = h p(h-1), f . p = -h p(h+1)."""
    h = MultiPoly.var(1, 0)
    return HFreeModule(1, {(1,): h, (-1,): -h}, "sl2")


# -- verification ----------------------------------------------------------------


@dataclass
class PairCheck:
    left: str
    right: str
    passed: bool
    residual: OpSum | None = None

    def to_json(self) -> dict:
        out = {"left": self.left, "right": self.right, "passed": self.passed}
        if self.residual is not None and not self.passed:
            out["residual"] = [op.to_json() for op in self.residual.parts.values()]
        return out


@dataclass
class VerificationReport:
    checks: list[PairCheck] = field(default_factory=list)

    @property
    def failures(self) -> list[PairCheck]:
        return [c for c in self.checks if not c.passed]

    @property
    def passed(self) -> bool:
        return not self.failures

    def __bool__(self):
        return self.passed

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "pairs_checked": len(self.checks),
            "failures": [c.to_json() for c in self.failures],
        }


def bracket_op(module: HFreeModule, basis: SpBasis, i: int, j: int) -> OpSum:
    """The operator of [b_i, b_j] assembled from structure constants."""
    acc = OpSum(module.n, module.d)
    for k, c in basis.bracket_coords(i, j).items():
        acc = acc + module.element_op(basis, k).scale(c)
    return acc


def verify_relations(module: HFreeModule, basis: SpBasis | None = None) -> VerificationReport:
    """Check op([x, y]) = op(x) op(y) - op(y) op(x) for every unordered basis pair."""
    basis = basis if basis is not None else basis_for(module)
    missing = basis.root_set - set(module.actions)
    if missing:
        raise InputError("table misses roots " + ", ".join(root_label(r) for r in sorted(missing)))
    extra = set(module.actions) - basis.root_set
    if extra:
        raise InputError("table has non-roots " + ", ".join(map(str, sorted(extra))))
    ops = [module.element_op(basis, k) for k in range(basis.dim)]
    report = VerificationReport()
    for i in range(basis.dim):
        for j in range(i + 1, basis.dim):
            lhs = OpSum.of(ops[i] @ ops[j]) - OpSum.of(ops[j] @ ops[i])
            residual = lhs - bracket_op(module, basis, i, j)
            ok = residual.is_zero()
            report.checks.append(
                PairCheck(basis.labels[i], basis.labels[j], ok, None if ok else residual)
            )
    return report


def word_action(module: HFreeModule, word, basis: SpBasis | None = None):
    """Operator of a U(g) element on the module.

    ``word`` is either a sequence of basis labels/indices (a monomial; the
    leftmost letter acts last) or a list of ``(coefficient, sequence)``
    pairs.  Returns a :class:`PolyShiftOp` when all summands share one shift
    and an :class:`OpSum` otherwise.
    """
    basis = basis if basis is not None else basis_for(module)
    terms = _normalize_word(word)
    total = OpSum(module.n, module.d)
    for coeff, letters in terms:
        op = PolyShiftOp.identity(module.n, module.d)
        for letter in letters:
            k = basis.index(letter) if isinstance(letter, str) else int(letter)
            op = op @ module.element_op(basis, k)
        total = total + op.scale(coeff)
    if len(total.parts) <= 1:
        if not total.parts:
            shifts = {_word_shift(basis, letters) for _, letters in terms}
            shift = shifts.pop() if len(shifts) == 1 else (0,) * module.n
            return PolyShiftOp.zero(module.n, module.d, shift)
        return total.single()
    return total


def _normalize_word(word) -> list[tuple[Fraction, list]]:
    word = list(word)
    if word and all(isinstance(t, tuple) and len(t) == 2 and not isinstance(t[1], str) for t in word):
        return [(as_rational(c), list(w)) for c, w in word]
    return [(Fraction(1), word)]


def _word_shift(basis: SpBasis, letters) -> Root:
    total = [0] * basis.n
    for letter in letters:
        k = basis.index(letter) if isinstance(letter, str) else int(letter)
        for t, c in enumerate(basis.weight_of(k)):
            total[t] += c
    return tuple(total)


# -- twisting ------------------------------------------------------------------


def twist(module: HFreeModule, auto: AutomorphismTable) -> HFreeModule:
    """The twisted module x . m := auto(x) m, renormalized so h_i acts by h_i.

    If auto acts on h by a linear map W, the twisted module is carried back to
    the standard presentation through the substitution rho(h_i) = auto(h_i).
    """
    if not auto.h_stable:
        raise InputError(f"{auto.name} does not stabilize the Cartan subalgebra")
    basis = auto.basis
    n = module.n
    if basis.n != n:
        raise InputError("automorphism and module have different rank")
    w = auto.cartan_matrix()
    w_inv = _rational_inverse(w)
    h = [MultiPoly.var(n, i) for i in range(n)]

    def lin(mat, i):
        acc = MultiPoly.zero(n)
        for j in range(n):
            acc = acc + h[j] * mat[j][i]
        return acc

    rho_inv = [lin(w_inv, i) for i in range(n)]
    identity = all(w[i][j] == (1 if i == j else 0) for i in range(n) for j in range(n))
    table = {}
    for alpha in module.actions:
        beta, c = auto.image_of_root(alpha)
        # rho^-1 sigma_beta rho = sigma_alpha  <=>  alpha_i = sum_j W[j][i] beta_j
        if any(sum(w[j][i] * beta[j] for j in range(n)) != alpha[i] for i in range(n)):
            raise InputError(f"{auto.name} is incompatible with root {root_label(alpha)}")
        mat = module.actions[beta]
        if identity:
            table[alpha] = mat_map(lambda p: p * c, mat)
        else:
            table[alpha] = mat_map(lambda p: p.compose(rho_inv) * c, mat)
    name = f"{module.name}^{auto.name}" if module.name else ""
    return HFreeModule(n, table, name)


def twist_diagonal(module: HFreeModule, c: Sequence) -> HFreeModule:
    """Shortcut for twisting by the automorphism scaling X_alpha by prod c_i^alpha_i."""
    return twist(module, diagonal_auto(basis_for(module), c))


# -- probes ----------------------------------------------------------------------


def whittaker_roots(n: int) -> list[Root]:
    """The roots -e_i - e_j, 1 <= i <= j <= n."""
    out = []
    for i in range(n):
        for j in range(i, n):
            r = [0] * n
            r[i] -= 1
            r[j] -= 1
            out.append(tuple(r))
    return out


def whittaker_locally_finite(module: HFreeModule) -> bool:
    """True iff every X_{-e_i-e_j} acts by a constant times a shift.

    Such operators never raise degree, so U(n) v is finite-dimensional for
    every v, where n is spanned by these root vectors.
    """
    if module.d != 1:
        raise UnsupportedError("Whittaker check is implemented for rank 1")
    return all(module.poly(r).is_constant() for r in whittaker_roots(module.n))


def reduction_path(module: HFreeModule, f: MultiPoly, max_steps: int) -> list[MultiPoly] | None:
    """Greedy degree reduction of ``f`` by operators 1 - X_{+-2e_i}/c.

    Only long-root vectors acting by a nonzero constant c are used; each step
    must drop the degree in the chosen variable.  Returns the sequence of
    polynomials ending in a nonzero constant, or None if that was not reached.
    """
    if module.d != 1:
        raise UnsupportedError("simplicity probe needs a rank-1 module")
    if f.is_zero():
        raise InputError("cannot probe the zero polynomial")
    n = module.n
    path = [f]
    current = f
    while not current.is_constant():
        if len(path) - 1 >= max_steps:
            return None
        i = max(range(n), key=lambda k: (current.degree_in(k), -k))
        step = None
        for sign in (-2, 2):
            root = tuple(sign if k == i else 0 for k in range(n))
            a = module.actions.get(root)
            if a is None or not a[0][0].is_constant() or a[0][0].is_zero():
                continue
            # (1 - X/c) f = f - sigma_root(f)
            cand = current - shift_apply(root, current)
            if not cand.is_zero() and cand.degree_in(i) < current.degree_in(i):
                step = cand
                break
        if step is None:
            return None
        current = step
        path.append(current)
    return path


def simplicity_probe(module: HFreeModule, f: MultiPoly, max_steps: int = 100) -> bool:
    """Whether f can be driven to a nonzero constant (a cyclicity certificate).

    False is inconclusive, not a proof that the module is reducible.
    """
    return reduction_path(module, f, max_steps) is not None


# -- tensor with the natural representation --------------------------------------


def natural_weights(basis: SpBasis) -> list[tuple[Fraction, ...]]:
    """Weight of the j-th standard vector of the defining representation."""
    return [
        tuple(Fraction(basis.elements[k][j, j]) for k in basis.cartan) for j in range(basis.size)
    ]


def tensor_natural(module: HFreeModule, basis: SpBasis | None = None) -> HFreeModule:
    """M tensor C^{2n} as a U(h)-free module of rank d * 2n.

    The free generator g_i (x) e_j carries a polynomial F with the
    identification F <-> sigma_{-mu_j}(F) g_i (x) e_j, which makes h act by
    plain multiplication again.  In these coordinates

        A'_alpha = blockdiag_j sigma_{mu_j}(A_alpha) + X_alpha (x) I_d.
    """
    basis = basis if basis is not None else basis_for(module)
    d, n = module.d, module.n
    size = basis.size
    mu = natural_weights(basis)
    zero = MultiPoly.zero(n)
    table = {}
    for alpha, mat in module.actions.items():
        big = [[zero] * (size * d) for _ in range(size * d)]
        for j in range(size):
            shifted = mat_map(lambda p: shift_apply(mu[j], p), mat)
            for a in range(d):
                for b in range(d):
                    big[j * d + a][j * d + b] = shifted[a][b]
        x = basis.root_vector(alpha)
        for jp in range(size):
            for j in range(size):
                if x[jp, j] != 0:
                    for a in range(d):
                        big[jp * d + a][j * d + a] = big[jp * d + a][j * d + a] + as_rational(x[jp, j])
        table[alpha] = big
    name = f"{module.name}(x)V" if module.name else ""
    return HFreeModule(n, table, name)


def from_polys(n: int, polys: Mapping[Root, MultiPoly], name: str = "") -> HFreeModule:
    return HFreeModule(n, {r: [[p]] for r, p in polys.items()}, name)


def perturb(module: HFreeModule, root: Root, factor=2) -> HFreeModule:
    """Scale the action of one root vector, typically to break the relations."""
    root = tuple(root)
    return module.replace(root, mat_map(lambda p: p * as_rational(factor), module.actions[root]))


def load_module(path: str) -> HFreeModule:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return HFreeModule.from_json(data)
