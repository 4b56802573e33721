"""Rank-1 h-free modules up to isomorphism: scaling, Weyl normalization, certificates.

Every verified rank-1 table for sp(2n) should become a rescaling of M0 after
twisting by the Weyl automorphisms phi_i for the coordinates i in which the
minimal submodule of W(M)[lambda_0] lies on the positive side.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import isqrt

import sympy

from .coherent import Box, composition_components, lambda0, support_graph, weighting
from .errors import InputError, ResourceError, UnsupportedError
from .hfree import HFreeModule, basis_for, from_polys, make_M0, twist, verify_relations
from .liealg import SpBasis, diag_twist_scalars, root_label, weyl_twist_auto
from .polyring import MultiPoly, rational_str, shift_apply

Root = tuple[int, ...]

MIN_BOX_STEPS = 3


def _rank_one(module: HFreeModule, what: str) -> None:
    if module.d != 1:
        raise UnsupportedError(f"{what} is only defined for rank-1 modules (got rank {module.d})")


def constant_ratio(p: MultiPoly, q: MultiPoly) -> Fraction | None:
    """c with q = c p, c nonzero, or None."""
    if p.is_zero() or q.is_zero():
        return None
    (mono_p, cp), (mono_q, cq) = p.leading(), q.leading()
    if mono_p != mono_q:
        return None
    c = cq / cp
    return c if p * c == q else None


def simple_coordinates(basis: SpBasis, root: Root) -> tuple[int, ...]:
    """Integer coordinates of ``root`` in the simple roots of ``basis``."""
    mat = sympy.Matrix([list(s) for s in basis.simple_roots]).T
    sol = mat.solve(sympy.Matrix(list(root)))
    out = []
    for x in sol:
        x = sympy.Rational(x)
        if x.q != 1:
            raise InputError(f"{root_label(root)} is not in the root lattice")
        out.append(int(x.p))
    return tuple(out)


def _rational_sqrt(x: Fraction) -> Fraction | None:
    if x <= 0:
        return None
    a, b = isqrt(x.numerator), isqrt(x.denominator)
    if a * a == x.numerator and b * b == x.denominator:
        return Fraction(a, b)
    return None


@dataclass
class ScalingCertificate:
    """A'_alpha = scalars[alpha] * A_alpha for every root, multiplicatively consistent.

    ``witness`` is c in (Q*)^n with scalars[alpha] = prod c_i^alpha_i when a
    rational one exists (the positive square root is taken on the last
    coordinate); over C one always exists.
    """

    scalars: dict[Root, Fraction]
    simple: dict[Root, Fraction]
    witness: tuple[Fraction, ...] | None

    def __bool__(self):
        return True

    def inverse(self) -> "ScalingCertificate":
        w = None if self.witness is None else tuple(1 / x for x in self.witness)
        return ScalingCertificate(
            {r: 1 / c for r, c in self.scalars.items()}, {r: 1 / c for r, c in self.simple.items()}, w
        )

    def to_json(self) -> dict:
        return {
            "equivalent": True,
            "scalars": {root_label(r): rational_str(c) for r, c in self.scalars.items()},
            "simple": {root_label(r): rational_str(c) for r, c in self.simple.items()},
            "witness": None if self.witness is None else [rational_str(x) for x in self.witness],
        }


@dataclass
class ScalingFailure:
    reason: str
    root: Root | None = None

    def __bool__(self):
        return False

    def to_json(self) -> dict:
        return {
            "equivalent": False,
            "reason": self.reason,
            "root": None if self.root is None else root_label(self.root),
        }


def _witness(basis: SpBasis, simple: dict[Root, Fraction], scalars: dict[Root, Fraction]):
    n = basis.n
    if basis.name == "sl2":
        c = (simple[basis.simple_roots[0]],)
    else:
        last = _rational_sqrt(simple[basis.simple_roots[-1]])
        if last is None:
            return None
        c = [Fraction(0)] * n
        c[n - 1] = last
        for i in range(n - 2, -1, -1):
            c[i] = simple[basis.simple_roots[i]] * c[i + 1]
        c = tuple(c)
    if diag_twist_scalars(c, list(scalars)) != scalars:
        return None
    return c


def scaling_equivalent(m: HFreeModule, m_prime: HFreeModule) -> ScalingCertificate | ScalingFailure:
    """Whether m' is m with every A_alpha rescaled by a multiplicative system c_alpha."""
    _rank_one(m, "scaling equivalence")
    _rank_one(m_prime, "scaling equivalence")
    if m.n != m_prime.n:
        raise InputError("modules of different rank n")
    if set(m.actions) != set(m_prime.actions):
        raise InputError("modules over different root systems")
    basis = basis_for(m)
    scalars = {}
    for r in m.actions:
        p, q = m.poly(r), m_prime.poly(r)
        if p.is_zero() and q.is_zero():
            return ScalingFailure("both actions vanish", r)
        c = constant_ratio(p, q)
        if c is None:
            return ScalingFailure("not a nonzero constant multiple", r)
        scalars[r] = c
    simple = {s: scalars[s] for s in basis.simple_roots}
    for r, c in scalars.items():
        predicted = Fraction(1)
        for s, k in zip(basis.simple_roots, simple_coordinates(basis, r)):
            predicted *= simple[s] ** k
        if predicted != c:
            return ScalingFailure("scalars are not multiplicative", r)
    return ScalingCertificate(scalars, simple, _witness(basis, simple, scalars))


def apply_scaling(module: HFreeModule, scalars: dict[Root, Fraction], invert: bool = False) -> HFreeModule:
    polys = {}
    for r in module.actions:
        c = scalars[r]
        polys[r] = module.poly(r) * (1 / c if invert else c)
    return from_polys(module.n, polys, module.name)


# -- minimal submodule ------------------------------------------------------------


def _check_box(box: Box, n: int) -> None:
    centre = lambda0(n)
    for (lo, hi), x in zip(box, centre):
        if lo > x - MIN_BOX_STEPS or hi < x + MIN_BOX_STEPS:
            raise InputError(f"box must reach {MIN_BOX_STEPS} steps from lambda_0 in each direction")


def min_submodule_support_signs(module: HFreeModule, box: Box | None = None) -> tuple[str, ...]:
    """Half-space signs of the minimal nonzero submodule of W(M)[lambda_0].

    The minimal submodule is read off the window as the unique sink among
    interior components; failure to find exactly one, or a component that
    straddles a coordinate hyperplane, raises ResourceError.
    """
    _rank_one(module, "minimal-support analysis")
    basis = basis_for(module)
    if basis.name != "sp":
        raise UnsupportedError("minimal-support analysis needs the sp(2n) basis")
    n = module.n
    graph = support_graph(weighting(module, basis), lambda0(n), box)
    _check_box(graph.box, n)
    dag = composition_components(graph)
    sinks = dag.sinks()
    if len(sinks) != 1:
        raise ResourceError(
            f"found {len(sinks)} minimal components in the window; enlarge the box"
        )
    signs = dag.signs()[sinks[0]]
    if "0" in signs:
        raise ResourceError("minimal component straddles a coordinate hyperplane; enlarge the box")
    return signs


# -- canonicalization ---------------------------------------------------------------


@dataclass
class TwistStep:
    index: int
    name: str
    signs: dict[Root, Fraction]

    def to_json(self) -> dict:
        return {
            "index": self.index,
            "name": self.name,
            "signs": {root_label(r): rational_str(c) for r, c in self.signs.items()},
        }


@dataclass
class CanonicalizationResult:
    omega: tuple[int, ...]
    signs: tuple[str, ...]
    twists: list[TwistStep]
    certificate: ScalingCertificate | ScalingFailure
    normalized: HFreeModule = field(repr=False)

    @property
    def verdict(self) -> bool:
        return bool(self.certificate)

    def replay(self, module: HFreeModule) -> HFreeModule:
        """Apply the recorded twists and undo the scalars; gives M0 on success."""
        if not self.verdict:
            raise InputError("no certificate to replay")
        basis = basis_for(module)
        out = module
        for step in self.twists:
            out = twist(out, weyl_twist_auto(basis, step.index))
        return apply_scaling(out, self.certificate.scalars, invert=True)

    def to_json(self) -> dict:
        return {
            "omega": list(self.omega),
            "min_support_signs": "".join(self.signs),
            "twists": [t.to_json() for t in self.twists],
            "certificate": self.certificate.to_json(),
            "verdict": self.verdict,
            "statement": "isomorphic over C to a twist of M0" if self.verdict else "not matched to M0",
        }


def canonicalize(module: HFreeModule, box: Box | None = None, check: bool = True) -> CanonicalizationResult:
    """Normalize a rank-1 table by Weyl twists, then match it to M0 by scaling."""
    _rank_one(module, "canonicalization")
    basis = basis_for(module)
    if basis.name != "sp":
        raise UnsupportedError("canonicalization needs the sp(2n) basis")
    if check:
        report = verify_relations(module, basis)
        if not report:
            bad = report.failures[0]
            raise InputError(f"table fails the relation [{bad.left}, {bad.right}]")
    signs = min_submodule_support_signs(module, box)
    omega = tuple(i + 1 for i, s in enumerate(signs) if s == "+")
    current = module
    steps = []
    for i in omega:
        auto = weyl_twist_auto(basis, i)
        current = twist(current, auto)
        steps.append(TwistStep(i, auto.name, {r: c for r, (_, c) in auto.root_images.items()}))
    cert = scaling_equivalent(make_M0(module.n), current)
    return CanonicalizationResult(omega, signs, steps, cert, current)


# -- structure checks on normalized tables ---------------------------------------------


def factor_structure(module: HFreeModule) -> list[tuple[str, bool]]:
    """(h_i - 1/2) | A_{2e_i}, A_{e_i+e_j}, A_{e_i-e_j} and (h_i - 3/2) | A_{2e_i}.

    Divisibility by h_i - a is tested as vanishing under h_i := a.
    """
    _rank_one(module, "factor checks")
    out = []
    for r, p in module.actions.items():
        pos = [k for k, c in enumerate(r) if c > 0]
        if not pos:
            continue
        i = pos[0]
        half = p[0][0].substitute(i, Fraction(1, 2))
        out.append((f"(h{i + 1}-1/2) | A_{root_label(r)}", half.is_zero()))
        if r[i] == 2:
            three = p[0][0].substitute(i, Fraction(3, 2))
            out.append((f"(h{i + 1}-3/2) | A_{root_label(r)}", three.is_zero()))
    return out


@dataclass
class ProductCheck:
    name: str
    product: MultiPoly
    expected: MultiPoly

    @property
    def holds(self) -> bool:
        return self.product == self.expected


def root_product(module: HFreeModule, alpha: Root) -> MultiPoly:
    """A_alpha * sigma_alpha(A_{-alpha}): the action of X_alpha X_{-alpha} on 1."""
    neg = tuple(-a for a in alpha)
    return module.poly(alpha) * shift_apply(alpha, module.poly(neg))


def product_identities(module: HFreeModule) -> list[ProductCheck]:
    """The three expected products for a table normalized to M0:

    A_{2e_i} s(A_{-2e_i})       = (h_i - 1/2)(h_i - 3/2)
    A_{e_i+e_j} s(A_{-e_i-e_j}) = (h_i - 1/2)(h_j - 1/2)
    A_{e_i-e_j} s(A_{-e_i+e_j}) = (h_i - 1/2)
    """
    _rank_one(module, "product identities")
    n = module.n
    h = [MultiPoly.var(n, i) for i in range(n)]
    half, three = Fraction(1, 2), Fraction(3, 2)
    out = []
    for i in range(n):
        r = tuple(2 if k == i else 0 for k in range(n))
        out.append(ProductCheck(f"long {i + 1}", root_product(module, r), (h[i] - half) * (h[i] - three)))
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            plus = tuple(1 if k in (i, j) else 0 for k in range(n))
            minus = tuple(1 if k == i else -1 if k == j else 0 for k in range(n))
            if i < j:
                out.append(
                    ProductCheck(f"sum {i + 1},{j + 1}", root_product(module, plus), (h[i] - half) * (h[j] - half))
                )
            out.append(ProductCheck(f"difference {i + 1},{j + 1}", root_product(module, minus), h[i] - half))
    return out
