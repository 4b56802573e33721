"""The weighting functor on h-free modules and finite windows onto the result.

For a U(h)-free module M the weight module W(M) has a d-dimensional
weight space at every lambda, and X_alpha maps W(M)_lambda to
W(M)_{lambda+alpha} by the matrix A_alpha evaluated at lambda + alpha.
The family is never materialized; :class:`CoherentAction` holds the
coefficient function, and :func:`support_graph` lays a bounded piece of one
coset lambda + Q out as a directed graph for submodule analysis.
"""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import networkx as nx

from .errors import InputError, ResourceError, UnsupportedError
from .hfree import HFreeModule, basis_for, make_M0, word_action
from .liealg import SpBasis, root_label, root_lattice_contains, sp_roots
from .polyring import MultiPoly, OpSum, as_rational, poly_eval, rational_str, shift_apply

Root = tuple[int, ...]
WeightPoint = tuple[Fraction, ...]
Box = tuple[tuple[Fraction, Fraction], ...]
CoeffMatrix = tuple[tuple[Fraction, ...], ...]

DEFAULT_NODE_CAP = 100_000
DEFAULT_RADIUS = Fraction(9, 2)


def default_node_cap() -> int:
    raw = os.environ.get("CARTANFREE_NODE_CAP")
    if raw is None:
        return DEFAULT_NODE_CAP
    try:
        cap = int(raw)
    except ValueError:
        raise InputError(f"CARTANFREE_NODE_CAP must be an integer, got {raw!r}")
    if cap < 1:
        raise InputError("CARTANFREE_NODE_CAP must be positive")
    return cap


def weight_point(values: Iterable) -> WeightPoint:
    return tuple(as_rational(v) for v in values)


def lambda0(n: int) -> WeightPoint:
    """-1/2 (e_1 + ... + e_n)."""
    return (Fraction(-1, 2),) * n


def fmt_weight(lam: Sequence[Fraction]) -> str:
    return "(" + ",".join(rational_str(x) for x in lam) + ")"


# -- coefficients ------------------------------------------------------------------


def weight_coeff(module: HFreeModule, alpha: Root, lam: Sequence) -> CoeffMatrix:
    """Matrix of X_alpha: W(M)_lam -> W(M)_{lam+alpha}, i.e. A_alpha(lam + alpha)."""
    alpha = tuple(alpha)
    lam = weight_point(lam)
    if len(lam) != module.n:
        raise InputError(f"weight of length {len(lam)} for n={module.n}")
    target = tuple(l + a for l, a in zip(lam, alpha))
    mat = module.op(alpha).matrix
    return tuple(tuple(poly_eval(p, target) for p in row) for row in mat)


def weight_coeff_symbolic(module: HFreeModule, alpha: Root) -> tuple[tuple[MultiPoly, ...], ...]:
    """A_alpha(lam + alpha) as polynomials in lam (lam_i written as h_i)."""
    alpha = tuple(alpha)
    neg = tuple(-a for a in alpha)
    return tuple(tuple(shift_apply(neg, p) for p in row) for row in module.op(alpha).matrix)


def published_weight_table(n: int) -> dict[Root, MultiPoly]:
    """Coefficients of X_alpha on v_lam in W(M0), written in lam."""
    lam = [MultiPoly.var(n, i) for i in range(n)]
    half, three_half = Fraction(1, 2), Fraction(3, 2)
    table = {}
    for r in sp_roots(n):
        pos = [k for k, c in enumerate(r) if c > 0]
        if not pos:
            table[r] = MultiPoly.const(n, 1)
        elif len(pos) == 1 and r[pos[0]] == 2:
            i = pos[0]
            table[r] = (lam[i] + three_half) * (lam[i] + half)
        elif len(pos) == 2:
            i, j = pos
            table[r] = (lam[i] + half) * (lam[j] + half)
        else:
            table[r] = lam[pos[0]] + half
    return table


def verify_weighting_table(n: int, table: Mapping[Root, MultiPoly] | None = None) -> bool:
    """Symbolic comparison of W(M0)'s coefficient function with ``table``."""
    if n < 1:
        raise InputError("n must be positive")
    table = published_weight_table(n) if table is None else table
    m0 = make_M0(n)
    if set(table) != set(m0.actions):
        return False
    return all(weight_coeff_symbolic(m0, r)[0][0] == table[r] for r in m0.actions)


def _is_zero_matrix(m: CoeffMatrix) -> bool:
    return all(x == 0 for row in m for x in row)


@dataclass(frozen=True, eq=False)
class CoherentAction:
    """Coefficient function of W(M), optionally with semisimplification zeros.

    ``zero_overrides[beta]`` lists polynomials in lam; X_beta is forced to act
    by zero on W_lam whenever one of them vanishes at lam.
    """

    module: HFreeModule
    basis: SpBasis
    zero_overrides: Mapping[Root, tuple[MultiPoly, ...]] = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.module.n

    @property
    def d(self) -> int:
        return self.module.d

    @property
    def roots(self) -> list[Root]:
        return list(self.module.actions)

    def overridden(self, alpha: Root, lam: WeightPoint) -> bool:
        return any(poly_eval(z, lam) == 0 for z in self.zero_overrides.get(tuple(alpha), ()))

    def coefficient(self, alpha: Root, lam: Sequence) -> CoeffMatrix:
        lam = weight_point(lam)
        if self.overridden(alpha, lam):
            return tuple((Fraction(0),) * self.d for _ in range(self.d))
        return weight_coeff(self.module, alpha, lam)

    def element_matrix(self, k: int, lam: WeightPoint) -> tuple[CoeffMatrix, Root]:
        """Matrix of basis element k on W_lam and the weight it adds."""
        r = self.basis.roots[k]
        if r is None:
            v = lam[self.basis.cartan.index(k)]
            return tuple(tuple(v if a == b else Fraction(0) for b in range(self.d)) for a in range(self.d)), (0,) * self.n
        return self.coefficient(r, lam), r


def weighting(obj, basis: SpBasis | None = None) -> CoherentAction:
    """W applied to an h-free module, or to an already weighted family.

    A CoherentAction is a weight module, and W fixes weight modules, so the
    second case returns the same coefficient data.
    """
    if isinstance(obj, CoherentAction):
        return CoherentAction(obj.module, obj.basis, dict(obj.zero_overrides))
    if isinstance(obj, HFreeModule):
        return CoherentAction(obj, basis if basis is not None else basis_for(obj))
    raise InputError(f"cannot weight a {type(obj).__name__}")


def semisimplify(action: CoherentAction) -> CoherentAction:
    """Degree-1 semisimplification.

    Wherever X_alpha acts by zero on W_lam, X_{-alpha} is set to zero on
    W_{lam+alpha}.  X_alpha vanishes on W_lam iff A_alpha(lam+alpha) = 0, so
    X_beta is zeroed on W_lam exactly where A_{-beta}(lam) = 0.
    """
    if action.d != 1:
        raise UnsupportedError("semisimplification is only implemented for degree 1")
    overrides = {r: tuple(zs) for r, zs in action.zero_overrides.items()}
    for beta in action.roots:
        neg = tuple(-b for b in beta)
        z = action.module.poly(neg)
        if z.is_constant() and not z.is_zero():
            continue  # never vanishes
        current = overrides.get(beta, ())
        if z not in current:
            overrides[beta] = current + (z,)
    return CoherentAction(action.module, action.basis, overrides)


def evaluate_word(action: CoherentAction, word: Sequence, lam: Sequence) -> CoeffMatrix:
    """Matrix of a basis-letter word on W_lam, by multiplying weight coefficients.

    Letters act right to left, matching word_action.
    """
    lam = weight_point(lam)
    d = action.d
    acc = tuple(tuple(Fraction(int(a == b)) for b in range(d)) for a in range(d))
    cur = lam
    for letter in reversed(list(word)):
        k = action.basis.index(letter) if isinstance(letter, str) else int(letter)
        m, wt = action.element_matrix(k, cur)
        acc = tuple(
            tuple(sum((m[a][c] * acc[c][b] for c in range(d)), Fraction(0)) for b in range(d))
            for a in range(d)
        )
        cur = tuple(x + y for x, y in zip(cur, wt))
    return acc


def trace_polynomial(module: HFreeModule, word, basis: SpBasis | None = None) -> MultiPoly:
    """f_u with Tr(u | W(M)_lam) = f_u(lam), for u of total shift zero."""
    op = word_action(module, word, basis)
    if isinstance(op, OpSum) or any(op.shift):
        raise InputError("element is not in U(g)_0 (nonzero total shift)")
    return op.trace()


def coset_test(mu: Sequence, i: int) -> bool:
    """Whether mu_i lies in 1/2 + Z (i is 1-based)."""
    x = as_rational(list(mu)[i - 1])
    return (x - Fraction(1, 2)).denominator == 1


# -- support graphs ------------------------------------------------------------------


def default_box(mu: Sequence, radius=DEFAULT_RADIUS) -> Box:
    """[c_i - r, c_i + r] with c_i the integer nearest mu_i (halves round up)."""
    radius = as_rational(radius)
    out = []
    for x in weight_point(mu):
        c = math.floor(x + Fraction(1, 2))
        out.append((c - radius, c + radius))
    return tuple(out)


def parse_box(text: str, n: int) -> Box:
    """``"lo:hi"`` for every coordinate, or ``"lo:hi,lo:hi,..."``."""
    parts = [p for p in text.split(",") if p]
    if len(parts) == 1:
        parts = parts * n
    if len(parts) != n:
        raise InputError(f"box needs 1 or {n} intervals, got {len(parts)}")
    out = []
    for p in parts:
        try:
            lo, hi = p.split(":")
        except ValueError:
            raise InputError(f"interval {p!r} is not of the form lo:hi")
        lo, hi = as_rational(lo), as_rational(hi)
        if lo > hi:
            raise InputError(f"empty interval {p!r}")
        out.append((lo, hi))
    return tuple(out)


@dataclass
class SupportGraph:
    mu: WeightPoint
    box: Box
    nodes: list[WeightPoint]
    edges: list[tuple[WeightPoint, Root, CoeffMatrix]]
    zero_edges: list[tuple[WeightPoint, Root]]
    interior: frozenset[WeightPoint]

    @property
    def boundary(self) -> frozenset[WeightPoint]:
        return frozenset(self.nodes) - self.interior

    def successors(self) -> dict[WeightPoint, list[WeightPoint]]:
        out = {v: [] for v in self.nodes}
        for lam, alpha, _ in self.edges:
            out[lam].append(tuple(l + a for l, a in zip(lam, alpha)))
        return out

    def digraph(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(self.nodes)
        for lam, alpha, _ in self.edges:
            g.add_edge(lam, tuple(l + a for l, a in zip(lam, alpha)))
        return g

    def to_json(self, components: "ComponentDAG | None" = None) -> dict:
        out = {
            "mu": [rational_str(x) for x in self.mu],
            "box": [[rational_str(lo), rational_str(hi)] for lo, hi in self.box],
            "nodes": [
                {"weight": [rational_str(x) for x in v], "interior": v in self.interior}
                for v in self.nodes
            ],
            "edges": [
                {
                    "source": [rational_str(x) for x in lam],
                    "root": list(alpha),
                    "coeff": [[rational_str(x) for x in row] for row in c],
                }
                for lam, alpha, c in self.edges
            ],
        }
        if components is not None:
            out["components"] = components.to_json()
        return out

    def to_dot(self, show_zero: bool = False, components: "ComponentDAG | None" = None) -> str:
        ids = {v: f"n{k}" for k, v in enumerate(self.nodes)}
        comp_of = {}
        if components is not None:
            for c, members in enumerate(components.components):
                for v in members:
                    comp_of[v] = c
        lines = ["digraph support {"]
        for v in self.nodes:
            attrs = [f'label="{fmt_weight(v)}"']
            if v not in self.interior:
                attrs.append("style=dotted")
            if v in comp_of:
                attrs.append(f'component="{comp_of[v]}"')
            lines.append(f"  {ids[v]} [{', '.join(attrs)}];")
        for lam, alpha, c in self.edges:
            tgt = tuple(l + a for l, a in zip(lam, alpha))
            lines.append(f'  {ids[lam]} -> {ids[tgt]} [label="{root_label(alpha)}"];')
        if show_zero:
            for lam, alpha in self.zero_edges:
                tgt = tuple(l + a for l, a in zip(lam, alpha))
                lines.append(f'  {ids[lam]} -> {ids[tgt]} [label="0:{root_label(alpha)}", style=dashed];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def _in_box(lam: WeightPoint, box: Box) -> bool:
    return all(lo <= x <= hi for x, (lo, hi) in zip(lam, box))


def support_graph(
    action: CoherentAction,
    mu: Sequence,
    box: Box | None = None,
    node_cap: int | None = None,
) -> SupportGraph:
    """Points of mu + Q inside ``box`` with an edge lam -> lam+alpha per nonzero coefficient."""
    mu = weight_point(mu)
    n = action.n
    if len(mu) != n:
        raise InputError(f"mu has length {len(mu)}, expected {n}")
    box = default_box(mu) if box is None else tuple((as_rational(lo), as_rational(hi)) for lo, hi in box)
    if len(box) != n:
        raise InputError("box dimension mismatch")
    if not _in_box(mu, box):
        raise InputError(f"box does not contain mu = {fmt_weight(mu)}")
    cap = default_node_cap() if node_cap is None else node_cap
    axes = []
    for x, (lo, hi) in zip(mu, box):
        k_lo = math.ceil(lo - x)
        k_hi = math.floor(hi - x)
        axes.append([x + k for k in range(k_lo, k_hi + 1)])
    nodes = []
    for lam in itertools.product(*axes):
        diff = [a - b for a, b in zip(lam, mu)]
        if root_lattice_contains(action.basis, diff):
            nodes.append(lam)
            if len(nodes) > cap:
                raise ResourceError(f"support graph exceeds node cap {cap}; shrink the box or raise the cap")
    nodes.sort()
    node_set = set(nodes)
    roots = action.roots
    edges, zero_edges = [], []
    interior = set()
    for lam in nodes:
        inside = True
        for alpha in roots:
            tgt = tuple(l + a for l, a in zip(lam, alpha))
            if tgt not in node_set:
                inside = False
                continue
            c = action.coefficient(alpha, lam)
            if _is_zero_matrix(c):
                zero_edges.append((lam, alpha))
            else:
                edges.append((lam, alpha, c))
        if inside:
            interior.add(lam)
    return SupportGraph(mu, box, nodes, edges, zero_edges, frozenset(interior))


@dataclass(frozen=True)
class Closure:
    nodes: frozenset[WeightPoint]
    touches_boundary: bool


def submodule_closure(graph: SupportGraph, seeds: Iterable) -> Closure:
    """Smallest edge-closed set of nodes containing ``seeds``.

    ``touches_boundary`` warns that the true closure may leave the window.
    """
    seeds = [weight_point(s) for s in seeds]
    node_set = set(graph.nodes)
    for s in seeds:
        if s not in node_set:
            raise InputError(f"seed {fmt_weight(s)} is not a node of the graph")
    succ = graph.successors()
    seen = set(seeds)
    stack = list(seeds)
    while stack:
        v = stack.pop()
        for w in succ[v]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return Closure(frozenset(seen), bool(seen - graph.interior))


def half_space_signs(nodes: Iterable[WeightPoint], n: int) -> tuple[str, ...]:
    """Per coordinate: '+' if every node has lam_i > 0, '-' if all < 0, else '0'."""
    nodes = list(nodes)
    out = []
    for i in range(n):
        if nodes and all(v[i] > 0 for v in nodes):
            out.append("+")
        elif nodes and all(v[i] < 0 for v in nodes):
            out.append("-")
        else:
            out.append("0")
    return tuple(out)


@dataclass
class ComponentDAG:
    """Strongly connected components and the order they induce.

    ``reach`` holds pairs (a, b) with a != b such that component b is
    reachable from a; ``edges`` holds the direct condensation edges.
    """

    components: list[frozenset[WeightPoint]]
    edges: set[tuple[int, int]]
    reach: set[tuple[int, int]]
    n: int

    def __len__(self):
        return len(self.components)

    def signs(self) -> list[tuple[str, ...]]:
        return [half_space_signs(c, self.n) for c in self.components]

    def sinks(self) -> list[int]:
        """Components with nothing below them: the minimal submodules."""
        return [a for a in range(len(self.components)) if not any(x == a for x, _ in self.reach)]

    def sources(self) -> list[int]:
        return [b for b in range(len(self.components)) if not any(y == b for _, y in self.reach)]

    def to_json(self) -> dict:
        return {
            "count": len(self.components),
            "components": [
                {"size": len(c), "signs": "".join(s), "nodes": [fmt_weight(v) for v in sorted(c)]}
                for c, s in zip(self.components, self.signs())
            ],
            "edges": sorted([list(e) for e in self.edges]),
            "order": sorted([list(e) for e in self.reach]),
            "sinks": self.sinks(),
        }


def composition_components(graph: SupportGraph, interior_only: bool = True) -> ComponentDAG:
    """Condensation of the support graph.

    SCCs are computed on the whole window.  In interior mode each component
    keeps only its interior nodes and components without interior nodes are
    dropped; reachability between kept components still uses the full graph.
    """
    g = graph.digraph()
    cond = nx.condensation(g)
    members = {c: frozenset(cond.nodes[c]["members"]) for c in cond.nodes}
    if interior_only:
        kept = [c for c in cond.nodes if members[c] & graph.interior]
        shown = {c: members[c] & graph.interior for c in kept}
    else:
        kept = list(cond.nodes)
        shown = members
    kept.sort(key=lambda c: min(shown[c]))
    index = {c: k for k, c in enumerate(kept)}
    edges = {(index[a], index[b]) for a, b in cond.edges if a in index and b in index}
    reach = set()
    for c in kept:
        for desc in nx.descendants(cond, c):
            if desc in index:
                reach.add((index[c], index[desc]))
    return ComponentDAG([shown[c] for c in kept], edges, reach, len(graph.mu))


def is_grid_order(dag: ComponentDAG) -> bool:
    """Whether the component order is the product order on sign vectors.

    Component a lies above b exactly when b's signs are obtained from a's by
    turning some '+' into '-'; this is the 2 x ... x 2 grid of quadrants.
    """
    signs = dag.signs()
    if any("0" in s for s in signs) or len(set(signs)) != len(signs):
        return False

    def below(a, b):
        return a != b and all(x == y or (x == "+" and y == "-") for x, y in zip(a, b))

    expected = {(a, b) for a in range(len(signs)) for b in range(len(signs)) if below(signs[a], signs[b])}
    return expected == dag.reach
