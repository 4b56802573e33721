"""Exit criteria.  Each prints one PASS/FAIL line; run directly or under pytest."""

import random
import time
from fractions import Fraction
from itertools import combinations

import pytest

from cartanfree.classify import canonicalize, min_submodule_support_signs, root_product
from cartanfree.coherent import (
    composition_components,
    evaluate_word,
    is_grid_order,
    lambda0,
    semisimplify,
    support_graph,
    trace_polynomial,
    verify_weighting_table,
    weight_coeff,
    weighting,
)
from cartanfree.hfree import (
    make_M0,
    make_sl2_example,
    perturb,
    tensor_natural,
    twist,
    twist_diagonal,
    verify_relations,
    whittaker_locally_finite,
    whittaker_roots,
    word_action,
)
from cartanfree.liealg import build_sp2n, casimir, reflect, weyl_twist_auto
from cartanfree.polyring import MultiPoly, poly_eval, shift_apply

pytestmark = pytest.mark.acceptance

H, TH = Fraction(1, 2), Fraction(3, 2)
BOX2 = ((Fraction(-9, 2), Fraction(9, 2)),) * 2
SCALARS = [1, -1, 2, -2, 3, -3, H, -H]


def _rand_weight(rng, n):
    return tuple(Fraction(rng.randint(-30, 30), rng.randint(1, 11)) for _ in range(n))


def long_root(n, i, sign=1):
    return tuple(2 * sign if k == i else 0 for k in range(n))


# -- criteria ------------------------------------------------------------------------------------


def criterion_1():
    timings = {}
    for n in (2, 3, 4):
        t = time.perf_counter()
        ok = verify_relations(make_M0(n)).passed
        timings[n] = time.perf_counter() - t
        if not ok:
            return False, f"M0 fails at n={n}"
    if timings[4] >= 60:
        return False, f"n=4 took {timings[4]:.1f}s"
    for n in (2, 3):
        for i in range(n):
            for sign in (1, -1):
                r = long_root(n, i, sign)
                if verify_relations(perturb(make_M0(n), r)).passed:
                    return False, f"doubling A_{r} went undetected at n={n}"
    return True, f"n=4 in {timings[4]:.2f}s; every doubled long-root entry detected"


def criterion_2():
    ok = verify_weighting_table(2) and verify_weighting_table(3)
    return ok, "exact symbolic match at n=2,3"


def criterion_3():
    t = time.perf_counter()
    g = support_graph(weighting(make_M0(2)), lambda0(2), BOX2)
    dag = composition_components(g)
    dt = time.perf_counter() - t
    sinks = [dag.signs()[k] for k in dag.sinks()]
    ok = len(dag) == 4 and is_grid_order(dag) and sinks == [("-", "-")] and dt < 5
    return ok, f"{len(dag)} components, grid={is_grid_order(dag)}, minimal={sinks}, {dt:.2f}s"


def criterion_4():
    details = []
    ok = True
    for n in (2, 3):
        dag = composition_components(support_graph(semisimplify(weighting(make_M0(n))), lambda0(n)))
        details.append(f"n={n}: {len(dag)} components, {len(dag.edges)} edges")
        ok &= len(dag) == 2 ** n and not dag.edges and not dag.reach
    return ok, "; ".join(details)


def _hvars(n):
    return [MultiPoly.var(n, i) for i in range(n)]


def criterion_5a():
    for n in (2, 3, 4):
        h = _hvars(n)
        m = make_M0(n)
        for i in range(n):
            r = long_root(n, i)
            lhs = m.poly(r) * shift_apply(r, m.poly(tuple(-c for c in r)))
            if lhs != (h[i] - H) * (h[i] - TH):
                return False, f"n={n}, i={i + 1}: {lhs}"
    return True, "A_{2e_i} s(A_{-2e_i}) = (h_i-1/2)(h_i-3/2), n=2..4"


def criterion_5b():
    for n in (2, 3, 4):
        h = _hvars(n)
        m = make_M0(n)
        for i, j in combinations(range(n), 2):
            r = tuple(1 if k in (i, j) else 0 for k in range(n))
            if root_product(m, r) != (h[i] - H) * (h[j] - H):
                return False, f"n={n}, (i,j)=({i + 1},{j + 1}): {root_product(m, r)}"
    return True, "A_{e_i+e_j} s(A_{-e_i-e_j}) = (h_i-1/2)(h_j-1/2), n=2..4"


def criterion_5c():
    for n in (2, 3, 4):
        h = _hvars(n)
        m = make_M0(n)
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                r = tuple(1 if k == i else -1 if k == j else 0 for k in range(n))
                lhs = root_product(m, r)
                if lhs != h[i] - H:
                    return False, f"n={n}, (i,j)=({i + 1},{j + 1}): product is {lhs}, expected {h[i] - H}"
    return True, "A_{e_i-e_j} s(A_{-e_i+e_j}) = (h_i-1/2), n=2..4"


def criterion_6():
    m_signs = {}
    for n in (2, 3):
        b = build_sp2n(n)
        m0 = make_M0(n)
        base = min_submodule_support_signs(m0)
        m_signs[n] = base
        for k in range(1, n + 1):
            phi = weyl_twist_auto(b, k)  # construction checks every bracket
            w = phi.cartan_matrix()
            for i in range(n):
                for j in range(n):
                    want = (-1 if i == k - 1 else 1) if i == j else 0
                    if w[j][i] != want:
                        return False, f"(a) phi_{k} on h at n={n}"
            for x, y in combinations(range(b.dim), 2):
                lhs = b.bracket(phi.image_matrix(x), phi.image_matrix(y))
                rhs = {}
                for t, c in b.bracket_coords(x, y).items():
                    for s, d in phi.images[t].items():
                        rhs[s] = rhs.get(s, 0) + c * d
                if lhs != {s: v for s, v in rhs.items() if v}:
                    return False, f"(a) phi_{k} breaks a bracket at n={n}"
            tw = twist(m0, phi)
            if not verify_relations(tw).passed:
                return False, f"(b) twist by phi_{k} fails relations at n={n}"
            expected = tuple(("+" if s == "-" else "-") if i == k - 1 else s for i, s in enumerate(base))
            if min_submodule_support_signs(tw) != expected:
                return False, f"(b) signs after phi_{k} at n={n}"
            if reflect(long_root(n, k - 1), k) != long_root(n, k - 1, -1):
                return False, "(b) reflection"
        rng = random.Random(n)
        for _ in range(3):
            c = [rng.choice(SCALARS) for _ in range(n)]
            if min_submodule_support_signs(twist_diagonal(m0, c)) != base:
                return False, f"(c) diagonal twist {c} moved the minimal support"
    return True, f"(a)(b)(c) hold for n=2,3; M0 minimal signs {m_signs}"


def criterion_7():
    rng = random.Random(20240607)
    base = make_M0(2)
    b = build_sp2n(2)
    t = time.perf_counter()
    for trial in range(25):
        m = base
        for _ in range(rng.randint(1, 5)):
            if rng.random() < 0.5:
                m = twist(m, weyl_twist_auto(b, rng.randint(1, 2)))
            else:
                m = twist_diagonal(m, [rng.choice(SCALARS) for _ in range(2)])
        r = canonicalize(m)
        if not r.verdict:
            return False, f"trial {trial}: no certificate"
        if r.replay(m) != base:
            return False, f"trial {trial}: replay differs from M0"
    dt = time.perf_counter() - t
    return dt < 30, f"25/25 round trips in {dt:.2f}s"


def criterion_8():
    m = make_M0(2)
    b = build_sp2n(2)
    cas = casimir(b)
    op = word_action(m, cas.words(), b)
    if any(op.shift) or not op.matrix[0][0].is_constant():
        return False, f"Casimir acts by {op}"
    c = op.matrix[0][0].constant_value()
    f = trace_polynomial(m, cas.words(), b)
    a = weighting(m, b)
    rng = random.Random(8)
    for _ in range(10):
        lam = _rand_weight(rng, 2)
        if poly_eval(f, lam) != c:
            return False, f"trace at {lam} is {poly_eval(f, lam)}"
        direct = sum(coeff * evaluate_word(a, list(w), lam)[0][0] for coeff, w in cas.terms)
        if direct != c:
            return False, f"weight-space action at {lam} is {direct}"
    return True, f"Casimir acts by {c} on M0 and on all 10 sampled weight spaces"


def criterion_9():
    t = time.perf_counter()
    tm = tensor_natural(make_M0(2))
    if tm.d != 4:
        return False, f"rank {tm.d}"
    if not verify_relations(tm).passed:
        return False, "relations fail"
    word = ["X(2e1)", "X(-2e1)"]
    f = trace_polynomial(tm, word)
    a = weighting(tm)
    rng = random.Random(9)
    for _ in range(5):
        lam = _rand_weight(rng, 2)
        mat = evaluate_word(a, word, lam)
        if sum(mat[k][k] for k in range(4)) != poly_eval(f, lam):
            return False, f"trace mismatch at {lam}"
    dt = time.perf_counter() - t
    return dt < 30, f"rank 4, verified, trace {f} matches at 5 points, {dt:.2f}s"


def criterion_10():
    m = make_sl2_example()
    if not verify_relations(m).passed:
        return False, "relations fail"
    for k in range(-6, 7):
        lam = (Fraction(k, 2),)
        zero = weight_coeff(m, (1,), lam)[0][0] == 0
        if zero != (lam[0] + 1 == 0):
            return False, f"e-coefficient at {lam}"
    a = weighting(m)
    # integer mu all lie in the one coset Z; a common window keeps both rays in view
    box = ((Fraction(-9, 2), Fraction(9, 2)),)
    counts = []
    for mu in ((0,), (3,), (-2,)):
        counts.append(len(composition_components(support_graph(semisimplify(a), mu, box))))
    return counts == [3, 3, 3], f"e vanishes only at lam=-1; ss components at integer mu: {counts}"


def criterion_11():
    ok = whittaker_locally_finite(make_M0(2)) and whittaker_locally_finite(make_M0(3))
    counts = {n: len(whittaker_roots(n)) for n in (1, 2, 3, 4)}
    ok &= all(c == n * (n + 1) // 2 for n, c in counts.items())
    return ok, f"locally finite; root counts {counts}"


CRITERIA = [
    ("1", criterion_1),
    ("2", criterion_2),
    ("3", criterion_3),
    ("4", criterion_4),
    ("5a", criterion_5a),
    ("5b", criterion_5b),
    ("5c", criterion_5c),
    ("6", criterion_6),
    ("7", criterion_7),
    ("8", criterion_8),
    ("9", criterion_9),
    ("10", criterion_10),
    ("11", criterion_11),
]


def _line(label, ok, detail):
    return f"criterion {label:>3}: {'PASS' if ok else 'FAIL'}  {detail}"


@pytest.mark.parametrize("label,fn", CRITERIA, ids=[c[0] for c in CRITERIA])
def test_criterion(label, fn, capsys):
    ok, detail = fn()
    with capsys.disabled():
        print("\n" + _line(label, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    failed = 0
    for label, fn in CRITERIA:
        ok, detail = fn()
        failed += not ok
        print(_line(label, ok, detail))
    raise SystemExit(1 if failed else 0)
