import json
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cartanfree.errors import InputError, UnsupportedError
from cartanfree.hfree import (
    HFreeModule,
    basis_for,
    from_polys,
    load_module,
    make_M0,
    make_sl2_example,
    perturb,
    reduction_path,
    simplicity_probe,
    tensor_natural,
    twist,
    twist_diagonal,
    verify_relations,
    whittaker_locally_finite,
    whittaker_roots,
    word_action,
)
from cartanfree.liealg import build_sp2n, diag_twist_scalars, identity_auto, weyl_twist_auto
from cartanfree.polyring import MultiPoly, PolyShiftOp, op_compose, shift_apply

H, TH = Fraction(1, 2), Fraction(3, 2)


def hv(n, i):
    return MultiPoly.var(n, i)


def test_M0_table_entries():
    m = make_M0(2)
    h1, h2 = hv(2, 0), hv(2, 1)
    assert m.poly((2, 0)) == (h1 - H) * (h1 - TH)
    assert m.poly((-1, -1)) == 1
    assert m.poly((1, -1)) == h1 - H
    assert m.poly((-1, 1)) == h2 - H
    assert m.poly((1, 1)) == (h1 - H) * (h2 - H)


def test_sl2_table():
    m = make_sl2_example()
    h = hv(1, 0)
    assert m.poly((1,)) == h
    assert m.poly((-1,)) == -h
    assert verify_relations(m).passed


@pytest.mark.parametrize("n", [1, 2, 3])
def test_M0_relations(n):
    report = verify_relations(make_M0(n))
    assert report.passed
    dim = 2 * n * n + n
    assert len(report.checks) == dim * (dim - 1) // 2


def test_replaced_long_root_fails_at_its_pair():
    m = make_M0(2)
    bad = from_polys(2, {r: (MultiPoly.const(2, 1) if r == (2, 0) else m.poly(r)) for r in m.actions})
    report = verify_relations(bad)
    assert not report.passed
    pairs = {(c.left, c.right) for c in report.failures}
    assert ("X(2e1)", "X(-2e1)") in pairs
    # by hand: [X, Y] acts as 1 - (h1+1/2)(h1+3/2)... shifted, and should be a multiple of h1
    residual = [c for c in report.failures if (c.left, c.right) == ("X(2e1)", "X(-2e1)")][0].residual
    assert not residual.is_zero()


def test_missing_root_is_input_error():
    m = make_M0(2)
    actions = dict(m.actions)
    del actions[(2, 0)]
    with pytest.raises(InputError):
        basis_for(HFreeModule(2, actions))


def test_word_long_root_pair():
    m = make_M0(2)
    op = word_action(m, ["X(2e1)", "X(-2e1)"])
    h1 = hv(2, 0)
    assert op == PolyShiftOp([[(h1 - H) * (h1 - TH)]], (0, 0))


def test_empty_word_is_identity():
    assert word_action(make_M0(2), []) == PolyShiftOp.identity(2)


def test_word_short_root_pair_from_table():
    # composed from the actual table: (h1 - 1/2) * sigma(h2 - 1/2) with sigma: h2 -> h2 + 1
    m = make_M0(2)
    op = word_action(m, ["X(e1-e2)", "X(-e1+e2)"])
    h1, h2 = hv(2, 0), hv(2, 1)
    assert op.shift == (0, 0)
    assert op.matrix[0][0] == (h1 - H) * (h2 + H)


def test_word_linear_combination():
    m = make_M0(1)
    op = word_action(m, [(1, ["X(2e1)", "X(-2e1)"]), (-1, ["X(-2e1)", "X(2e1)"])])
    b = build_sp2n(1)
    x, y = b.root_vector((2,)), b.root_vector((-2,))
    (k, c), = b.bracket(x, y).items()  # a multiple of h1, read off the matrices
    assert k == b.index("h1")
    assert op == PolyShiftOp([[hv(1, 0) * c]], (0,))


def test_word_matches_manual_composition():
    m = make_M0(3)
    b = build_sp2n(3)
    word = ["X(e1+e2)", "X(-2e3)", "h2", "X(e3-e1)"]
    acc = PolyShiftOp.identity(3)
    for lab in word:
        acc = op_compose(acc, m.element_op(b, b.index(lab)))
    assert word_action(m, word, b) == acc


# -- twists ---------------------------------------------------------------------------


def test_identity_twist():
    m = make_M0(2)
    assert twist(m, identity_auto(build_sp2n(2))) == m


def test_diagonal_twist_rescales():
    m = make_M0(2)
    c = (2, Fraction(-1, 3))
    t = twist_diagonal(m, c)
    for r, s in diag_twist_scalars(c).items():
        assert t.poly(r) == m.poly(r) * s
    assert verify_relations(t).passed


@pytest.mark.parametrize("n,k", [(2, 1), (2, 2), (3, 2)])
def test_weyl_twist_preserves_relations(n, k):
    t = twist(make_M0(n), weyl_twist_auto(build_sp2n(n), k))
    assert verify_relations(t).passed


def test_weyl_twist_long_roots():
    t = twist(make_M0(2), weyl_twist_auto(build_sp2n(2), 1))
    h1 = hv(2, 0)
    assert t.poly((2, 0)) == 1
    assert t.poly((-2, 0)) == (h1 + H) * (h1 + TH)


# -- Whittaker and simplicity probes ---------------------------------------------------


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_whittaker_roots_count(n):
    assert len(whittaker_roots(n)) == n * (n + 1) // 2


def test_whittaker_checks():
    m = make_M0(2)
    assert whittaker_locally_finite(m)
    bad = from_polys(2, {r: (hv(2, 1) if r == (-2, 0) else m.poly(r)) for r in m.actions})
    assert not whittaker_locally_finite(bad)
    assert whittaker_locally_finite(twist_diagonal(m, (3, Fraction(-1, 2))))
    with pytest.raises(UnsupportedError):
        whittaker_locally_finite(tensor_natural(m))


def test_probe_one_step():
    m = make_M0(1)
    path = reduction_path(m, hv(1, 0), 2)
    assert path is not None and len(path) <= 3
    # one application of 1 - X_{-2e1}: h1 - (h1 + 2)
    assert path[1] == MultiPoly.const(1, -2)


def test_probe_constant_and_bigger():
    m = make_M0(2)
    assert reduction_path(m, MultiPoly.const(2, 1), 0) == [MultiPoly.const(2, 1)]
    f = hv(2, 0) ** 2 * hv(2, 1)
    assert simplicity_probe(m, f, 10)


@settings(max_examples=20, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 3), st.integers(1, 5)), min_size=1, max_size=3))
def test_probe_terminates_on_random_polys(terms):
    f = MultiPoly(2, {(a, b): c for a, b, c in terms})
    path = reduction_path(make_M0(2), f, 20)
    assert path is not None
    assert path[-1].is_constant() and not path[-1].is_zero()


# -- tensor ----------------------------------------------------------------------------


def test_tensor_rank_and_relations():
    t = tensor_natural(make_M0(2))
    assert t.d == 4
    assert verify_relations(t).passed


def test_tensor_sl2():
    t = tensor_natural(make_sl2_example())
    assert t.d == 2
    assert verify_relations(t).passed


# -- serialization ----------------------------------------------------------------------


def test_json_round_trip(tmp_path):
    m = twist(make_M0(2), weyl_twist_auto(build_sp2n(2), 2))
    path = tmp_path / "m.json"
    path.write_text(json.dumps(m.to_json()))
    assert load_module(str(path)) == m


def test_tensor_json_round_trip(tmp_path):
    t = tensor_natural(make_M0(1))
    path = tmp_path / "t.json"
    path.write_text(json.dumps(t.to_json()))
    assert load_module(str(path)) == t


def test_bad_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"n": 2, "actions": [')
    with pytest.raises(InputError):
        load_module(str(path))
    path.write_text('{"n": 2, "d": 1, "actions": [{"root": [2, 0], "matrix": "x"}]}')
    with pytest.raises(InputError):
        load_module(str(path))


def test_perturbed_long_root_fails():
    m = perturb(make_M0(2), (2, 0))
    assert not verify_relations(m).passed
    assert shift_apply((0, 0), m.poly((2, 0))) == make_M0(2).poly((2, 0)) * 2
