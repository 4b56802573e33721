"""Command-line entry point: ``cartanfree <subcommand> [options]``.

Exit codes: 0 success, 1 mathematical failure, 2 input error, 3 resource limit.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from fractions import Fraction

from .classify import canonicalize
from .coherent import (
    composition_components,
    fmt_weight,
    lambda0,
    parse_box,
    semisimplify,
    support_graph,
    trace_polynomial,
    weight_point,
    weighting,
)
from .errors import CartanFreeError, InputError, ResourceError
from .hfree import (
    HFreeModule,
    basis_for,
    load_module,
    make_M0,
    make_sl2_example,
    tensor_natural,
    twist,
    twist_diagonal,
    verify_relations,
    word_action,
)
from .liealg import casimir, weyl_twist_auto
from .polyring import OpSum, as_rational, rational_str

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_RESOURCE = 0, 1, 2, 3

RANDOM_SCALARS = (1, -1, 2, -2, 3, -3, Fraction(1, 2), Fraction(-1, 2))


def _rationals(text: str) -> list[Fraction]:
    return [as_rational(x.strip()) for x in text.split(",") if x.strip()]


def _apply_twist(module: HFreeModule, twist_arg: str, rng: random.Random) -> HFreeModule:
    kind, _, arg = twist_arg.partition(":")
    if kind == "weyl":
        try:
            k = int(arg)
        except ValueError:
            raise InputError(f"bad Weyl twist {twist_arg!r}; expected weyl:k")
        return twist(module, weyl_twist_auto(basis_for(module), k))
    if kind == "diag":
        if arg == "random":
            c = [rng.choice(RANDOM_SCALARS) for _ in range(module.n)]
        else:
            c = _rationals(arg)
        return twist_diagonal(module, c)
    raise InputError(f"unknown twist {twist_arg!r}; expected weyl:k, diag:a,b,... or diag:random")


def load_source(args) -> HFreeModule:
    if args.table:
        module = load_module(args.table)
    elif args.builtin == "sl2":
        module = make_sl2_example()
    else:
        module = make_M0(args.n)
    rng = random.Random(args.seed)
    for twist_arg in args.twist or ():
        module = _apply_twist(module, twist_arg, rng)
    return module


def _emit(obj) -> None:
    print(json.dumps(obj, indent=2))


# -- subcommands ---------------------------------------------------------------------


def cmd_verify(args) -> int:
    module = load_source(args)
    report = verify_relations(module)
    if args.format == "json":
        _emit(report.to_json())
    else:
        for chk in report.failures:
            print(f"FAIL [{chk.left}, {chk.right}]")
        print(f"{len(report.checks) - len(report.failures)}/{len(report.checks)} pairs pass")
    return EXIT_OK if report else EXIT_FAIL


def cmd_support(args) -> int:
    module = load_source(args)
    action = weighting(module)
    if args.semisimplify:
        action = semisimplify(action)
    mu = weight_point(_rationals(args.mu)) if args.mu else lambda0(module.n)
    box = parse_box(args.box, module.n) if args.box else None
    graph = support_graph(action, mu, box, node_cap=args.node_cap)
    dag = composition_components(graph, interior_only=not args.all_nodes)
    if args.format == "dot":
        sys.stdout.write(graph.to_dot(show_zero=args.show_zero, components=dag))
    elif args.format == "json":
        _emit(graph.to_json(dag))
    else:
        print(f"mu = {fmt_weight(graph.mu)}")
        print("box = " + " x ".join(f"[{rational_str(lo)}, {rational_str(hi)}]" for lo, hi in graph.box))
        print(f"nodes: {len(graph.nodes)} ({len(graph.interior)} interior), edges: {len(graph.edges)}")
        print(f"components: {len(dag)}")
        for k, (comp, signs) in enumerate(zip(dag.components, dag.signs())):
            print(f"  [{k}] size {len(comp)} signs {''.join(signs)}")
        print("order: " + (", ".join(f"{a}>{b}" for a, b in sorted(dag.reach)) or "none"))
        print("minimal: " + ", ".join(map(str, dag.sinks())))
        if graph.boundary:
            print(f"note: {len(graph.boundary)} boundary nodes excluded from classification")
    return EXIT_OK


def cmd_classify(args) -> int:
    module = load_source(args)
    box = parse_box(args.box, module.n) if args.box else None
    result = canonicalize(module, box)
    if not result.verdict:
        print("classification failed: table is not a twist of M0", file=sys.stderr)
    _emit(result.to_json())
    return EXIT_OK if result.verdict else EXIT_FAIL


def _scalar_value(mat):
    """c if ``mat`` is c times the identity with c constant, else None."""
    d = len(mat)
    diag = mat[0][0]
    if not diag.is_constant():
        return None
    for a in range(d):
        for b in range(d):
            if mat[a][b] != (diag if a == b else 0):
                return None
    return diag.constant_value()


def cmd_trace(args) -> int:
    module = load_source(args)
    basis = basis_for(module)
    if args.casimir:
        op = word_action(module, casimir(basis).words(), basis)
        if isinstance(op, OpSum) or any(op.shift):
            raise InputError("Casimir has nonzero shift on this module")
        scalar = _scalar_value(op.matrix)
        poly = op.trace()
        if args.format == "json":
            _emit({"trace": str(poly), "scalar": None if scalar is None else rational_str(scalar)})
        else:
            print(poly)
        return EXIT_OK
    if args.word is None:
        raise InputError("trace needs --word or --casimir")
    word = [w.strip() for w in args.word.split(",") if w.strip()]
    poly = trace_polynomial(module, word, basis)
    if args.format == "json":
        _emit({"word": word, "trace": str(poly), "terms": poly.to_json()})
    else:
        print(poly)
    return EXIT_OK


def cmd_twist(args) -> int:
    if not args.twist:
        raise InputError("twist needs at least one --twist")
    _emit(load_source(args).to_json())
    return EXIT_OK


def cmd_tensor(args) -> int:
    module = tensor_natural(load_source(args))
    if args.check:
        report = verify_relations(module)
        if not report:
            _emit(report.to_json())
            return EXIT_FAIL
    _emit(module.to_json())
    return EXIT_OK


def cmd_dump(args) -> int:
    module = load_source(args)
    if args.algebra:
        _emit(basis_for(module).to_json())
    else:
        _emit(module.to_json())
    return EXIT_OK


# -- parser --------------------------------------------------------------------------


def _add_source(p: argparse.ArgumentParser) -> None:
    src = p.add_argument_group("module source")
    src.add_argument("--builtin", choices=("m0", "sl2"), default="m0", help="built-in table (default m0)")
    src.add_argument("--n", type=int, default=2, help="rank of sp(2n) for m0 (default 2)")
    src.add_argument("--table", metavar="PATH", help="JSON action table; overrides --builtin")
    src.add_argument(
        "--twist",
        action="append",
        metavar="TWIST",
        help="weyl:k, diag:a,b,... or diag:random; repeatable, applied in order",
    )
    src.add_argument("--seed", type=int, default=0, help="seed for diag:random (default 0)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cartanfree", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="check every bracket relation on the table")
    _add_source(p)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("support", help="support graph and components of W(M) on a window")
    _add_source(p)
    p.add_argument("--mu", help="weight as comma-separated rationals (default -1/2,...,-1/2)")
    p.add_argument("--box", help="lo:hi or lo:hi,lo:hi,... (default: radius 9/2 around mu)")
    p.add_argument("--node-cap", type=int, default=None, help="node limit (default $CARTANFREE_NODE_CAP or 100000)")
    p.add_argument("--semisimplify", action="store_true")
    p.add_argument("--all-nodes", action="store_true", help="classify boundary nodes too")
    p.add_argument("--show-zero", action="store_true", help="draw vanishing root steps dashed in DOT")
    p.add_argument("--format", choices=("text", "json", "dot"), default="text")
    p.set_defaults(func=cmd_support)

    p = sub.add_parser("classify", help="normalize a rank-1 table to M0")
    _add_source(p)
    p.add_argument("--box")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("trace", help="trace polynomial of a zero-shift word")
    _add_source(p)
    p.add_argument("--word", help="comma-separated basis labels, e.g. X(2e1),X(-2e1)")
    p.add_argument("--casimir", action="store_true")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("twist", help="print a twisted table as JSON")
    _add_source(p)
    p.set_defaults(func=cmd_twist)

    p = sub.add_parser("tensor", help="tensor with the natural representation")
    _add_source(p)
    p.add_argument("--check", action="store_true", help="verify the result first")
    p.set_defaults(func=cmd_tensor)

    p = sub.add_parser("dump", help="print the table (or the Lie algebra basis) as JSON")
    _add_source(p)
    p.add_argument("--algebra", action="store_true")
    p.set_defaults(func=cmd_dump)
    return parser


VALUE_OPTIONS = ("--mu", "--box")


def _glue_values(argv: list[str]) -> list[str]:
    """``--mu -1/2,-1/2`` -> ``--mu=-1/2,-1/2`` so argparse does not read a flag."""
    out, k = [], 0
    while k < len(argv):
        tok = argv[k]
        if tok in VALUE_OPTIONS and k + 1 < len(argv):
            out.append(f"{tok}={argv[k + 1]}")
            k += 2
        else:
            out.append(tok)
            k += 1
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(_glue_values(argv))
    try:
        return args.func(args)
    except ResourceError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (InputError, CartanFreeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
