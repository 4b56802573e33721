"""Exact symbolic tools for U(h)-free sp(2n)-modules and their weight modules."""

from .classify import (
    CanonicalizationResult,
    ScalingCertificate,
    ScalingFailure,
    canonicalize,
    min_submodule_support_signs,
    product_identities,
    scaling_equivalent,
)
from .coherent import (
    CoherentAction,
    SupportGraph,
    composition_components,
    coset_test,
    lambda0,
    semisimplify,
    submodule_closure,
    support_graph,
    trace_polynomial,
    verify_weighting_table,
    weight_coeff,
    weighting,
)
from .errors import CartanFreeError, InputError, ResourceError, UnsupportedError
from .hfree import (
    HFreeModule,
    make_M0,
    make_sl2_example,
    tensor_natural,
    twist,
    verify_relations,
    whittaker_locally_finite,
    word_action,
)
from .liealg import (
    AutomorphismTable,
    SpBasis,
    build_sl2,
    build_sp2n,
    casimir,
    diag_twist_scalars,
    diagonal_auto,
    weyl_twist_auto,
)
from .polyring import MultiPoly, OpSum, PolyShiftOp, shift_apply

__version__ = "0.1.0"
