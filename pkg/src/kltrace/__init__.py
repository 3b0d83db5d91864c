"""Decorated-trace semantics for conditional transition systems.

The package has two halves.  One computes language, ready and failure
decorations of conditional transition systems along two independent
routes (direct reachability and least-fixpoint iteration in a Kleisli
category) and decides behavioural equivalence with witnesses.  The other
machine-checks, on finite carriers, the algebraic facts the semantics
rests on: monad laws, Kleisli enrichment, machine liftings, distributive
laws built from relation liftings, and an exact optimal-transport law
over the unit-interval quantale.
"""

from .cts import (
    CTS,
    ObservationMode,
    behaviour_equiv,
    build_alpha,
    closed_form_cell,
    coincidence_check,
    complete,
    fixpoint_traces,
    random_cts,
    refusal_downclosure_witness,
    validate,
)
from .dlaw import (
    build_dlaw,
    check_beck_chevalley,
    check_fabric,
    check_kl_law,
    check_lifting_preserves,
)
from .kleisli import check_kleisli_laws, check_lifting_theorems
from .monads import check_monad_laws
from .transport import check_quantale_laws

__version__ = "0.1.0"

__all__ = [
    "CTS",
    "ObservationMode",
    "behaviour_equiv",
    "build_alpha",
    "build_dlaw",
    "check_beck_chevalley",
    "check_fabric",
    "check_kl_law",
    "check_kleisli_laws",
    "check_lifting_preserves",
    "check_lifting_theorems",
    "check_monad_laws",
    "check_quantale_laws",
    "closed_form_cell",
    "coincidence_check",
    "complete",
    "fixpoint_traces",
    "random_cts",
    "refusal_downclosure_witness",
    "validate",
]
