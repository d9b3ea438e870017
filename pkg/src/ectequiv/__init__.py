"""Equivalence checking for existentially constrained terms over integer arithmetic."""

from .constraints import (
    CaptureError,
    ConstraintError,
    ExistentialConstraint,
    apply_subst_ec,
    free_and_bound,
    mk_existential,
    plain,
    rename_bound,
    substitute,
    variable_condition_variants,
)
from .ecterm import ECTerm, IllFormed, Indeterminate, embed, is_satisfiable, mk_ecterm, respects, witness_substitution
from .equiv import (
    EquivReport,
    Outcome,
    PositionClasses,
    PreconditionError,
    RouteDisagreement,
    equiv_auto,
    equiv_by_renaming,
    equiv_general,
    equiv_pattern_general,
    equiv_same_term,
    equiv_via_pg,
    find_variant_renaming,
    position_classes,
    representative_substitution,
)
from .model import Grid, eval_existential, evaluate
from .oracle import GridTooSmall, OracleConfig, oracle_equiv, oracle_subsumes
from .pg import PGResult, back_validity_check, is_pattern_general, pg_transform
from .solver import (
    GridBackend,
    SmtBackend,
    SolverError,
    Status,
    Verdict,
    check_sat,
    check_valid,
    make_backend,
    solver_available,
)
from .syntax import ParseError, ProblemFile, format_ecterm, parse, parse_ecterm_text
from .terms import INT, BOOL, App, Signature, Sort, Val, Var, match, positions_of, replace_at, subterm_at

__version__ = "0.1.0"
