"""A unitary linear-algebraic lambda calculus toolkit.

Terms form a weak vector space of distributions over pure terms; types are
subsets of the unit sphere of value distributions.  The package provides
the evaluator, the realizability-based membership and unitarity checkers,
a syntactic typing system with an orthogonality rule, and a quantum
circuit front-end compiled into the core calculus.
"""

from .distrib import (
    Dist,
    OpenValueError,
    ShapeError,
    bilinear_substitute,
    canonicalize,
    lift_constructor,
    single,
)
from .evaluate import (
    DEFAULT_FUEL,
    DecompositionError,
    EvalOutcome,
    StepBudget,
    atomic_step,
    is_normal,
    normalize,
    one_step,
    step_with_decomposition,
)
from .judgments import (
    Context,
    Derivation,
    NoDerivation,
    OrthogonalityJudgment,
    TypingJudgment,
    check_derivation,
    check_orthogonality,
    infer,
    strict_domain,
    validate_semantically,
)
from .parser import ParseError, parse_term, parse_type, parse_typing_judgment
from .semantics import (
    Tri,
    UnitaryReport,
    boolean_projection,
    check_unitary_endo,
    inner_product,
    member_value,
    norm,
    realizes,
)
from .terms import alpha_equal
from .unitypes import (
    BOOL,
    SHARP_BOOL,
    UNIT,
    TypeExpr,
    UnsupportedType,
    basis_of_type,
    is_pure_type,
    subtype,
    type_equiv,
)

__all__ = [name for name in dir() if not name.startswith("_")]
