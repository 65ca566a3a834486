"""Rule-based data cleaning over merge lattices.

The library enforces matching rules ("similar here forces identical there")
on relational data via a chase, orders instances by information content,
and answers queries over the dirty data with exact certain/possible bounds
or polynomial under/over approximations.
"""

from .approx import (
    ApproxAnswer,
    PrecedenceGraph,
    approx_answers,
    freshly_applicable,
    interacts,
    over_clean,
    safely_applicable,
    under_clean,
)
from .chase import (
    ChaseTrace,
    EnumerationResult,
    MatchDep,
    PreconditionReport,
    Step,
    chase,
    chase_step,
    check_unique_clean_preconditions,
    enumerate_clean,
    is_interaction_free,
    is_stable,
    lhs_matches,
    pair_satisfies,
)
from .errors import (
    ChaseBoundError,
    ContractError,
    DomainError,
    MdcError,
    NotApplicableError,
    ProjectError,
    QueryError,
    TruncatedEnumerationError,
)
from .instances import (
    Instance,
    RelationDef,
    Row,
    Schema,
    fold_join,
    fold_meet,
    join_instances,
    meet_instances,
    meet_tuples,
    tuple_leq,
)
from .project import (
    Project,
    axiom_reports,
    dumps_project,
    load_bundled_project,
    load_project,
    parse_query,
    parse_value,
    render_query,
    render_value,
)
from .queries import (
    CleanAnswer,
    Product,
    Projection,
    Query,
    Rel,
    SelectAttrEq,
    SelectDom,
    SelectEq,
    SelectJoinDom,
    UnionQ,
    certain,
    clean_answer,
    eval_query,
    is_monotone_syntax,
    possible,
    relax,
)
from .values import (
    AxiomReport,
    LatticeDomain,
    SimilaritySpec,
    Value,
    active_closure,
    validate_axioms,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
