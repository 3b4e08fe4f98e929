"""Invariant measures of finite stochastic matrices from rooted spanning trees."""

from .core import (
    GENERALIZED,
    STRICT,
    MarkovGenerator,
    StochasticMatrix,
    generator_to_stochastic,
    stochastic_to_generator,
    validate_generator,
    validate_stochastic,
)
from .errors import (
    AlphaTooLarge,
    DetailedBalanceViolation,
    DimensionMismatch,
    EmptyMarkedSet,
    EnumerationCapExceeded,
    InstanceTooLarge,
    MarkovTreeError,
    MixedModeError,
    NegativeEntry,
    NonSquareError,
    RowSumViolation,
    TreeEdgeNotInGraph,
    TreeNotSpanning,
    ValidationError,
    VertexOutOfRange,
)
from .graph import (
    ClassDecomposition,
    ClassKind,
    ReachabilitySet,
    ReactionGraph,
    build_graph,
    communicating_classes,
    is_irreducible,
    reachability_set,
)
from .measure import (
    DetailedBalanceReport,
    InvariantMeasure,
    PositivityCertificate,
    UndirectedTree,
    UniquenessReport,
    check_invariance,
    detailed_balance_check,
    invariant_cofactor,
    invariant_detailed_balance,
    invariant_tree_sum,
    orient_tree,
    positivity_certificate,
    uniqueness_report,
)
from .oracle import (
    FixedSpaceBasis,
    brute_force_tree_sum,
    null_space_solve,
    power_iteration,
    simulate_chain,
)
from .trees import (
    Arborescence,
    MarkedFunctionalGraph,
    add_edge_unique_cycle,
    count_arborescences,
    count_arborescences_complete,
    count_marked_graphs,
    enumerate_arborescences,
    enumerate_marked_graphs,
    path_to_root,
)

__version__ = "0.1.0"
