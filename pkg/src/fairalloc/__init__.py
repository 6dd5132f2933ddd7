"""Priority allocation over partial preference reports, with audits.

The package covers four layers: relations (reports and preference
orders), spaces (admissible report families), constraints (distributional
upper bounds and solvency), mechanisms (sequential allocation engines),
and axioms (exhaustive fairness, efficiency and incentive oracles).  The
cli and service modules expose instances, audits and interactive
elicitation sessions.
"""

from .constraints import (
    Allocation,
    BoundsReport,
    SolvencyVerdict,
    UpperBound,
    UpperBoundSystem,
    binding_bounds,
    check_sequential_solvency,
    respects_bounds,
    signature,
)
from .mechanisms import (
    FixedStateOrder,
    Officer,
    Problem,
    RunTrace,
    StepRecord,
    ZoneOverride,
    ZoneSelector,
    dynamic_modular_priority_run,
    m_queue_run,
    modular_priority_run,
    partitioned_priority_run,
    ranked_partitioned_priority_run,
    serial_dictatorship,
    truthful_provider,
)
from .relations import (
    Message,
    PreferenceOrder,
    comparable,
    complete_message,
    contains_more_information,
    empty_message,
    is_truthful,
    maximal_elements,
    transitive_closure,
    validate_message,
)
from .spaces import (
    CompleteSpace,
    ExplicitSpace,
    Partition,
    RankedZonalSpace,
    ZonalSpace,
    ZoneRanking,
    check_richness,
    enumerate_messages,
    induced_partition,
    modular_induced_space,
    ranked_zonal_message,
    truthful_messages,
    zonal_message,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
