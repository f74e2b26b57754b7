"""Delivery-time calculus and bit-exact delivery simulation for cache-aided
fog networks with a wireless fronthaul."""

from .bounds import (
    BoundsReport,
    bounds_report,
    gap,
    ndt_lower,
    ndt_upper,
    ndt_upper_limit_infinite_r,
)
from .dof import (
    DofContractError,
    active_provider,
    per_user_dof_default,
    register_provider,
    reset_provider,
    table_provider_from_json,
)
from .model import (
    ConfigError,
    DemandVector,
    GroupIndex,
    GroupNdt,
    NdtBreakdown,
    NetworkConfig,
    binom,
    validate_config,
)
from .oracle import (
    DecodeFailure,
    DecodeReport,
    empirical_ndt,
    execute_schedule,
    verify_decodability,
)
from .placement import (
    PlacementRealization,
    SubfilePartition,
    empirical_fractions,
    fractional_size,
    partition_file,
    placement_from_replay,
    placement_to_replay,
    sample_placement,
)
from .scheduler import (
    CodedMessage,
    DeliverySchedule,
    FronthaulPlan,
    GroupPlan,
    SubMessage,
    build_schedule,
    coded_messages_for_group,
    fronthaul_plan,
    group_ndt_candidates,
    optimize_cooperation,
)

__version__ = "0.1.0"
