"""Scaling bounds and achievable schemes for the unicast and multicast
capacity regions of dense wireless networks with arbitrary node placement."""

from .alignment import (
    CombineResult,
    Pairing,
    SlotSample,
    find_complementary_slot,
    ia_pair_rates,
    make_slot_sample,
    sample_quantized_phases,
    two_slot_combine,
)
from .birkhoff import (
    ScheduleDecomposition,
    birkhoff_decompose,
    complete_to_doubly_stochastic,
    pair_rate,
    schedule_rates,
)
from .bounds import (
    BoundsReport,
    MacWitness,
    bounds_report,
    cutset_single_node,
    mac_tightness_witness,
    multicast_factors,
    table1_rho_ia,
    table1_row,
    unicast_factors,
)
from .errors import HypothesisError, InfeasibleTrafficError
from .multicast import (
    StarGraph,
    StarRouting,
    multicast_achieved_rates,
    phase_traffic,
    route_over_star,
    uniform_cyclic_decomposition,
)
from .network import (
    RMIN_UPPER,
    ChannelParams,
    Fading,
    NodePlacement,
    grid_placement,
    pairwise_distance,
    r_min,
    sample_channel,
    uniform_random_placement,
)
from .rayleigh import (
    OpportunisticPlan,
    SlotPlan,
    WaterfillSolution,
    erlang_tail,
    guaranteed_slot_rate,
    max_matching,
    opportunistic_round,
    rayleigh_inner_rate,
    run_opportunistic,
    slot_graph,
    solve_waterfill,
)
from .traffic import (
    BindingCut,
    MulticastTraffic,
    RegionMembership,
    UnicastTraffic,
    as_multicast,
    membership_mc,
    membership_uc,
    permute_traffic,
    random_sd_pairing,
    unicast_loads,
)

__version__ = "0.1.0"
