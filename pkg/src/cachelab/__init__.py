"""Symmetric selfish coded caching: placement and delivery simulation,
side-information graphs, and an exact converse bound with brute-force
cross-checks."""

from .converse import (
    BoundCurve,
    DemandFamily,
    LpSolution,
    aggregate_check,
    bound_curve,
    closed_form_load,
    demand_family,
    demand_from_circular,
    f_coeff,
    man_curve,
    per_demand_bound,
    ratio_report,
    solve_lp,
)
from .fds import (
    ClassId,
    FdsStructure,
    FileId,
    Permutation,
    SubfileId,
    circular_representatives,
    circular_shifts,
    enumerate_classes,
    mod1,
    user_fds,
)
from .index_coding import SideInfoGraph, bound_from_set, build_graph, is_acyclic, mais, paper_acyclic_set
from .schemes import (
    CapExceeded,
    DeliveryMessage,
    DemandInstance,
    Placement,
    greedy_clique_delivery,
    man_delivery,
    man_placement,
    profile_placement,
    selfish_symmetric_placement,
    verify_decodability,
    worst_case_load,
)

__version__ = "0.1.0"
