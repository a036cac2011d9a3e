"""Pareto-stable, group-strategyproof matching for preferences with ties."""

from .market import Outcome, TieredSlopeMarket, build_market, man_optimal_oracle
from .mechanism import (
    CollegeInstance,
    CollegeMatching,
    Matching,
    PriorityAssignment,
    assign_priorities,
    solve,
    solve_college,
)
from .model import UNMATCHED, Instance, PreferenceOrder, parse_instance, rank_utilities, serialize_instance
from .verifier import audit_strategyproofness, is_college_pareto_stable, is_pareto_stable, strongly_blocking_pairs

__all__ = [
    "UNMATCHED",
    "CollegeInstance",
    "CollegeMatching",
    "Instance",
    "Matching",
    "Outcome",
    "PreferenceOrder",
    "PriorityAssignment",
    "TieredSlopeMarket",
    "assign_priorities",
    "audit_strategyproofness",
    "build_market",
    "is_college_pareto_stable",
    "is_pareto_stable",
    "man_optimal_oracle",
    "parse_instance",
    "rank_utilities",
    "serialize_instance",
    "solve",
    "solve_college",
    "strongly_blocking_pairs",
]
