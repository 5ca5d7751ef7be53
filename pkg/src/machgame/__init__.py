"""Bayesian machine games: equilibrium checks for players who choose machines."""

from .beliefs import BeliefAssessment, BeliefSystem, compute_beliefs, conditional_utility
from .equilibrium import (
    EquilibriumReport,
    check_sequential,
    convert_to_sequential,
    find_nash,
    is_nash,
    prune_to_lean,
)
from .game import MachineGame, expected_utility, outcome_distribution
from .gamefile import parse_game_file, serialize_game
from .machine import Budget, Machine, execute
from .scenarios import run_scenario

__all__ = [
    "BeliefAssessment", "BeliefSystem", "Budget", "EquilibriumReport", "Machine",
    "MachineGame", "check_sequential", "compute_beliefs", "conditional_utility",
    "convert_to_sequential", "execute", "expected_utility", "find_nash", "is_nash",
    "outcome_distribution", "parse_game_file", "prune_to_lean", "run_scenario",
    "serialize_game",
]
