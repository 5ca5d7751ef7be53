"""Nash and sequential equilibrium checks, and the two repair transforms."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .analysis import (
    decompose_switches,
    is_lean,
    is_local_variant,
    necessarily_below,
    state_reach_probability,
)
from .beliefs import (
    BeliefAssessment,
    BeliefSystem,
    InvalidBeliefs,
    compute_beliefs,
    conditional_utility,
    validate_beliefs,
)
from .game import MachineGame, check_cost_properties, expected_utility, outcome_distribution
from .machine import remove_state

KINDS = ("nash", "exante", "interim", "lean")


class ConversionError(RuntimeError):
    pass


class PreconditionError(ValueError):
    pass


@dataclass(frozen=True)
class Witness:
    player: int
    state: str | None
    machine: str
    before: Fraction
    after: Fraction


@dataclass
class EquilibriumReport:
    kind: str
    verdict: bool
    witnesses: list = field(default_factory=list)
    candidates: int = 0
    notes: list = field(default_factory=list)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown report kind {self.kind!r}")


def _replace(profile, i, m) -> tuple:
    return tuple(profile[:i]) + (m,) + tuple(profile[i + 1:])


def is_nash(g: MachineGame, profile) -> EquilibriumReport:
    profile = tuple(profile)
    base = expected_utility(g, profile)
    witnesses, count = [], 0
    for i in range(g.players):
        for n in g.menu(i):
            count += 1
            after = expected_utility(g, _replace(profile, i, n))[i]
            if after > base[i]:
                witnesses.append(Witness(i, None, n.name, base[i], after))
    return EquilibriumReport("nash", not witnesses, witnesses, count)


def find_nash(g: MachineGame) -> list:
    return [p for p in g.profiles() if is_nash(g, p).verdict]


def _deviations(g, profile, beliefs, i, q, exante):
    """(switch, before, after) for every switch at ``q`` that the mode admits."""
    m = profile[i]
    out = []
    before = None
    for sw in decompose_switches(g, i, m, q):
        if exante and not is_local_variant(g, i, m, q, sw.spliced):
            continue
        if before is None:
            before = conditional_utility(g, profile, i, q, beliefs)
        after = conditional_utility(g, _replace(profile, i, sw.spliced), i, q, beliefs)
        out.append((sw, before, after))
    return out


def check_sequential(g: MachineGame, assessment: BeliefAssessment, mode: str) -> EquilibriumReport:
    if mode not in ("exante", "interim"):
        raise ValueError(f"unknown mode {mode!r}")
    profile = tuple(assessment.profile)
    ok, bad = validate_beliefs(g, profile, assessment.beliefs)
    if not ok:
        raise InvalidBeliefs(f"beliefs fail validation: {bad[0]}")
    witnesses, count = [], 0
    for i, m in enumerate(profile):
        for q in m.states:
            for sw, before, after in _deviations(g, profile, assessment.beliefs, i, q,
                                                 mode == "exante"):
                count += 1
                if after > before:
                    witnesses.append(Witness(i, q, sw.target.name, before, after))
    notes = [f"{count} representable switch candidate(s) examined"]
    return EquilibriumReport(mode, not witnesses, witnesses, count, notes)


# -- transforms -----------------------------------------------------------------

@dataclass
class ConversionResult:
    profile: tuple
    beliefs: BeliefSystem
    iterations: int
    log: list


def _merge_beliefs(g, profile, fixed: BeliefSystem, original) -> BeliefSystem:
    """``fixed`` on states the original machines had, fresh limits elsewhere."""
    entries = {}
    fresh = None
    for i, m in enumerate(profile):
        for q in m.states:
            if q in original[i].states and (i, q) in fixed.entries:
                entries[(i, q)] = fixed.entries[(i, q)]
            else:
                if fresh is None:
                    fresh = compute_beliefs(g, profile)
                entries[(i, q)] = fresh.entries[(i, q)]
    return BeliefSystem(tuple(profile), entries)


def convert_to_sequential(g: MachineGame, profile, beliefs: BeliefSystem | None = None
                          ) -> ConversionResult:
    original = tuple(profile)
    if not is_nash(g, original).verdict:
        raise PreconditionError("profile is not a Nash equilibrium")
    fixed = beliefs if beliefs is not None else compute_beliefs(g, original)
    ok, bad = validate_beliefs(g, original, fixed)
    if not ok:
        raise PreconditionError(f"beliefs fail validation: {bad[0]}")
    bound = sum(len(m.states) for m in original)
    current = original
    log = []
    for iteration in range(bound + 1):
        mu = _merge_beliefs(g, current, fixed, original)
        candidates = []
        for i, m in enumerate(current):
            for q in m.states:
                devs = [d for d in _deviations(g, current, mu, i, q, True) if d[2] > d[1]]
                if devs:
                    candidates.append((i, q, devs))
        if not candidates:
            result = ConversionResult(current, mu, iteration, log)
            _verify_conversion(g, original, result)
            return result
        if iteration == bound:
            break
        i, q, devs = _minimal(g, current, candidates)
        if state_reach_probability(g, current, i, q) != 0:
            raise ConversionError(f"non-optimal minimal state {q} of player {i + 1} is reached "
                                  "with positive probability")
        best = max(d[2] for d in devs)
        sw, before, after = next(d for d in devs if d[2] == best)
        log.append((iteration + 1, i, q, sw.target.name, before, after))
        current = _replace(current, i, sw.spliced)
    raise ConversionError(f"no fixed point within {bound} iterations")


def _minimal(g, profile, candidates):
    """First candidate not inside the necessarily-below set of another one."""
    for i, q, devs in candidates:
        m = profile[i]
        preceded = any(j == i and r != q and q in necessarily_below(g, i, m, r).states
                       for j, r, _ in candidates)
        if not preceded:
            return i, q, devs
    return candidates[0]


def _verify_conversion(g, original, result):
    report = check_sequential(g, BeliefAssessment(result.profile, result.beliefs), "exante")
    if not report.verdict:
        raise ConversionError("converted profile is not an ex ante sequential equilibrium")
    if outcome_distribution(g, result.profile) != outcome_distribution(g, original):
        raise ConversionError("conversion changed the outcome distribution")


def prune_to_lean(g: MachineGame, profile) -> tuple:
    """Drop every state the profile never reaches, one at a time."""
    profile = tuple(profile)
    if not is_nash(g, profile).verdict:
        raise PreconditionError("profile is not a Nash equilibrium")
    for mode in ("nonnegative-state-cost", "complexity-independent"):
        check = check_cost_properties(g, mode)
        if not check.holds:
            raise PreconditionError(f"{mode} fails: {check.witness}")
    current = profile
    while True:
        lean, unreached = is_lean(g, current)
        if lean:
            break
        i, q = unreached[0]
        current = _replace(current, i, remove_state(current[i], q))
    # state_count complexity can drop, so compare types and actions only
    if outcome_distribution(g, current, False) != outcome_distribution(g, profile, False):
        raise ConversionError("pruning changed the outcome distribution")
    if not is_nash(g, current).verdict:
        raise ConversionError("pruned profile is not a Nash equilibrium")
    return current
