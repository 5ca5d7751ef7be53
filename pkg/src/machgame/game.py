"""Bayesian machine games: types, complexity functions, utility rules."""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

from .machine import (
    Budget,
    Machine,
    View,
    enumerate_runs,
    execute,
    machines_isomorphic,
    remove_state,
    validate_machine,
)


class GameError(ValueError):
    pass


class UnknownMachine(GameError):
    pass


@dataclass(frozen=True)
class TypeSpace:
    """Type profiles with their prior, in declaration order."""

    profiles: tuple
    prior: tuple

    def __post_init__(self):
        if len(self.profiles) != len(self.prior):
            raise GameError("prior and profiles differ in length")
        if not self.profiles:
            raise GameError("empty type space")
        width = {len(p) for p in self.profiles}
        if len(width) != 1:
            raise GameError("type profiles have different lengths")
        if any(p < 0 for p in self.prior):
            raise GameError("negative prior")
        total = sum(self.prior, Fraction(0))
        if total != 1:
            raise GameError(f"prior sums to {total}, not 1")
        if len(set(self.profiles)) != len(self.profiles):
            raise GameError("duplicate type profile")

    def items(self):
        return zip(self.profiles, self.prior)

    def support(self):
        return [(t, p) for t, p in self.items() if p > 0]

    def projection(self, i: int, support_only=False) -> tuple:
        seen = []
        for t, p in self.items():
            if (p > 0 or not support_only) and t[i] not in seen:
                seen.append(t[i])
        return tuple(seen)


@dataclass(frozen=True)
class Options:
    necessarily_below_scope: str = "all-types"
    zero_prior_tremble: bool = True

    def __post_init__(self):
        if self.necessarily_below_scope not in ("all-types", "support-only"):
            raise GameError(f"bad necessarily_below_scope {self.necessarily_below_scope!r}")


COMPLEXITY_KINDS = ("zero", "step_count", "random_bit_count", "state_count",
                    "menu_table", "threshold_table", "weighted_sum")


@dataclass(frozen=True)
class ComplexityFunction:
    """``table`` holds (machine name, value) for menu_table and
    (selector, value) for threshold_table where a selector is
    ``("machine", name)``, ``("states", bound)`` or ``("otherwise",)``.
    ``terms`` holds (ComplexityFunction, weight) for weighted_sum."""

    kind: str = "zero"
    table: tuple = ()
    terms: tuple = ()

    def __post_init__(self):
        if self.kind not in COMPLEXITY_KINDS:
            raise GameError(f"unknown complexity kind {self.kind!r}")


class Pattern(NamedTuple):
    kind: str  # exact | bottom | any | type | type_bit
    value: str = ""
    player: int = 0
    index: int = 0

    def matches(self, action, types) -> bool:
        if self.kind == "any":
            return True
        if self.kind == "bottom":
            return action is None
        if action is None:
            return False
        if self.kind == "exact":
            return action == self.value
        if self.kind == "type":
            return action == types[self.player]
        t = types[self.player]
        return self.index < len(t) and action == t[self.index]


_OPS = {
    "<=": lambda a, b: a <= b, "<": lambda a, b: a < b, ">=": lambda a, b: a >= b,
    ">": lambda a, b: a > b, "==": lambda a, b: a == b, "!=": lambda a, b: a != b,
}


class Guard(NamedTuple):
    kind: str  # type | action | complexity
    player: int
    pattern: Pattern | None = None
    value: object = None
    op: str = ""

    def holds(self, types, actions, comps) -> bool:
        if self.kind == "type":
            return types[self.player] == self.value
        if self.kind == "action":
            return self.pattern.matches(actions[self.player], types)
        return _OPS[self.op](comps[self.player], self.value)


class LinearExpr(NamedTuple):
    const: Fraction
    coefs: tuple = ()  # (player, coefficient) pairs

    def evaluate(self, comps) -> Fraction:
        return self.const + sum((c * comps[j] for j, c in self.coefs), Fraction(0))


class UtilityCase(NamedTuple):
    guards: tuple
    expr: LinearExpr


@dataclass(frozen=True)
class UtilityRule:
    cases: tuple

    def __post_init__(self):
        if not self.cases or self.cases[-1].guards:
            raise GameError("utility rule needs a final default case")

    def evaluate(self, types, actions, comps) -> Fraction:
        for case in self.cases:
            if all(g.holds(types, actions, comps) for g in case.guards):
                return case.expr.evaluate(comps)
        raise GameError("no utility case matched")  # unreachable with a default

    def max_player_index(self) -> int:
        idx = [-1]
        for case in self.cases:
            idx += [g.player for g in case.guards]
            idx += [g.pattern.player for g in case.guards if g.pattern is not None]
            idx += [j for j, _ in case.expr.coefs]
        return max(idx)


@dataclass(frozen=True, eq=False)
class MachineGame:
    players: int
    machines: dict
    menus: tuple
    types: TypeSpace
    complexity: tuple
    utility: tuple
    budget: Budget = field(default_factory=Budget)
    options: Options = field(default_factory=Options)

    def __post_init__(self):
        if len(self.menus) != self.players:
            raise GameError("one menu per player required")
        for i, menu in enumerate(self.menus):
            if not menu:
                raise GameError("empty menu")
            for name in menu:
                if name not in self.machines:
                    raise GameError(f"menu of player {i + 1} names unknown machine {name}")
        if len(self.complexity) != self.players or len(self.utility) != self.players:
            raise GameError("one complexity function and utility rule per player required")
        if len(self.types.profiles[0]) != self.players:
            raise GameError("type profiles must have one entry per player")
        for rule in self.utility:
            if rule.max_player_index() >= self.players:
                raise GameError("utility rule references a player that does not exist")

    def menu(self, i: int) -> tuple:
        return tuple(self.machines[n] for n in self.menus[i])

    def profiles(self):
        return itertools.product(*(self.menu(i) for i in range(self.players)))

    def profile(self, names) -> tuple:
        if len(names) != self.players:
            raise GameError(f"profile needs {self.players} machines")
        for i, n in enumerate(names):
            if n not in self.machines:
                raise GameError(f"unknown machine {n}")
        return tuple(self.machines[n] for n in names)

    def validate(self) -> list:
        diags = []
        for i in range(self.players):
            if hasattr(self, "input_scope"):
                scope = self.input_scope(i)
            else:
                scope = self.types.projection(i)
            for m in self.menu(i):
                diags += [f"{m.name}: {d}" for d in validate_machine(m, scope, self.budget)]
        return diags


# -- runs and complexity ------------------------------------------------------

@functools.lru_cache(maxsize=None)
def runs(m: Machine, t: str, budget: Budget) -> tuple:
    return enumerate_runs(m, t, budget)


@functools.lru_cache(maxsize=None)
def _identity(g: MachineGame, names: tuple, m: Machine):
    for name in names:
        if machines_isomorphic(m, g.machines[name]):
            return name
    return None


def complexity_value(g: MachineGame, cf: ComplexityFunction, m: Machine, steps: int,
                     coins: int) -> Fraction:
    kind = cf.kind
    if kind == "zero":
        return Fraction(0)
    if kind == "step_count":
        return Fraction(steps)
    if kind == "random_bit_count":
        return Fraction(coins)
    if kind == "state_count":
        return Fraction(len(m.states))
    if kind == "menu_table":
        name = _identity(g, tuple(n for n, _ in cf.table), m)
        if name is None:
            raise UnknownMachine("unknown machine identity")
        return dict(cf.table)[name]
    if kind == "threshold_table":
        for selector, value in cf.table:
            if selector[0] == "otherwise":
                return value
            if selector[0] == "states" and len(m.states) <= selector[1]:
                return value
            if selector[0] == "machine" and _identity(g, (selector[1],), m):
                return value
        raise UnknownMachine("unknown machine identity")
    return sum((w * complexity_value(g, sub, m, steps, coins) for sub, w in cf.terms), Fraction(0))


def evaluate_complexity(g: MachineGame, player: int, m: Machine, view: View) -> Fraction:
    trace = execute(m, view, g.budget)
    return complexity_value(g, g.complexity[player], m, trace.steps, trace.coins_consumed)


@functools.lru_cache(maxsize=None)
def player_outcomes(g: MachineGame, i: int, m: Machine, t: str) -> tuple:
    """(probability, output, complexity) triples of ``m`` run on own type ``t``."""
    acc: dict = {}
    for e in runs(m, t, g.budget):
        c = complexity_value(g, g.complexity[i], m, e.trace.steps, e.trace.coins_consumed)
        key = (e.trace.output, c)
        acc[key] = acc.get(key, Fraction(0)) + e.probability
    return tuple((p, out, c) for (out, c), p in acc.items())


def outcome_distribution(g: MachineGame, profile, with_complexity=True) -> dict:
    """Joint law of (types, actions, complexities) over positive-prior types."""
    dist: dict = {}
    for types, prior in g.types.support():
        per = [player_outcomes(g, i, m, types[i]) for i, m in enumerate(profile)]
        for combo in itertools.product(*per):
            p = prior
            for q, _, _ in combo:
                p *= q
            key = (types, tuple(o for _, o, _ in combo),
                   tuple(c for _, _, c in combo) if with_complexity else None)
            dist[key] = dist.get(key, Fraction(0)) + p
    return dist


def utility_of_outcome(g: MachineGame, key) -> tuple:
    types, actions, comps = key
    return tuple(rule.evaluate(types, actions, comps) for rule in g.utility)


@functools.lru_cache(maxsize=None)
def expected_utility(g: MachineGame, profile: tuple) -> tuple:
    totals = [Fraction(0)] * g.players
    for key, p in outcome_distribution(g, tuple(profile)).items():
        for i, u in enumerate(utility_of_outcome(g, key)):
            totals[i] += p * u
    return tuple(totals)


# -- cost-structure predicates -----------------------------------------------

class CostCheck(NamedTuple):
    holds: bool
    witness: tuple | None
    scope: str


COST_MODES = ("positive-state-cost", "nonnegative-state-cost", "local-complexity",
              "complexity-independent")


def _scope_values(g):
    """Observed outputs and complexities per player over menu machines and views."""
    outputs, comps = [], []
    for i in range(g.players):
        outs, cs = set(), set()
        for m in g.menu(i):
            for t in g.types.projection(i):
                for p, out, c in player_outcomes(g, i, m, t):
                    outs.add(out)
                    cs.add(c)
        outputs.append(sorted(outs, key=lambda o: (o is None, o or "")))
        comps.append(sorted(cs))
    return outputs, comps


def check_cost_properties(g: MachineGame, mode: str) -> CostCheck:
    if mode not in COST_MODES:
        raise GameError(f"unknown cost mode {mode!r}")
    scope = (f"menu machines of {g.players} player(s) on all type-space views "
             f"within budget (steps={g.budget.max_steps}, coins={g.budget.max_random_bits})")
    if mode == "local-complexity":
        return _check_local(g, scope)
    outputs, comps = _scope_values(g)
    if mode == "complexity-independent":
        return _check_independent(g, outputs, comps, scope)
    strict = mode == "positive-state-cost"
    extra = [set(c) for c in comps]
    for i in range(g.players):
        cf = g.complexity[i]
        for m in g.menu(i):
            for t in g.types.projection(i):
                for e in runs(m, t, g.budget):
                    base = complexity_value(g, cf, m, e.trace.steps, e.trace.coins_consumed)
                    visited = set(e.trace.states)
                    for q in m.states:
                        if q == m.start or q in visited:
                            continue
                        smaller = remove_state(m, q)
                        tr = execute(smaller, View(t, e.coins), g.budget)
                        try:
                            c = complexity_value(g, cf, smaller, tr.steps, tr.coins_consumed)
                        except UnknownMachine:
                            return CostCheck(False, ("state-removal", i + 1, m.name, q, t, e.coins,
                                                     "unknown machine identity"), scope)
                        extra[i].add(c)
                        if c > base or (strict and c == base):
                            return CostCheck(False, ("state-removal", i + 1, m.name, q, t, e.coins,
                                                     str(base), str(c)), scope)
    if strict:
        gap = _menu_gap(g)
        if gap is not None:
            return CostCheck(False, gap, scope)
    comps = [sorted(s) for s in extra]
    for types in g.types.profiles:
        for actions in itertools.product(*outputs):
            for cvec in itertools.product(*comps):
                for i in range(g.players):
                    u = g.utility[i].evaluate(types, actions, cvec)
                    for c2 in comps[i]:
                        if c2 <= cvec[i]:
                            continue
                        bumped = cvec[:i] + (c2,) + cvec[i + 1:]
                        u2 = g.utility[i].evaluate(types, actions, bumped)
                        if u2 > u or (strict and u2 == u):
                            return CostCheck(False, ("monotonicity", i + 1, types, actions,
                                                     cvec, bumped), scope)
    return CostCheck(True, None, scope)


def _menu_gap(g):
    """A menu machine whose pruned form (minus a state unvisited on the support) is off-menu."""
    for i in range(g.players):
        menu = g.menu(i)
        for m in menu:
            visited = {m.start}
            for t in g.types.projection(i, support_only=True):
                for e in runs(m, t, g.budget):
                    visited.update(e.trace.states)
            for q in m.states:
                if q in visited:
                    continue
                smaller = remove_state(m, q)
                if not any(machines_isomorphic(smaller, n) for n in menu):
                    return ("menu-closure", i + 1, m.name, q)
    return None


def _check_independent(g, outputs, comps, scope):
    for types in g.types.profiles:
        for actions in itertools.product(*outputs):
            for cvec in itertools.product(*comps):
                for i in range(g.players):
                    u = g.utility[i].evaluate(types, actions, cvec)
                    for j in range(g.players):
                        if j == i:
                            continue
                        for c2 in comps[j]:
                            other = cvec[:j] + (c2,) + cvec[j + 1:]
                            if g.utility[i].evaluate(types, actions, other) != u:
                                return CostCheck(False, ("dependence", i + 1, j + 1, types,
                                                         actions, cvec, other), scope)
    return CostCheck(True, None, scope)


def _check_local(g, scope):
    from .analysis import decompose_switches, local_variant_witness

    for i in range(g.players):
        for m in g.menu(i):
            for q in m.states:
                for sw in decompose_switches(g, i, m, q):
                    view = local_variant_witness(g, i, m, q, sw.spliced)
                    if view is not None:
                        return CostCheck(False, (m.name, q, sw.target.name, view), scope)
    return CostCheck(True, None, scope)
