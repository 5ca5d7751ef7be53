"""Seeded generator of small random two-player machine games.

Machines have 2 to 4 states in a fixed order and only move forward, so
every run halts; at most one state tosses a coin, so a run uses at most
one coin bit.  Menu entries beyond the first are one-state mutations of
it, which keeps many switches representable inside the menu.
"""

from __future__ import annotations

import random
from fractions import Fraction

from .game import (
    ComplexityFunction,
    Guard,
    LinearExpr,
    MachineGame,
    Options,
    Pattern,
    TypeSpace,
    UtilityCase,
    UtilityRule,
    runs,
)
from .machine import (
    SYMBOLS,
    Action,
    Budget,
    CoinBudgetExceeded,
    Machine,
    ModelBoundExceeded,
    machines_isomorphic,
    remove_state,
)

SMALL_BUDGET = Budget(max_steps=20, max_random_bits=4, tape_window=8)
COMPLEXITY_CHOICES = ("zero", "step_count", "state_count", "random_bit_count", "mixed")


def _state_row(rng, states, j, coin):
    later = states[j + 1:]

    def action():
        return Action(rng.choice(later), rng.choice("01b"), "b", rng.choice("RS"), "S",
                      rng.choice("RS"))

    if coin:
        a, b = action(), action()
        return [(a, Fraction(1, 2)), (b, Fraction(1, 2))]
    return [(action(), Fraction(1))]


def _rows_for(rng, states, j, coin):
    """Rows of state ``j``: one choice per input symbol, shared across work symbols."""
    rows = {}
    for i in SYMBOLS:
        row = _state_row(rng, states, j, coin)
        for w in SYMBOLS:
            rows[(states[j], i, w)] = row
    return rows


def random_machine(rng: random.Random, name: str) -> Machine:
    k = rng.randint(2, 4)
    states = [f"s{j}" for j in range(k - 1)] + ["H"]
    coin_at = rng.randrange(k - 1) if rng.random() < 0.3 else None
    rows = {}
    for j in range(k - 1):
        rows.update(_rows_for(rng, states, j, j == coin_at))
    return Machine.build(states, states[0], {"H"}, rows, name)


def mutate(rng: random.Random, m: Machine, name: str) -> Machine:
    states = list(m.states)
    j = rng.randrange(len(states) - 1)
    rows = {k: v for k, v in m.rows.items() if k[0] != states[j]}
    rows.update(_rows_for(rng, states, j, False))
    return Machine.build(states, m.start, m.halts, rows, name)


def _prune_on(m: Machine, types, budget) -> Machine:
    while True:
        visited = {m.start}
        for t in types:
            for e in runs(m, t, budget):
                visited.update(e.trace.states)
        dead = [q for q in m.states if q not in visited]
        if not dead:
            return m
        m = remove_state(m, dead[0])


def _complexity(rng, kind, names):
    if kind == "mixed":
        return ComplexityFunction("weighted_sum", terms=((ComplexityFunction("state_count"),
                                                          Fraction(1, 2)),
                                                         (ComplexityFunction("step_count"),
                                                          Fraction(1, 4))))
    return ComplexityFunction(kind)


def _utility(rng, player, outputs, weight, others_weight):
    cases = []
    for _ in range(rng.randint(1, 4)):
        guards = [Guard("action", player, pattern=Pattern("exact", rng.choice(outputs)))]
        if rng.random() < 0.5:
            other = 1 - player
            guards.append(Guard("action", other, pattern=Pattern("exact", rng.choice(outputs))))
        if rng.random() < 0.3:
            guards.append(Guard("type", player, value=rng.choice("01")))
        coefs = [(player, -weight)] if weight else []
        if others_weight:
            coefs.append((1 - player, others_weight))
        cases.append(UtilityCase(tuple(guards), LinearExpr(Fraction(rng.randint(-3, 3)),
                                                           tuple(sorted(coefs)))))
    coefs = ((player, -weight),) if weight else ()
    cases.append(UtilityCase((), LinearExpr(Fraction(rng.randint(-3, 1)), coefs)))
    return UtilityRule(tuple(cases))


def random_game(seed: int, positive_cost: bool | None = None) -> MachineGame:
    """Game number ``seed``; draws that some run cannot finish within budget are redrawn."""
    for attempt in range(100):
        rng = random.Random(seed if attempt == 0 else f"{seed}/{attempt}")
        g = _draw(rng, positive_cost)
        if g is not None:
            return g
    raise RuntimeError(f"no valid game for seed {seed}")


def _draw(rng: random.Random, positive_cost) -> MachineGame | None:
    if positive_cost is None:
        positive_cost = rng.random() < 0.3
    profiles = [(a, b) for a in "01" for b in "01"]
    rng.shuffle(profiles)
    profiles = sorted(profiles[:rng.randint(1, 4)])
    weights = [rng.choice([0, 1, 1, 2]) for _ in profiles]
    if not any(weights):
        weights[0] = 1
    total = sum(weights)
    types = TypeSpace(tuple(profiles), tuple(Fraction(w, total) for w in weights))
    machines, menus = {}, []
    for p in range(2):
        base = random_machine(rng, f"P{p + 1}A")
        menu = [base]
        for k in range(rng.randint(0, 2)):
            menu.append(mutate(rng, base, f"P{p + 1}{'BC'[k]}"))
        # every state must be reachable on some in-scope type
        scope = types.projection(p, support_only=positive_cost)
        try:
            menu = [_prune_on(m, scope, SMALL_BUDGET).renamed(m.name) for m in menu]
        except (ModelBoundExceeded, CoinBudgetExceeded):
            return None
        unique = []
        for m in menu:
            if not any(machines_isomorphic(m, u) for u in unique):
                unique.append(m)
        for m in unique:
            machines[m.name] = m
        menus.append(tuple(m.name for m in unique))
    try:
        outputs = sorted({e.trace.output for name in machines for t in "01"
                          for e in runs(machines[name], t, SMALL_BUDGET)} - {None})
    except (ModelBoundExceeded, CoinBudgetExceeded):
        return None
    if positive_cost:
        kinds = ["state_count", "state_count"]
        weights = [Fraction(rng.choice([1, 2]), 2)] * 2
        others = [Fraction(0), Fraction(0)]
    else:
        kinds = [rng.choice(COMPLEXITY_CHOICES) for _ in range(2)]
        weights = [Fraction(rng.choice([0, 1, 2]), 2) for _ in range(2)]
        others = [Fraction(rng.choice([0, 0, 0, 1]), 4) for _ in range(2)]
    complexity = tuple(_complexity(rng, k, menus[i]) for i, k in enumerate(kinds))
    utility = tuple(_utility(rng, p, outputs, weights[p], others[p]) for p in range(2))
    options = Options(zero_prior_tremble=rng.random() < 0.8)
    return MachineGame(2, machines, tuple(menus), types, complexity, utility, SMALL_BUDGET,
                       options)


def corpus(n: int = 100, seed: int = 0) -> list:
    return [random_game(seed * 100003 + k) for k in range(n)]
