"""Brute-force reference computations used to derive expected test values.

Each oracle works from ``execute`` on explicit coin strings or from a
concrete trembled machine, never from the enumeration code it checks.
"""

import itertools
from fractions import Fraction

from machgame.machine import (
    InsufficientCoins,
    View,
    apply_action,
    execute,
    initial_config,
    read_symbols,
)


def coin_runs(m, t, budget):
    """(coins, probability, trace) for every coin string the run actually uses."""
    seen = {}
    for n in range(budget.max_random_bits + 1):
        short = False
        for bits in itertools.product("01", repeat=n):
            coins = "".join(bits)
            try:
                tr = execute(m, View(t, coins), budget)
            except InsufficientCoins:
                short = True
                continue
            used = coins[:tr.coins_consumed]
            if used not in seen:
                seen[used] = tr
        if not short:
            break
    return [(c, Fraction(1, 2 ** len(c)), tr) for c, tr in sorted(seen.items())]


def reach_probability(g, m, player, q):
    total = Fraction(0)
    for types, prior in g.types.items():
        if prior == 0:
            continue
        for _, p, tr in coin_runs(m, types[player], g.budget):
            if q in tr.states:
                total += prior * p
    return total


def below_set(g, player, m, anchor, types=None):
    if types is None:
        types = sorted({t[player] for t in g.types.profiles})
    visits = [set(tr.states) for t in types for _, _, tr in coin_runs(m, t, g.budget)]
    return {s for s in m.states if all(anchor in v for v in visits if s in v)}


def expected_utility(g, profile):
    totals = [Fraction(0)] * g.players
    for types, prior in g.types.items():
        if prior == 0:
            continue
        per = [coin_runs(m, types[i], g.budget) for i, m in enumerate(profile)]
        for combo in itertools.product(*per):
            p = prior
            outs, comps = [], []
            for i, (coins, q, tr) in enumerate(combo):
                p *= q
                outs.append(tr.output)
                comps.append(_complexity(g, i, profile[i], tr))
            for i in range(g.players):
                totals[i] += p * g.utility[i].evaluate(types, tuple(outs), tuple(comps))
    return tuple(totals)


def _complexity(g, i, m, tr):
    from machgame.game import complexity_value

    return complexity_value(g, g.complexity[i], m, tr.steps, tr.coins_consumed)


def numeric_beliefs(g, trembled, player, q, eps, eta, max_steps=40):
    """Frontier beliefs at ``q`` in the concrete trembled game, one tremble at most.

    Returns signature -> probability.  Paths with two or more trembles are
    dropped; their share is of order ``eps`` relative to what is kept.
    """
    machines, prior = trembled.at(eps, eta)
    m = machines[player]
    base = trembled.machines[player].base
    weights = {}

    def walk(types, config, states, marks, w, trembled_yet, steps):
        if config.state == q and steps:
            sig = _signature(types, states, marks)
            weights[sig] = weights.get(sig, 0) + w
            return
        if config.state in m.halts or steps >= max_steps:
            return
        i, k = read_symbols(config, types[player])
        own = dict(base.rows.get((config.state, i, k), ()))
        for action, p in m.rows[(config.state, i, k)]:
            off = action not in own
            if off and trembled_yet:
                continue
            try:
                nxt = apply_action(config, action, types[player], g.budget)
            except Exception:
                continue
            walk(types, nxt, states + (nxt.state,), marks + (off,), w * p, trembled_yet or off,
                 steps + 1)

    for types, w in prior:
        if w == 0:
            continue
        start = initial_config(m)
        if start.state == q:
            sig = _signature(types, (start.state,), ())
            weights[sig] = weights.get(sig, 0) + w
            continue
        walk(types, start, (start.state,), (), w, False, 0)
    total = sum(weights.values())
    return {s: v / total for s, v in weights.items()}


def _signature(types, states, marks):
    parts = [states[0]]
    for s, off in zip(states[1:], marks):
        parts.append("~" if off else ">")
        parts.append(s)
    shown = ",".join(t if t else '""' for t in types)
    return f"t=({shown}) {''.join(parts)} c=0"
