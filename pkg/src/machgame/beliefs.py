"""Belief systems as limits of trembling machine profiles.

Every transition distribution is mixed with weight ``eps`` uniformly over
all action tuples; when ``zero_prior_tremble`` is on the prior is mixed
with weight ``eta`` uniformly over the type space.  Path probabilities are
:class:`InfinitesimalPoly` values and a belief is the limit of a path's
probability over the probability of reaching the state.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from fractions import Fraction

from .analysis import History, state_reach_probability
from .game import MachineGame, complexity_value, player_outcomes
from .infinitesimal import InfinitesimalPoly, limit_ratio
from .machine import (
    MOVES,
    SYMBOLS,
    Action,
    Budget,
    Machine,
    MachineError,
    ModelBoundExceeded,
    apply_action,
    initial_config,
    output_of,
    read_symbols,
    row_bits,
)

EPS = InfinitesimalPoly.eps()
ETA = InfinitesimalPoly.eta()


class BeliefError(RuntimeError):
    pass


class InvalidBeliefs(ValueError):
    pass


def all_actions(m: Machine) -> tuple:
    return tuple(Action(*t) for t in itertools.product(m.states, SYMBOLS, SYMBOLS, MOVES, MOVES, MOVES))


@dataclass(frozen=True)
class ParametricMachine:
    """``base`` with every row mixed toward the uniform law on all action tuples."""

    base: Machine

    @property
    def arity(self) -> int:
        return len(self.base.states) * len(SYMBOLS) ** 2 * len(MOVES) ** 3

    def weight(self, state, in_sym, work_sym, action) -> InfinitesimalPoly:
        p = dict(self.base.rows.get((state, in_sym, work_sym), ())).get(action, Fraction(0))
        return _mix(p, self.arity)

    def row(self, state, in_sym, work_sym) -> dict:
        return {a: self.weight(state, in_sym, work_sym, a) for a in all_actions(self.base)}

    def at(self, eps) -> Machine:
        eps = Fraction(eps)
        rows = {}
        for q in self.base.states:
            if q in self.base.halts:
                continue
            for i in SYMBOLS:
                for w in SYMBOLS:
                    rows[(q, i, w)] = [(a, poly.substitute(eps))
                                       for a, poly in self.row(q, i, w).items()
                                       if poly.substitute(eps) != 0]
        b = self.base
        return Machine.build(b.states, b.start, b.halts, rows, b.name)


@dataclass(frozen=True)
class TrembledProfile:
    machines: tuple
    prior: tuple  # (type profile, InfinitesimalPoly)

    def at(self, eps, eta=0):
        return (tuple(pm.at(eps) for pm in self.machines),
                tuple((t, w.substitute(eps, eta)) for t, w in self.prior))


@functools.lru_cache(maxsize=None)
def _mix(p, arity) -> InfinitesimalPoly:
    return (1 - EPS) * p + EPS * Fraction(1, arity)


def _prior_weights(g: MachineGame, type_tremble: bool) -> tuple:
    n = len(g.types.profiles)
    out = []
    for t, p in g.types.items():
        if type_tremble:
            out.append((t, (1 - ETA) * p + ETA * Fraction(1, n)))
        elif p > 0:
            out.append((t, InfinitesimalPoly.const(p)))
    return tuple(out)


def tremble_profile(g: MachineGame, profile, type_tremble=None) -> TrembledProfile:
    if type_tremble is None:
        type_tremble = g.options.zero_prior_tremble
    return TrembledProfile(tuple(ParametricMachine(m) for m in profile),
                           _prior_weights(g, type_tremble))


# -- walking runs -----------------------------------------------------------------

def _walk(m: Machine, player, types, budget: Budget, weight, step, tremble, allow_trembles,
          record, targets=None):
    """Depth-first walk over histories of ``m`` on ``types[player]``.

    ``step(p)`` weighs a support transition of probability ``p``; ``tremble``
    weighs one off-support tuple.  ``record(history, weight)`` sees every
    prefix.  A deterministic stretch revisiting a configuration is cut: the
    run can never halt from there.  Branches that only exist because of a
    tremble are dropped when they leave the tape window or the coin budget,
    and, when ``targets`` is given, when they land where no state in
    ``targets`` can follow.
    """
    inp = types[player]
    everything = all_actions(m) if allow_trembles else ()
    root = History(types, player, (m.start,), (), initial_config(m), 0, 0, ())
    stack = [(root, weight, allow_trembles, frozenset())]
    while stack:
        h, w, left, seen = stack.pop()
        record(h, w)
        config = h.config
        if config.state in m.halts or h.steps >= budget.max_steps:
            continue
        in_sym, work_sym = read_symbols(config, inp)
        row = m.rows.get((config.state, in_sym, work_sym))
        if row is None:
            raise MachineError(f"missing-transition {config.state} {in_sym} {work_sym}")
        k = row_bits(row)
        if h.coins + k > budget.max_random_bits:
            if h.trembles:
                continue
            raise BeliefError("coin budget exceeded")
        if len(row) == 1:
            if config in seen:
                continue
            seen = seen | {config}
        else:
            seen = frozenset()
        children = []
        for action, p in row:
            try:
                nxt = apply_action(config, action, inp, budget)
            except ModelBoundExceeded:
                if h.trembles:
                    continue
                raise
            children.append((action, nxt, w * step(p), left, False))
        if left:
            support = dict(row)
            for action in everything:
                if action in support:
                    continue
                if targets is not None and action.next not in targets:
                    continue
                try:
                    nxt = apply_action(config, action, inp, budget)
                except ModelBoundExceeded:
                    continue
                children.append((action, nxt, w * tremble, left - 1, True))
        for action, nxt, nw, nleft, trembled in reversed(children):
            child = History(types, player, h.states + (nxt.state,), h.path + (action,), nxt,
                            h.steps + 1, h.coins + k,
                            h.trembles + ((len(h.path),) if trembled else ()))
            stack.append((child, nw, nleft, frozenset() if trembled else seen))


def walk_histories(m: Machine, player, types, budget: Budget, every_visit=False):
    """Untrembled histories with their exact probability given the types."""
    found = []

    def record(h, w):
        if every_visit or h.state not in h.states[:-1]:
            found.append((h, w))

    _walk(m, player, types, budget, Fraction(1), lambda p: p, None, 0, record)
    return found


@functools.lru_cache(maxsize=None)
def continue_runs(m: Machine, inp: str, config, steps: int, coins: int, budget: Budget) -> tuple:
    """Terminal (probability, output, steps, coins) reached by running ``m`` from ``config``."""
    out = []
    stack = [(config, steps, coins, Fraction(1), frozenset())]
    while stack:
        c, n, k, p, seen = stack.pop()
        while True:
            if c.state in m.halts:
                out.append((p, output_of(c), n, k))
                break
            if n >= budget.max_steps:
                out.append((p, None, n, k))
                break
            in_sym, work_sym = read_symbols(c, inp)
            row = m.rows.get((c.state, in_sym, work_sym))
            if row is None:
                raise MachineError(f"missing-transition {c.state} {in_sym} {work_sym}")
            bits = row_bits(row)
            if len(row) == 1:
                if c in seen:
                    out.append((p, None, budget.max_steps, k))
                    break
                seen = seen | {c}
                c = apply_action(c, row[0][0], inp, budget)
                n += 1
                k += bits
                continue
            if k + bits > budget.max_random_bits:
                raise BeliefError("coin budget exceeded")
            for action, q in reversed(row):
                stack.append((apply_action(c, action, inp, budget), n + 1, k + bits, p * q,
                              frozenset()))
            break
    return tuple(out)


# -- belief systems ---------------------------------------------------------------

@dataclass(frozen=True)
class BeliefSystem:
    machines: tuple
    entries: dict  # (player, state) -> ((History, Fraction), ...) over the upper frontier

    def frontier(self, player, state) -> tuple:
        try:
            return self.entries[(player, state)]
        except KeyError:
            raise KeyError(f"no beliefs for player {player + 1} at state {state}") from None

    def by_signature(self, player, state) -> dict:
        """Beliefs summed over histories sharing a signature, in first-seen order."""
        out: dict = {}
        for h, b in self.frontier(player, state):
            out[h.signature()] = out.get(h.signature(), Fraction(0)) + b
        return out

    def belief(self, player, state, history) -> Fraction:
        return self.by_signature(player, state).get(history.signature(), Fraction(0))

    def dump(self) -> list:
        lines = []
        for i, m in enumerate(self.machines):
            for q in m.states:
                if (i, q) not in self.entries:
                    continue
                for sig, b in self.by_signature(i, q).items():
                    if b:
                        lines.append(f"{i + 1}:{q} | {sig} | {b}")
        return lines


@dataclass(frozen=True)
class BeliefAssessment:
    profile: tuple
    beliefs: BeliefSystem


@functools.lru_cache(maxsize=None)
def _successors(m: Machine, q) -> frozenset:
    """States reachable from ``q`` along the machine's own transitions."""
    seen, todo = set(), [q]
    while todo:
        s = todo.pop()
        for (r, _, _), row in m.rows.items():
            if r != s:
                continue
            for a, _ in row:
                if a.next not in seen:
                    seen.add(a.next)
                    todo.append(a.next)
    return frozenset(seen)


def _frontier_polys(g: MachineGame, m: Machine, player: int, type_tremble: bool,
                    full: bool) -> dict:
    """First-visit histories per state with their path weights.

    Histories with no tremble are collected first; states they miss get the
    histories with exactly one tremble, since more trembles only add
    higher-order terms.  Unless ``full`` is set each weight keeps only its
    dominant term: every dominant coefficient is positive, so no
    cancellation can occur and the limits are unchanged.
    """
    arity = len(m.states) * len(SYMBOLS) ** 2 * len(MOVES) ** 3
    off = EPS * Fraction(1, arity)
    if full:
        step = lambda p: _mix(p, arity)  # noqa: E731
        priors = _prior_weights(g, type_tremble)
    else:
        step = lambda p: _mix(p, arity).lead()  # noqa: E731
        priors = tuple((t, w.lead()) for t, w in _prior_weights(g, type_tremble))
    found = {q: [] for q in m.states}

    def level0(h, w):
        if h.state not in h.states[:-1]:
            found[h.state].append((h, w))

    for types, w in priors:
        _walk(m, player, types, g.budget, w, step, off, 0, level0)
    uncovered = {q for q, hs in found.items() if not hs}
    if uncovered:
        def level1(h, w):
            if h.trembles and h.state in uncovered and h.state not in h.states[:-1]:
                found[h.state].append((h, w))

        lead_in = {q for q in m.states if _successors(m, q) & uncovered} | uncovered
        for types, w in priors:
            _walk(m, player, types, g.budget, w, step, off, 1, level1, lead_in)
    missing = [q for q, hs in found.items() if not hs]
    if missing:
        raise BeliefError(f"states {missing} unreachable even under trembles")
    return found


def compute_beliefs(g: MachineGame, profile, type_tremble=None, full=False) -> BeliefSystem:
    if type_tremble is None:
        type_tremble = g.options.zero_prior_tremble
    entries = {}
    for i, m in enumerate(profile):
        for q, hs in _frontier_polys(g, m, i, type_tremble, full).items():
            total = InfinitesimalPoly()
            for _, w in hs:
                total = total + w
            entries[(i, q)] = tuple((h, limit_ratio(w, total)) for h, w in hs)
    return BeliefSystem(tuple(profile), entries)


def exact_conditionals(g: MachineGame, m: Machine, player: int, q) -> dict:
    """signature -> exact probability of each first-visit history given reaching ``q``."""
    probs = {}
    for types, prior in g.types.support():
        for h, p in walk_histories(m, player, types, g.budget):
            if h.state == q:
                probs[h.signature()] = probs.get(h.signature(), Fraction(0)) + prior * p
    total = sum(probs.values(), Fraction(0))
    return {s: p / total for s, p in probs.items()} if total else {}


def validate_beliefs(g: MachineGame, profile, beliefs: BeliefSystem):
    witnesses = []
    for i, m in enumerate(profile):
        for q in m.states:
            entries = beliefs.entries.get((i, q))
            if entries is None:
                witnesses.append((i, q, None, "missing state"))
                continue
            bad = [(h, b) for h, b in entries if not 0 <= b <= 1]
            if bad:
                witnesses.append((i, q, bad[0][0].signature(), f"belief {bad[0][1]} outside [0,1]"))
            total = sum((b for _, b in entries), Fraction(0))
            if total != 1:
                witnesses.append((i, q, None, f"frontier sums to {total}"))
                continue
            if state_reach_probability(g, profile, i, q) == 0:
                continue
            exact = exact_conditionals(g, m, i, q)
            held = beliefs.by_signature(i, q)
            for sig in list(exact) + [s for s in held if s not in exact]:
                want, got = exact.get(sig, Fraction(0)), held.get(sig, Fraction(0))
                if want != got:
                    witnesses.append((i, q, sig, f"belief {got} but conditional {want}"))
                    break
    return not witnesses, witnesses


def conditional_utility(g: MachineGame, profile, player: int, q, beliefs: BeliefSystem) -> Fraction:
    m = profile[player]
    if q not in m.states:
        raise MachineError(f"unknown state {q}")
    cf = g.complexity[player]
    rule = g.utility[player]
    # own (output, complexity) mass per type profile, pooled over the frontier
    starts: dict = {}
    for h, b in beliefs.frontier(player, q):
        if b:
            key = (h.types, h.config, h.steps, h.coins)
            starts[key] = starts.get(key, Fraction(0)) + b
    pooled: dict = {}
    for (types, config, steps0, coins0), b in starts.items():
        acc = pooled.setdefault(types, {})
        for p, out, steps, coins in continue_runs(m, types[player], config, steps0, coins0,
                                                 g.budget):
            key = (out, complexity_value(g, cf, m, steps, coins))
            acc[key] = acc.get(key, Fraction(0)) + b * p
    total = Fraction(0)
    for types, own in pooled.items():
        per = [player_outcomes(g, j, mj, types[j]) if j != player else None
               for j, mj in enumerate(profile)]
        for (out, c), mass in own.items():
            per[player] = ((Fraction(1), out, c),)
            for combo in itertools.product(*per):
                p = mass
                for x, _, _ in combo:
                    p *= x
                total += p * rule.evaluate(types, tuple(o for _, o, _ in combo),
                                           tuple(k for _, _, k in combo))
    return total
