"""Run-level structure of a machine within a game.

Reach probabilities, leanness, the states necessarily below a switch state,
splicing a replacement machine in at a state, and which menu machines are
representable as such a switch.
"""

from __future__ import annotations

import functools
import warnings
from dataclasses import dataclass
from fractions import Fraction

from .game import MachineGame, complexity_value, runs
from .machine import (
    SYMBOLS,
    Config,
    Machine,
    MachineError,
    View,
    execute,
    find_embedding,
    machines_isomorphic,
    validate_machine,
)


class SpliceWarning(UserWarning):
    pass


@dataclass(frozen=True)
class History:
    """A prefix of one player's run, paired with the full type profile.

    ``path`` lists the chosen action tuples; ``trembles`` holds the indices
    of steps taken off the machine's support.
    """

    types: tuple
    owner: int
    states: tuple
    path: tuple
    config: Config
    steps: int
    coins: int
    trembles: tuple = ()

    @property
    def state(self):
        return self.states[-1]

    def signature(self) -> str:
        """Types, state sequence and coins consumed; ``~`` marks a trembled step."""
        parts = []
        for k, s in enumerate(self.states):
            if k and (k - 1) in self.trembles:
                parts.append("~")
            elif k:
                parts.append(">")
            parts.append(s)
        types = ",".join(t if t else '""' for t in self.types)
        return f"t=({types}) {''.join(parts)} c={self.coins}"

    def is_prefix_of(self, other: "History") -> bool:
        n = len(self.path)
        return (self.types == other.types and self.owner == other.owner
                and other.path[:n] == self.path and other.trembles[:len(self.trembles)] == self.trembles)


@dataclass(frozen=True)
class InfoSet:
    owner: int
    machine: Machine
    state: str
    histories: tuple  # (History, probability) pairs, every visit

    def upper_frontier(self) -> tuple:
        return tuple((h, p) for h, p in self.histories
                     if not any(o is not h and o.is_prefix_of(h) for o, _ in self.histories))


@dataclass(frozen=True)
class NecessarilyBelowSet:
    machine: Machine
    anchor: str
    states: frozenset
    witnesses: dict  # state outside the set -> View reaching it without the anchor

    def __contains__(self, q):
        return q in self.states


@dataclass(frozen=True)
class Switch:
    target: Machine       # the menu machine the splice is isomorphic to
    replacement: Machine  # the compatible machine spliced in
    spliced: Machine


def scope_types(g: MachineGame, player: int) -> tuple:
    if hasattr(g, "input_scope"):
        return g.input_scope(player)
    return g.types.projection(player, support_only=g.options.necessarily_below_scope == "support-only")


# -- probabilities -------------------------------------------------------------

def state_reach_probability(g: MachineGame, profile, player: int, q) -> Fraction:
    m = profile[player]
    if q not in m.states:
        raise MachineError(f"unknown state {q}")
    total = Fraction(0)
    for types, prior in g.types.support():
        for e in runs(m, types[player], g.budget):
            if q in e.trace.states:
                total += prior * e.probability
    return total


def is_lean(g: MachineGame, profile):
    unreached = [(i, q) for i, m in enumerate(profile) for q in m.states
                 if state_reach_probability(g, profile, i, q) == 0]
    return not unreached, unreached


def information_set(g: MachineGame, profile, player: int, q) -> InfoSet:
    """All positive-probability histories ending in ``q`` (one per visit)."""
    from .beliefs import walk_histories

    m = profile[player]
    found = []
    for types, prior in g.types.support():
        for h, p in walk_histories(m, player, types, g.budget, every_visit=True):
            if h.state == q:
                found.append((h, prior * p))
    return InfoSet(player, m, q, tuple(found))


# -- necessarily-below sets ---------------------------------------------------

@functools.lru_cache(maxsize=None)
def _visits(g: MachineGame, player: int, m: Machine) -> tuple:
    return tuple((View(t, e.coins), frozenset(e.trace.states))
                 for t in scope_types(g, player) for e in runs(m, t, g.budget))


def necessarily_below(g: MachineGame, player: int, m: Machine, anchor) -> NecessarilyBelowSet:
    if anchor not in m.states:
        raise MachineError(f"unknown state {anchor}")
    return _below(g, player, m, anchor)


@functools.lru_cache(maxsize=None)
def _below(g, player, m, anchor):
    witnesses = {}
    for view, visited in _visits(g, player, m):
        if anchor in visited:
            continue
        for s in m.states:
            if s in visited and s not in witnesses:
                witnesses[s] = view
    below = frozenset(s for s in m.states if s not in witnesses)
    return NecessarilyBelowSet(m, anchor, below, witnesses)


# -- splicing -------------------------------------------------------------------

def _rows_equal(a: Machine, b: Machine, s) -> bool:
    if (s in a.halts) != (s in b.halts):
        return False
    for i in SYMBOLS:
        for w in SYMBOLS:
            ra, rb = a.rows.get((s, i, w)), b.rows.get((s, i, w))
            if (ra is None) != (rb is None) or (ra is not None and dict(ra) != dict(rb)):
                return False
    return True


def is_compatible(m: Machine, anchor, replacement: Machine, below) -> bool:
    below = set(below)
    if replacement.start != anchor:
        return False
    return all(_rows_equal(m, replacement, s)
               for s in m.states if s not in below and s in replacement.states)


def splice(m: Machine, anchor, replacement: Machine, below, name="") -> Machine:
    """The machine that follows ``m`` outside ``below`` and ``replacement`` inside."""
    below = set(below)
    if not is_compatible(m, anchor, replacement, below):
        raise MachineError(f"not compatible at {anchor}")
    kept = [s for s in m.states if s not in below]
    states = [s for s in m.states if s not in below or s in replacement.states]
    states += [s for s in replacement.states if s not in states]
    rows = {}
    for (s, i, w), row in m.rows.items():
        if s in kept:
            rows[(s, i, w)] = row
    for (s, i, w), row in replacement.rows.items():
        if s not in kept:
            rows[(s, i, w)] = row
    halts = (m.halts & set(kept)) | replacement.halts
    return Machine.build(states, m.start, halts, rows, name or m.name)


def restrict(n: Machine, keep, names: dict, start) -> Machine:
    """Sub-machine of ``n`` on ``keep`` with states renamed by ``names``."""
    rn = lambda s: names.get(s, s)  # noqa: E731
    rows = {}
    for (s, i, w), row in n.rows.items():
        if s in keep:
            rows[(rn(s), i, w)] = [(a._replace(next=rn(a.next)), p) for a, p in row]
    states = [rn(s) for s in n.states if s in keep]
    return Machine.build(states, start, {rn(s) for s in n.halts if s in keep}, rows, n.name)


def _fresh(name, taken):
    while name in taken:
        name += "'"
    return name


def switch_to(m: Machine, anchor, n: Machine, below: NecessarilyBelowSet):
    """A compatible replacement making the splice at ``anchor`` isomorphic to ``n``."""
    kept = [s for s in m.states if s not in below.states]
    phi = find_embedding(m, n, kept, {m.start: n.start})
    if phi is None:
        return None
    image = {phi[s] for s in kept if s in phi}
    if any(s not in phi for s in kept):
        return None
    free = [t for t in n.states if t not in image]
    mapped = set(phi.values())
    if anchor in phi:
        choices = [phi[anchor]] if phi[anchor] not in image else []
    else:
        unmapped = [t for t in free if t not in mapped]
        same = [t for t in unmapped if t == anchor]
        status = [t for t in unmapped if (t in n.halts) == (anchor in m.halts) and t != anchor]
        choices = same + status + [t for t in unmapped if t not in same and t not in status]
    for pick in choices:
        back = {t: s for s, t in phi.items()}
        back[pick] = anchor
        names, taken = {}, set(kept) | {anchor}
        for t in n.states:
            if t in image:
                names[t] = back[t]
            elif t in back:
                names[t] = back[t]
            else:
                names[t] = _fresh(t, taken)
                taken.add(names[t])
        replacement = restrict(n, set(free), names, anchor)
        try:
            spliced = splice(m, anchor, replacement, below.states, name=n.name)
        except MachineError:
            continue
        if machines_isomorphic(spliced, n):
            return Switch(n, replacement, spliced)
    return None


def decompose_switches(g: MachineGame, player: int, m: Machine, anchor) -> list:
    if anchor not in m.states:
        raise MachineError(f"unknown state {anchor}")
    return list(_decompose(g, player, m, anchor))


@functools.lru_cache(maxsize=None)
def _decompose(g, player, m, anchor):
    below = necessarily_below(g, player, m, anchor)
    found = []
    for n in g.menu(player):
        sw = switch_to(m, anchor, n, below)
        if sw is None:
            continue
        diags = validate_machine(sw.spliced, scope_types(g, player), g.budget)
        unreachable = [d for d in diags if d.startswith("unreachable-state")]
        if unreachable:
            warnings.warn(f"splice of {m.name} at {anchor} towards {n.name}: {unreachable}",
                          SpliceWarning, stacklevel=3)
        found.append(sw)
    return tuple(found)


def local_variant_witness(g: MachineGame, player: int, m: Machine, anchor, spliced: Machine):
    """First in-scope view avoiding ``anchor`` on which complexities differ, else None."""
    cf = g.complexity[player]
    for view, visited in _visits(g, player, m):
        if anchor in visited:
            continue
        a = execute(m, view, g.budget)
        b = execute(spliced, view, g.budget)
        ca = complexity_value(g, cf, m, a.steps, a.coins_consumed)
        cb = complexity_value(g, cf, spliced, b.steps, b.coins_consumed)
        if ca != cb:
            return view
    return None


def is_local_variant(g: MachineGame, player: int, m: Machine, anchor, spliced: Machine) -> bool:
    return local_variant_witness(g, player, m, anchor, spliced) is None
