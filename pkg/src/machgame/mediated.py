"""Machine games where players talk through a deterministic mediator.

Rounds follow a fixed schedule.  In each round the scheduled player's
machine is activated: it restarts in its start state with its work tape
kept, its output tape cleared and its input tape holding the last message
the mediator delivered to it (initially empty).  It runs until it halts and
its output is sent to the mediator, which forwards a fixed string to one
player according to its rules.  A player's action in the underlying game is
the interpretation of the last message it sent; a run that does not halt
sends nothing and yields the action ``None``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import NamedTuple

from .analysis import decompose_switches, is_local_variant
from .beliefs import EPS, BeliefError, BeliefSystem, InvalidBeliefs, all_actions
from .equilibrium import EquilibriumReport, Witness
from .game import GameError, MachineGame, complexity_value
from .infinitesimal import InfinitesimalPoly, limit_ratio
from .machine import (
    MOVES,
    SYMBOLS,
    Config,
    MachineError,
    ModelBoundExceeded,
    apply_action,
    output_of,
    read_symbols,
    row_bits,
    select_outcome,
)


class ForwardRule(NamedTuple):
    round: int
    message: str | None  # None matches any message
    recipient: int | None  # None forwards to no one
    delivered: str


@dataclass(frozen=True)
class Mediator:
    schedule: tuple  # sending player per round
    rules: tuple

    def route(self, rnd: int, message):
        if message is None:
            return None, ""
        for r in self.rules:
            if r.round == rnd and (r.message is None or r.message == message):
                return r.recipient, r.delivered
        return None, ""


@dataclass(frozen=True)
class ActionInterpretation:
    rules: tuple  # (bitstring, action name)
    default: str

    def interpret(self, message):
        if message is None:
            return None
        for pattern, action in self.rules:
            if pattern == message:
                return action
        return self.default


@dataclass(frozen=True, eq=False)
class MediatedGame(MachineGame):
    mediator: Mediator | None = None
    interpretation: ActionInterpretation | None = None

    def __post_init__(self):
        super().__post_init__()
        if self.mediator is None or self.interpretation is None:
            raise GameError("mediated game needs a mediator and an interpretation")
        if self.types.profiles != (("",) * self.players,):
            raise GameError("mediated games have a single empty type profile")
        for p in self.mediator.schedule:
            if not 0 <= p < self.players:
                raise GameError(f"schedule names unknown player {p + 1}")
        for r in self.mediator.rules:
            if not 0 <= r.round < len(self.mediator.schedule):
                raise GameError(f"forward rule for unknown round {r.round + 1}")
            if r.recipient is not None and not 0 <= r.recipient < self.players:
                raise GameError(f"forward rule to unknown player {r.recipient + 1}")

    def input_scope(self, player: int) -> tuple:
        """Every message the player can find on its input tape."""
        seen = [""]
        for r in self.mediator.rules:
            if r.recipient == player and r.delivered not in seen:
                seen.append(r.delivered)
        return tuple(seen)

    def mediated_lines(self) -> list:
        q = lambda s: f'"{s}"'  # noqa: E731
        lines = ["schedule = " + ", ".join(str(p + 1) for p in self.mediator.schedule)]
        for r in self.mediator.rules:
            msg = "*" if r.message is None else q(r.message)
            to = 0 if r.recipient is None else r.recipient + 1
            lines.append(f"forward {r.round + 1} {msg} -> {to} {q(r.delivered)}")
        for pattern, action in self.interpretation.rules:
            lines.append(f"interpret {q(pattern)} -> {action}")
        lines.append(f"interpret * -> {self.interpretation.default}")
        return lines


def parse_mediated_section(lines, fields) -> MediatedGame:
    from .gamefile import GameFileError, _string

    n = fields["players"]
    schedule, rules, interp, default = None, [], [], None
    for no, line in lines:
        if line.startswith("schedule"):
            _, _, v = line.partition("=")
            try:
                schedule = tuple(int(x) - 1 for x in v.split(","))
            except ValueError:
                raise GameFileError(no, "mediated", f"bad schedule {v.strip()!r}") from None
            continue
        m = re.fullmatch(r"forward\s+(\d+)\s+(\S+)\s*->\s*(\d+)\s+(\S+)", line)
        if m:
            msg = None if m.group(2) == "*" else _string(m.group(2), no, "mediated")
            to = int(m.group(3))
            if to > n:
                raise GameFileError(no, "mediated", f"unknown recipient {to}")
            rules.append(ForwardRule(int(m.group(1)) - 1, msg, to - 1 if to else None,
                                     _string(m.group(4), no, "mediated")))
            continue
        m = re.fullmatch(r"interpret\s+(\S+)\s*->\s*(\w+)", line)
        if m:
            if m.group(1) == "*":
                default = m.group(2)
            else:
                if default is not None:
                    raise GameFileError(no, "mediated", "interpret rule after the default")
                interp.append((_string(m.group(1), no, "mediated"), m.group(2)))
            continue
        raise GameFileError(no, "mediated", f"unknown line {line!r}")
    if schedule is None:
        raise GameFileError(0, "mediated", "missing schedule")
    if default is None:
        raise GameFileError(0, "mediated", "missing default 'interpret * -> action'")
    return MediatedGame(**fields, mediator=Mediator(schedule, tuple(rules)),
                        interpretation=ActionInterpretation(tuple(interp), default))


# -- joint runs -----------------------------------------------------------------

class Seat(NamedTuple):
    """One player's persistent data between and during activations."""

    work: tuple = ()
    work_head: int = 0
    inbox: str = ""
    steps: int = 0
    coins: int = 0
    sent: str | None = ""
    visited: frozenset = frozenset()


@dataclass(frozen=True)
class MediatedHistory:
    """A prefix of the joint run; ``log`` lists state entries and messages."""

    rnd: int
    active: Config | None
    run_steps: int
    seats: tuple
    log: tuple
    owner: int | None = None
    trembled: bool = False

    @property
    def state(self):
        return self.active.state if self.active is not None else None

    @property
    def types(self):
        return ("",) * len(self.seats)

    def signature(self) -> str:
        return " ".join(self.log)


def _initial(g: MediatedGame) -> MediatedHistory:
    return MediatedHistory(0, None, 0, tuple(Seat() for _ in range(g.players)), ())


def _finish(g, h: MediatedHistory, message) -> MediatedHistory:
    p = g.mediator.schedule[h.rnd]
    seats = list(h.seats)
    seat = seats[p]
    cfg = h.active
    work, head = (cfg.work, cfg.work_head) if cfg is not None else (seat.work, seat.work_head)
    seats[p] = seat._replace(work=work, work_head=head, sent=message)
    log = h.log + (f"{p + 1}!" + ("bot" if message is None else f'"{message}"'),)
    to, delivered = g.mediator.route(h.rnd, message)
    if to is not None:
        seats[to] = seats[to]._replace(inbox=delivered)
        log += (f'>{to + 1}"{delivered}"',)
    return MediatedHistory(h.rnd + 1, None, 0, tuple(seats), log)


def _enter(h: MediatedHistory, p, config, steps, coins, trembled) -> MediatedHistory:
    seats = list(h.seats)
    seat = seats[p]
    first = config.state not in seat.visited
    seats[p] = seat._replace(steps=seat.steps + steps, coins=seat.coins + coins,
                             visited=seat.visited | {config.state})
    mark = "~" if trembled else ""
    return MediatedHistory(h.rnd, config, h.run_steps + steps, tuple(seats),
                           h.log + (f"{mark}{p + 1}:{config.state}",),
                           owner=p if first else None, trembled=h.trembled or trembled)


def _walk(g: MediatedGame, profile, start: MediatedHistory, weight, step, tremble, allow,
          record, terminal):
    """Depth-first walk over joint runs from ``start``.

    ``record`` sees every first entry of a player into a state and
    ``terminal`` every finished run.  ``step`` and ``tremble`` map a player
    index to the weight function of support moves and of one off-support
    move; ``allow`` is the number of trembles left.
    """
    budget = g.budget
    stack = [(start, weight, allow, frozenset())]
    while stack:
        h, w, left, seen = stack.pop()
        if h.owner is not None:
            record(h, w)
        if h.rnd == len(g.mediator.schedule):
            terminal(h, w)
            continue
        p = g.mediator.schedule[h.rnd]
        m = profile[p]
        if h.active is None:
            seat = h.seats[p]
            cfg = Config(m.start, 0, seat.work, seat.work_head, (), 0)
            stack.append((_enter(h, p, cfg, 0, 0, False), w, left, frozenset()))
            continue
        cfg = h.active
        if cfg.state in m.halts:
            stack.append((_finish(g, h, output_of(cfg)), w, left, frozenset()))
            continue
        if h.run_steps >= budget.max_steps:
            stack.append((_finish(g, h, None), w, left, frozenset()))
            continue
        inp = h.seats[p].inbox
        in_sym, work_sym = read_symbols(cfg, inp)
        row = m.rows.get((cfg.state, in_sym, work_sym))
        if row is None:
            raise MachineError(f"missing-transition {cfg.state} {in_sym} {work_sym}")
        k = row_bits(row)
        if h.seats[p].coins + k > budget.max_random_bits:
            if h.trembled:
                continue
            raise BeliefError("coin budget exceeded")
        if len(row) == 1:
            if cfg in seen:
                # a deterministic loop never halts
                stuck = replace(h, run_steps=budget.max_steps)
                stack.append((_finish(g, stuck, None), w, left, frozenset()))
                continue
            seen = seen | {cfg}
        else:
            seen = frozenset()
        children = []
        for action, prob in row:
            try:
                nxt = apply_action(cfg, action, inp, budget)
            except ModelBoundExceeded:
                if h.trembled:
                    continue
                raise
            children.append((_enter(h, p, nxt, 1, k, False), w * step(p, prob), left, seen))
        if left:
            support = dict(row)
            for action in all_actions(m):
                if action in support:
                    continue
                try:
                    nxt = apply_action(cfg, action, inp, budget)
                except ModelBoundExceeded:
                    continue
                children.append((_enter(h, p, nxt, 1, k, True), w * tremble(p), left - 1,
                                 frozenset()))
        stack.extend(reversed(children))


def _exact(p, prob):
    return prob


def _actions(g, h):
    return tuple(g.interpretation.interpret(s.sent) for s in h.seats)


def terminal_utility(g: MediatedGame, profile, h: MediatedHistory) -> tuple:
    comps = tuple(complexity_value(g, g.complexity[i], profile[i], s.steps, s.coins)
                  for i, s in enumerate(h.seats))
    acts = _actions(g, h)
    return tuple(rule.evaluate(h.types, acts, comps) for rule in g.utility)


@dataclass(frozen=True)
class MediatedRun:
    messages: tuple  # (round, sender, message, recipient, delivered)
    states: tuple    # per player, the full state sequence across activations
    actions: tuple
    complexities: tuple
    utilities: tuple


def run_mediated(g: MediatedGame, profile, coins=None) -> MediatedRun:
    """The joint run of ``profile`` when player i's coin tosses read ``coins[i]``."""
    profile = tuple(profile)
    coins = tuple(coins) if coins is not None else ("",) * g.players
    used = [0] * g.players
    seats = [Seat() for _ in range(g.players)]
    states = [[] for _ in range(g.players)]
    messages = []
    for rnd, p in enumerate(g.mediator.schedule):
        m = profile[p]
        seat = seats[p]
        cfg = Config(m.start, 0, seat.work, seat.work_head, (), 0)
        states[p].append(cfg.state)
        steps = 0
        message = None
        while True:
            if cfg.state in m.halts:
                message = output_of(cfg)
                break
            if steps >= g.budget.max_steps:
                break
            in_sym, work_sym = read_symbols(cfg, seat.inbox)
            row = m.rows.get((cfg.state, in_sym, work_sym))
            if row is None:
                raise MachineError(f"missing-transition {cfg.state} {in_sym} {work_sym}")
            k = row_bits(row)
            if used[p] + k > g.budget.max_random_bits:
                raise BeliefError("coin budget exceeded")
            if used[p] + k > len(coins[p]):
                raise MachineError("insufficient coins")
            action = select_outcome(row, coins[p][used[p]:used[p] + k])
            used[p] += k
            cfg = apply_action(cfg, action, seat.inbox, g.budget)
            steps += 1
            states[p].append(cfg.state)
        seat = seat._replace(work=cfg.work, work_head=cfg.work_head, steps=seat.steps + steps,
                             coins=used[p], sent=message)
        seats[p] = seat
        to, delivered = g.mediator.route(rnd, message)
        if to is not None:
            seats[to] = seats[to]._replace(inbox=delivered)
        messages.append((rnd, p, message, to, delivered if to is not None else None))
    h = MediatedHistory(len(g.mediator.schedule), None, 0, tuple(seats), ())
    comps = tuple(complexity_value(g, g.complexity[i], profile[i], s.steps, s.coins)
                  for i, s in enumerate(seats))
    return MediatedRun(tuple(messages), tuple(tuple(s) for s in states), _actions(g, h), comps,
                       terminal_utility(g, profile, h))


def _terminals(g, profile, start=None, weight=Fraction(1)):
    out = []
    _walk(g, tuple(profile), start or _initial(g), weight, _exact, None, 0,
          lambda h, w: None, lambda h, w: out.append((h, w)))
    return out


def mediated_expected_utility(g: MediatedGame, profile) -> tuple:
    totals = [Fraction(0)] * g.players
    for h, w in _terminals(g, profile):
        for i, u in enumerate(terminal_utility(g, profile, h)):
            totals[i] += w * u
    return tuple(totals)


def mediated_reach_probability(g: MediatedGame, profile, player: int, q) -> Fraction:
    if q not in profile[player].states:
        raise MachineError(f"unknown state {q}")
    return sum((w for h, w in _terminals(g, profile) if q in h.seats[player].visited),
               Fraction(0))


def mediated_is_lean(g: MediatedGame, profile):
    unreached = [(i, q) for i, m in enumerate(profile) for q in m.states
                 if mediated_reach_probability(g, profile, i, q) == 0]
    return not unreached, unreached


# -- beliefs ----------------------------------------------------------------------

def _tremble_weights(profile):
    arity = [len(m.states) * len(SYMBOLS) ** 2 * len(MOVES) ** 3 for m in profile]

    def step(p, prob):
        return (1 - EPS) * prob + EPS * Fraction(1, arity[p])

    def tremble(p):
        return EPS * Fraction(1, arity[p])

    return step, tremble


def mediated_beliefs(g: MediatedGame, profile) -> BeliefSystem:
    """Limit beliefs over joint prefixes; only player machines tremble."""
    profile = tuple(profile)
    step, tremble = _tremble_weights(profile)
    found = {(i, q): [] for i, m in enumerate(profile) for q in m.states}

    def level0(h, w):
        found[(h.owner, h.state)].append((h, w))

    one = InfinitesimalPoly.const(1)
    _walk(g, profile, _initial(g), one, step, tremble, 0, level0, lambda h, w: None)
    uncovered = {k for k, v in found.items() if not v}
    if uncovered:
        def level1(h, w):
            if h.trembled and (h.owner, h.state) in uncovered:
                found[(h.owner, h.state)].append((h, w))

        _walk(g, profile, _initial(g), one, step, tremble, 1, level1, lambda h, w: None)
    missing = [k for k, v in found.items() if not v]
    if missing:
        raise BeliefError(f"states {missing} unreachable even under trembles")
    entries = {}
    for key, hs in found.items():
        total = InfinitesimalPoly()
        for _, w in hs:
            total = total + w
        entries[key] = tuple((h, limit_ratio(w, total)) for h, w in hs)
    return BeliefSystem(profile, entries)


def validate_mediated_beliefs(g: MediatedGame, profile, beliefs: BeliefSystem):
    profile = tuple(profile)
    exact: dict = {}

    def record(h, w):
        d = exact.setdefault((h.owner, h.state), {})
        d[h.signature()] = d.get(h.signature(), Fraction(0)) + w

    _walk(g, profile, _initial(g), Fraction(1), _exact, None, 0, record, lambda h, w: None)
    witnesses = []
    for i, m in enumerate(profile):
        for q in m.states:
            entries = beliefs.entries.get((i, q))
            if entries is None:
                witnesses.append((i, q, None, "missing state"))
                continue
            if any(not 0 <= b <= 1 for _, b in entries):
                witnesses.append((i, q, None, "belief outside [0,1]"))
            total = sum((b for _, b in entries), Fraction(0))
            if total != 1:
                witnesses.append((i, q, None, f"frontier sums to {total}"))
                continue
            reach = exact.get((i, q), {})
            mass = sum(reach.values(), Fraction(0))
            if not mass:
                continue
            held = beliefs.by_signature(i, q)
            for sig in list(reach) + [s for s in held if s not in reach]:
                want, got = reach.get(sig, Fraction(0)) / mass, held.get(sig, Fraction(0))
                if want != got:
                    witnesses.append((i, q, sig, f"belief {got} but conditional {want}"))
                    break
    return not witnesses, witnesses


def mediated_conditional_utility(g: MediatedGame, profile, player: int, q,
                                 beliefs: BeliefSystem) -> Fraction:
    profile = tuple(profile)
    if q not in profile[player].states:
        raise MachineError(f"unknown state {q}")
    total = Fraction(0)
    for h, b in beliefs.frontier(player, q):
        if not b:
            continue
        start = replace(h, owner=None)
        for end, w in _terminals(g, profile, start, b):
            total += w * terminal_utility(g, profile, end)[player]
    return total


def _swap(profile, i, m):
    return tuple(profile[:i]) + (m,) + tuple(profile[i + 1:])


def mediated_check(g: MediatedGame, profile, kind: str, beliefs: BeliefSystem | None = None
                   ) -> EquilibriumReport:
    profile = tuple(profile)
    if kind == "nash":
        base = mediated_expected_utility(g, profile)
        witnesses, count = [], 0
        for i in range(g.players):
            for n in g.menu(i):
                count += 1
                after = mediated_expected_utility(g, _swap(profile, i, n))[i]
                if after > base[i]:
                    witnesses.append(Witness(i, None, n.name, base[i], after))
        return EquilibriumReport("nash", not witnesses, witnesses, count)
    if kind not in ("exante", "interim"):
        raise ValueError(f"unknown kind {kind!r}")
    if beliefs is None:
        beliefs = mediated_beliefs(g, profile)
    ok, bad = validate_mediated_beliefs(g, profile, beliefs)
    if not ok:
        raise InvalidBeliefs(f"beliefs fail validation: {bad[0]}")
    witnesses, count = [], 0
    for i, m in enumerate(profile):
        for q in m.states:
            before = None
            for sw in decompose_switches(g, i, m, q):
                if kind == "exante" and not is_local_variant(g, i, m, q, sw.spliced):
                    continue
                count += 1
                if before is None:
                    before = mediated_conditional_utility(g, profile, i, q, beliefs)
                after = mediated_conditional_utility(g, _swap(profile, i, sw.spliced), i, q,
                                                     beliefs)
                if after > before:
                    witnesses.append(Witness(i, q, sw.target.name, before, after))
    return EquilibriumReport(kind, not witnesses, witnesses, count,
                             [f"{count} representable switch candidate(s) examined"])
