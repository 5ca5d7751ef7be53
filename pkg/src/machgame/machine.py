"""Finite-control Turing machines with dyadic coin tosses, run on bounded tapes.

A machine has a read-only input tape, a read-write work tape and a
write-only output tape.  Each non-halting state maps every pair
(input symbol, work symbol) to a distribution over :class:`Action` tuples.
Randomized rows are decoded from coin bits: a row whose probabilities are
all multiples of ``1/2**k`` consumes exactly ``k`` bits and picks the outcome
whose dyadic interval contains them.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from types import MappingProxyType
from typing import Iterable, Mapping, NamedTuple

BLANK = "b"
SYMBOLS = ("0", "1", BLANK)
MOVES = ("L", "R", "S")
_DELTA = {"L": -1, "R": 1, "S": 0}


class MachineError(ValueError):
    """Raised for malformed machines or illegal operations on them."""


class ModelBoundExceeded(RuntimeError):
    """A head left the finite tape window."""


class InsufficientCoins(RuntimeError):
    """The view ran out of coin bits mid-run."""


class CoinBudgetExceeded(RuntimeError):
    """A run needs more coin bits than the budget allows."""


class Action(NamedTuple):
    next: str
    out: str
    work: str
    move_in: str
    move_work: str
    move_out: str

    def render(self) -> str:
        return " ".join(self)


Row = tuple  # tuple[tuple[Action, Fraction], ...]


@dataclass(frozen=True)
class Budget:
    max_steps: int = 10000
    max_random_bits: int = 16
    tape_window: int = 256

    def __post_init__(self):
        for name in ("max_steps", "max_random_bits", "tape_window"):
            if getattr(self, name) <= 0:
                raise ValueError(f"budget {name} must be positive")


@dataclass(frozen=True)
class View:
    type: str
    coins: str = ""


@dataclass(frozen=True)
class Trace:
    states: tuple
    steps: int
    coins_consumed: int
    output: str | None
    truncated: bool = False

    @property
    def halted(self) -> bool:
        return self.output is not None


@dataclass(frozen=True)
class RunEntry:
    coins: str
    probability: Fraction
    trace: Trace


@dataclass(frozen=True, eq=False)
class Machine:
    """Immutable machine description.  ``rows`` is keyed by (state, in, work)."""

    states: tuple
    start: str
    halts: frozenset
    rows: Mapping
    name: str = field(default="")

    @classmethod
    def build(cls, states, start, halts, rows, name=""):
        merged = {}
        for key, outcomes in rows.items():
            acc: dict[Action, Fraction] = {}
            for action, p in outcomes:
                action = Action(*action)
                acc[action] = acc.get(action, Fraction(0)) + Fraction(p)
            merged[tuple(key)] = tuple(acc.items())
        return cls(tuple(states), start, frozenset(halts), MappingProxyType(merged), name)

    def renamed(self, name: str) -> "Machine":
        return Machine(self.states, self.start, self.halts, self.rows, name)

    @property
    def key(self):
        try:
            return self._key
        except AttributeError:
            order = {s: i for i, s in enumerate(self.states)}
            rows = tuple(sorted(self.rows.items(),
                                key=lambda kv: (order.get(kv[0][0], len(order)), kv[0])))
            k = (self.states, self.start, tuple(s for s in self.states if s in self.halts)
                 + tuple(sorted(self.halts - set(self.states))), rows)
            object.__setattr__(self, "_key", k)
            return k

    def __eq__(self, other):
        if self is other:
            return True
        return isinstance(other, Machine) and hash(self) == hash(other) and self.key == other.key

    def __hash__(self):
        try:
            return self._hash
        except AttributeError:
            object.__setattr__(self, "_hash", hash(self.key))
            return self._hash

    def __repr__(self):
        label = self.name or "machine"
        return f"<Machine {label} states={list(self.states)}>"

    def row(self, state, in_sym, work_sym):
        return self.rows.get((state, in_sym, work_sym))

    def state_rows(self, state):
        return {(i, w): self.rows[(state, i, w)]
                for i in SYMBOLS for w in SYMBOLS if (state, i, w) in self.rows}

    def is_deterministic(self) -> bool:
        return all(len(r) == 1 for r in self.rows.values())


class Config(NamedTuple):
    """Machine configuration.  Tapes hold only non-blank cells, sorted by position."""

    state: str
    in_head: int
    work: tuple
    work_head: int
    out: tuple
    out_head: int


def initial_config(m: Machine) -> Config:
    return Config(m.start, 0, (), 0, (), 0)


def _cell(cells: tuple, pos: int) -> str:
    for p, s in cells:
        if p == pos:
            return s
    return BLANK


def _write(cells: tuple, pos: int, sym: str) -> tuple:
    kept = [(p, s) for p, s in cells if p != pos]
    if sym != BLANK:
        kept.append((pos, sym))
        kept.sort()
    return tuple(kept)


def read_symbols(config: Config, inp: str) -> tuple:
    h = config.in_head
    in_sym = inp[h] if 0 <= h < len(inp) else BLANK
    return in_sym, _cell(config.work, config.work_head)


def apply_action(config: Config, action: Action, inp: str, budget: Budget) -> Config:
    w = budget.tape_window
    in_head = config.in_head + _DELTA[action.move_in]
    work_head = config.work_head + _DELTA[action.move_work]
    out_head = config.out_head + _DELTA[action.move_out]
    if not (-w <= in_head <= len(inp) + w and -w <= work_head <= w and -w <= out_head <= w):
        raise ModelBoundExceeded("model-bound exceeded")
    return Config(action.next, in_head, _write(config.work, config.work_head, action.work),
                  work_head, _write(config.out, config.out_head, action.out), out_head)


def output_of(config: Config) -> str:
    cells = dict(config.out)
    chars = []
    pos = 0
    while cells.get(pos, BLANK) != BLANK:
        chars.append(cells[pos])
        pos += 1
    return "".join(chars)


def row_bits(row) -> int:
    """Number of coin bits a row consumes (0 for deterministic rows)."""
    k = 0
    for _, p in row:
        d = Fraction(p).denominator
        if d & (d - 1):
            raise MachineError(f"non-dyadic probability {p}")
        k = max(k, d.bit_length() - 1)
    return k


def select_outcome(row, bits: str):
    """Pick the row outcome whose dyadic interval contains ``bits``."""
    k = len(bits)
    point = int(bits, 2) if bits else 0
    acc = Fraction(0)
    for action, p in row:
        acc += p
        if Fraction(point, 1 << k) < acc:
            return action
    raise MachineError("distribution-not-normalized")


def _lookup(m: Machine, config: Config, inp: str):
    in_sym, work_sym = read_symbols(config, inp)
    row = m.rows.get((config.state, in_sym, work_sym))
    if row is None:
        raise MachineError(f"missing-transition {config.state} {in_sym} {work_sym}")
    return row


def execute(m: Machine, view: View, budget: Budget) -> Trace:
    config = initial_config(m)
    states = [config.state]
    steps = used = 0
    inp = view.type
    while config.state not in m.halts:
        if steps == budget.max_steps:
            return Trace(tuple(states), steps, used, None, truncated=True)
        row = _lookup(m, config, inp)
        k = row_bits(row)
        if used + k > len(view.coins):
            raise InsufficientCoins("insufficient coins")
        action = select_outcome(row, view.coins[used:used + k])
        used += k
        config = apply_action(config, action, inp, budget)
        steps += 1
        states.append(config.state)
    return Trace(tuple(states), steps, used, output_of(config))


def enumerate_runs(m: Machine, type_string: str, budget: Budget) -> tuple:
    """Expand every coin outcome depth-first; one entry per consumed coin string."""
    entries = []
    stack = [(initial_config(m), (m.start,), 0, "")]
    while stack:
        config, states, steps, coins = stack.pop()
        while True:
            if config.state in m.halts:
                trace = Trace(states, steps, len(coins), output_of(config))
                break
            if steps == budget.max_steps:
                trace = Trace(states, steps, len(coins), None, truncated=True)
                break
            row = _lookup(m, config, type_string)
            k = row_bits(row)
            if k:
                if len(coins) + k > budget.max_random_bits:
                    raise CoinBudgetExceeded("coin budget exceeded")
                for bits in reversed(["".join(b) for b in itertools.product("01", repeat=k)]):
                    nxt = apply_action(config, select_outcome(row, bits), type_string, budget)
                    stack.append((nxt, states + (nxt.state,), steps + 1, coins + bits))
                trace = None
                break
            config = apply_action(config, row[0][0], type_string, budget)
            steps += 1
            states = states + (config.state,)
        if trace is not None:
            entries.append(RunEntry(coins, Fraction(1, 1 << len(coins)), trace))
    return tuple(entries)


def validate_machine(m: Machine, type_space: Iterable[str], budget: Budget) -> list:
    diags = []
    known = set(m.states)
    if m.start not in known:
        diags.append(f"unknown-start {m.start}")
    for h in sorted(m.halts - known):
        diags.append(f"unknown-halt {h}")
    for (q, i, w) in m.rows:
        if q in m.halts:
            diags.append(f"halt-state-has-transitions {q}")
            break
    for q in m.states:
        if q in m.halts:
            continue
        for i in SYMBOLS:
            for w in SYMBOLS:
                row = m.rows.get((q, i, w))
                if row is None:
                    diags.append(f"missing-transition {q} {i} {w}")
                    continue
                total = Fraction(0)
                for action, p in row:
                    total += p
                    if action.next not in known:
                        diags.append(f"unknown-target {q} {i} {w} -> {action.next}")
                    if p <= 0:
                        diags.append(f"non-positive-probability {q} {i} {w} {p}")
                    d = Fraction(p).denominator
                    if d & (d - 1):
                        diags.append(f"non-dyadic-probability {q} {i} {w} {p}")
                    bad = [s for s in action[1:3] if s not in SYMBOLS]
                    bad += [mv for mv in action[3:] if mv not in MOVES]
                    if bad:
                        diags.append(f"bad-symbol {q} {i} {w} {bad}")
                if total != 1:
                    diags.append(f"distribution-not-normalized {q} {i} {w} sums to {total}")
    for (q, i, w) in m.rows:
        if q not in known:
            diags.append(f"unknown-state-row {q}")
    if diags:
        return _dedupe(diags)
    visited = {m.start}
    for t in type_space:
        try:
            for entry in enumerate_runs(m, t, budget):
                visited.update(entry.trace.states)
        except (ModelBoundExceeded, CoinBudgetExceeded) as exc:
            diags.append(f"budget-exceeded type={t}: {exc}")
    diags.extend(f"unreachable-state {q}" for q in m.states if q not in visited)
    return diags


def _dedupe(items):
    seen = set()
    return [x for x in items if not (x in seen or seen.add(x))]


def is_completely_mixed(m: Machine) -> bool:
    for q in m.states:
        if q in m.halts:
            continue
        for i in SYMBOLS:
            for w in SYMBOLS:
                row = m.rows.get((q, i, w), ())
                reached = {a.next for a, p in row if p > 0}
                if any(s not in reached for s in m.states):
                    return False
    return True


def remove_state(m: Machine, q: str) -> Machine:
    """Drop ``q`` and redirect every transition into it to the start state."""
    if q == m.start:
        raise MachineError("cannot remove start state")
    if q not in m.states:
        raise MachineError(f"unknown state {q}")
    rows = {}
    for (s, i, w), row in m.rows.items():
        if s == q:
            continue
        rows[(s, i, w)] = [((m.start,) + tuple(a[1:]) if a.next == q else a, p) for a, p in row]
    return Machine.build([s for s in m.states if s != q], m.start, m.halts - {q}, rows, m.name)


# -- isomorphism -------------------------------------------------------------

def find_embedding(a: Machine, b: Machine, checked, seed: dict, check_halts=True):
    """Search an injective renaming of ``a``'s states into ``b``'s.

    Every state in ``checked`` must map to a ``b`` state with the same rows
    (targets renamed) and, if ``check_halts``, the same halting status.
    Targets of checked rows get mapped too; other states stay unmapped.
    Returns the mapping or ``None``.
    """
    checked = frozenset(checked)
    inv = {}
    for s, t in seed.items():
        if t in inv:
            return None
        inv[t] = s
    work = [s for s in seed if s in checked]
    return _embed(a, b, checked, dict(seed), inv, work, set(), check_halts)


def _embed(a, b, checked, phi, inv, work, done, check_halts):
    while work:
        s = work.pop()
        if s in done:
            continue
        t = phi[s]
        if check_halts and ((s in a.halts) != (t in b.halts)):
            return None
        pairs = []
        for i in SYMBOLS:
            for w in SYMBOLS:
                ra, rb = a.rows.get((s, i, w)), b.rows.get((t, i, w))
                if (ra is None) != (rb is None):
                    return None
                if ra is not None:
                    if len(ra) != len(rb):
                        return None
                    pairs.append((ra, rb))
        done = done | {s}
        return _match_outcomes(a, b, checked, phi, inv, work, done, check_halts, pairs, 0, 0, ())
    missing = [s for s in a.states if s in checked and s not in phi]
    if not missing:
        return phi
    s = missing[0]
    for t in b.states:
        if t in inv:
            continue
        res = _embed(a, b, checked, {**phi, s: t}, {**inv, t: s}, [s], done, check_halts)
        if res is not None:
            return res
    return None


def _match_outcomes(a, b, checked, phi, inv, work, done, check_halts, pairs, pi, oi, used):
    if pi == len(pairs):
        return _embed(a, b, checked, phi, inv, list(work), done, check_halts)
    ra, rb = pairs[pi]
    if oi == len(ra):
        return _match_outcomes(a, b, checked, phi, inv, work, done, check_halts,
                               pairs, pi + 1, 0, ())
    act, p = ra[oi]
    for j, (bact, bp) in enumerate(rb):
        if j in used or bp != p or tuple(act[1:]) != tuple(bact[1:]):
            continue
        src, dst = act.next, bact.next
        if src in phi:
            if phi[src] != dst:
                continue
            res = _match_outcomes(a, b, checked, phi, inv, work, done, check_halts,
                                  pairs, pi, oi + 1, used + (j,))
        else:
            if dst in inv:
                continue
            nwork = work + [src] if src in checked else work
            res = _match_outcomes(a, b, checked, {**phi, src: dst}, {**inv, dst: src}, nwork,
                                  done, check_halts, pairs, pi, oi + 1, used + (j,))
        if res is not None:
            return res
    return None


def machines_isomorphic(a: Machine, b: Machine) -> bool:
    if a is b or a == b:
        return True
    if len(a.states) != len(b.states) or len(a.halts) != len(b.halts) or len(a.rows) != len(b.rows):
        return False
    return find_embedding(a, b, a.states, {a.start: b.start}) is not None
