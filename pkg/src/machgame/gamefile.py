"""Text format for machine games.

A file is a sequence of ``[section]`` headers followed by lines; ``#``
starts a comment.  Machines are written as blocks::

    machine NAME
    states q0 q1 H
    start q0
    halt H
    q0 0 * -> q1 1 = R S R
    q0 1 * -> 1/2: q0 b = S S S | 1/2: H 0 = S S S
    end

A row reads ``state input work -> next out-write work-write move-in
move-work move-out``.  ``*`` in the input or work column expands to every
symbol; rows with fewer wildcards override broader ones.  ``=`` as the work
write repeats the symbol read.
"""

from __future__ import annotations

import re
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
)
from .machine import SYMBOLS, Budget, Machine

SECTIONS = ("players", "types", "machines", "menu", "complexity", "utility", "options", "budget",
            "mediated")
REQUIRED = ("players", "types", "machines", "menu", "utility")


class GameFileError(ValueError):
    def __init__(self, line, section, message):
        self.line, self.section, self.message = line, section, message
        where = f"line {line}" if line else "file"
        super().__init__(f"{where} [{section or '-'}]: {message}")


def _frac(text, line, section) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise GameFileError(line, section, f"bad rational {text.strip()!r}") from None


def _string(tok, line, section) -> str:
    tok = tok.strip()
    if tok.startswith('"') and tok.endswith('"') and len(tok) >= 2:
        tok = tok[1:-1]
    if any(c not in "01" for c in tok):
        raise GameFileError(line, section, f"bad bitstring {tok!r}")
    return tok


def _quote(s: str) -> str:
    return f'"{s}"'


def _player(tok, n, line, section) -> int:
    if not tok.isdigit() or not 1 <= int(tok) <= n:
        raise GameFileError(line, section, f"bad player index {tok!r}")
    return int(tok) - 1


# -- reading -------------------------------------------------------------------

def _split_sections(text):
    sections: dict = {}
    current = None
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = re.fullmatch(r"\[(\w+)\]", line)
        if m:
            current = m.group(1)
            if current not in SECTIONS:
                raise GameFileError(no, current, "unknown section")
            if current in sections:
                raise GameFileError(no, current, "duplicate section")
            sections[current] = []
            continue
        if current is None:
            raise GameFileError(no, None, "content before the first section")
        sections[current].append((no, line))
    for name in REQUIRED:
        if name not in sections:
            raise GameFileError(0, name, "missing section")
    return sections


def _keyvals(lines, section, allowed):
    out = {}
    for no, line in lines:
        if "=" not in line:
            raise GameFileError(no, section, f"expected key = value, got {line!r}")
        k, v = (s.strip() for s in line.split("=", 1))
        if k not in allowed:
            raise GameFileError(no, section, f"unknown key {k!r}")
        out[k] = (no, v)
    return out


def _parse_action(text, read_work, no):
    parts = text.split()
    if len(parts) != 6:
        raise GameFileError(no, "machines", f"action needs 6 fields, got {text!r}")
    nxt, out, work, *moves = parts
    if work == "=":
        work = read_work
    for s in (out, work):
        if s not in SYMBOLS:
            raise GameFileError(no, "machines", f"bad symbol {s!r}")
    for mv in moves:
        if mv not in ("L", "R", "S"):
            raise GameFileError(no, "machines", f"bad move {mv!r}")
    return (nxt, out, work, *moves)


def _parse_outcomes(text, read_work, no):
    alts = [a.strip() for a in text.split("|")]
    out = []
    for alt in alts:
        if ":" in alt:
            p, act = alt.split(":", 1)
            out.append((_parse_action(act, read_work, no), _frac(p, no, "machines")))
        else:
            if len(alts) > 1:
                raise GameFileError(no, "machines", "probability required when a row has choices")
            out.append((_parse_action(alt, read_work, no), Fraction(1)))
    return out


def _parse_machines(lines):
    machines: dict = {}
    block = None
    for no, line in lines:
        words = line.split()
        if block is None:
            if words[0] != "machine" or len(words) != 2:
                raise GameFileError(no, "machines", f"expected 'machine NAME', got {line!r}")
            if words[1] in machines:
                raise GameFileError(no, "machines", f"duplicate machine {words[1]}")
            block = {"name": words[1], "line": no, "states": None, "start": None,
                     "halts": [], "rows": {}}
            continue
        if words[0] == "end":
            machines[block["name"]] = _finish_machine(block)
            block = None
        elif words[0] == "states":
            block["states"] = words[1:]
        elif words[0] == "start":
            block["start"] = words[1] if len(words) == 2 else None
        elif words[0] == "halt":
            block["halts"] = words[1:]
        elif "->" in line:
            lhs, rhs = line.split("->", 1)
            key = lhs.split()
            if len(key) != 3:
                raise GameFileError(no, "machines", f"row needs 'state input work', got {lhs!r}")
            q, i, w = key
            for sym in (i, w):
                if sym != "*" and sym not in SYMBOLS:
                    raise GameFileError(no, "machines", f"bad symbol {sym!r}")
            rank = (i == "*") + (w == "*")
            for ii in (SYMBOLS if i == "*" else (i,)):
                for ww in (SYMBOLS if w == "*" else (w,)):
                    prev = block["rows"].get((q, ii, ww))
                    if prev is not None and prev[0] == rank:
                        raise GameFileError(no, "machines", f"duplicate row for {q} {ii} {ww}")
                    if prev is None or prev[0] > rank:
                        block["rows"][(q, ii, ww)] = (rank, _parse_outcomes(rhs, ww, no))
        else:
            raise GameFileError(no, "machines", f"unknown machine line {line!r}")
    if block is not None:
        raise GameFileError(block["line"], "machines", f"machine {block['name']} lacks 'end'")
    return machines


def _finish_machine(block):
    no = block["line"]
    if not block["states"]:
        raise GameFileError(no, "machines", f"machine {block['name']} lacks states")
    if block["start"] is None:
        raise GameFileError(no, "machines", f"machine {block['name']} lacks start")
    rows = {k: v for k, (_, v) in block["rows"].items()}
    return Machine.build(block["states"], block["start"], block["halts"], rows, block["name"])


def _parse_types(lines, n):
    profiles, prior = [], []
    for no, line in lines:
        if ":" not in line:
            raise GameFileError(no, "types", f"expected 'types : prior', got {line!r}")
        lhs, rhs = line.rsplit(":", 1)
        parts = [_string(t, no, "types") for t in lhs.split(",")]
        if len(parts) != n:
            raise GameFileError(no, "types", f"type profile needs {n} entries")
        profiles.append(tuple(parts))
        prior.append(_frac(rhs, no, "types"))
    try:
        return TypeSpace(tuple(profiles), tuple(prior))
    except ValueError as exc:
        raise GameFileError(lines[0][0] if lines else 0, "types", str(exc)) from None


def _parse_complexity(text, no):
    text = text.strip()
    head, _, rest = text.partition(" ")
    rest = rest.strip()
    if head in ("zero", "step_count", "random_bit_count", "state_count") and not rest:
        return ComplexityFunction(head)
    if head == "menu_table":
        table = []
        for item in rest.split(","):
            name, _, v = item.partition(":")
            table.append((name.strip(), _frac(v, no, "complexity")))
        return ComplexityFunction("menu_table", tuple(table))
    if head == "threshold_table":
        table = []
        for item in rest.split(","):
            sel, _, v = item.partition(":")
            sel = sel.strip()
            if sel == "otherwise":
                key = ("otherwise",)
            elif sel.startswith("states<="):
                key = ("states", int(sel[len("states<="):]))
            else:
                key = ("machine", sel)
            table.append((key, _frac(v, no, "complexity")))
        return ComplexityFunction("threshold_table", tuple(table))
    if head == "weighted_sum":
        terms = []
        for item in rest.split("+"):
            w, _, kind = item.strip().partition("*")
            terms.append((_parse_complexity(kind, no), _frac(w, no, "complexity")))
        return ComplexityFunction("weighted_sum", terms=tuple(terms))
    raise GameFileError(no, "complexity", f"bad complexity {text!r}")


_GUARD = re.compile(r"([tac])(\d+)(<=|>=|==|!=|<|>|=)(.*)")


def _parse_pattern(text, n, no):
    if text == "bot":
        return Pattern("bottom")
    if text == "*":
        return Pattern("any")
    m = re.fullmatch(r"t(\d+)(?:\[(\d+)\])?", text)
    if m:
        p = _player(m.group(1), n, no, "utility")
        if m.group(2) is None:
            return Pattern("type", player=p)
        return Pattern("type_bit", player=p, index=int(m.group(2)))
    if text.startswith('"') or re.fullmatch(r"[01]+", text):
        return Pattern("exact", _string(text, no, "utility"))
    if re.fullmatch(r"\w+", text):
        return Pattern("exact", text)  # action names of mediated games
    raise GameFileError(no, "utility", f"bad action pattern {text!r}")


def _parse_guard(tok, n, no):
    m = _GUARD.fullmatch(tok)
    if not m:
        raise GameFileError(no, "utility", f"bad guard {tok!r}")
    kind, idx, op, value = m.groups()
    p = _player(idx, n, no, "utility")
    if kind == "t":
        if op != "=":
            raise GameFileError(no, "utility", "type guards use '='")
        return Guard("type", p, value=_string(value, no, "utility"))
    if kind == "a":
        if op != "=":
            raise GameFileError(no, "utility", "action guards use '='")
        return Guard("action", p, pattern=_parse_pattern(value, n, no))
    return Guard("complexity", p, value=_frac(value, no, "utility"), op="==" if op == "=" else op)


def _parse_expr(text, n, no):
    text = text.replace(" ", "")
    if not text:
        raise GameFileError(no, "utility", "empty payoff")
    const, coefs = Fraction(0), {}
    for sign, term in re.findall(r"([+-]?)([^+-]+)", text):
        s = -1 if sign == "-" else 1
        m = re.fullmatch(r"(?:([\d/]+)\*)?c(\d+)", term)
        if m:
            j = _player(m.group(2), n, no, "utility")
            c = _frac(m.group(1), no, "utility") if m.group(1) else Fraction(1)
            coefs[j] = coefs.get(j, Fraction(0)) + s * c
        else:
            const += s * _frac(term, no, "utility")
    if "".join(sign + term for sign, term in re.findall(r"([+-]?)([^+-]+)", text)) != text:
        raise GameFileError(no, "utility", f"bad payoff {text!r}")
    return LinearExpr(const, tuple(sorted(coefs.items())))


def _parse_utility(lines, n):
    cases: list = [[] for _ in range(n)]
    for no, line in lines:
        head, _, body = line.partition(":")
        p = _player(head.strip(), n, no, "utility")
        if "->" not in body:
            raise GameFileError(no, "utility", f"expected 'guards -> payoff', got {line!r}")
        lhs, rhs = body.split("->", 1)
        toks = lhs.split()
        guards = () if toks == ["*"] else tuple(_parse_guard(t, n, no) for t in toks)
        cases[p].append(UtilityCase(guards, _parse_expr(rhs, n, no)))
    rules = []
    for i, cs in enumerate(cases):
        try:
            rules.append(UtilityRule(tuple(cs)))
        except ValueError:
            raise GameFileError(lines[-1][0] if lines else 0, "utility",
                                f"player {i + 1} needs a final '*' default case") from None
    return tuple(rules)


def parse_game_file(text: str):
    sec = _split_sections(text)
    kv = _keyvals(sec["players"], "players", {"count"})
    if "count" not in kv:
        raise GameFileError(0, "players", "missing count")
    no, v = kv["count"]
    if not v.isdigit() or int(v) < 1:
        raise GameFileError(no, "players", f"bad player count {v!r}")
    n = int(v)
    types = _parse_types(sec["types"], n)
    machines = _parse_machines(sec["machines"])
    menus: list = [None] * n
    for no, line in sec["menu"]:
        k, _, v = line.partition("=")
        p = _player(k.strip(), n, no, "menu")
        names = tuple(s.strip() for s in v.split(",") if s.strip())
        if not names:
            raise GameFileError(no, "menu", "empty menu")
        for name in names:
            if name not in machines:
                raise GameFileError(no, "menu", f"unknown machine {name}")
        menus[p] = names
    if any(m is None for m in menus):
        raise GameFileError(0, "menu", "empty menu")
    complexity = [ComplexityFunction("zero")] * n
    for no, line in sec.get("complexity", []):
        k, _, v = line.partition("=")
        complexity[_player(k.strip(), n, no, "complexity")] = _parse_complexity(v, no)
    utility = _parse_utility(sec["utility"], n)
    ov = _keyvals(sec.get("options", []), "options", {"necessarily_below_scope", "zero_prior_tremble"})
    opts = {}
    if "necessarily_below_scope" in ov:
        opts["necessarily_below_scope"] = ov["necessarily_below_scope"][1]
    if "zero_prior_tremble" in ov:
        no, v = ov["zero_prior_tremble"]
        if v not in ("on", "off"):
            raise GameFileError(no, "options", "zero_prior_tremble must be on or off")
        opts["zero_prior_tremble"] = v == "on"
    bv = _keyvals(sec.get("budget", []), "budget", {"steps", "coins", "tape"})
    budget = Budget(**{f: int(bv[k][1]) for k, f in (("steps", "max_steps"),
                                                   ("coins", "max_random_bits"),
                                                   ("tape", "tape_window")) if k in bv})
    try:
        options = Options(**opts)
        fields = dict(players=n, machines=machines, menus=tuple(menus), types=types,
                      complexity=tuple(complexity), utility=utility, budget=budget,
                      options=options)
        if "mediated" in sec:
            from .mediated import parse_mediated_section

            g = parse_mediated_section(sec["mediated"], fields)
        else:
            g = MachineGame(**fields)
    except GameFileError:
        raise
    except ValueError as exc:
        raise GameFileError(0, None, str(exc)) from None
    diags = g.validate()
    if diags:
        name = diags[0].split(":", 1)[0]
        no = next((k for k, line in sec["machines"] if line == f"machine {name}"), 0)
        raise GameFileError(no, "machines", diags[0])
    return g


# -- writing -------------------------------------------------------------------

def _write_machine(m: Machine) -> list:
    lines = [f"machine {m.name}", "states " + " ".join(m.states), f"start {m.start}"]
    if m.halts:
        lines.append("halt " + " ".join(s for s in m.states if s in m.halts))
    order = {s: k for k, s in enumerate(m.states)}
    for (q, i, w), row in sorted(m.rows.items(), key=lambda kv: (order.get(kv[0][0], 0), kv[0])):
        if len(row) == 1 and row[0][1] == 1:
            rhs = " ".join(row[0][0])
        else:
            rhs = " | ".join(f"{p}: {' '.join(a)}" for a, p in row)
        lines.append(f"{q} {i} {w} -> {rhs}")
    lines.append("end")
    return lines


def _write_complexity(cf: ComplexityFunction) -> str:
    if cf.kind == "menu_table":
        return "menu_table " + ", ".join(f"{n}:{v}" for n, v in cf.table)
    if cf.kind == "threshold_table":
        items = []
        for sel, v in cf.table:
            key = {"otherwise": "otherwise", "states": f"states<={sel[-1]}"}.get(sel[0], sel[-1])
            items.append(f"{key}:{v}")
        return "threshold_table " + ", ".join(items)
    if cf.kind == "weighted_sum":
        return "weighted_sum " + " + ".join(f"{w}*{_write_complexity(s)}" for s, w in cf.terms)
    return cf.kind


def _write_pattern(p: Pattern) -> str:
    if p.kind == "bottom":
        return "bot"
    if p.kind == "any":
        return "*"
    if p.kind == "type":
        return f"t{p.player + 1}"
    if p.kind == "type_bit":
        return f"t{p.player + 1}[{p.index}]"
    if p.value and any(c not in "01" for c in p.value):
        return p.value
    return _quote(p.value)


def _write_guard(g: Guard) -> str:
    if g.kind == "type":
        return f"t{g.player + 1}={_quote(g.value)}"
    if g.kind == "action":
        return f"a{g.player + 1}={_write_pattern(g.pattern)}"
    return f"c{g.player + 1}{g.op}{g.value}"


def _write_expr(e: LinearExpr) -> str:
    parts = [str(e.const)]
    for j, c in sorted(e.coefs):
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        parts.append(f"{sign} {'' if mag == 1 else f'{mag}*'}c{j + 1}")
    return " ".join(parts)


def serialize_game(g: MachineGame) -> str:
    lines = ["[players]", f"count = {g.players}", "", "[types]"]
    for t, p in g.types.items():
        lines.append(", ".join(_quote(s) for s in t) + f" : {p}")
    lines += ["", "[machines]"]
    for name in g.machines:
        lines += _write_machine(g.machines[name])
    lines += ["", "[menu]"]
    lines += [f"{i + 1} = " + ", ".join(menu) for i, menu in enumerate(g.menus)]
    lines += ["", "[complexity]"]
    lines += [f"{i + 1} = {_write_complexity(cf)}" for i, cf in enumerate(g.complexity)]
    lines += ["", "[utility]"]
    for i, rule in enumerate(g.utility):
        for case in rule.cases:
            lhs = " ".join(_write_guard(x) for x in case.guards) or "*"
            lines.append(f"{i + 1}: {lhs} -> {_write_expr(case.expr)}")
    lines += ["", "[options]",
              f"necessarily_below_scope = {g.options.necessarily_below_scope}",
              f"zero_prior_tremble = {'on' if g.options.zero_prior_tremble else 'off'}",
              "", "[budget]", f"steps = {g.budget.max_steps}",
              f"coins = {g.budget.max_random_bits}", f"tape = {g.budget.tape_window}"]
    extra = getattr(g, "mediated_lines", None)
    if extra is not None:
        lines += ["", "[mediated]"] + extra()
    return "\n".join(lines) + "\n"


def games_equal(a: MachineGame, b: MachineGame) -> bool:
    """Field-by-field comparison including machine names."""
    if serialize_game(a) != serialize_game(b):
        return False
    return all(a.machines[n].name == b.machines[n].name and a.machines[n] == b.machines[n]
               for n in a.machines) and list(a.machines) == list(b.machines)


