"""Built-in example games and the checks each one is expected to pass."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction

from .analysis import decompose_switches, is_lean, is_local_variant, state_reach_probability
from .beliefs import BeliefAssessment, compute_beliefs, conditional_utility
from .equilibrium import check_sequential, find_nash, is_nash
from .game import expected_utility
from .gamefile import parse_game_file

FIGURE2 = """\
# One player, two equally likely types.  M0 stops at once on type 0 and
# writes 11 on type 1; M1 writes 00 on type 0 instead but costs more.
[players]
count = 1

[types]
"0" : 1/2
"1" : 1/2

[machines]
machine M0
states q0 q1 q2 q4 H
start q0
halt H
q0 * * -> q1 b = S S S
q0 1 * -> q2 b = S S S
q1 * * -> H b = S S S
q2 * * -> q4 1 = S S R
q4 * * -> H 1 = S S R
end
machine M1
states q0 q1 q2 q3 q4 H
start q0
halt H
q0 * * -> q1 b = S S S
q0 1 * -> q2 b = S S S
q1 * * -> q3 0 = S S R
q3 * * -> H 0 = S S R
q2 * * -> q4 1 = S S R
q4 * * -> H 1 = S S R
end

[menu]
1 = M0, M1

[complexity]
1 = menu_table M0:0, M1:3/4

[utility]
1: t1="0" a1="" -> 2 - c1
1: t1="0" a1="00" -> 3 - c1
1: t1="0" -> -6
1: t1="1" a1="" -> 2 - c1
1: t1="1" a1="11" -> 4 - c1
1: * -> -2
"""

GUESSBIT = """\
# Type 1 never occurs.  M always outputs 0; MFIX outputs the type bit.
[players]
count = 1

[types]
"0" : 1
"1" : 0

[machines]
machine M
states q0 b0 b1 H
start q0
halt H
q0 * * -> b0 b = S S S
q0 1 * -> b1 b = S S S
b0 * * -> H 0 = S S S
b1 * * -> H 0 = S S S
end
machine MFIX
states q0 b0 b1 H
start q0
halt H
q0 * * -> b0 b = S S S
q0 1 * -> b1 b = S S S
b0 * * -> H 0 = S S S
b1 * * -> H 1 = S S S
end

[menu]
1 = M, MFIX

[utility]
1: a1=t1 -> 1
1: * -> 0

[options]
zero_prior_tremble = {tremble}
"""

RPS = """\
# Rock "0", paper "1", scissors "11".  Mixing costs a quarter of a point.
[players]
count = 2

[types]
"", "" : 1

[machines]
machine rock
states q0 H
start q0
halt H
q0 * * -> H 0 = S S S
end
machine paper
states q0 H
start q0
halt H
q0 * * -> H 1 = S S S
end
machine scissors
states q0 s H
start q0
halt H
q0 * * -> s 1 = S S R
s * * -> H 1 = S S R
end
machine uniform
states q0 s H
start q0
halt H
q0 * * -> 1/2: H 0 = S S S | 1/4: H 1 = S S S | 1/4: s 1 = S S R
s * * -> H 1 = S S R
end

[menu]
1 = rock, paper, scissors, uniform
2 = rock, paper, scissors, uniform

[complexity]
1 = menu_table rock:0, paper:0, scissors:0, uniform:1
2 = menu_table rock:0, paper:0, scissors:0, uniform:1

[utility]
1: a1="0" a2="11" -> 1 - 1/4*c1
1: a1="1" a2="0" -> 1 - 1/4*c1
1: a1="11" a2="1" -> 1 - 1/4*c1
1: a1="0" a2="1" -> -1 - 1/4*c1
1: a1="1" a2="11" -> -1 - 1/4*c1
1: a1="11" a2="0" -> -1 - 1/4*c1
1: * -> 0 - 1/4*c1
2: a2="0" a1="11" -> 1 - 1/4*c2
2: a2="1" a1="0" -> 1 - 1/4*c2
2: a2="11" a1="1" -> 1 - 1/4*c2
2: a2="0" a1="1" -> -1 - 1/4*c2
2: a2="1" a1="11" -> -1 - 1/4*c2
2: a2="11" a1="0" -> -1 - 1/4*c2
2: * -> 0 - 1/4*c2
"""

# x = 01101001; the type t is a 3-bit index into x.  M gives up by echoing
# the first type bit.  HALF knows the first half of x and gives up on the
# second half; FULL knows all of x but is too large to be cheap.
KOLMO_X = "01101001"


def _kolmo_text() -> str:
    x = KOLMO_X
    lines = ["[players]", "count = 1", "", "[types]"]
    lines += [f'"{t:03b}" : 1/8' for t in range(8)]
    lines += ["", "[machines]",
              "machine M", "states q0 b0 b1 H", "start q0", "halt H",
              "q0 * * -> b0 b = R S S", "q0 1 * -> b1 b = R S S",
              "b0 * * -> H 0 = S S S", "b1 * * -> H 1 = S S S", "end",
              "machine HALF", "states q0 b0 b1 c0 c1 z0 z1 H", "start q0", "halt H",
              "q0 * * -> b0 b = R S S", "q0 1 * -> b1 b = R S S",
              "b0 * * -> c0 b = R S S", "b0 1 * -> c1 b = R S S",
              "b1 * * -> H 1 = S S S"]
    for j in (0, 1):
        for k in (0, 1):
            bit = x[2 * j + k]
            lines.append(f"c{j} {'*' if k == 0 else '1'} * -> z{bit} 1 = S S R")
    lines += ["z0 * * -> H 0 = S S S", "z1 * * -> H 1 = S S S", "end",
              "machine FULL", "states q0 a0 a1 c00 c01 c10 c11 z0 z1 H", "start q0", "halt H",
              "q0 * * -> a0 b = R S S", "q0 1 * -> a1 b = R S S"]
    for i in (0, 1):
        lines += [f"a{i} * * -> c{i}0 b = R S S", f"a{i} 1 * -> c{i}1 b = R S S"]
        for j in (0, 1):
            for k in (0, 1):
                bit = x[4 * i + 2 * j + k]
                lines.append(f"c{i}{j} {'*' if k == 0 else '1'} * -> z{bit} 1 = S S R")
    lines += ["z0 * * -> H 0 = S S S", "z1 * * -> H 1 = S S S", "end", "",
              "[menu]", "1 = M, HALF, FULL", "",
              "[complexity]", "1 = threshold_table M:1, states<=8:2, otherwise:3", "",
              "[utility]"]
    for t in range(8):
        lines.append(f'1: t1="{t:03b}" a1="1{x[t]}" c1<=2 -> 10')
    lines += ["1: a1=t1[0] c1==1 -> 0", "1: * -> -60"]
    return "\n".join(lines) + "\n"


KOLMO = _kolmo_text()

MEDIATED = """\
# Alice moves first; the mediator tells Bob 1 if she sent 0 and 0 otherwise.
# The string 0 means c and anything else means d.
[players]
count = 2

[types]
"", "" : 1

[machines]
machine C
states q0 H
start q0
halt H
q0 * * -> H 0 = S S S
end
machine D
states q0 H
start q0
halt H
q0 * * -> H 1 = S S S
end
machine BOT
states q0
start q0
halt q0
end

[menu]
1 = C, D, BOT
2 = C, D, BOT

[complexity]
1 = {cost}
2 = {cost}

[utility]
1: a1=d -> 1 - c1
1: a1=c a2=c -> 3 - c1
1: a1=c a2=d -> 0 - c1
1: * -> 0 - c1
2: a1=d -> 1 - c2
2: a1=c a2=c -> 3 - c2
2: a1=c a2=d -> 0 - c2
2: * -> 0 - c2

[mediated]
schedule = 1, 2
forward 1 "0" -> 2 "1"
forward 1 * -> 2 "0"
interpret "0" -> c
interpret * -> d
"""

DELTA = Fraction(1, 10)


def figure2_game():
    return parse_game_file(FIGURE2)


def guessbit_game(zero_prior_tremble=True):
    return parse_game_file(GUESSBIT.replace("{tremble}", "on" if zero_prior_tremble else "off"))


def rps_game():
    return parse_game_file(RPS)


def kolmo_game():
    return parse_game_file(KOLMO)


def mediated_game(state_charge=False):
    cost = f"weighted_sum {DELTA}*state_count" if state_charge else "zero"
    return parse_game_file(MEDIATED.replace("{cost}", cost))


SOURCES = {
    "figure2": lambda: FIGURE2,
    "guessbit": lambda: GUESSBIT.replace("{tremble}", "on"),
    "rps": lambda: RPS,
    "kolmo": lambda: KOLMO,
    "mediated": lambda: MEDIATED.replace("{cost}", "zero"),
}


# -- checks --------------------------------------------------------------------

@dataclass
class Assertion:
    name: str
    expected: object
    actual: object

    @property
    def passed(self) -> bool:
        return self.expected == self.actual


@dataclass
class ScenarioResult:
    name: str
    assertions: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(a.passed for a in self.assertions)

    def check(self, name, expected, actual):
        self.assertions.append(Assertion(name, expected, actual))


def _witness_keys(report):
    return [(w.state, w.machine, w.before, w.after) for w in report.witnesses]


def _figure2(r: ScenarioResult):
    g = figure2_game()
    m0, m1 = g.profile(["M0"])[0], g.profile(["M1"])[0]
    r.check("U(M0)", Fraction(3), expected_utility(g, (m0,))[0])
    r.check("U(M1)", Fraction(11, 4), expected_utility(g, (m1,))[0])
    r.check("nash(M0)", True, is_nash(g, (m0,)).verdict)
    mu = compute_beliefs(g, (m0,))
    sw = [s for s in decompose_switches(g, 0, m0, "q1") if s.target.name == "M1"]
    r.check("M1 representable at q1", 1, len(sw))
    r.check("conditional at q1 (stay)", Fraction(2), conditional_utility(g, (m0,), 0, "q1", mu))
    if sw:
        r.check("conditional at q1 (switch)", Fraction(9, 4),
                conditional_utility(g, (sw[0].spliced,), 0, "q1", mu))
        r.check("switch at q1 is local variant", False,
                is_local_variant(g, 0, m0, "q1", sw[0].spliced))
    a = BeliefAssessment((m0,), mu)
    r.check("exante", True, check_sequential(g, a, "exante").verdict)
    interim = check_sequential(g, a, "interim")
    r.check("interim", False, interim.verdict)
    r.check("interim witnesses", [("q1", "M1", Fraction(2), Fraction(9, 4))],
            _witness_keys(interim))


def _guessbit(r: ScenarioResult):
    g = guessbit_game(True)
    m = g.profile(["M"])
    r.check("nash(M)", True, is_nash(g, m).verdict)
    r.check("lean(M)", (False, [(0, "b1")]), is_lean(g, m))
    r.check("reach b1", Fraction(0), state_reach_probability(g, m, 0, "b1"))
    a = BeliefAssessment(m, compute_beliefs(g, m))
    rep = check_sequential(g, a, "exante")
    r.check("exante (type floor on)", False, rep.verdict)
    r.check("exante witnesses (type floor on)", [("b1", "MFIX", Fraction(0), Fraction(1))],
            _witness_keys(rep))
    g2 = guessbit_game(False)
    m2 = g2.profile(["M"])
    rep2 = check_sequential(g2, BeliefAssessment(m2, compute_beliefs(g2, m2)), "exante")
    r.check("exante (type floor off)", True, rep2.verdict)


def _rps(r: ScenarioResult):
    g = rps_game()
    r.check("nash profiles over menu", [], [tuple(m.name for m in p) for p in find_nash(g)])


def _kolmo(r: ScenarioResult):
    g = kolmo_game()
    m = g.profile(["M"])
    r.check("U(M), U(HALF), U(FULL)", (Fraction(0), Fraction(-25), Fraction(-60)),
            tuple(expected_utility(g, g.profile([n]))[0] for n in ("M", "HALF", "FULL")))
    r.check("find_nash", [("M",)], [tuple(x.name for x in p) for p in find_nash(g)])
    r.check("lean(M)", True, is_lean(g, m)[0])
    a = BeliefAssessment(m, compute_beliefs(g, m))
    r.check("exante", True, check_sequential(g, a, "exante").verdict)
    interim = check_sequential(g, a, "interim")
    r.check("interim", False, interim.verdict)
    r.check("interim witness states", [("b0", "HALF")],
            [(w.state, w.machine) for w in interim.witnesses])


def _mediated(r: ScenarioResult):
    from .mediated import mediated_check, mediated_expected_utility, run_mediated

    g = mediated_game(False)
    cc, dd = g.profile(["C", "C"]), g.profile(["D", "D"])
    r.check("run (C,C) actions", ("c", "c"), run_mediated(g, cc).actions)
    r.check("U(C,C)", (Fraction(3), Fraction(3)), mediated_expected_utility(g, cc))
    r.check("U(D,D)", (Fraction(1), Fraction(1)), mediated_expected_utility(g, dd))
    for name, prof in (("(C,C)", cc), ("(D,D)", dd)):
        for kind in ("exante", "interim"):
            r.check(f"{kind} {name}", True, mediated_check(g, prof, kind).verdict)
    gc = mediated_game(True)
    dd, bb = gc.profile(["D", "D"]), gc.profile(["BOT", "BOT"])
    r.check("bot actions", ("d", "d"), run_mediated(gc, bb).actions)
    r.check("U(D,D) charged", (1 - 2 * DELTA, 1 - 2 * DELTA), mediated_expected_utility(gc, dd))
    r.check("U(BOT,BOT) charged", (1 - DELTA, 1 - DELTA), mediated_expected_utility(gc, bb))
    r.check("nash (D,D) charged", False, mediated_check(gc, dd, "nash").verdict)
    for kind in ("exante", "interim"):
        r.check(f"{kind} (BOT,BOT) charged", True, mediated_check(gc, bb, kind).verdict)


REGISTRY = {
    "rps": _rps,
    "figure2": _figure2,
    "guessbit": _guessbit,
    "kolmo": _kolmo,
    "mediated": _mediated,
}


def run_scenario(name: str) -> ScenarioResult:
    if name not in REGISTRY:
        raise KeyError(f"unknown scenario {name!r}; known: {', '.join(REGISTRY)}")
    result = ScenarioResult(name)
    start = time.perf_counter()
    REGISTRY[name](result)
    result.seconds = time.perf_counter() - start
    return result
