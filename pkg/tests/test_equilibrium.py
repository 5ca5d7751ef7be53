from fractions import Fraction

import pytest

from machgame.analysis import is_lean
from machgame.beliefs import BeliefAssessment, BeliefSystem, InvalidBeliefs, compute_beliefs
from machgame.equilibrium import (
    EquilibriumReport,
    PreconditionError,
    check_sequential,
    convert_to_sequential,
    find_nash,
    is_nash,
    prune_to_lean,
)
from machgame.game import outcome_distribution
from machgame.gamefile import parse_game_file
from machgame.machine import View, execute
from machgame.scenarios import GUESSBIT, figure2_game, guessbit_game, kolmo_game, rps_game

# two independent copies of the type-guessing problem, one per player
TWIN = """\
[players]
count = 2

[types]
"0", "0" : 1
"0", "1" : 0
"1", "0" : 0
"1", "1" : 0

[machines]
{machines}

[menu]
1 = M, MFIX
2 = M, MFIX

[utility]
1: a1=t1 -> 1
1: * -> 0
2: a2=t2 -> 1
2: * -> 0
"""

LEAN = """\
[players]
count = 1

[types]
"0" : 1/2
"1" : 1/2

[machines]
machine A
states q0 H
start q0
halt H
q0 * * -> H 0 = S S S
q0 1 * -> H 1 = S S S
end

[menu]
1 = A

[utility]
1: a1=t1 -> 1
1: * -> 0
"""


def twin_game():
    block = GUESSBIT.split("[machines]\n")[1].split("\n[menu]")[0]
    return parse_game_file(TWIN.replace("{machines}", block))


def assessment(g, p):
    return BeliefAssessment(p, compute_beliefs(g, p))


def test_nash_examples():
    g = figure2_game()
    assert is_nash(g, g.profile(["M0"])).verdict
    assert not is_nash(g, g.profile(["M1"])).verdict
    gb = guessbit_game()
    assert is_nash(gb, gb.profile(["M"])).verdict
    r = rps_game()
    for p in r.profiles():
        rep = is_nash(r, p)
        assert not rep.verdict and rep.witnesses
        assert all(w.after > w.before and w.state is None for w in rep.witnesses)


def test_find_nash():
    assert find_nash(rps_game()) == []
    k = kolmo_game()
    assert [[m.name for m in p] for p in find_nash(k)] == [["M"]]
    lean = parse_game_file(LEAN)
    assert [[m.name for m in p] for p in find_nash(lean)] == [["A"]]


def test_figure2_sequential():
    g = figure2_game()
    a = assessment(g, g.profile(["M0"]))
    assert check_sequential(g, a, "exante").verdict
    rep = check_sequential(g, a, "interim")
    assert not rep.verdict
    assert [(w.player, w.state, w.machine, w.before, w.after) for w in rep.witnesses] == \
        [(0, "q1", "M1", Fraction(2), Fraction(9, 4))]


def test_guessbit_sequential():
    g = guessbit_game(True)
    rep = check_sequential(g, assessment(g, g.profile(["M"])), "exante")
    assert not rep.verdict
    assert [(w.state, w.machine, w.before, w.after) for w in rep.witnesses] == \
        [("b1", "MFIX", 0, 1)]
    g2 = guessbit_game(False)
    assert check_sequential(g2, assessment(g2, g2.profile(["M"])), "exante").verdict


def test_single_machine_menu_is_sequential():
    g = parse_game_file(LEAN)
    a = assessment(g, g.profile(["A"]))
    assert check_sequential(g, a, "exante").verdict
    assert check_sequential(g, a, "interim").verdict


def test_invalid_beliefs_rejected():
    g = figure2_game()
    p = g.profile(["M0"])
    mu = compute_beliefs(g, p)
    entries = dict(mu.entries)
    entries[(0, "H")] = tuple((h, Fraction(1)) for h, _ in entries[(0, "H")])
    with pytest.raises(InvalidBeliefs):
        check_sequential(g, BeliefAssessment(p, BeliefSystem(mu.machines, entries)), "exante")
    with pytest.raises(ValueError):
        check_sequential(g, BeliefAssessment(p, mu), "sideways")


def test_report_kind_is_checked():
    with pytest.raises(ValueError):
        EquilibriumReport("ordinal", True)


@pytest.mark.parametrize("build,names", [(figure2_game, ["M0"]), (kolmo_game, ["M"])])
def test_lean_nash_is_exante(build, names):
    g = build()
    p = g.profile(names)
    assert is_nash(g, p).verdict and is_lean(g, p)[0]
    assert check_sequential(g, assessment(g, p), "exante").verdict


def test_convert_fixed_point():
    g = figure2_game()
    p = g.profile(["M0"])
    r = convert_to_sequential(g, p)
    assert r.iterations == 0 and r.profile == p


def test_convert_guessbit():
    g = guessbit_game()
    p = g.profile(["M"])
    r = convert_to_sequential(g, p)
    assert r.iterations == 1
    assert [(it, i, q, n) for it, i, q, n, _, _ in r.log] == [(1, 0, "b1", "MFIX")]
    assert execute(r.profile[0], View("1"), g.budget).output == "1"
    assert outcome_distribution(g, r.profile) == outcome_distribution(g, p)
    assert check_sequential(g, BeliefAssessment(r.profile, r.beliefs), "exante").verdict


def test_convert_two_repairs_in_order():
    g = twin_game()
    p = g.profile(["M", "M"])
    r = convert_to_sequential(g, p)
    assert r.iterations == 2
    assert [(i, q, n) for _, i, q, n, _, _ in r.log] == [(0, "b1", "MFIX"), (1, "b1", "MFIX")]
    assert outcome_distribution(g, r.profile) == outcome_distribution(g, p)


def test_convert_needs_nash():
    g = figure2_game()
    with pytest.raises(PreconditionError):
        convert_to_sequential(g, g.profile(["M1"]))


def test_prune_guessbit():
    g = guessbit_game()
    p = g.profile(["M"])
    pruned = prune_to_lean(g, p)
    assert pruned[0].states == ("q0", "b0", "H")
    assert is_lean(g, pruned)[0] and is_nash(g, pruned).verdict
    assert outcome_distribution(g, pruned) == outcome_distribution(g, p)


def test_prune_lean_input_unchanged():
    g = parse_game_file(LEAN)
    p = g.profile(["A"])
    assert prune_to_lean(g, p) == p


def test_prune_preconditions():
    g = figure2_game()
    with pytest.raises(PreconditionError):
        prune_to_lean(g, g.profile(["M0"]))  # menu_table cost is undefined on pruned machines
    text = LEAN.replace("1 = A", "1 = A, B").replace(
        "end\n", "end\nmachine B\nstates q0 H\nstart q0\nhalt H\nq0 * * -> H 0 = S S S\nend\n", 1)
    g2 = parse_game_file(text)
    with pytest.raises(PreconditionError, match="not a Nash"):
        prune_to_lean(g2, g2.profile(["B"]))
