from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from machgame.analysis import (
    decompose_switches,
    information_set,
    is_compatible,
    is_lean,
    is_local_variant,
    necessarily_below,
    restrict,
    splice,
    state_reach_probability,
)
from machgame.corpus import random_game
from machgame.machine import MachineError, View, execute, machines_isomorphic
from machgame.scenarios import figure2_game, guessbit_game, mediated_game

import oracles


def test_reach_probabilities():
    g = figure2_game()
    m0 = g.profile(["M0"])
    assert state_reach_probability(g, m0, 0, "q0") == 1
    assert state_reach_probability(g, m0, 0, "q1") == Fraction(1, 2)
    assert oracles.reach_probability(g, m0[0], 0, "q1") == Fraction(1, 2)
    gb = guessbit_game()
    assert state_reach_probability(gb, gb.profile(["M"]), 0, "b1") == 0
    with pytest.raises(MachineError):
        state_reach_probability(g, m0, 0, "nowhere")


def test_leanness():
    gb = guessbit_game()
    assert is_lean(gb, gb.profile(["M"])) == (False, [(0, "b1")])
    g = figure2_game()
    assert is_lean(g, g.profile(["M0"])) == (True, [])
    med = mediated_game()
    assert is_lean(med, med.profile(["BOT", "BOT"]))[0]


def test_information_set_frontier():
    g = figure2_game()
    info = information_set(g, g.profile(["M0"]), 0, "H")
    assert sorted(h.signature() for h, _ in info.upper_frontier()) == \
        ["t=(0) q0>q1>H c=0", "t=(1) q0>q2>q4>H c=0"]


def test_necessarily_below_examples():
    g = figure2_game()
    m0 = g.machines["M0"]
    assert necessarily_below(g, 0, m0, "q0").states == set(m0.states)
    assert necessarily_below(g, 0, m0, "q1").states == {"q1"}
    assert oracles.below_set(g, 0, m0, "q1") == {"q1"}
    gb = guessbit_game()
    assert necessarily_below(gb, 0, gb.machines["M"], "b0").states == {"b0"}
    assert oracles.below_set(gb, 0, gb.machines["M"], "b0") == {"b0"}


def test_witness_views_avoid_anchor():
    g = figure2_game()
    m0 = g.machines["M0"]
    below = necessarily_below(g, 0, m0, "q1")
    for s, view in below.witnesses.items():
        states = execute(m0, view, g.budget).states
        assert s in states and "q1" not in states


def _restriction(m, below, anchor):
    return restrict(m, set(below.states), {}, anchor)


def test_compatibility():
    g = figure2_game()
    m0 = g.machines["M0"]
    below = necessarily_below(g, 0, m0, "q1")
    own = _restriction(m0, below, "q1")
    assert is_compatible(m0, "q1", own, below.states)
    assert not is_compatible(m0, "q1", own.__class__.build(own.states, "H", own.halts, {}),
                             below.states)
    sw = [s for s in decompose_switches(g, 0, m0, "q1") if s.target.name == "M1"][0]
    assert is_compatible(m0, "q1", sw.replacement, below.states)


def test_splice_at_start_is_the_replacement():
    g = figure2_game()
    m0, m1 = g.machines["M0"], g.machines["M1"]
    below = necessarily_below(g, 0, m0, "q0")
    out = splice(m0, "q0", m1, below.states)
    assert machines_isomorphic(out, m1)


def test_identity_splice():
    g = figure2_game()
    m0 = g.machines["M0"]
    below = necessarily_below(g, 0, m0, "q1")
    out = splice(m0, "q1", _restriction(m0, below, "q1"), below.states)
    assert dict(out.rows) == dict(m0.rows)


def test_incompatible_splice_rejected():
    g = figure2_game()
    m0 = g.machines["M0"]
    below = necessarily_below(g, 0, m0, "q1")
    with pytest.raises(MachineError, match="not compatible"):
        splice(m0, "q1", g.machines["M1"], below.states)


def test_guessbit_output_one_splice():
    g = guessbit_game()
    m = g.machines["M"]
    [sw] = [s for s in decompose_switches(g, 0, m, "b1") if s.target.name == "MFIX"]
    assert execute(sw.spliced, View("1"), g.budget).output == "1"
    assert execute(sw.spliced, View("0"), g.budget).output == "0"


def test_decompositions():
    g = figure2_game()
    m0 = g.machines["M0"]
    assert [s.target.name for s in decompose_switches(g, 0, m0, "q0")] == ["M0", "M1"]
    sw = [s for s in decompose_switches(g, 0, m0, "q1") if s.target.name == "M1"]
    assert len(sw) == 1
    assert execute(sw[0].spliced, View("0"), g.budget).output == "00"
    k = random_game(3)
    for i in range(k.players):
        m = k.menu(i)[0]
        for q in m.states:
            assert all(machines_isomorphic(s.spliced, s.target)
                       for s in decompose_switches(k, i, m, q))


def test_single_machine_menu_has_only_identity_switches():
    g = guessbit_game()
    g1 = g.__class__(**{**g.__dict__, "menus": (("M",),)})
    m = g1.machines["M"]
    for q in m.states:
        assert [s.target.name for s in decompose_switches(g1, 0, m, q)] == ["M"]


def test_local_variants():
    g = figure2_game()
    m0 = g.machines["M0"]
    sw = [s for s in decompose_switches(g, 0, m0, "q1") if s.target.name == "M1"][0]
    assert not is_local_variant(g, 0, m0, "q1", sw.spliced)
    assert is_local_variant(g, 0, m0, "q1", m0)
    gb = guessbit_game()
    m = gb.machines["M"]
    for s in decompose_switches(gb, 0, m, "b1"):
        assert is_local_variant(gb, 0, m, "b1", s.spliced)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10 ** 6), st.data())
def test_splice_invariants(seed, data):
    g = random_game(seed)
    i = data.draw(st.integers(0, g.players - 1))
    m = data.draw(st.sampled_from(g.menu(i)))
    q = data.draw(st.sampled_from(m.states))
    below = necessarily_below(g, i, m, q)
    assert q in below.states
    assert below.states == oracles.below_set(g, i, m, q)
    assert necessarily_below(g, i, m, m.start).states == set(m.states)
    for s, view in below.witnesses.items():
        states = execute(m, view, g.budget).states
        assert s in states and q not in states
    profile = tuple(g.menu(j)[0] if j != i else m for j in range(g.players))
    for s in m.states:
        assert 0 <= state_reach_probability(g, profile, i, s) <= 1
    assert state_reach_probability(g, profile, i, m.start) == 1
    for sw in decompose_switches(g, i, m, q):
        assert is_compatible(m, q, sw.replacement, below.states)
        assert machines_isomorphic(sw.spliced, sw.target)
        for t in g.types.projection(i):
            for coins, _, tr in oracles.coin_runs(m, t, g.budget):
                if q not in tr.states:
                    assert execute(sw.spliced, View(t, coins), g.budget) == tr
