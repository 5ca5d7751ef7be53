from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from machgame.analysis import decompose_switches
from machgame.beliefs import (
    BeliefSystem,
    compute_beliefs,
    conditional_utility,
    tremble_profile,
    validate_beliefs,
)
from machgame.corpus import random_game
from machgame.game import expected_utility
from machgame.infinitesimal import InfinitesimalPoly
from machgame.machine import MachineError, is_completely_mixed
from machgame.scenarios import figure2_game, guessbit_game, kolmo_game, rps_game

import oracles

SCENARIOS = [figure2_game, guessbit_game, lambda: guessbit_game(False), kolmo_game, rps_game]


def test_trembled_machine_is_completely_mixed():
    g = figure2_game()
    tp = tremble_profile(g, g.profile(["M0"]))
    machines, _ = tp.at(Fraction(1, 4), Fraction(1, 4))
    assert is_completely_mixed(machines[0])
    assert set(machines[0].states) == set(g.machines["M0"].states)


def test_zero_substitution_recovers_profile():
    g = guessbit_game()
    m = g.machines["M"]
    tp = tremble_profile(g, (m,))
    machines, prior = tp.at(0, 0)
    assert dict(machines[0].rows) == dict(m.rows)
    assert prior == tuple(g.types.items())


def test_trembled_row_sums_to_one():
    g = figure2_game()
    pm = tremble_profile(g, g.profile(["M0"])).machines[0]
    total = InfinitesimalPoly()
    for w in pm.row("q0", "1", "b").values():
        total = total + w
    assert total == InfinitesimalPoly.const(1)


def test_figure2_belief_at_q1():
    g = figure2_game()
    mu = compute_beliefs(g, g.profile(["M0"]))
    assert mu.by_signature(0, "q1") == {"t=(0) q0>q1 c=0": 1}


def test_guessbit_belief_with_type_floor():
    g = guessbit_game(True)
    mu = compute_beliefs(g, g.profile(["M"]))
    assert mu.by_signature(0, "b1") == {"t=(1) q0>b1 c=0": 1}


def test_guessbit_belief_without_type_floor():
    g = guessbit_game(False)
    mu = compute_beliefs(g, g.profile(["M"]))
    held = mu.by_signature(0, "b1")
    # every history carries type 0 and arrives through a tremble
    assert all(s.startswith("t=(0)") and "~b1" in s for s in held)
    assert sum(held.values()) == 1
    assert held == {"t=(0) q0~b1 c=0": Fraction(1, 2), "t=(0) q0>b0~b1 c=0": Fraction(1, 2)}


@pytest.mark.parametrize("build", SCENARIOS)
def test_computed_beliefs_validate(build):
    g = build()
    for p in g.profiles():
        mu = compute_beliefs(g, p)
        assert validate_beliefs(g, p, mu) == (True, [])
        for hs in mu.entries.values():
            assert sum(b for _, b in hs) == 1
            assert all(0 <= b <= 1 for _, b in hs)


def _edited(mu, key, values):
    entries = dict(mu.entries)
    entries[key] = tuple((h, v) for (h, _), v in zip(entries[key], values))
    return BeliefSystem(mu.machines, entries)


def test_bad_frontier_sum_is_rejected():
    g = figure2_game()
    p = g.profile(["M0"])
    bad = _edited(compute_beliefs(g, p), (0, "q1"), [Fraction(3, 2)])
    ok, witnesses = validate_beliefs(g, p, bad)
    assert not ok and witnesses[0][1] == "q1"


def test_wrong_conditional_is_rejected():
    g = figure2_game()
    p = g.profile(["M0"])
    mu = compute_beliefs(g, p)
    bad = _edited(mu, (0, "H"), [Fraction(3, 4), Fraction(1, 4)])
    ok, witnesses = validate_beliefs(g, p, bad)
    assert not ok
    assert witnesses[0][:2] == (0, "H") and "conditional 1/2" in witnesses[0][3]


def test_figure2_conditional_utilities():
    g = figure2_game()
    p = g.profile(["M0"])
    mu = compute_beliefs(g, p)
    assert conditional_utility(g, p, 0, "q1", mu) == 2
    sw = [s for s in decompose_switches(g, 0, p[0], "q1") if s.target.name == "M1"][0]
    assert conditional_utility(g, (sw.spliced,), 0, "q1", mu) == Fraction(9, 4)


def test_guessbit_conditional_utilities():
    g = guessbit_game(True)
    p = g.profile(["M"])
    mu = compute_beliefs(g, p)
    assert conditional_utility(g, p, 0, "b1", mu) == 0
    sw = [s for s in decompose_switches(g, 0, p[0], "b1") if s.target.name == "MFIX"][0]
    assert conditional_utility(g, (sw.spliced,), 0, "b1", mu) == 1


def test_unknown_state():
    g = figure2_game()
    p = g.profile(["M0"])
    with pytest.raises(MachineError):
        conditional_utility(g, p, 0, "zz", compute_beliefs(g, p))


@pytest.mark.parametrize("build", SCENARIOS)
def test_start_state_conditional_is_expected_utility(build):
    g = build()
    for p in g.profiles():
        mu = compute_beliefs(g, p)
        eu = expected_utility(g, p)
        for i, m in enumerate(p):
            assert conditional_utility(g, p, i, m.start, mu) == eu[i]


@pytest.mark.parametrize("build", [figure2_game, guessbit_game, lambda: guessbit_game(False)])
def test_limits_match_numeric_trembles(build):
    g = build()
    eps, eta = Fraction(1, 2 ** 20), Fraction(1, 2 ** 10)
    for p in g.profiles():
        mu = compute_beliefs(g, p)
        tp = tremble_profile(g, p)
        for (i, q) in mu.entries:
            numeric = oracles.numeric_beliefs(g, tp, i, q, eps, eta)
            held = mu.by_signature(i, q)
            for sig in set(numeric) | set(held):
                assert abs(numeric.get(sig, 0) - held.get(sig, 0)) < Fraction(1, 2 ** 5), (q, sig)


@pytest.mark.parametrize("build", SCENARIOS)
def test_leading_terms_match_full_polynomials(build):
    g = build()
    for p in g.profiles():
        a = compute_beliefs(g, p)
        b = compute_beliefs(g, p, full=True)
        assert {k: a.by_signature(*k) for k in a.entries} == \
            {k: b.by_signature(*k) for k in b.entries}


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10 ** 6), st.data())
def test_random_game_beliefs(seed, data):
    g = random_game(seed)
    p = data.draw(st.sampled_from(list(g.profiles())))
    mu = compute_beliefs(g, p)
    assert validate_beliefs(g, p, mu)[0]
    eu = expected_utility(g, p)
    for i, m in enumerate(p):
        assert conditional_utility(g, p, i, m.start, mu) == eu[i]
    full = compute_beliefs(g, p, full=True)
    assert {k: mu.by_signature(*k) for k in mu.entries} == \
        {k: full.by_signature(*k) for k in full.entries}
