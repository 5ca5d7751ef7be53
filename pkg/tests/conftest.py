import time
import warnings
from fractions import Fraction

import pytest

from machgame.analysis import SpliceWarning, is_lean
from machgame.beliefs import BeliefAssessment, compute_beliefs
from machgame.corpus import corpus
from machgame.equilibrium import check_sequential, is_nash
from machgame.game import check_cost_properties

ACCEPTANCE: dict = {}


def pytest_configure(config):
    warnings.simplefilter("ignore", SpliceWarning)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}")


class ProfileResult:
    __slots__ = ("profile", "beliefs", "sums", "nash", "exante", "interim", "lean")


class GameResult:
    def __init__(self, index, game):
        self.index = index
        self.game = game
        self.positive = check_cost_properties(game, "positive-state-cost").holds
        self.local = check_cost_properties(game, "local-complexity").holds
        self.prunable = (check_cost_properties(game, "nonnegative-state-cost").holds
                         and check_cost_properties(game, "complexity-independent").holds)
        self.profiles = []


def _analyse(index, g):
    res = GameResult(index, g)
    for p in g.profiles():
        r = ProfileResult()
        r.profile = p
        r.beliefs = compute_beliefs(g, p)
        r.sums = {k: sum((b for _, b in hs), Fraction(0)) for k, hs in r.beliefs.entries.items()}
        r.nash = is_nash(g, p).verdict
        a = BeliefAssessment(p, r.beliefs)
        r.exante = check_sequential(g, a, "exante")
        r.interim = check_sequential(g, a, "interim")
        r.lean = is_lean(g, p)[0]
        res.profiles.append(r)
    return res


@pytest.fixture(scope="session")
def corpus_games():
    return corpus(100, seed=0)


@pytest.fixture(scope="session")
def corpus_results(corpus_games):
    start = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SpliceWarning)
        results = [_analyse(k, g) for k, g in enumerate(corpus_games)]
    return results, time.perf_counter() - start
