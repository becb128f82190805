from fractions import Fraction as F

import pytest

from conftest import make_example
from pdp.agent import TooLarge
from pdp.core import build_flower_instance, derived_params
from pdp.designer import designer_oracle
from pdp.game import (
    Candidate,
    best_response,
    best_response_dynamics,
    build_game_instance,
    profile_profit,
    pure_nash_search,
)
from pdp.instances import gen_no_nash_game

fs = frozenset


def single_designer_game():
    # One designer whose candidates mirror the reference two-petal
    # economics, so the best response equals the single-designer optimum.
    inst = make_example()
    dp = derived_params(inst)
    cands = tuple(
        Candidate(
            j,
            (dp.z[j - 1],),
            (dp.phi[j - 1],),
            (inst.d[j - 1],),
            inst.cost[j - 1],
        )
        for j in (1, 2)
    )
    return build_game_instance((inst,), (cands,), F(1), F(2)), inst


def disjoint_game():
    # Two designers with interests in different states: designer 1's
    # candidate at state 2 (and designer 2's at state 1) carries no
    # demand, so their builds never collide.
    third = F(1, 3)
    chassis = build_flower_instance(
        p=(F(1, 2), F(1, 2)),
        q=(F(1, 2), F(1, 2)),
        y=(F(1, 4), F(1, 4)),
        c_life=(F(0), F(0)),
        c_platform=(F(0), F(0)),
        d=(F(0), F(0)),
        cost=(F(1), F(1)),
    )
    d1 = (
        Candidate(1, (F(1),), (F(2),), (F(10),), F(1, 10)),
        Candidate(2, (F(1),), (F(0),), (F(0),), F(1, 10)),
    )
    d2 = (
        Candidate(1, (F(1),), (F(0),), (F(0),), F(1, 10)),
        Candidate(2, (F(1),), (F(4),), (F(1),), F(1, 10)),
    )
    return build_game_instance((chassis,), (d1, d2), F(1), F(2))


def test_no_nash_fixture_shape():
    g = gen_no_nash_game()
    assert g.n == 3
    assert g.num_designers == 2
    dp = derived_params(g.chassis[0])
    assert dp.A == 0
    assert dp.B == 4
    assert dp.z == (F(1), F(1), F(1))


def test_no_nash_has_no_pure_equilibrium():
    assert pure_nash_search(gen_no_nash_game()) is None


def test_best_response_truths():
    g = gen_no_nash_game()
    # Against designer 2 holding state 2, designer 1 builds state 1.
    br = best_response(g, 0, (fs(), fs({2})))
    assert br.states == fs({1})
    assert br.profit == F(99997, 3000)
    # Against designer 1 holding state 1, designer 2 builds state 3.
    br = best_response(g, 1, (fs({1}), fs()))
    assert br.states == fs({3})
    assert br.profit == F(799999, 1000)
    # Against designer 2 holding state 3, designer 1 switches to state 3.
    br = best_response(g, 0, (fs(), fs({3})))
    assert br.states == fs({3})
    assert br.profit == F(19999, 1000)
    # With designer 1 at state 3, designer 2 earns nothing and quits.
    br = best_response(g, 1, (fs({3}), fs({3})))
    assert br.states == fs()
    assert br.profit == 0


def test_dynamics_settles_into_two_round_cycle():
    g = gen_no_nash_game()
    outcome = best_response_dynamics(g, (fs(), fs()))
    assert outcome.kind == "cycle"
    assert outcome.period == 2
    assert outcome.cycle == (
        (fs({1}), fs({3})),
        (fs({3}), fs()),
    )


def test_dynamics_budget_outcome():
    g = gen_no_nash_game()
    outcome = best_response_dynamics(g, (fs(), fs()), max_rounds=1)
    assert outcome.kind == "budget"
    assert outcome.profile is None
    assert len(outcome.trace) == 2


def test_single_designer_dynamics_reach_nash():
    g, inst = single_designer_game()
    outcome = best_response_dynamics(g, (fs(),))
    assert outcome.kind == "nash"
    exact = designer_oracle(inst)
    assert outcome.profile == (exact.states,)
    assert profile_profit(g, 0, outcome.profile) == exact.profit


def test_single_designer_pure_nash():
    g, inst = single_designer_game()
    assert pure_nash_search(g) == (designer_oracle(inst).states,)


def test_disjoint_interests_have_nash():
    g = disjoint_game()
    nash = pure_nash_search(g)
    assert nash is not None
    # Neither designer builds the state it has no demand at.
    assert 2 not in nash[0]
    assert 1 not in nash[1]
    outcome = best_response_dynamics(g, (fs(), fs()))
    assert outcome.kind == "nash"
    assert outcome.profile == nash


def test_profile_profit_accounts_costs():
    g = gen_no_nash_game()
    # Building an undemanded platform only pays its cost.
    assert profile_profit(g, 0, (fs({2}), fs())) == -F(1, 1000)
    assert profile_profit(g, 0, (fs(), fs())) == 0


def test_build_validation():
    g = gen_no_nash_game()
    with pytest.raises(ValueError):
        build_game_instance(g.chassis, (g.designers[0][:2],), g.delta, g.delta_prime)
    bad = (
        Candidate(1, (F(1),), (F(0),), (F(0),), F(0)),
        Candidate(2, (F(1),), (F(0),), (F(0),), F(1)),
        Candidate(3, (F(1),), (F(0),), (F(0),), F(1)),
    )
    with pytest.raises(ValueError):
        build_game_instance(g.chassis, (bad,), g.delta, g.delta_prime)


def test_pure_nash_guard():
    with pytest.raises(TooLarge):
        pure_nash_search(gen_no_nash_game(), guard=1)
