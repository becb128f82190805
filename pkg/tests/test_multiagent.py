import itertools
from fractions import Fraction as F

import pytest

from conftest import all_subsets
from pdp.core import build_flower_instance, derived_params
from pdp.designer import QuantizationError, designer_oracle
from pdp.instances import gen_random_flower, gen_random_multi_agent
from pdp.multiagent import (
    INF,
    CompetitiveInstance,
    ExternalPlatform,
    GuardExceeded,
    build_competitive_instance,
    build_multi_agent_instance,
    candidate_grids,
    competitive_profit,
    competitive_solve,
    multi_agent_profit,
    multi_agent_solve,
    value_coefficients,
)


def quantized_flower(seed, n=3, d_scale=1):
    inst = gen_random_multi_agent(n, 1, seed=seed).agents[0]
    if d_scale == 1:
        return inst
    return build_flower_instance(
        p=inst.p, q=inst.q, y=inst.y, c_life=inst.c_life,
        c_platform=inst.c_platform, d=[x * d_scale for x in inst.d],
        cost=inst.cost,
    )


def brute_force_multi(mi):
    best = None
    for S in all_subsets(mi.n):
        p = multi_agent_profit(mi, S)
        if best is None or p > best[0] or (p == best[0] and sorted(S) < sorted(best[1])):
            best = (p, S)
    return best


def brute_force_competitive(ci):
    best = None
    for S in all_subsets(ci.mi.n):
        p = competitive_profit(ci, S)
        if best is None or p > best[0] or (p == best[0] and sorted(S) < sorted(best[1])):
            best = (p, S)
    return best


def test_build_validates_quantization():
    mi = gen_random_multi_agent(3, 2, seed=0)
    with pytest.raises(QuantizationError):
        build_multi_agent_instance(mi.agents, delta=F(3), delta_prime=mi.delta_prime)
    with pytest.raises(QuantizationError):
        build_multi_agent_instance(mi.agents, delta=mi.delta, delta_prime=F(7))
    with pytest.raises(QuantizationError):
        build_multi_agent_instance(
            mi.agents, delta=mi.delta, delta_prime=mi.delta_prime, m_ceiling=0
        )


def test_build_requires_shared_structure():
    a = gen_random_multi_agent(3, 1, seed=1).agents[0]
    b = gen_random_multi_agent(2, 1, seed=2).agents[0]
    with pytest.raises(ValueError):
        build_multi_agent_instance([a, b], delta=F(1), delta_prime=F(1, 4))
    c = gen_random_multi_agent(3, 1, seed=3).agents[0]
    if c.cost != a.cost:
        with pytest.raises(ValueError):
            build_multi_agent_instance([a, c], delta=F(1), delta_prime=F(1, 4))


def test_candidate_grids_shape():
    mi = gen_random_multi_agent(3, 2, seed=4)
    grids = candidate_grids(mi)
    assert len(grids.phi_grid) == 2
    for i, a in enumerate(mi.agents):
        dp = derived_params(a)
        assert grids.phi_grid[i][0] is INF
        assert len(grids.phi_grid[i]) <= mi.n + 1
        assert list(grids.phi_grid[i][1:]) == sorted(set(dp.phi), reverse=True)
        assert grids.d_grid[i][0] == dp.B
        steps = [b - a_ for a_, b in zip(grids.d_grid[i], grids.d_grid[i][1:])]
        assert all(s == mi.delta for s in steps)


def test_value_coefficients_extremes():
    mi = gen_random_multi_agent(3, 2, seed=5)
    dps = [derived_params(a) for a in mi.agents]
    D = tuple(dp.B for dp in dps)
    # Guessing "adopt nothing" for every agent leaves only the costs.
    assert value_coefficients(mi, (INF, INF), D) == tuple(-c for c in mi.cost)
    # Guessing the minimum potential makes every state revenue-bearing.
    theta = tuple(min(dp.phi) for dp in dps)
    coeffs = value_coefficients(mi, theta, D)
    for j in range(mi.n):
        expected = -mi.cost[j] + sum(
            a.d[j] * dp.w[j] / D[i] for i, (a, dp) in enumerate(zip(mi.agents, dps))
        )
        assert coeffs[j] == expected


def test_single_agent_matches_designer_oracle():
    for seed in range(30):
        mi = gen_random_multi_agent(3, 1, seed=100 + seed)
        result = multi_agent_solve(mi)
        exact = designer_oracle(mi.agents[0])
        assert result.profit == max(exact.profit, F(0))
        if exact.profit > 0:
            assert result.profit == exact.profit


def test_two_identical_agents_double_the_revenue():
    for seed in range(10):
        a = gen_random_multi_agent(3, 1, seed=200 + seed).agents[0]
        mi = build_multi_agent_instance([a, a], delta=F(1), delta_prime=F(1, 4))
        for S in all_subsets(3):
            single = multi_agent_profit(
                build_multi_agent_instance([a], F(1), F(1, 4)), S
            )
            cost = sum(mi.cost[j - 1] for j in S)
            assert multi_agent_profit(mi, S) == 2 * (single + cost) - cost


def test_solve_matches_brute_force():
    for seed in range(30):
        n = 2 + seed % 2
        mi = gen_random_multi_agent(n, 2, seed=300 + seed)
        result = multi_agent_solve(mi)
        value, states = brute_force_multi(mi)
        assert result.profit == value
        assert multi_agent_profit(mi, result.states) == result.profit


def test_solve_guard():
    mi = gen_random_multi_agent(3, 2, seed=6)
    with pytest.raises(GuardExceeded):
        multi_agent_solve(mi, budget=1)


def random_externals(mi, seed):
    import random

    rng = random.Random(seed)
    externals = []
    for idx in range(rng.randint(1, 3)):
        state = rng.randint(1, mi.n)
        z = tuple(F(rng.randint(1, 2)) * mi.delta for _ in range(mi.k))
        phi = tuple(F(rng.randint(0, 10)) * mi.delta_prime for _ in range(mi.k))
        externals.append(ExternalPlatform(f"x{idx}", state, z, phi))
    return externals


def test_competitive_empty_externals_matches_multi_agent():
    for seed in range(20):
        n = 2 + seed % 2
        mi = gen_random_multi_agent(n, 2, seed=400 + seed)
        ci = build_competitive_instance(mi, [])
        assert competitive_solve(ci).profit == multi_agent_solve(mi).profit
        for S in all_subsets(n):
            assert competitive_profit(ci, S) == multi_agent_profit(mi, S)


def test_competitive_matches_brute_force():
    for seed in range(30):
        n = 2 + seed % 2
        mi = gen_random_multi_agent(n, 2, seed=500 + seed)
        ci = build_competitive_instance(mi, random_externals(mi, seed))
        result = competitive_solve(ci)
        value, states = brute_force_competitive(ci)
        assert result.profit == value
        assert competitive_profit(ci, result.states) == result.profit


def test_competitive_build_validation():
    mi = gen_random_multi_agent(3, 2, seed=7)
    with pytest.raises(ValueError):
        build_competitive_instance(
            mi, [ExternalPlatform("x", 9, (F(1), F(1)), (F(0), F(0)))]
        )
    with pytest.raises(ValueError):
        build_competitive_instance(mi, [ExternalPlatform("x", 1, (F(1),), (F(0),))])
    with pytest.raises(QuantizationError):
        build_competitive_instance(
            mi, [ExternalPlatform("x", 1, (F(1, 3), F(1)), (F(0), F(0)))]
        )
    with pytest.raises(QuantizationError):
        build_competitive_instance(
            mi, [ExternalPlatform("x", 1, (F(1), F(1)), (F(1, 7), F(0)))]
        )


def test_competitive_guard():
    mi = gen_random_multi_agent(3, 2, seed=8)
    ci = build_competitive_instance(mi, random_externals(mi, 8))
    with pytest.raises(GuardExceeded):
        competitive_solve(ci, budget=1)


def test_dominant_externals_kill_the_market():
    # An external platform at every state with an overwhelming potential
    # and the same z leaves the designer nothing worth building.
    mi = gen_random_multi_agent(2, 2, seed=9)
    dps = [derived_params(a) for a in mi.agents]
    externals = [
        ExternalPlatform(
            f"x{j}",
            j,
            tuple(dp.z[j - 1] for dp in dps),
            tuple(dp.phi[j - 1] + 100 for dp in dps),
        )
        for j in range(1, 3)
    ]
    ci = build_competitive_instance(mi, externals)
    result = competitive_solve(ci)
    assert result.states == frozenset()
    assert result.profit == 0
