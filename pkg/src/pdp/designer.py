"""The designer's single-agent problem: rounding FPTAS and exact oracle.

The designer offers a set S of platforms; only feasible sets (the agent
adopts all of S) earn revenue.  The FPTAS hashes partial sets by rounded
profit, rounded revenue, and the exact scaled denominator shift, keeping
one representative per bin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .agent import TooLarge, is_feasible
from .core import FlowerInstance, derived_params, designer_profit


class QuantizationError(ValueError):
    """A z value is not a positive integer multiple of delta."""


class EmptyInstance(ValueError):
    """No state survives preprocessing."""


class CostBoundError(ValueError):
    """A build cost exceeds the allowed multiple of K."""


@dataclass(frozen=True)
class DesignSet:
    """An offered (= adopted) set with its exact profit."""

    states: frozenset[int]
    profit: Fraction
    bins: int | None = None


@dataclass(frozen=True)
class QuantizedInstance:
    inst: FlowerInstance
    delta: Fraction
    epsilon: Fraction
    K: Fraction
    r: Fraction
    surviving: tuple[int, ...]


def singleton_profit(inst: FlowerInstance, i: int) -> Fraction:
    return designer_profit(inst, {i}, {i})


def _fraction_gcd(values) -> Fraction:
    num = 0
    den = 1
    for v in values:
        num = math.gcd(num, v.numerator)
        den = math.lcm(den, v.denominator)
    return Fraction(num, den)


def preprocess(
    inst: FlowerInstance,
    delta: Fraction | None = None,
    epsilon: Fraction = Fraction(1, 10),
    r_ceiling: Fraction = Fraction(1000),
) -> QuantizedInstance:
    """Filter useless states and validate the quantization assumptions.

    A state survives when offering it alone is feasible and profitable.
    K is the best singleton profit; every cost must be at most r_ceiling
    times K; every surviving z must be a positive multiple of delta.
    """
    if not 0 < epsilon < 1:
        raise ValueError(f"epsilon = {epsilon} must lie in (0, 1)")
    dp = derived_params(inst)
    surviving = tuple(
        i
        for i in range(1, inst.n + 1)
        if is_feasible(inst, {i}) and singleton_profit(inst, i) > 0
    )
    if not surviving:
        raise EmptyInstance("no state has a feasible, profitable singleton")
    K = max(singleton_profit(inst, i) for i in surviving)
    if delta is None:
        delta = _fraction_gcd([dp.z[i - 1] for i in surviving])
    for i in surviving:
        ratio = dp.z[i - 1] / delta
        if ratio.denominator != 1 or ratio <= 0:
            raise QuantizationError(
                f"z[{i}] = {dp.z[i - 1]} is not a positive integer multiple of {delta}"
            )
    r = max(inst.cost[i - 1] / K for i in surviving)
    if r > r_ceiling:
        raise CostBoundError(f"cost/K ratio {r} exceeds the ceiling {r_ceiling}")
    return QuantizedInstance(inst, delta, epsilon, K, r, surviving)


def fptas_solve(qi: QuantizedInstance, stage_log: list | None = None) -> DesignSet:
    """(1 - epsilon)-approximate profit maximization over feasible sets.

    Dynamic program over states: every stored set is extended by the
    current state and kept only when still feasible with positive
    profit.  Bins collide on (rounded profit, rounded revenue, scaled
    denominator shift); the set with the smaller objective numerator
    wins a collision, which keeps the most extendable representative.
    """
    inst = qi.inst
    dp = derived_params(inst)
    n = inst.n
    unit = qi.epsilon * qi.K / (2 * n)

    # Entry: (states tuple sorted, sum_dw, sum_cost, N, D, min_phi or None)
    def profit_of(entry):
        _, sum_dw, sum_cost, _, D, _ = entry
        return sum_dw / (dp.B + D) - sum_cost

    def key_of(entry):
        p1 = entry[1] / (dp.B + entry[4])
        d_steps = entry[4] / qi.delta
        assert d_steps.denominator == 1
        return (math.ceil(profit_of(entry) / unit), math.ceil(p1 / unit), int(d_steps))

    empty = ((), Fraction(0), Fraction(0), Fraction(0), Fraction(0), None)
    table = {key_of(empty): empty}

    for k in qi.surviving:
        zk = dp.z[k - 1]
        phik = dp.phi[k - 1]
        snapshot = sorted(table.items())
        for _, entry in snapshot:
            states, sum_dw, sum_cost, N, D, min_phi = entry
            new_min = phik if min_phi is None else min(min_phi, phik)
            N2 = N + zk * phik
            D2 = D + zk
            # All surviving z are positive, so feasibility is exactly
            # the threshold test against the smallest potential.
            if (dp.A + N2) >= new_min * (dp.B + D2):
                continue
            new_entry = (
                states + (k,),
                sum_dw + inst.d[k - 1] * dp.w[k - 1],
                sum_cost + inst.cost[k - 1],
                N2,
                D2,
                new_min,
            )
            if profit_of(new_entry) <= 0:
                continue
            key = key_of(new_entry)
            old = table.get(key)
            if old is None or N2 < old[3] or (N2 == old[3] and new_entry[0] < old[0]):
                table[key] = new_entry
        if stage_log is not None:
            stage_log.append((k, [e[0] for e in table.values()]))

    best = max(table.values(), key=lambda e: (profit_of(e), [-s for s in e[0]]))
    return DesignSet(frozenset(best[0]), profit_of(best), bins=len(table))


def designer_oracle(inst: FlowerInstance, guard: int = 22) -> DesignSet:
    """Exact profit maximizer by exhaustive enumeration of offered sets.

    Ties break toward the smallest cardinality, then lexicographic.
    """
    n = inst.n
    if n > guard:
        raise TooLarge(f"n = {n} exceeds the enumeration guard {guard}")
    dp = derived_params(inst)
    if all(z > 0 for z in dp.z):
        states = _oracle_positive(inst, dp)
    else:
        states = _oracle_general(inst)
    return DesignSet(states, designer_profit(inst, states, states))


def _oracle_positive(inst: FlowerInstance, dp) -> frozenset[int]:
    """Integer-scaled subset sweep; feasibility is the threshold test."""
    n = inst.n
    rationals = [dp.A, dp.B]
    for i in range(n):
        rationals += [
            dp.z[i] * dp.phi[i],
            dp.z[i],
            inst.d[i] * dp.w[i],
            inst.cost[i],
            dp.phi[i],
        ]
    L = math.lcm(*(v.denominator for v in rationals))
    A = int(dp.A * L)
    B = int(dp.B * L)
    zphi = [int(dp.z[i] * dp.phi[i] * L) for i in range(n)]
    zs = [int(dp.z[i] * L) for i in range(n)]
    dws = [int(inst.d[i] * dp.w[i] * L) for i in range(n)]
    costs = [int(inst.cost[i] * L) for i in range(n)]
    phis = [int(dp.phi[i] * L) for i in range(n)]

    size = 1 << n
    num = [0] * size
    den = [0] * size
    dw = [0] * size
    cost = [0] * size
    minphi = [0] * size
    num[0], den[0] = A, B

    best_mask = 0
    best_pnum, best_pden = 0, 1
    best_size = 0
    for mask in range(1, size):
        low = mask & -mask
        i = low.bit_length() - 1
        prev = mask ^ low
        num[mask] = num[prev] + zphi[i]
        den[mask] = den[prev] + zs[i]
        dw[mask] = dw[prev] + dws[i]
        cost[mask] = cost[prev] + costs[i]
        minphi[mask] = phis[i] if prev == 0 else min(minphi[prev], phis[i])
        if num[mask] * L >= minphi[mask] * den[mask]:
            continue
        pnum = dw[mask] * L - cost[mask] * den[mask]
        pden = den[mask] * L
        cmp = pnum * best_pden - best_pnum * pden
        if cmp > 0:
            best_mask, best_pnum, best_pden = mask, pnum, pden
            best_size = mask.bit_count()
        elif cmp == 0:
            sz = mask.bit_count()
            if sz < best_size or (
                sz == best_size and _mask_states(mask) < _mask_states(best_mask)
            ):
                best_mask, best_pnum, best_pden = mask, pnum, pden
                best_size = sz
    return frozenset(i + 1 for i in range(n) if best_mask >> i & 1)


def _mask_states(mask: int) -> tuple[int, ...]:
    return tuple(i for i in range(mask.bit_length()) if mask >> i & 1)


def _oracle_general(inst: FlowerInstance) -> frozenset[int]:
    n = inst.n
    best = (Fraction(0), 0, ())
    best_states: frozenset[int] = frozenset()
    for mask in range(1, 1 << n):
        S = frozenset(i + 1 for i in range(n) if mask >> i & 1)
        if not is_feasible(inst, S):
            continue
        p = designer_profit(inst, S, S)
        key = (p, -len(S), tuple(-s for s in sorted(S)))
        if (p, *key[1:]) > best:
            best = (p, key[1], key[2])
            best_states = S
    return best_states
