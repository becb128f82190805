"""The agent's adoption problem: greedy solvers, oracle, feasibility.

The agent picks a subset of offered platforms maximizing the ratio
(A + sum z*phi) / (B + sum z).  With positive z the optimum is a
threshold set in phi; the greedy adds states in descending phi while the
running utility stays strictly below the next potential.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .core import AdoptionSet, DerivedParams, FlowerInstance, check_subset, derived_params


class SignError(ValueError):
    """A z sign the chosen solver does not handle."""


class TooLarge(ValueError):
    """Instance exceeds an enumeration guard."""


@dataclass(frozen=True)
class GreedyStep:
    state: int
    utility_before: Fraction
    accepted: bool


@dataclass(frozen=True)
class GreedyTrace:
    order: tuple[int, ...]
    steps: tuple[GreedyStep, ...]


def _phi_order(dp: DerivedParams, states) -> list[int]:
    return sorted(states, key=lambda i: (-dp.phi[i - 1], i))


def _run_greedy(dp: DerivedParams, offered) -> tuple[frozenset[int], Fraction, GreedyTrace]:
    """Greedy over an offered set of positive-z states.

    States by phi descending; adopt while the running utility stays
    strictly below the next potential.  Equality never adopts.
    """
    order = _phi_order(dp, offered)
    num = dp.A
    den = dp.B
    chosen = set()
    steps = []
    for i in order:
        u = num / den
        phi = dp.phi[i - 1]
        accept = u < phi
        steps.append(GreedyStep(i, u, accept))
        if not accept:
            break
        chosen.add(i)
        num += dp.z[i - 1] * dp.phi[i - 1]
        den += dp.z[i - 1]
    return frozenset(chosen), num / den, GreedyTrace(tuple(order), tuple(steps))


def _solve_signed(dp: DerivedParams, offered) -> tuple[frozenset[int], Fraction]:
    """Optimal subset of `offered` under mixed z signs.

    Ratio-maximization fixpoint: given a utility guess u, the subset
    maximizing (numerator - u * denominator) takes positive-z states with
    phi > u and negative-z states with phi < u; its achieved utility
    becomes the next guess.  The guess rises strictly each round and
    ranges over finitely many subset utilities, so the loop terminates at
    the optimum.  Equality never adopts (a phi = u state contributes
    nothing at the fixpoint).
    """
    offered = list(offered)
    u = dp.A / dp.B
    while True:
        chosen = frozenset(
            i
            for i in offered
            if (dp.phi[i - 1] > u if dp.z[i - 1] > 0 else dp.phi[i - 1] < u)
        )
        num = dp.A + sum(dp.z[i - 1] * dp.phi[i - 1] for i in chosen)
        den = dp.B + sum(dp.z[i - 1] for i in chosen)
        if num / den == u:
            return chosen, u
        u = num / den


def greedy_solve(dp: DerivedParams) -> tuple[AdoptionSet, GreedyTrace]:
    """Optimal adoption set when every z is positive."""
    if any(z <= 0 for z in dp.z):
        raise SignError("greedy_solve requires all z > 0; use greedy_solve_signed")
    states, utility, trace = _run_greedy(dp, range(1, dp.n + 1))
    return AdoptionSet(states, utility), trace


def greedy_solve_signed(dp: DerivedParams) -> AdoptionSet:
    """Optimal adoption set for any mix of z signs (all z nonzero)."""
    states, utility = _solve_signed(dp, range(1, dp.n + 1))
    return AdoptionSet(states, utility)


def _scaled_terms(dp: DerivedParams, states):
    """Integer-scaled (z*phi, z) contributions plus scaled (A, B).

    Scaling every rational by a common denominator turns the subset-sum
    ratio comparisons into pure integer cross-multiplications, which is
    what makes the exhaustive oracle fast enough for the test corpora.
    """
    values = [dp.A, dp.B]
    for i in states:
        values.append(dp.z[i - 1] * dp.phi[i - 1])
        values.append(dp.z[i - 1])
    scale = math.lcm(*(v.denominator for v in values))
    scaled = [int(v * scale) for v in values]
    a, b = scaled[0], scaled[1]
    terms = list(zip(scaled[2::2], scaled[3::2]))
    return a, b, terms


def agent_oracle(dp: DerivedParams, guard: int = 25) -> AdoptionSet:
    """Exhaustive maximizer of agent_utility over all subsets.

    Ties break toward the smallest cardinality, then lexicographic order.
    """
    n = dp.n
    if n > guard:
        raise TooLarge(f"n = {n} exceeds the enumeration guard {guard}")
    states = list(range(1, n + 1))
    a, b, terms = _scaled_terms(dp, states)

    nums = [0] * (1 << n)
    dens = [0] * (1 << n)
    nums[0], dens[0] = a, b
    best_mask = 0
    best_num, best_den = a, b
    best_size = 0
    for mask in range(1, 1 << n):
        low = mask & -mask
        i = low.bit_length() - 1
        prev = mask ^ low
        num = nums[prev] + terms[i][0]
        den = dens[prev] + terms[i][1]
        nums[mask] = num
        dens[mask] = den
        cmp = num * best_den - best_num * den
        if cmp > 0:
            best_mask, best_num, best_den = mask, num, den
            best_size = mask.bit_count()
        elif cmp == 0:
            size = mask.bit_count()
            if size < best_size or (size == best_size and _lex_key(mask, n) < _lex_key(best_mask, n)):
                best_mask, best_num, best_den = mask, num, den
                best_size = size
    chosen = frozenset(i + 1 for i in range(n) if best_mask >> i & 1)
    return AdoptionSet(chosen, Fraction(best_num, best_den))


def _lex_key(mask: int, n: int) -> tuple[int, ...]:
    return tuple(i for i in range(n) if mask >> i & 1)


def adopted_response(inst: FlowerInstance, offered) -> frozenset[int]:
    """The set the agent actually adopts when offered exactly `offered`."""
    dp = derived_params(inst)
    offered = check_subset(offered, inst.n)
    if all(dp.z[i - 1] > 0 for i in offered):
        chosen, _, _ = _run_greedy(dp, offered)
    else:
        chosen, _ = _solve_signed(dp, offered)
    return chosen


def is_feasible(inst: FlowerInstance, S) -> bool:
    """True iff the agent's optimal response to offering S adopts all of S."""
    S = check_subset(S, inst.n)
    return adopted_response(inst, S) == S
