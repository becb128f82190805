"""Strategic play between several designers sharing one agent population.

Each designer owns one candidate platform per state and chooses which to
build; rivals' built platforms act as external competition.  Best
responses run through the competitive solver; dynamics and the pure-Nash
search operate over full strategy profiles.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .agent import TooLarge
from .core import FlowerInstance, build_flower_instance, derived_params
from .designer import DesignSet
from .multiagent import (
    CompetitiveInstance,
    ExternalPlatform,
    MultiAgentInstance,
    build_competitive_instance,
    build_multi_agent_instance,
    competitive_profit,
    competitive_solve,
)


@dataclass(frozen=True)
class Candidate:
    """One designer's buildable platform at one state."""

    state: int
    z: tuple[Fraction, ...]
    phi: tuple[Fraction, ...]
    d: tuple[Fraction, ...]
    cost: Fraction


@dataclass(frozen=True)
class GameInstance:
    """Shared agent chassis plus one candidate per designer and state."""

    chassis: tuple[FlowerInstance, ...]
    designers: tuple[tuple[Candidate, ...], ...]
    delta: Fraction
    delta_prime: Fraction

    @property
    def n(self) -> int:
        return self.chassis[0].n

    @property
    def num_designers(self) -> int:
        return len(self.designers)


def build_game_instance(chassis, designers, delta, delta_prime) -> GameInstance:
    chassis = tuple(chassis)
    designers = tuple(tuple(sorted(cands, key=lambda c: c.state)) for cands in designers)
    n = chassis[0].n
    for cands in designers:
        if tuple(c.state for c in cands) != tuple(range(1, n + 1)):
            raise ValueError("each designer needs exactly one candidate per state")
        for c in cands:
            if c.cost <= 0:
                raise ValueError("candidate costs must be positive")
            if len(c.z) != len(chassis) or len(c.phi) != len(chassis):
                raise ValueError("candidate needs per-agent z and phi")
    g = GameInstance(chassis, designers, delta, delta_prime)
    for d in range(len(designers)):
        _designer_view(g, d)  # validates quantization eagerly
    return g


Profile = tuple  # one frozenset of states per designer


@lru_cache(maxsize=None)
def _designer_view(g: GameInstance, designer: int) -> MultiAgentInstance:
    """Designer's candidates recast as per-agent flower instances.

    The chassis fixes p and q (hence lambda and B); the candidate's z
    picks y, and its potential picks the platform reward.
    """
    agents = []
    for i, base in enumerate(g.chassis):
        dp = derived_params(base)
        p, q = base.p, base.q
        y = []
        c_platform = []
        for c in g.designers[designer]:
            j = c.state - 1
            w = dp.lam[j] + c.z[i]
            y.append((1 - q[j]) - p[j] / w)
            c_platform.append((c.phi[i] * c.z[i] + dp.lam[j] * base.c_life[j]) / w)
        agents.append(
            build_flower_instance(
                p,
                q,
                y,
                base.c_life,
                c_platform,
                tuple(c.d[i] for c in g.designers[designer]),
                tuple(c.cost for c in g.designers[designer]),
            )
        )
    return build_multi_agent_instance(agents, g.delta, g.delta_prime, m_ceiling=10**12)


def _competitive_instance(g: GameInstance, designer: int, profile: Profile) -> CompetitiveInstance:
    mi = _designer_view(g, designer)
    externals = []
    for other, built in enumerate(profile):
        if other == designer:
            continue
        for s in sorted(built):
            c = g.designers[other][s - 1]
            externals.append(
                ExternalPlatform((other, s), s, c.z, c.phi, owner=other)
            )
    return build_competitive_instance(mi, externals)


def profile_profit(g: GameInstance, designer: int, profile: Profile) -> Fraction:
    """Designer's exact profit under a full strategy profile."""
    ci = _competitive_instance(g, designer, profile)
    return competitive_profit(ci, profile[designer])


def best_response(g: GameInstance, designer: int, others: Profile) -> DesignSet:
    """Profit-maximizing set for one designer with rivals' builds fixed."""
    ci = _competitive_instance(g, designer, others)
    return competitive_solve(ci)


@dataclass(frozen=True)
class DynamicsOutcome:
    """Result of round-robin best-response play.

    kind is "nash", "cycle", or "budget".  trace holds the profile after
    every completed round, starting with the initial profile.
    """

    kind: str
    profile: Profile | None
    cycle: tuple[Profile, ...]
    period: int | None
    trace: tuple[Profile, ...]


def best_response_dynamics(g: GameInstance, initial: Profile, max_rounds: int = 100) -> DynamicsOutcome:
    current = tuple(frozenset(s) for s in initial)
    trace = [current]
    seen = {current: 0}
    for _ in range(max_rounds):
        moved = False
        for d in range(g.num_designers):
            br = best_response(g, d, current)
            if br.states != current[d]:
                current = current[:d] + (br.states,) + current[d + 1 :]
                moved = True
        trace.append(current)
        if not moved:
            return DynamicsOutcome("nash", current, (), None, tuple(trace))
        if current in seen:
            start = seen[current]
            cycle = tuple(trace[start:-1])
            return DynamicsOutcome("cycle", None, cycle, len(cycle), tuple(trace))
        seen[current] = len(trace) - 1
    return DynamicsOutcome("budget", None, (), None, tuple(trace))


def _subsets_lex(n: int):
    states = list(range(1, n + 1))
    subsets = []
    for size in range(n + 1):
        for combo in itertools.combinations(states, size):
            subsets.append(frozenset(combo))
    return sorted(subsets, key=lambda s: tuple(sorted(s)))


def pure_nash_search(g: GameInstance, guard: int = 10**6):
    """First profile (lexicographic) where nobody can improve, or None."""
    n = g.n
    total = (1 << n) ** g.num_designers
    if total > guard:
        raise TooLarge(f"{total} profiles exceed the guard {guard}")
    subsets = _subsets_lex(n)
    for profile in itertools.product(subsets, repeat=g.num_designers):
        is_nash = True
        for d in range(g.num_designers):
            current = profile_profit(g, d, profile)
            for alt in subsets:
                if alt == profile[d]:
                    continue
                deviated = profile[:d] + (alt,) + profile[d + 1 :]
                if profile_profit(g, d, deviated) > current:
                    is_nash = False
                    break
            if not is_nash:
                break
        if is_nash:
            return profile
    return None
