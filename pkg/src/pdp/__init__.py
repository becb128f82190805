"""Exact solvers for platform design over flower Markov chains."""

from .core import (
    AdoptionSet,
    DerivedParams,
    FlowerInstance,
    GeneralChain,
    agent_utility,
    build_flower_instance,
    derived_params,
    designer_profit,
    stationary_distribution_flower,
    steady_state_general,
)

__all__ = [
    "AdoptionSet",
    "DerivedParams",
    "FlowerInstance",
    "GeneralChain",
    "agent_utility",
    "build_flower_instance",
    "derived_params",
    "designer_profit",
    "stationary_distribution_flower",
    "steady_state_general",
]
