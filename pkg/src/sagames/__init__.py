"""Spatial Aloha games: pricing, equilibria and Price of Anarchy.

Submodules
----------
lambertw       real branches of the Lambert W function
model          Poisson bipolar network, spatial contention and goodput
goodput_game   game with goodput utility and linear pricing
delay_game     game with local-delay utility and linear pricing
montecarlo     simulation checks of the closed forms
cli            ``sag`` command-line tool
"""
from . import delay_game, goodput_game, montecarlo
from .errors import CensoringWarning, DomainError, ParameterError, QuadratureError
from .lambertw import BRANCH_POINT, Branch, lambert_w, lambert_w_prime
from .model import (GameParams, NetworkParams, contention_constant, goodput_integral,
                    goodput_tagged, goodput_typical, spatial_contention, team_densities,
                    team_optimal_map)
from .results import EqBranch, Equilibrium, Metric, PoAReport, Trajectory

__version__ = "0.1.0"

__all__ = [
    "delay_game", "goodput_game", "montecarlo",
    "CensoringWarning", "DomainError", "ParameterError", "QuadratureError",
    "BRANCH_POINT", "Branch", "lambert_w", "lambert_w_prime",
    "GameParams", "NetworkParams", "contention_constant", "goodput_integral",
    "goodput_tagged", "goodput_typical", "spatial_contention", "team_densities",
    "team_optimal_map",
    "EqBranch", "Equilibrium", "Metric", "PoAReport", "Trajectory",
]
