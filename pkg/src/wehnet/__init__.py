"""Wireless-powered source/relay networks: analysis and Monte-Carlo simulation.

Modules
-------
specfun   special functions, adaptive quadrature, 1-D maximization
model     units, network configuration, DPS/SINR/rectenna primitives
analytic  success probabilities, harvested power, lifetime, throughput
sim       toroidal PPP simulator and Monte-Carlo estimators
cli       command-line front end
"""
from .errors import ConfigError, ConvergenceError, DomainError, OptimizationError
from .model import NetworkConfig, RectennaModel, Scenario

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "ConvergenceError",
    "DomainError",
    "NetworkConfig",
    "OptimizationError",
    "RectennaModel",
    "Scenario",
    "__version__",
]
