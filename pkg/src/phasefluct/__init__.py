"""Quantum phase fluctuations of a coherent pump in multi-photon wave mixing.

Exact truncated-Fock evolution of four-wave mixing, six-wave mixing and
second-harmonic generation, Susskind-Glogower and Barnett-Pegg phase
moments, Carruthers-Nieto fluctuation parameters, and comparison against
the short-time closed forms.
"""
from .analysis import CNResult, ComparisonReport, cn_parameters, compare, convergence_slope
from .errors import ConfigError, NumericalError, PhaseFluctError
from .evolution import EvolutionSettings, evolve, heisenberg_taylor
from .fock import (
    ModeOperator,
    ModeSpace,
    PumpAmplitude,
    StateVector,
    build_space,
    coherent_pump_state,
    expectation,
    ladder,
    leakage,
    number_op,
    variance,
)
from .markers import UNDEF, is_undef
from .phase import bp_operators, moments, sg_operators
from .pipeline import exact_point
from .processes import ProcessSpec, closed_form, interaction_hamiltonian, process_space
from .sweep import SweepConfig, parse_config, run_sweep
from .verify import verify

__version__ = "0.1.0"

__all__ = [
    "CNResult", "ComparisonReport", "ConfigError", "EvolutionSettings", "ModeOperator",
    "ModeSpace", "NumericalError", "PhaseFluctError", "ProcessSpec", "PumpAmplitude",
    "StateVector", "SweepConfig", "UNDEF", "bp_operators", "build_space", "closed_form",
    "cn_parameters", "coherent_pump_state", "compare", "convergence_slope", "evolve",
    "exact_point", "expectation", "heisenberg_taylor", "interaction_hamiltonian",
    "is_undef", "ladder", "leakage", "moments", "number_op", "parse_config",
    "process_space", "run_sweep", "sg_operators", "variance", "verify",
]
