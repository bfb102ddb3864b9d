"""Simulation of chemical-reaction microfluidic circuits for molecular communication.

Signals are concentration time series on a shared grid; channels act on them
through sampled convection-diffusion impulse responses, and reactions act
pointwise.  Circuits (AND gate, QCSK transmitter and receiver) are chains of
the block operators in ``mfmc.operators``.
"""
__version__ = "0.1.0"

from .errors import (AlignmentError, ConfigError, ConvergenceError, DomainError, GridError,
                     MfmcError, NumericError)
from .signals import ConcentrationSignal, Grid, PulseSpec, generate, rect, step
from .transfer import DispersionParams, apply_channel, kernel

__all__ = ["AlignmentError", "ConcentrationSignal", "ConfigError", "ConvergenceError",
           "DispersionParams", "DomainError", "Grid", "GridError", "MfmcError", "NumericError",
           "PulseSpec", "__version__", "apply_channel", "generate", "kernel", "rect", "step"]
