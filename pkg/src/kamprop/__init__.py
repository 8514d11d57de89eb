"""Optimized time-dependent perturbation theory for pulse-driven quantum systems."""

from .baselines import BaselineKind, baseline_propagator
from .kam import KamChain, KamIteration, KamParams, build_chain, kam_approximant, lambda_objective
from .metrics import ErrorReport, delta_error, scaling_study
from .model import Pulse, PulseShape, SuddenProblem, hamiltonian, pulse_phase, pulse_value, two_level_problem
from .optimize import ScanResult, optimize_iteration_sequence, scan_lambda
from .propagator import PropagatorHandle, PropagatorKind, closed_form_u0, effective_propagator, ode_reference

__version__ = "0.1.0"
