"""Quantum transistor built from coupled harmonic oscillators.

A source and a drain oscillator talk through a bus of N oscillators; kappa
of them are resonant and the rest are detuned, which switches transfer on or
off. The package provides the closed-form spectrum and dynamics, transfer and
gate design, the dispersive detuning mechanism, thermal-noise fidelities,
brute-force reference solvers, and the ``qt`` command line.
"""

__version__ = "0.1.0"

from .errors import *  # noqa: E402,F401,F403
from .network import NetworkConfig, blocking_margin, build_hamiltonian  # noqa: E402
from .spectral import CubicSpectralParams, Spectrum, analytic_spectrum, cubic_params  # noqa: E402
from .dynamics import (  # noqa: E402
    QubitState, SingleExcitationState, TransferAmplitudes,
    evolve_closed, survival_probabilities, u_approx, u_exact,
)
from .design import GatePlan, TransferPlan, design_gate, plan_transfer, predict_gate_output  # noqa: E402
from .dispersive import DispersiveConfig, effective_frequency, simulate_dispersive  # noqa: E402
from .open_system import (  # noqa: E402
    FidelityMapRow, ReservoirParams, fidelity_avg, fidelity_map, fidelity_point,
    j_matrix, optimal_kappa, planck_nbar, rho_series, theta_matrix,
)
