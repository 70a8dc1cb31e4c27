"""Closed-system evolution in the vacuum + single-excitation sector."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import CrossCheckError, DegenerateDetuningError, DomainError, RegimeWarning
from .network import NetworkConfig, blocking_margin
from .spectral import Spectrum, analytic_spectrum, cubic_params

CROSS_CHECK_TOL = 1e-8


@dataclass(frozen=True)
class QubitState:
    """a0|0> + a1|1>."""

    a0: complex
    a1: complex

    def __post_init__(self):
        norm = abs(self.a0) ** 2 + abs(self.a1) ** 2
        if abs(norm - 1.0) > 1e-12:
            raise DomainError(f"qubit state is not normalised (|a0|^2+|a1|^2={norm!r})")

    @classmethod
    def from_angles(cls, alpha: float, theta: float = 0.0) -> "QubitState":
        """alpha|0> + sqrt(1-alpha^2) e^{i theta}|1>, alpha in [0, 1]."""
        if not 0.0 <= alpha <= 1.0:
            raise DomainError("alpha must lie in [0, 1]")
        beta = math.sqrt(max(1.0 - alpha * alpha, 0.0))
        return cls(complex(alpha), beta * complex(math.cos(theta), math.sin(theta)))

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.a0, self.a1], dtype=complex)

    def fidelity(self, other: "QubitState") -> float:
        return abs(np.vdot(self.vector, other.vector)) ** 2


@dataclass(frozen=True)
class SingleExcitationState:
    vacuum: complex
    sites: np.ndarray

    @property
    def norm(self) -> float:
        return math.sqrt(abs(self.vacuum) ** 2 + float(np.sum(np.abs(self.sites) ** 2)))


@dataclass(frozen=True)
class TransferAmplitudes:
    """u_plus: stay on the source; u_minus: arrive at the drain."""

    u_plus: complex | np.ndarray
    u_minus: complex | np.ndarray


def _lambda_sum(cubic, t):
    return np.exp(-1j * np.multiply.outer(t, cubic.roots / 3.0)) @ cubic.amplitudes


def u_exact(config: NetworkConfig, t, spectrum: Spectrum | None = None) -> TransferAmplitudes:
    """u_{+/-}(t) = [Lambda(t) +/- 1] e^{-i omega t} / 2, Lambda(t) = sum_j A_j e^{-i R_j t/3}.

    The same amplitudes are rebuilt from the full eigenvector sum
    (u_+ = sum_l C_0l^2 e^{-i Omega_l t}, u_- = sum_l C_{N+1,l} C_0l e^{-i Omega_l t});
    a disagreement above 1e-8 raises :class:`CrossCheckError`.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("t must be non-negative")
    if spectrum is None:
        spectrum = analytic_spectrum(config)
    cubic = spectrum.cubic
    carrier = np.exp(-1j * config.omega * t)
    lam_t = _lambda_sum(cubic, t)
    u_plus = 0.5 * (lam_t + 1.0) * carrier
    u_minus = 0.5 * (lam_t - 1.0) * carrier

    c = spectrum.vectors
    phases = np.exp(-1j * np.multiply.outer(t, spectrum.eigenvalues))
    check_plus = phases @ (c[0] * c[0])
    check_minus = phases @ (c[-1] * c[0])
    err = max(np.max(np.abs(check_plus - u_plus)), np.max(np.abs(check_minus - u_minus)))
    if err > CROSS_CHECK_TOL:
        raise CrossCheckError(
            f"closed-form and eigenvector amplitudes differ by {err:.3g} for {config}"
        )
    if t.ndim == 0:
        return TransferAmplitudes(complex(u_plus), complex(u_minus))
    return TransferAmplitudes(u_plus, u_minus)


def u_approx(config: NetworkConfig, t, threshold: float | None = None) -> TransferAmplitudes:
    """Weak-coupling amplitudes e^{-i omega t} cos^2(sqrt(kappa/2) lambda t), -e^{-i omega t} sin^2(...).

    Exact when kappa = N. For kappa < N a :class:`RegimeWarning` is emitted
    outside the blocking regime.
    """
    if config.kappa < config.n_bus:
        try:
            if threshold is None:
                _, ok = blocking_margin(config)
            else:
                _, ok = blocking_margin(config, threshold)
        except DegenerateDetuningError:
            ok = False
        if not ok:
            warnings.warn(
                f"lambda/|delta| outside the blocking regime for {config}; "
                "approximate amplitudes may be inaccurate",
                RegimeWarning,
                stacklevel=2,
            )
    t = np.asarray(t, dtype=float)
    carrier = np.exp(-1j * config.omega * t)
    arg = math.sqrt(config.kappa / 2.0) * config.lam * t
    u_plus = carrier * np.cos(arg) ** 2
    u_minus = -carrier * np.sin(arg) ** 2
    if t.ndim == 0:
        return TransferAmplitudes(complex(u_plus), complex(u_minus))
    return TransferAmplitudes(u_plus, u_minus)


def survival_probabilities(config: NetworkConfig, psi: QubitState, t, spectrum=None):
    """(p_s, p_d) = (|a0|^2 + |a1|^2 u_+|^2, ||a0|^2 + |a1|^2 u_-|^2)."""
    amps = u_exact(config, t, spectrum)
    p0, p1 = abs(psi.a0) ** 2, abs(psi.a1) ** 2
    p_s = np.abs(p0 + p1 * amps.u_plus) ** 2
    p_d = np.abs(p0 + p1 * amps.u_minus) ** 2
    if np.ndim(p_s) == 0:
        return float(p_s), float(p_d)
    return p_s, p_d


def evolve_closed(config: NetworkConfig, psi: QubitState, t: float,
                  spectrum: Spectrum | None = None) -> SingleExcitationState:
    """State at time t for the source prepared in ``psi`` and everything else in vacuum."""
    if t < 0:
        raise DomainError("t must be non-negative")
    if spectrum is None:
        spectrum = analytic_spectrum(config)
    c = spectrum.vectors
    column = (c * np.exp(-1j * spectrum.eigenvalues * t)) @ c[0]
    return SingleExcitationState(vacuum=psi.a0, sites=psi.a1 * column)


def drain_qubit(state: SingleExcitationState) -> np.ndarray:
    """(vacuum amplitude, drain amplitude): the drain qubit when everything else is empty."""
    return np.array([state.vacuum, state.sites[-1]], dtype=complex)


__all__ = [
    "QubitState", "SingleExcitationState", "TransferAmplitudes",
    "u_exact", "u_approx", "survival_probabilities", "evolve_closed",
    "drain_qubit", "cubic_params",
]
