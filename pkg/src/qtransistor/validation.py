"""Oracle-equivalence suite behind ``qt validate``."""

from __future__ import annotations

import math

import numpy as np

from .design import design_gate
from .dispersive import DispersiveConfig, simulate_dispersive
from .dynamics import QubitState, u_exact
from .network import NetworkConfig, build_hamiltonian
from .open_system import (
    ReservoirParams, drain_fidelity, fidelity_avg, fidelity_point, rho_series,
)
from .oracle import (
    TruncatedFockSpace, average_over_states, eig_hermitian, lindblad_integrate,
    propagate_unitary, trace_distance,
)
from .spectral import analytic_spectrum


def random_config(rng: np.random.Generator, n_max: int = 64) -> NetworkConfig:
    """Random network with delta drawn from {0} and +/-[1e-3, 1e3] lambda (log-uniform)."""
    n = int(rng.integers(1, n_max + 1))
    kappa = int(rng.integers(0, n + 1))
    lam = float(10 ** rng.uniform(-2, 0))
    omega = float(10 ** rng.uniform(0, 2))
    if rng.random() < 0.15:
        delta = 0.0
    else:
        delta = float(rng.choice([-1.0, 1.0]) * lam * 10 ** rng.uniform(-3, 3))
    return NetworkConfig(omega, lam, n, kappa, delta)


def _row(check, config, max_error, tol):
    return {"check": check, "config": config, "max_error": float(max_error),
            "pass": bool(max_error <= tol)}


def check_spectrum(cfg: NetworkConfig):
    """(relative eigenvalue error, off-diagonal residual / omega)."""
    h = build_hamiltonian(cfg)
    spec = analytic_spectrum(cfg)
    vals, _ = eig_hermitian(h)
    mine = np.sort(spec.eigenvalues)
    ev_err = float(np.max(np.abs(mine - vals) / np.maximum(np.abs(vals), 1e-300)))
    d = spec.vectors.T @ h @ spec.vectors
    off = float(np.max(np.abs(d - np.diag(np.diag(d))))) / cfg.omega
    return ev_err, off


def check_amplitudes(cfg: NetworkConfig, times: np.ndarray) -> float:
    amps = u_exact(cfg, times)
    v0 = np.zeros(cfg.dim)
    v0[0] = 1.0
    states = propagate_unitary(build_hamiltonian(cfg), v0, times)
    return float(max(np.max(np.abs(states[:, 0] - amps.u_plus)),
                     np.max(np.abs(states[:, -1] - amps.u_minus))))


def oracle_gate_fidelity(kappa_n: int, gamma_over_lambda: float, nbar: float, alpha: float,
                         theta: float = 0.0, phi: float = math.pi / 2, n_max: int = 4,
                         lam: float = 1.0):
    """Drain-gate fidelity at t_ex from direct master-equation integration.

    omega is set by the gate condition with ell = 1 so the gate is R(phi).
    Returns (fidelity, rho, space, config, psi).
    """
    plan = design_gate(phi, lam=lam, kappa=kappa_n, ell=1)
    cfg = NetworkConfig(plan.omega, lam, kappa_n, kappa_n)
    space = TruncatedFockSpace(cfg.dim, n_max)
    psi = QubitState.from_angles(alpha, theta)
    vec = psi.a0 * space.basis((0,) * cfg.dim) + psi.a1 * space.basis((1,) + (0,) * (cfg.dim - 1))
    ham = space.quadratic_hamiltonian(build_hamiltonian(cfg))
    rho = lindblad_integrate(ham, gamma_over_lambda * lam, nbar, np.outer(vec, vec.conj()),
                             plan.t_ex, space)
    target = QubitState(psi.a0, psi.a1 * complex(math.cos(phi), math.sin(phi)))
    return drain_fidelity(rho, cfg.dim, n_max, target), rho, space, cfg, psi


def run_validation(seed: int = 0, full: bool = False) -> list[dict]:
    """Run the oracle comparisons; ``full`` adds the master-equation checks (tens of seconds)."""
    rng = np.random.default_rng(seed)
    report = []

    worst_ev = worst_off = 0.0
    for _ in range(50):
        ev, off = check_spectrum(random_config(rng))
        worst_ev, worst_off = max(worst_ev, ev), max(worst_off, off)
    report.append(_row("spectrum-eigenvalues", "50 random configs", worst_ev, 1e-10))
    report.append(_row("spectrum-diagonalisation", "50 random configs", worst_off, 1e-10))

    worst = 0.0
    for _ in range(20):
        cfg = random_config(rng, 16)
        worst = max(worst, check_amplitudes(cfg, np.linspace(0, 2 * math.pi / cfg.lam, 200)))
    report.append(_row("amplitudes-vs-propagator", "20 random configs", worst, 1e-10))

    ks = rng.integers(1, 61, 50)
    xs = rng.uniform(0, 3, 50)
    nbs = rng.uniform(0, 1, 50)
    worst = max(
        abs(fidelity_avg(k, x, nb) - average_over_states(lambda a, _t: fidelity_point(k, x, nb, a)))
        for k, x, nb in zip(ks, xs, nbs)
    )
    report.append(_row("average-vs-quadrature", "50 random (kappa, x, nbar)", worst, 1e-12))

    cfg = DispersiveConfig(10.0, 0.0, 0.1)
    res = simulate_dispersive(cfg, [0.6, 0.8], 37.0)
    report.append(_row("dispersive-phase", "omega0=10, nu=0, g=0.1, t=37",
                       max(res.phase_error, res.oracle_deviation), 1e-10))

    if full:
        for nbar in (0.0, 0.3):
            f_or, rho, space, ncfg, psi = oracle_gate_fidelity(1, 0.01, nbar, 1 / math.sqrt(2))
            f_an = fidelity_point(1, math.pi * 0.01 / math.sqrt(2), nbar, 1 / math.sqrt(2))
            report.append(_row("fidelity-vs-master-equation",
                               f"N=kappa=1, gamma/lambda=0.01, nbar={nbar}", abs(f_or - f_an), 1e-2))
            series = rho_series(ncfg, ReservoirParams(0.01 * ncfg.lam, nbar), psi,
                                ncfg.exchange_time, fock_cut=space.n_max)
            report.append(_row("series-vs-master-equation",
                               f"N=kappa=1, gamma/lambda=0.01, nbar={nbar}",
                               trace_distance(series, rho), 1e-6))
    return report
