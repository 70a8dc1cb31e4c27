"""Thermal-reservoir analytics for the network.

Every oscillator couples to its own thermal bath (rate gamma, mean photon
number nbar). Closed forms for the gate fidelity at the exchange time and
its input-state average, the propagator/diffusion matrices Theta and J, the
density-matrix series in the truncated product Fock basis, and the sweeps
behind the fidelity maps.

Throughout, x = pi gamma / (lambda sqrt(2 kappa)) = gamma t_ex.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .dynamics import QubitState
from .errors import DomainError, ResourceError, ScopeError, TruncationError
from .network import NetworkConfig
from .spectral import Spectrum, analytic_spectrum

H_PLANCK = 6.62607015e-34   # J s
K_BOLTZMANN = 1.380649e-23  # J / K
FIDELITY_SLACK = 1e-9
MEASURES = ("alpha-uniform", "haar")
MAP_BLOCK = 4096            # rows per work unit; fixed so results do not depend on workers
MAX_SERIES_DIM = 4096
ENTRY_TAIL_FRACTION = 1e-6  # per-entry share of the series tail budget


# -- reservoir ---------------------------------------------------------------


def planck_nbar(T: float, nu: float) -> float:
    """Mean thermal photon number 1/(e^{h nu / k_B T} - 1); T in kelvin, nu in Hz."""
    if not (T > 0 and nu > 0):
        raise DomainError(f"T and nu must be positive (T={T!r}, nu={nu!r})")
    return 1.0 / math.expm1(H_PLANCK * nu / (K_BOLTZMANN * T))


def nbar_from_ratio(kbt_over_hnu):
    """Same distribution parameterised by k_B T / (h nu); 0 maps to 0."""
    r = np.asarray(kbt_over_hnu, dtype=float)
    if np.any(r < 0):
        raise DomainError("k_B T / h nu must be non-negative")
    with np.errstate(divide="ignore", over="ignore"):
        out = np.where(r > 0, 1.0 / np.expm1(1.0 / np.where(r > 0, r, 1.0)), 0.0)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ReservoirParams:
    gamma: float
    nbar: float

    def __post_init__(self):
        if not (self.gamma >= 0 and math.isfinite(self.gamma)):
            raise DomainError(f"gamma >= 0 violated (gamma={self.gamma!r})")
        if not (self.nbar >= 0 and math.isfinite(self.nbar)):
            raise DomainError(f"nbar >= 0 violated (nbar={self.nbar!r})")

    @classmethod
    def from_temperature(cls, gamma: float, T: float, nu: float) -> "ReservoirParams":
        return cls(gamma, planck_nbar(T, nu))

    @property
    def analytic_valid(self) -> bool:
        return self.nbar <= 1.0

    def thermal_fill(self, t: float) -> float:
        """nbar (1 - e^{-gamma t}): photons leaked in from the bath by time t."""
        return self.nbar * -math.expm1(-self.gamma * t)


def exchange_exponent(kappa, gamma_over_lambda):
    """x = pi (gamma/lambda) / sqrt(2 kappa)."""
    return math.pi * np.asarray(gamma_over_lambda, dtype=float) / np.sqrt(2.0 * np.asarray(kappa))


# -- closed-form fidelities --------------------------------------------------


def _check_domain(kappa, x, nbar, check_nbar):
    if np.any(np.asarray(kappa) < 1):
        raise DomainError("kappa >= 1 required")
    if np.any(np.asarray(x) < 0):
        raise DomainError("x = gamma t_ex must be non-negative")
    nb = np.asarray(nbar)
    if np.any(nb < 0):
        raise DomainError("nbar >= 0 required")
    if check_nbar and np.any(nb > 1):
        raise DomainError("closed-form fidelity is only stated for nbar <= 1")


def _prefactor(kappa, x, nbar):
    return (1.0 + nbar * -np.expm1(-x)) ** (-(3.0 + kappa))


def _finish(value):
    if np.any(value < -FIDELITY_SLACK) or np.any(value > 1.0 + FIDELITY_SLACK):
        raise DomainError("fidelity left [0, 1]; inputs are outside the formula's domain")
    return float(value) if np.ndim(value) == 0 else value


def fidelity_point(kappa, x, nbar, alpha, *, n_bus: int | None = None,
                   allow_out_of_scope: bool = False, check_nbar: bool = True):
    """Gate fidelity at t_ex for input alpha|0> + beta e^{i theta}|1>.

    Valid for a fully resonant bus (kappa = N). Passing ``n_bus`` different
    from ``kappa`` raises :class:`ScopeError` unless ``allow_out_of_scope``.
    Vectorised over numpy inputs.
    """
    if n_bus is not None and n_bus != kappa and not allow_out_of_scope:
        raise ScopeError(f"closed form holds for kappa = N only (kappa={kappa}, N={n_bus})")
    _check_domain(kappa, x, nbar, check_nbar)
    alpha = np.asarray(alpha, dtype=float)
    if np.any((alpha < 0) | (alpha > 1)):
        raise DomainError("alpha must lie in [0, 1]")
    x = np.asarray(x, dtype=float)
    nbar = np.asarray(nbar, dtype=float)
    a2 = alpha * alpha
    b2 = 1.0 - a2
    ex = np.exp(-x)
    bracket = (nbar + a2 + 2.0 * a2 * b2 * np.exp(-0.5 * x)
               + 2.0 * b2 * b2 / ((1.0 + nbar) / ex - nbar)
               + ex * (a2 - 1.0 - nbar))
    return _finish(_prefactor(kappa, x, nbar) * bracket)


def fidelity_avg(kappa, x, nbar, measure: str = "alpha-uniform", *,
                 n_bus: int | None = None, allow_out_of_scope: bool = False,
                 check_nbar: bool = True):
    """Input-state average of :func:`fidelity_point`.

    ``alpha-uniform`` (alpha uniform on [0, 1]) uses the moments
    <alpha^2> = 1/3, <alpha^4> = 1/5; ``haar`` uses <alpha^2> = 1/2,
    <alpha^4> = 1/3.
    """
    if n_bus is not None and n_bus != kappa and not allow_out_of_scope:
        raise ScopeError(f"closed form holds for kappa = N only (kappa={kappa}, N={n_bus})")
    _check_domain(kappa, x, nbar, check_nbar)
    x = np.asarray(x, dtype=float)
    nbar = np.asarray(nbar, dtype=float)
    ex = np.exp(-x)
    thermal = 1.0 / ((1.0 + nbar) / ex - nbar)
    if measure == "alpha-uniform":
        bracket = (nbar + 1.0 / 3.0 + (4.0 / 15.0) * np.exp(-0.5 * x)
                   - (2.0 / 3.0 + nbar) * ex + (16.0 / 15.0) * thermal)
    elif measure == "haar":
        bracket = (nbar + 0.5 + (1.0 / 3.0) * np.exp(-0.5 * x)
                   - (0.5 + nbar) * ex + (2.0 / 3.0) * thermal)
    else:
        raise DomainError(f"unknown measure {measure!r}; expected one of {MEASURES}")
    return _finish(_prefactor(kappa, x, nbar) * bracket)


# -- Theta / J ------------------------------------------------------------------


def theta_matrix(spectrum: Spectrum, gamma: float, t: float) -> np.ndarray:
    """Theta(t) = e^{-gamma t/2} C e^{-i Omega t} C^T (C is real orthogonal)."""
    if gamma < 0 or t < 0:
        raise DomainError("gamma and t must be non-negative")
    return math.exp(-0.5 * gamma * t) * spectrum.propagator(t)


def j_matrix(reservoir: ReservoirParams, t: float, dim: int) -> np.ndarray:
    """J(t) = 2 nbar (1 - e^{-gamma t}) times the identity."""
    if t < 0:
        raise DomainError("t must be non-negative")
    return 2.0 * reservoir.thermal_fill(t) * np.eye(dim)


# -- density-matrix series --------------------------------------------------


def _mode_block(c: complex, fill: float, p: int, q: int, cut: int, tail_tol: float,
                max_terms: int):
    """Single-mode factor for a Theta-power split (p, q).

    Entry (r, s) is

        c^p conj(c)^q / (p! q!) sum_k (-1)^k fill^S (r+k)! (s+k)! / (S! k! sqrt(r! s!))

    with S = r + k - p = s + k - q. Returns the block and the summed tail bound.
    """
    block = np.zeros((cut + 1, cut + 1), dtype=complex)
    tail_total = 0.0
    scale = c ** p * np.conj(c) ** q / (math.factorial(p) * math.factorial(q))
    for r in range(cut + 1):
        s = r - p + q
        if not 0 <= s <= cut:
            continue
        k = max(0, p - r)
        big_s = r + k - p
        if fill == 0.0:
            if big_s != 0:
                continue
            term = math.exp(math.lgamma(r + k + 1) + math.lgamma(s + k + 1)
                            - math.lgamma(k + 1) - 0.5 * (math.lgamma(r + 1) + math.lgamma(s + 1)))
            block[r, s] = scale * (-1) ** k * term
            continue
        log_t = (big_s * math.log(fill) + math.lgamma(r + k + 1) + math.lgamma(s + k + 1)
                 - math.lgamma(big_s + 1) - math.lgamma(k + 1)
                 - 0.5 * (math.lgamma(r + 1) + math.lgamma(s + 1)))
        term = (-1) ** k * math.exp(log_t)
        total = 0.0
        for _ in range(max_terms):
            total += term
            ratio = fill * (r + k + 1) * (s + k + 1) / ((big_s + 1) * (k + 1))
            nxt = -term * ratio
            k += 1
            big_s += 1
            # Alternating with shrinking magnitude from here on: |next term| bounds the tail.
            if ratio < 1.0 and abs(nxt) < ENTRY_TAIL_FRACTION * tail_tol:
                tail_total += abs(nxt)
                break
            term = nxt
        else:
            raise TruncationError(
                f"thermal series did not converge for fill={fill:.6g} at (r, s)=({r}, {s})",
                abs(term),
            )
        block[r, s] = scale * total
    return block, tail_total


def _kron_all(blocks):
    out = blocks[0]
    for b in blocks[1:]:
        out = np.kron(out, b)
    return out


def rho_series(config: NetworkConfig, reservoir: ReservoirParams, psi: QubitState, t: float,
               fock_cut: int = 4, tail_tol: float = 1e-8, max_terms: int = 100000,
               spectrum: Spectrum | None = None) -> np.ndarray:
    """Density matrix at time t from the thermal series, source initially in ``psi``.

    Basis: product Fock states with every occupation <= ``fock_cut``, mode 0
    (source) most significant. Raises :class:`TruncationError` when the
    dropped weight (series tail plus population above the cut) exceeds
    10 * tail_tol.
    """
    if fock_cut < 1:
        raise DomainError("fock_cut must be >= 1")
    if t < 0:
        raise DomainError("t must be non-negative")
    modes = config.dim
    dim = (fock_cut + 1) ** modes
    if dim > MAX_SERIES_DIM:
        raise ResourceError(f"series Fock dimension {dim} exceeds guard {MAX_SERIES_DIM}")
    if spectrum is None:
        spectrum = analytic_spectrum(config)
    column = theta_matrix(spectrum, reservoir.gamma, t)[:, 0]
    fill = reservoir.thermal_fill(t)

    blocks = {}
    tail = 0.0
    for mode in range(modes):
        for pq in ((0, 0), (1, 0), (0, 1), (1, 1)):
            blocks[mode, pq], tb = _mode_block(column[mode], fill, *pq, fock_cut,
                                               tail_tol, max_terms)
            tail += tb

    def term(assign):
        return _kron_all([blocks[mode, assign.get(mode, (0, 0))] for mode in range(modes)])

    g00 = term({})
    g10 = sum(term({a: (1, 0)}) for a in range(modes))
    g01 = sum(term({a: (0, 1)}) for a in range(modes))
    g11 = sum(term({a: (1, 1)}) if a == b else term({a: (1, 0), b: (0, 1)})
              for a in range(modes) for b in range(modes))

    b0, b1 = psi.a0, psi.a1
    rho = (abs(b0) ** 2 * g00 + b1 * np.conj(b0) * g10 + b0 * np.conj(b1) * g01
           + abs(b1) ** 2 * (g11 + g00))
    rho = 0.5 * (rho + rho.conj().T)

    lost = 1.0 - float(np.trace(rho).real)
    bound = tail + max(lost, 0.0)
    if bound > 10.0 * tail_tol:
        raise TruncationError(
            f"series truncated at fock_cut={fock_cut} misses weight {bound:.3g} "
            f"(> 10 * tail_tol = {10 * tail_tol:.3g})",
            bound,
        )
    return rho


def drain_fidelity(rho: np.ndarray, n_modes: int, cut: int, target: QubitState) -> float:
    """<out| rho |out> for |out> = vacuum elsewhere x (a0|0> + a1|1>) on the last mode."""
    out = np.zeros(rho.shape[0], dtype=complex)
    out[0] = target.a0
    out[1] = target.a1    # drain is the least significant digit
    if cut < 1 or rho.shape[0] != (cut + 1) ** n_modes:
        raise DomainError("rho does not match the stated Fock layout")
    return float(np.real(np.vdot(out, rho @ out)))


# -- sweeps ----------------------------------------------------------------


@dataclass(frozen=True)
class FidelityMapRow:
    gamma_over_lambda: float
    kbt_over_hnu: float
    kappa: int
    nbar: float
    fbar: float
    valid: bool = True

    CSV_HEADER = "gamma_over_lambda,kBT_over_hnu,kappa,nbar,fbar"

    def csv(self) -> str:
        return "%.17g,%.17g,%d,%.17g,%.17g" % (
            self.gamma_over_lambda, self.kbt_over_hnu, self.kappa, self.nbar, self.fbar)

    def to_dict(self) -> dict:
        return {
            "gamma_over_lambda": self.gamma_over_lambda, "kBT_over_hnu": self.kbt_over_hnu,
            "kappa": self.kappa, "nbar": self.nbar, "fbar": self.fbar, "valid": self.valid,
        }


def _map_block(args):
    g, r, k, measure = args
    nb = nbar_from_ratio(r)
    x = exchange_exponent(k, g)
    fbar = fidelity_avg(k, x, nb, measure, check_nbar=False)
    return np.atleast_1d(nb), np.atleast_1d(fbar)


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("QT_WORKERS", "1")))
    except ValueError:
        return 1


def fidelity_map(gamma_over_lambda, kbt_over_hnu, kappa, measure: str = "alpha-uniform",
                 workers: int | None = None) -> list[FidelityMapRow]:
    """Average fidelity over the Cartesian grid, row-major in (gamma/lambda, kT/h nu, kappa).

    Any of the three axes may be a scalar. Rows with nbar > 1 are kept and
    flagged ``valid=False``. The grid is cut into fixed blocks so output is
    identical for any worker count.
    """
    if measure not in MEASURES:
        raise DomainError(f"unknown measure {measure!r}")
    gs = np.atleast_1d(np.asarray(gamma_over_lambda, dtype=float))
    rs = np.atleast_1d(np.asarray(kbt_over_hnu, dtype=float))
    ks = np.atleast_1d(np.asarray(kappa))
    if np.any(gs < 0) or np.any(rs < 0):
        raise DomainError("gamma/lambda and k_B T/h nu must be non-negative")
    if np.any(ks < 1) or np.any(ks != np.round(ks)):
        raise DomainError("kappa values must be positive integers")
    ks = ks.astype(int)
    G, R, K = (a.ravel() for a in np.meshgrid(gs, rs, ks, indexing="ij"))

    jobs = [(G[i:i + MAP_BLOCK], R[i:i + MAP_BLOCK], K[i:i + MAP_BLOCK], measure)
            for i in range(0, G.size, MAP_BLOCK)]
    workers = default_workers() if workers is None else max(1, int(workers))
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_map_block, jobs))
    else:
        results = [_map_block(job) for job in jobs]
    nbar = np.concatenate([r[0] for r in results]) if results else np.empty(0)
    fbar = np.concatenate([r[1] for r in results]) if results else np.empty(0)

    return [
        FidelityMapRow(float(g), float(r), int(k), float(nb), float(fb), bool(nb <= 1.0))
        for g, r, k, nb, fb in zip(G, R, K, nbar, fbar)
    ]


def optimal_kappa(gamma_over_lambda: float, nbar: float, kappa_max: int,
                  measure: str = "alpha-uniform"):
    """Exhaustive argmax of the average fidelity over kappa in [1, kappa_max].

    Ties go to the smaller kappa.
    """
    if int(kappa_max) != kappa_max or kappa_max < 1:
        raise DomainError("kappa_max must be a positive integer")
    ks = np.arange(1, int(kappa_max) + 1)
    fbar = np.atleast_1d(fidelity_avg(ks, exchange_exponent(ks, gamma_over_lambda), nbar, measure))
    best = int(np.argmax(fbar))   # first maximum, i.e. smallest kappa
    return int(ks[best]), float(fbar[best])


def level_set_gamma(kappa: int, nbar: float, level: float = 0.9, gamma_max: float = 1.0,
                    measure: str = "alpha-uniform") -> float:
    """Largest gamma/lambda in [0, gamma_max] with average fidelity >= ``level``.

    The average fidelity decreases with gamma, so this is the boundary of the
    level set for the given kappa. Returns 0.0 if even gamma = 0 fails (it
    never does, since the fidelity is 1 there) and ``gamma_max`` if the whole
    interval passes.
    """
    def f(g):
        return fidelity_avg(kappa, exchange_exponent(kappa, g), nbar, measure) - level

    if f(gamma_max) >= 0:
        return float(gamma_max)
    return float(brentq(f, 0.0, gamma_max, xtol=1e-14, rtol=1e-14))


def level_set_curve(kappas, nbar: float, level: float = 0.9, gamma_max: float = 1.0,
                    measure: str = "alpha-uniform") -> np.ndarray:
    return np.array([level_set_gamma(int(k), nbar, level, gamma_max, measure) for k in kappas])
