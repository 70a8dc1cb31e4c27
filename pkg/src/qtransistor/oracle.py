"""Brute-force reference implementations.

Nothing here imports the analytic modules: dense eigensolver, propagation by
eigendecomposition, Lindblad integration on truncated Fock spaces (RK4 with
step halving), state-average quadrature and the dispersive joint evolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .errors import DomainError, NumericalInstabilityError, ResourceError

MAX_FOCK_DIM = 10**6


def _check_hermitian(matrix: np.ndarray) -> np.ndarray:
    m = np.asarray(matrix)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {m.shape}")
    scale = max(np.max(np.abs(m)), 1.0) if m.size else 1.0
    if np.max(np.abs(m - m.conj().T), initial=0.0) > 1e-12 * scale:
        raise DomainError("matrix is not Hermitian")
    return m


def eig_hermitian(matrix):
    """Ascending eigenvalues and orthonormal eigenvectors (LAPACK ``eigh``)."""
    m = _check_hermitian(matrix)
    return np.linalg.eigh(m)


def propagate_unitary(matrix, v0, t):
    """v(t) = sum_l e^{-i Omega_l t} (v_l . v0) v_l.

    ``t`` may be a scalar (returns a vector) or a 1-d array (returns one row
    per time).
    """
    vals, vecs = eig_hermitian(matrix)
    coeff = vecs.conj().T @ np.asarray(v0, dtype=complex)
    t_arr = np.asarray(t, dtype=float)
    phases = np.exp(-1j * np.multiply.outer(t_arr, vals))
    return (phases * coeff) @ vecs.T


# -- truncated Fock spaces -------------------------------------------------


@dataclass(frozen=True)
class TruncatedFockSpace:
    n_modes: int
    n_max: int

    def __post_init__(self):
        if self.n_modes < 1 or self.n_max < 1:
            raise DomainError("need at least one mode and n_max >= 1")
        if self.dim > MAX_FOCK_DIM:
            raise ResourceError(
                f"Fock dimension {self.dim} exceeds guard {MAX_FOCK_DIM}"
            )

    @property
    def shape(self):
        return (self.n_max + 1,) * self.n_modes

    @property
    def dim(self) -> int:
        return (self.n_max + 1) ** self.n_modes

    def encode(self, occupations) -> int:
        return int(np.ravel_multi_index(tuple(occupations), self.shape))

    def decode(self, index: int) -> tuple:
        return tuple(int(i) for i in np.unravel_index(index, self.shape))

    def basis(self, occupations) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[self.encode(occupations)] = 1.0
        return v

    def annihilation(self, mode: int) -> sp.csr_matrix:
        single = sp.diags(np.sqrt(np.arange(1, self.n_max + 1)), 1)
        ops = [sp.identity(self.n_max + 1)] * self.n_modes
        ops[mode] = single
        out = ops[0]
        for op in ops[1:]:
            out = sp.kron(out, op)
        return sp.csr_matrix(out, dtype=complex)

    def quadratic_hamiltonian(self, h: np.ndarray) -> sp.csr_matrix:
        """sum_ij h_ij a_i^dag a_j for a mode-space matrix h."""
        h = np.asarray(h)
        if h.shape != (self.n_modes, self.n_modes):
            raise DomainError("mode matrix does not match the number of modes")
        a = [self.annihilation(k) for k in range(self.n_modes)]
        out = sp.csr_matrix((self.dim, self.dim), dtype=complex)
        for i in range(self.n_modes):
            for j in range(self.n_modes):
                if h[i, j] != 0:
                    out = out + h[i, j] * (a[i].conj().T @ a[j])
        return out.tocsr()

    def mode_populations(self, rho: np.ndarray, mode: int) -> np.ndarray:
        diag = np.real(np.diag(rho)).reshape(self.shape)
        axes = tuple(i for i in range(self.n_modes) if i != mode)
        return diag.sum(axis=axes)


def trace_distance(rho1: np.ndarray, rho2: np.ndarray) -> float:
    diff = np.asarray(rho1) - np.asarray(rho2)
    diff = 0.5 * (diff + diff.conj().T)
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(diff))))


# -- Lindblad integration --------------------------------------------------


@dataclass
class LindbladResult:
    rho: np.ndarray
    steps: int
    h: float
    halving_change: float


def _generator(hamiltonian, space, gamma, nbar):
    """Sparse Liouvillian acting on row-major vec(rho).

    With row-major flattening vec(A rho B) = (A kron B^T) vec(rho), so
    K rho + rho K^dag + sum L rho L^dag becomes
    K x I + I x K* + sum L x L*.
    """
    lowering = [space.annihilation(k) for k in range(space.n_modes)]
    raising = [a.conj().T.tocsr() for a in lowering]
    down = gamma * (nbar + 1.0)
    up = gamma * nbar
    k_eff = -1j * sp.csr_matrix(hamiltonian, dtype=complex)
    for a, ad in zip(lowering, raising):
        k_eff = k_eff - 0.5 * (down * (ad @ a) + up * (a @ ad))
    eye = sp.identity(space.dim, format="csr", dtype=complex)
    liouv = sp.kron(k_eff, eye) + sp.kron(eye, k_eff.conj())
    for a, ad in zip(lowering, raising):
        if down:
            liouv = liouv + down * sp.kron(a, a.conj())
        if up:
            liouv = liouv + up * sp.kron(ad, ad.conj())
    return liouv.tocsr()


def _spectral_bound(hamiltonian) -> float:
    h = sp.csr_matrix(hamiltonian)
    return float(abs(h).sum(axis=1).max()) if h.nnz else 0.0


def _check_state(rho, t, h, final=False):
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > 1e-10:
        raise NumericalInstabilityError(f"density matrix lost Hermiticity ({herm:.3g})", t, h)
    tr = np.trace(rho).real
    if abs(tr - 1.0) > 1e-6:
        raise NumericalInstabilityError(f"trace drifted to {tr!r}", t, h)
    if final:
        low = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0]
        if low < -1e-8:
            raise NumericalInstabilityError(f"negative eigenvalue {low:.3g}", t, h)


def _rk4(liouv, rho0, t, n_steps, progress, check_every=200):
    h = t / n_steps
    dim = rho0.shape[0]
    x = np.array(rho0, dtype=complex).ravel()
    for step in range(n_steps):
        k1 = liouv @ x
        k2 = liouv @ (x + 0.5 * h * k1)
        k3 = liouv @ (x + 0.5 * h * k2)
        k4 = liouv @ (x + h * k3)
        x = x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if (step + 1) % check_every == 0:
            _check_state(x.reshape(dim, dim), (step + 1) * h, h)
            if progress is not None:
                progress((step + 1) * h, t)
    rho = x.reshape(dim, dim)
    _check_state(rho, t, h, final=True)
    return rho


def lindblad_integrate(
    hamiltonian,
    gamma: float,
    nbar: float,
    rho0: np.ndarray,
    t: float,
    space: TruncatedFockSpace,
    *,
    h_max: float | None = None,
    tol: float = 1e-8,
    max_halvings: int = 8,
    progress: Callable[[float, float], None] | None = None,
    full_output: bool = False,
):
    """Integrate the thermal master equation with identical reservoirs.

    drho/dt = -i[H, rho] + sum_k gamma (nbar+1) D[a_k] rho + gamma nbar D[a_k^dag] rho

    Classical RK4 with h <= min(1e-2/omega_max, 1e-2/(gamma (1+nbar))); the
    step is halved until the trace distance between successive runs drops
    below ``tol``.
    """
    if rho0.shape != (space.dim, space.dim):
        raise DomainError("rho0 does not match the Fock space dimension")
    if gamma < 0 or nbar < 0:
        raise DomainError("gamma and nbar must be non-negative")
    if t < 0:
        raise DomainError("t must be non-negative")
    if t == 0:
        rho = np.array(rho0, dtype=complex)
        return LindbladResult(rho, 0, 0.0, 0.0) if full_output else rho

    liouv = _generator(hamiltonian, space, gamma, nbar)
    limits = [1e-2 / max(_spectral_bound(hamiltonian), 1e-300)]
    if gamma > 0:
        limits.append(1e-2 / (gamma * (1.0 + nbar)))
    if h_max is not None:
        limits.append(h_max)
    n_steps = max(1, math.ceil(t / min(limits)))

    previous = _rk4(liouv, rho0, t, n_steps, progress)
    change = math.inf
    for _ in range(max_halvings):
        n_steps *= 2
        current = _rk4(liouv, rho0, t, n_steps, progress)
        change = trace_distance(current, previous)
        previous = current
        if change < tol:
            break
    else:
        raise NumericalInstabilityError(
            f"step halving did not converge (last change {change:.3g})", t, t / n_steps
        )
    if full_output:
        return LindbladResult(previous, n_steps, t / n_steps, change)
    return previous


def cutoff_population(rho: np.ndarray, space: TruncatedFockSpace) -> float:
    """Largest population of the top Fock level over all modes."""
    return max(float(space.mode_populations(rho, m)[-1]) for m in range(space.n_modes))


def lindblad_adaptive(mode_matrix, gamma: float, nbar: float, initial: Callable, t: float,
                      *, n_start: int = 2, n_limit: int = 12, pop_tol: float = 1e-8, **kwargs):
    """Integrate on growing Fock spaces until the top level holds < ``pop_tol``.

    ``mode_matrix`` is the single-particle matrix h (H = sum h_ij a_i^dag a_j)
    and ``initial(space)`` returns rho0 on a given space. Returns
    ``(rho, space)``.
    """
    mode_matrix = np.asarray(mode_matrix)
    for n_max in range(n_start, n_limit + 1):
        space = TruncatedFockSpace(mode_matrix.shape[0], n_max)
        rho = lindblad_integrate(space.quadratic_hamiltonian(mode_matrix), gamma, nbar,
                                 initial(space), t, space, **kwargs)
        if cutoff_population(rho, space) < pop_tol:
            return rho, space
    raise ResourceError(f"Fock cutoff {n_limit} still holds population >= {pop_tol}")


# -- state averages ---------------------------------------------------------


def average_over_states(
    f: Callable,
    measure: str = "alpha-uniform",
    nodes: int = 64,
    *,
    phase_dependent: bool = False,
    phase_nodes: int = 32,
) -> float:
    """Average ``f(alpha, theta)`` over input qubits alpha|0> + sqrt(1-alpha^2) e^{i theta}|1>.

    ``alpha-uniform`` draws alpha uniformly from [0, 1]; ``haar`` is the
    unitarily invariant measure, under which alpha^2 is uniform on [0, 1].
    Gauss-Legendre in the alpha variable; the phase (trapezoid on the circle)
    is integrated only when ``phase_dependent`` is set, otherwise theta = 0.
    """
    if nodes < 8:
        raise DomainError("need at least 8 quadrature nodes")
    x, w = np.polynomial.legendre.leggauss(nodes)
    u = 0.5 * (x + 1.0)
    w = 0.5 * w
    if measure == "alpha-uniform":
        alphas = u
    elif measure == "haar":
        alphas = np.sqrt(u)
    else:
        raise DomainError(f"unknown measure {measure!r}")
    if phase_dependent:
        thetas = 2 * math.pi * np.arange(phase_nodes) / phase_nodes
        total = 0.0
        for a, wa in zip(alphas, w):
            total += wa * np.mean([f(a, th) for th in thetas])
        return float(total)
    return float(sum(wa * f(a, 0.0) for a, wa in zip(alphas, w)))


# -- dispersive atom-field reference ---------------------------------------


def dispersive_joint_oracle(omega0, nu, chi, field_amps, t):
    """Exact joint evolution of (field) x |e> under the dispersive Hamiltonian.

    Atom basis {|g>, |e>}; sigma_z = diag(-1, +1) and sigma_3 acts as -1 on
    |e> (the virtual level is not populated). Returns a (2, n_max+1) array of
    amplitudes indexed [atom, photon number].
    """
    field_amps = np.asarray(field_amps, dtype=complex)
    n_levels = field_amps.size
    num = np.diag(np.arange(n_levels, dtype=float))
    sz = np.diag([-1.0, 1.0])
    s3 = np.diag([0.0, -1.0])
    ham = (omega0 * np.kron(np.eye(2), num) + nu * np.kron(sz, np.eye(n_levels))
           + chi * np.kron(s3, num))
    psi0 = np.kron(np.array([0.0, 1.0]), field_amps)
    psi = scipy.linalg.expm(-1j * ham * t) @ psi0
    return psi.reshape(2, n_levels)
