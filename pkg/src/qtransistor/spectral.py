"""Closed-form eigenvalues and eigenvectors of the network Hamiltonian.

The spectrum splits into four families:

* one antisymmetric source/drain mode at omega,
* kappa-1 zero-sum combinations of the resonant bus oscillators at omega,
* N-kappa-1 zero-sum combinations of the detuned bus oscillators at omega+delta,
* the symmetric sector, whose frequencies omega + R_j/3 are the roots of

      R^3 - 3 delta R^2 - 18 N lambda^2 R + 54 kappa lambda^2 delta = 0,

  solved in trigonometric form with
  Phi = delta^2 + 6 N lambda^2 and eta = delta (delta^2 + 9 (N - 3 kappa) lambda^2).

When kappa is 0 or N the symmetric sector is two-dimensional and one cubic
root carries no eigenvector; it is kept in :class:`CubicSpectralParams`
(with zero amplitude) but dropped from :class:`Spectrum`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .network import NetworkConfig

EPS_R = 1e-12  # root-collision threshold, in units of lambda

ANTISYMMETRIC = "antisymmetric"
RESONANT = "resonant-degenerate"
DETUNED = "detuned-degenerate"
TRIO = "cubic-trio"
FAMILIES = (ANTISYMMETRIC, RESONANT, DETUNED, TRIO)


@dataclass(frozen=True)
class CubicSpectralParams:
    big_phi: float
    eta: float
    theta: float
    roots: np.ndarray        # (R_0, R_+, R_-)
    amplitudes: np.ndarray   # (A_0, A_+, A_-)
    delta_eff: float
    spurious: int | None     # index of the root without an eigenvector, if any

    @property
    def r0(self):
        return self.roots[0]

    @property
    def r_plus(self):
        return self.roots[1]

    @property
    def r_minus(self):
        return self.roots[2]

    @property
    def a0(self):
        return self.amplitudes[0]

    @property
    def a_plus(self):
        return self.amplitudes[1]

    @property
    def a_minus(self):
        return self.amplitudes[2]

    @property
    def shifts(self) -> np.ndarray:
        """Frequency offsets Omega_j - omega = R_j / 3."""
        return self.roots / 3.0

    def eigenvalues(self, omega: float) -> np.ndarray:
        return omega + self.shifts


def _discriminant(d2, l2, n, k):
    # Phi^3 - eta^2 expanded so the delta^6 terms cancel symbolically.
    return (54.0 * k * d2 * d2 * l2
            + (108.0 * n * n - 81.0 * (n - 3 * k) ** 2) * d2 * l2 * l2
            + 216.0 * n ** 3 * l2 ** 3)


def _polish(e, d, l2, n, k):
    """Newton-refine a root, in whichever of E or W = E - d is smaller.

    Working in the small variable keeps relative accuracy for roots that sit
    close to omega or to omega + delta.
    """
    def newton(x, p, dp):
        fx = p(x)
        for _ in range(4):
            slope = dp(x)
            if slope == 0 or fx == 0:
                break
            cand = x - fx / slope
            fc = p(cand)
            if abs(fc) >= abs(fx):
                break
            x, fx = cand, fc
        return x

    w = e - d
    if abs(e) <= abs(w):
        e = newton(
            e,
            lambda x: ((x - d) * x - 2 * n * l2) * x + 2 * k * l2 * d,
            lambda x: (3 * x - 2 * d) * x - 2 * n * l2,
        )
        return e, e - d
    w = newton(
        w,
        lambda x: ((x + 2 * d) * x + d * d - 2 * n * l2) * x - 2 * (n - k) * l2 * d,
        lambda x: (3 * x + 4 * d) * x + d * d - 2 * n * l2,
    )
    return w + d, w


def cubic_params(config: NetworkConfig) -> CubicSpectralParams:
    """Trigonometric solution of the symmetric-sector cubic plus its amplitudes.

    theta = atan2(sqrt(Phi^3 - eta^2), eta) / 3 lies in [0, pi/3] for every
    sign of eta. Amplitudes are
    A_j = [1 + 2 kappa (3 lambda/R_j)^2 + 2 (N-kappa) (3 lambda/(R_j - 3 delta))^2]^-1
    with A_j = 0 whenever R_j collides with 0 or 3 delta.
    """
    lam, n, k = config.lam, config.n_bus, config.kappa
    # With every bus oscillator resonant the detuning acts on nothing.
    d = 0.0 if k == n else config.delta
    d2, l2 = d * d, lam * lam
    big_phi = d2 + 6 * n * l2
    eta = d * (d2 + 9 * (n - 3 * k) * l2)
    disc = max(_discriminant(d2, l2, n, k), 0.0)
    theta = math.atan2(math.sqrt(disc), eta) / 3.0

    sq = math.sqrt(big_phi)
    c, s = math.cos(theta), math.sin(theta)
    raw = np.array([
        d + 2 * sq * c,
        d - sq * (c + math.sqrt(3.0) * s),
        d - sq * (c - math.sqrt(3.0) * s),
    ])

    e = np.empty(3)
    w = np.empty(3)
    for j in range(3):
        e[j], w[j] = _polish(raw[j] / 3.0, d, l2, n, k)

    spurious = int(np.argmin(np.abs(e))) if k in (0, n) else None
    if spurious is not None:
        e[spurious], w[spurious] = 0.0, -d

    eps = EPS_R * lam / 3.0
    amps = np.zeros(3)
    for j in range(3):
        if j == spurious or abs(e[j]) < eps or abs(w[j]) < eps:
            continue
        e2w2 = (e[j] * w[j]) ** 2
        amps[j] = e2w2 / (e2w2 + 2 * k * l2 * w[j] ** 2 + 2 * (n - k) * l2 * e[j] ** 2)

    return CubicSpectralParams(
        big_phi=big_phi, eta=eta, theta=theta, roots=3.0 * e,
        amplitudes=amps, delta_eff=d, spurious=spurious,
    )


@dataclass(frozen=True)
class Spectrum:
    """Eigenpairs in site order; ``vectors[:, l]`` belongs to ``eigenvalues[l]``."""

    eigenvalues: np.ndarray
    families: tuple
    vectors: np.ndarray
    trio_norms: np.ndarray   # source component N_j' of each symmetric-sector vector
    cubic: CubicSpectralParams

    def family_sizes(self) -> dict:
        return {f: self.families.count(f) for f in FAMILIES}

    def sorted(self):
        order = np.argsort(self.eigenvalues, kind="stable")
        return self.eigenvalues[order], self.vectors[:, order]

    def propagator(self, t: float) -> np.ndarray:
        """e^{-iHt} = C diag(e^{-i Omega t}) C^T."""
        phases = np.exp(-1j * self.eigenvalues * t)
        return (self.vectors * phases) @ self.vectors.T

    def to_dict(self) -> dict:
        return {
            "eigenvalues": self.eigenvalues.tolist(),
            "families": list(self.families),
            "vectors": self.vectors.tolist(),
        }


def _helmert(size: int) -> np.ndarray:
    """Columns are the size-1 orthonormal zero-sum vectors on ``size`` sites."""
    out = np.zeros((size, max(size - 1, 0)))
    for m in range(1, size):
        norm = math.sqrt(m * (m + 1))
        out[:m, m - 1] = 1.0 / norm
        out[m, m - 1] = -m / norm
    return out


def analytic_spectrum(config: NetworkConfig) -> Spectrum:
    n, k, lam = config.n_bus, config.kappa, config.lam
    dim = n + 2
    cubic = cubic_params(config)
    shifts = cubic.shifts
    wshifts = shifts - cubic.delta_eff

    values, families, columns = [], [], []

    anti = np.zeros(dim)
    anti[0], anti[-1] = 1 / math.sqrt(2), -1 / math.sqrt(2)
    values.append(config.omega)
    families.append(ANTISYMMETRIC)
    columns.append(anti)

    for col in _helmert(k).T:
        v = np.zeros(dim)
        v[1:k + 1] = col
        values.append(config.omega)
        families.append(RESONANT)
        columns.append(v)

    for col in _helmert(n - k).T:
        v = np.zeros(dim)
        v[k + 1:n + 1] = col
        values.append(config.omega_tilde)
        families.append(DETUNED)
        columns.append(v)

    # Symmetric sector in the orthonormal basis
    # (source+drain)/sqrt2, uniform resonant, uniform detuned.
    sk, sd = math.sqrt(k), math.sqrt(n - k)
    eps = EPS_R * lam / 3.0
    coords, pending = {}, []
    for j in range(3):
        if j == cubic.spurious:
            continue
        e, w = shifts[j], wshifts[j]
        if abs(e) < eps or abs(w) < eps:
            pending.append(j)
            continue
        # (sqrt2, sk 2 lam/e, sd 2 lam/w) scaled by e*w to avoid dividing by small roots
        u = np.array([math.sqrt(2) * e * w, sk * 2 * lam * w, sd * 2 * lam * e])
        u /= np.linalg.norm(u)
        if u[0] < 0:
            u = -u
        coords[j] = u
    if pending:
        # Orthogonal-complement completion inside the active symmetric basis.
        active = [i for i, weight in enumerate((1.0, sk, sd)) if weight > 0]
        known = np.array([coords[j][active] for j in coords]).reshape(-1, len(active))
        _, _, vt = np.linalg.svd(known)
        null = vt[known.shape[0]:]
        if null.shape[0] != len(pending):
            raise RuntimeError("symmetric-sector completion has the wrong dimension")
        for j, row in zip(pending, null):
            u = np.zeros(3)
            u[active] = row
            u /= np.linalg.norm(u)
            if u[int(np.argmax(np.abs(u)))] < 0:
                u = -u
            coords[j] = u

    norms = []
    for j in sorted(coords):
        u = coords[j]
        v = np.zeros(dim)
        v[0] = v[-1] = u[0] / math.sqrt(2)
        if k:
            v[1:k + 1] = u[1] / sk
        if n - k:
            v[k + 1:n + 1] = u[2] / sd
        values.append(config.omega + shifts[j])
        families.append(TRIO)
        columns.append(v)
        norms.append(v[0])

    return Spectrum(
        eigenvalues=np.array(values),
        families=tuple(families),
        vectors=np.column_stack(columns),
        trio_norms=np.array(norms),
        cubic=cubic,
    )
