"""Network configuration and the single-excitation Hamiltonian matrix.

Sites are indexed 0 (source), 1..N (data bus; 1..kappa resonant, the rest
detuned by ``delta``) and N+1 (drain). All frequencies are angular (rad/s).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, DegenerateDetuningError

TWO_PI = 2.0 * math.pi
MARGIN_THRESHOLD = 0.1


@dataclass(frozen=True)
class NetworkConfig:
    """Source / data-bus / drain parameters.

    ``lam`` is the real source-bus and drain-bus coupling, ``n_bus`` the bus
    size N and ``kappa`` the number of bus oscillators resonant with the
    source and drain.
    """

    omega: float
    lam: float
    n_bus: int
    kappa: int
    delta: float = 0.0

    def __post_init__(self):
        for name in ("omega", "lam", "delta"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ConfigError(f"{name} must be finite, got {value!r}")
        if not self.omega > 0:
            raise ConfigError(f"omega > 0 violated (omega={self.omega!r})")
        if not self.lam > 0:
            raise ConfigError(f"lambda > 0 violated (lambda={self.lam!r})")
        if int(self.n_bus) != self.n_bus or self.n_bus < 1:
            raise ConfigError(f"N >= 1 (integer) violated (N={self.n_bus!r})")
        if int(self.kappa) != self.kappa or not 0 <= self.kappa <= self.n_bus:
            raise ConfigError(
                f"0 <= kappa <= N violated (kappa={self.kappa!r}, N={self.n_bus!r})"
            )
        object.__setattr__(self, "n_bus", int(self.n_bus))
        object.__setattr__(self, "kappa", int(self.kappa))

    @property
    def omega_tilde(self) -> float:
        return self.omega + self.delta

    @property
    def dim(self) -> int:
        return self.n_bus + 2

    @property
    def drain(self) -> int:
        return self.n_bus + 1

    @property
    def exchange_time(self) -> float:
        """t_ex = pi / (lambda sqrt(2 kappa)); infinite when kappa = 0."""
        if self.kappa == 0:
            return math.inf
        return math.pi / (self.lam * math.sqrt(2.0 * self.kappa))

    def with_(self, **changes) -> "NetworkConfig":
        fields = dict(
            omega=self.omega, lam=self.lam, n_bus=self.n_bus,
            kappa=self.kappa, delta=self.delta,
        )
        fields.update(changes)
        return NetworkConfig(**fields)

    @classmethod
    def from_dict(cls, doc: dict) -> "NetworkConfig":
        """Build from the JSON document form ``{omega, lambda, N, kappa, delta, units}``.

        ``units="hz"`` multiplies omega, lambda and delta by 2*pi.
        """
        units = doc.get("units", "angular")
        if units not in ("angular", "hz"):
            raise ConfigError(f"units must be 'angular' or 'hz', got {units!r}")
        scale = TWO_PI if units == "hz" else 1.0
        try:
            return cls(
                omega=float(doc["omega"]) * scale,
                lam=float(doc["lambda"]) * scale,
                n_bus=doc["N"],
                kappa=doc["kappa"],
                delta=float(doc.get("delta", 0.0)) * scale,
            )
        except KeyError as exc:
            raise ConfigError(f"missing config key {exc.args[0]!r}") from None

    @classmethod
    def from_json(cls, path) -> "NetworkConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        return {
            "omega": self.omega, "lambda": self.lam, "N": self.n_bus,
            "kappa": self.kappa, "delta": self.delta, "units": "angular",
        }


def build_hamiltonian(config: NetworkConfig) -> np.ndarray:
    """Return the real symmetric (N+2)x(N+2) single-excitation Hamiltonian."""
    n = config.n_bus
    h = np.zeros((n + 2, n + 2))
    diag = np.empty(n + 2)
    diag[0] = diag[-1] = config.omega
    diag[1:config.kappa + 1] = config.omega
    diag[config.kappa + 1:n + 1] = config.omega_tilde
    h[np.diag_indices(n + 2)] = diag
    h[0, 1:n + 1] = h[1:n + 1, 0] = config.lam
    h[n + 1, 1:n + 1] = h[1:n + 1, n + 1] = config.lam
    return h


def blocking_margin(config: NetworkConfig, threshold: float = MARGIN_THRESHOLD):
    """Return ``(r, r <= threshold)`` with r = 3 sqrt(N) lambda / |delta|.

    Blocking requires lambda/|delta| << 1/(3 sqrt(N)); ``threshold`` makes
    "much less than" concrete.
    """
    if config.delta == 0:
        raise DegenerateDetuningError(
            "blocking margin undefined for delta = 0 (degenerate detuning)"
        )
    ratio = config.lam / abs(config.delta) * 3.0 * math.sqrt(config.n_bus)
    return ratio, ratio <= threshold
