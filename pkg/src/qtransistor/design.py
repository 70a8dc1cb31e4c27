"""Transfer-time planning and phase-gate parameter design.

Full transfer needs both omega*tau and lambda*sqrt(2 kappa)*tau to be odd
multiples of pi, so lambda*sqrt(2 kappa)/omega must reduce to a ratio of two
odd integers. With kappa = 2 m^2 the ratio is 2 m lambda / omega and the
question becomes purely number-theoretic; it is answered in exact rational
arithmetic.

A phase gate R(phi) is realised at the exchange time t_ex when
omega / (lambda sqrt(2 kappa)) = ell - phi/pi with ell odd.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from numbers import Rational

from .dynamics import QubitState
from .errors import DomainError, NoGateSolution, NoOddRatioSolution, RequiresRationalError
from .network import TWO_PI

KAPPA_INT_TOL = 1e-9


def as_rational(value, name: str = "value") -> Fraction:
    """Exact rational from an int, Fraction, Decimal, decimal string or float.

    Floats are read through their shortest decimal repr, so ``1e10`` and
    ``0.1`` mean what they look like rather than their binary expansion.
    """
    if isinstance(value, bool):
        raise RequiresRationalError(f"{name} must be a rational number, got a bool")
    try:
        if isinstance(value, (Rational, Decimal)):
            out = Fraction(value)
        elif isinstance(value, float):
            out = Fraction(repr(value))
        elif isinstance(value, str):
            out = Fraction(value.strip())
        else:
            raise TypeError
    except (TypeError, ValueError, ArithmeticError):
        raise RequiresRationalError(
            f"{name} must be an exact rational (int, Fraction, decimal string or finite float), "
            f"got {value!r}"
        ) from None
    return out


def _v2(n: int) -> int:
    return (n & -n).bit_length() - 1


@dataclass(frozen=True)
class TransferPlan:
    m: int
    kappa: int
    c1: int
    c2: int
    j: int
    j_prime: int
    tau_trans: float      # seconds
    omega: float          # rad/s
    lam: float            # rad/s
    ratio: Fraction       # lambda sqrt(2 kappa) / omega = C1 / C2

    def to_dict(self) -> dict:
        return {
            "m": self.m, "kappa": self.kappa, "C1": self.c1, "C2": self.c2,
            "j": self.j, "j_prime": self.j_prime, "tau_trans": self.tau_trans,
            "omega": self.omega, "lambda": self.lam,
            "ratio": f"{self.ratio.numerator}/{self.ratio.denominator}",
        }


def plan_transfer(omega, lam, u: int = 1, hz: bool = False) -> TransferPlan:
    """Smallest kappa = 2 m^2 (scaled by the odd multiplier ``u``) giving full transfer.

    ``omega`` and ``lam`` are exact rationals in rad/s, or in Hz when ``hz``
    is set; the ratio does not depend on the unit but tau_trans does.
    """
    w = as_rational(omega, "omega")
    lm = as_rational(lam, "lambda")
    if w <= 0 or lm <= 0:
        raise DomainError("omega and lambda must be positive")
    if int(u) != u or u < 1 or u % 2 == 0:
        raise DomainError(f"multiplier u must be an odd positive integer, got {u!r}")
    u = int(u)

    r = lm / w
    p, q = r.numerator, r.denominator
    a = _v2(q)
    if a == 0:
        raise NoOddRatioSolution(
            "no odd-ratio solution (reduced denominator is odd): "
            f"lambda/omega = {p}/{q}"
        )
    m = 2 ** (a - 1) * u
    kappa = 2 * m * m
    ratio = 2 * m * r
    c1, c2 = ratio.numerator, ratio.denominator
    # Both are odd by construction; keep the guard because the whole plan rests on it.
    assert c1 % 2 == 1 and c2 % 2 == 1
    j, j_prime = (c2 - 1) // 2, (c1 - 1) // 2

    omega_rad = float(w) * (TWO_PI if hz else 1.0)
    lam_rad = float(lm) * (TWO_PI if hz else 1.0)
    if hz:
        tau = float(Fraction(c2, 2) / w)
    else:
        tau = c2 * math.pi / float(w)
    return TransferPlan(
        m=m, kappa=kappa, c1=c1, c2=c2, j=j, j_prime=j_prime,
        tau_trans=tau, omega=omega_rad, lam=lam_rad, ratio=ratio,
    )


# -- phase gates -------------------------------------------------------------


@dataclass(frozen=True)
class GatePlan:
    phi: float
    ell: int
    omega: float
    lam: float
    kappa: int
    solved: str           # which of omega / lambda / kappa was solved for

    @property
    def t_ex(self) -> float:
        return math.pi / (self.lam * math.sqrt(2.0 * self.kappa))

    @property
    def residual(self) -> float:
        """Relative violation of omega / (lambda sqrt(2 kappa)) = ell - phi/pi."""
        target = self.ell - self.phi / math.pi
        return abs(self.omega / (self.lam * math.sqrt(2.0 * self.kappa)) - target) / target

    def to_dict(self) -> dict:
        return {
            "phi": self.phi, "ell": self.ell, "omega": self.omega,
            "lambda": self.lam, "kappa": self.kappa, "solved": self.solved,
            "t_ex": self.t_ex,
        }


def _check_phi(phi):
    if not (-math.pi < phi <= math.pi):
        raise DomainError(f"phi must lie in (-pi, pi], got {phi!r}")


def _first_odd_ell(phi, ell):
    if ell is not None:
        if int(ell) != ell or ell < 1 or ell % 2 == 0:
            raise DomainError(f"ell must be an odd positive integer, got {ell!r}")
        if ell - phi / math.pi <= 0:
            raise DomainError(f"ell - phi/pi must be positive (ell={ell}, phi={phi!r})")
        return int(ell)
    return 1 if 1 - phi / math.pi > 0 else 3


def design_gate(phi: float, *, omega: float | None = None, lam: float | None = None,
                kappa: int | None = None, ell: int | None = None,
                ell_search_max: int = 99, min_ratio: float = 1.0) -> GatePlan:
    """Solve omega = lambda sqrt(2 kappa) (ell - phi/pi) for the one parameter not given.

    Solving for omega or lambda uses ``ell`` if given, else the smallest odd
    ell that keeps the right side positive. Solving for kappa scans odd
    ell <= ``ell_search_max`` and returns the first integral kappa whose
    ratio omega/(lambda sqrt(2 kappa)) is at least ``min_ratio``, so the
    collective coupling never exceeds the oscillator frequency.
    """
    _check_phi(phi)
    given = {k: v for k, v in (("omega", omega), ("lam", lam), ("kappa", kappa)) if v is not None}
    if len(given) != 2:
        raise DomainError("exactly two of omega, lambda, kappa must be fixed")
    for name, value in given.items():
        if not (math.isfinite(value) and value > 0):
            raise DomainError(f"{name} must be positive, got {value!r}")
    if kappa is not None and int(kappa) != kappa:
        raise DomainError(f"kappa must be a positive integer, got {kappa!r}")

    if omega is None:
        el = _first_odd_ell(phi, ell)
        w = lam * math.sqrt(2.0 * kappa) * (el - phi / math.pi)
        return GatePlan(phi, el, w, lam, int(kappa), "omega")
    if lam is None:
        el = _first_odd_ell(phi, ell)
        lm = omega / (math.sqrt(2.0 * kappa) * (el - phi / math.pi))
        return GatePlan(phi, el, omega, lm, int(kappa), "lambda")

    ells = [ell] if ell is not None else range(1, ell_search_max + 1, 2)
    candidates = []
    for el in ells:
        ratio = el - phi / math.pi
        if ratio <= 0:
            continue
        k_real = omega ** 2 / (2.0 * lam ** 2 * ratio ** 2)
        k_int = round(k_real)
        miss = abs(k_real - k_int)
        candidates.append({"ell": el, "kappa": k_real, "distance": miss, "ratio": ratio})
        if k_int >= 1 and miss <= KAPPA_INT_TOL * max(1.0, k_real) and ratio >= min_ratio:
            return GatePlan(phi, el, omega, lam, int(k_int), "kappa")
    closest = sorted(candidates, key=lambda c: c["distance"])[:5]
    raise NoGateSolution(
        f"no integral kappa for phi={phi!r}, omega={omega!r}, lambda={lam!r} "
        f"with odd ell <= {ell_search_max}",
        closest,
    )


def predict_gate_output(plan: GatePlan, psi: QubitState) -> QubitState:
    """R(phi)|psi>: the |1> amplitude picks up e^{i phi}."""
    return QubitState(psi.a0, psi.a1 * complex(math.cos(plan.phi), math.sin(plan.phi)))
