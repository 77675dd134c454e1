"""Bessel-series radiation-pressure backaction on the mechanical modes.

Evaluates the optical spring shift and the optical damping for a membrane
executing limit-cycle motion, and extracts the linear damping coefficient
eta_j = gamma_opt_j / alpha_in**2 fed to the EP model.

The infinite sideband sum runs over n in [-N, N]; N is chosen adaptively
from the super-exponential decay of J_n beyond n ~ |zeta| (see
_truncation_order).  Both rates are implemented exactly as their closed
forms are usually quoted: the spring shift carries one power of kappa, the
damping two.  `use_kappa_squared=True` switches the spring shift to kappa
squared as well (the suspected-typo escape hatch).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import special

from .errors import OutOfRange
from .params import SystemParams

#: |zeta_j| below which the removable zeta -> 0 singularity is evaluated
#: through its analytic limit instead of the ratio of vanishing quantities.
ZETA_FLOOR = 1e-30


@dataclass(frozen=True)
class LimitCycleAnsatz:
    """Limit-cycle description beta_j(t) = beta_bar_j + A_j exp(-i w_lock t)."""

    beta_bar_1: complex
    beta_bar_2: complex
    A_1: complex
    A_2: complex
    omega_lock: float

    def __post_init__(self):
        if not (self.omega_lock > 0 and math.isfinite(self.omega_lock)):
            raise ValueError("omega_lock must be positive and finite")
        for name in ("beta_bar_1", "beta_bar_2", "A_1", "A_2"):
            v = complex(getattr(self, name))
            if not (math.isfinite(v.real) and math.isfinite(v.imag)):
                raise ValueError(f"{name} must be finite")

    def beta_bar(self, j: int) -> complex:
        return self.beta_bar_1 if j == 1 else self.beta_bar_2

    def amplitude(self, j: int) -> complex:
        return self.A_1 if j == 1 else self.A_2


@dataclass(frozen=True)
class BackactionResult:
    delta_omega: float      # optical spring shift of mode j
    gamma_opt: float        # optical damping of mode j
    zeta: float             # dimensionless drive 2 g Re(A_j) / w_lock
    delta_tilde: float      # detuning shifted by the static displacement
    n_terms: int            # truncation order N actually used


def bessel_j(n: int, x: float) -> float:
    """Bessel function of the first kind, |n| <= 200, |x| <= 1e4."""
    if abs(n) > 200 or abs(x) > 1e4:
        raise OutOfRange(f"bessel_j supports |n| <= 200, |x| <= 1e4; "
                         f"got n={n}, x={x}")
    return float(special.jv(n, x))


def _truncation_order(zeta: float) -> int:
    """Smallest N with |J_N(zeta)| < 1e-16, plus 5 guard terms."""
    n = max(2, math.ceil(abs(zeta)))
    while abs(special.jv(n, zeta)) >= 1e-16 and n < 300:
        n += 1
    return n + 5


def _mode_numbers(p: SystemParams, ansatz: LimitCycleAnsatz, j: int):
    zeta = 2.0 * p.g * ansatz.amplitude(j).real / ansatz.omega_lock
    delta = p.delta1 if j == 1 else p.delta2
    delta_tilde = delta + 2.0 * p.g * ansatz.beta_bar(j).real
    return zeta, delta_tilde


def _h(n: np.ndarray, omega_lock: float, delta_tilde: float,
       kappa: float) -> np.ndarray:
    return 1j * (n * omega_lock - delta_tilde) + 0.5 * kappa


def _sideband_terms(zeta: float, omega_lock: float, delta_tilde: float,
                    kappa: float, n_max: int):
    """J_{n+1}(-z) J_n(-z) numerators and h-denominator factors, n in [-N, N]."""
    n = np.arange(-n_max, n_max + 1)
    jn = special.jv(n, -zeta)
    jn1 = special.jv(n + 1, -zeta)
    h_n = _h(n, omega_lock, delta_tilde, kappa)
    h_n1 = _h(n + 1.0, omega_lock, delta_tilde, kappa)
    return jn1 * jn, np.conj(h_n1) * h_n


def evaluate(p: SystemParams, ansatz: LimitCycleAnsatz, j: int,
             use_kappa_squared: bool = False) -> BackactionResult:
    """Spring shift and optical damping of mode j for the given ansatz."""
    if j not in (1, 2):
        raise ValueError("mode index must be 1 or 2")
    zeta, delta_tilde = _mode_numbers(p, ansatz, j)

    if p.g == 0.0 or p.alpha_in == 0.0:
        return BackactionResult(0.0, 0.0, zeta, delta_tilde, 1)

    ga2 = (p.g * p.alpha_in) ** 2
    kappa_spring = p.kappa**2 if use_kappa_squared else p.kappa

    if abs(zeta) < ZETA_FLOOR:
        # Analytic zeta -> 0 limit: d/dz [J_{n+1}(-z) J_n(-z)] at z=0 is
        # -1/2 for n=0 and +1/2 for n=-1, all other terms are O(z^2).
        n = np.array([-1.0, 0.0, 1.0])
        h = _h(n, ansatz.omega_lock, delta_tilde, p.kappa)
        d0 = np.conj(h[2]) * h[1]        # n = 0 denominator
        dm1 = np.conj(h[1]) * h[0]       # n = -1 denominator
        spring_sum = -0.5 / d0 + 0.5 / dm1
        damp_sum = -0.5 / abs(d0) ** 2 + 0.5 / abs(dm1) ** 2
        delta_omega = -2.0 * kappa_spring * ga2 / ansatz.omega_lock \
            * spring_sum.real
        gamma_opt = 2.0 * p.kappa**2 * ga2 * damp_sum
        return BackactionResult(float(delta_omega), float(gamma_opt),
                                zeta, delta_tilde, 1)

    n_max = _truncation_order(zeta)
    num, den = _sideband_terms(zeta, ansatz.omega_lock, delta_tilde,
                               p.kappa, n_max)
    delta_omega = -2.0 * kappa_spring * ga2 / (ansatz.omega_lock * zeta) \
        * np.sum(num / den).real
    gamma_opt = 2.0 * p.kappa**2 * ga2 / zeta \
        * float(np.sum(num / np.abs(den) ** 2))
    return BackactionResult(float(delta_omega), float(gamma_opt),
                            zeta, delta_tilde, n_max)


def spring_shift(p: SystemParams, ansatz: LimitCycleAnsatz, j: int,
                 use_kappa_squared: bool = False) -> float:
    """Optical spring shift of mode j (rad/s)."""
    return evaluate(p, ansatz, j, use_kappa_squared).delta_omega


def optical_damping(p: SystemParams, ansatz: LimitCycleAnsatz, j: int) -> float:
    """Optical damping of mode j (rad/s); negative values mean gain."""
    return evaluate(p, ansatz, j).gamma_opt


@dataclass(frozen=True)
class EtaEstimate:
    """eta_j with a linearity diagnostic over a +-20% drive window."""

    eta: float
    window_variation: float   # (max - min) / |mean| of eta across the window
    window_etas: tuple[float, float, float]


def extract_eta(p: SystemParams, ansatz: LimitCycleAnsatz, j: int,
                window: float = 0.2,
                ansatz_provider: Optional[Callable[[float],
                                                   LimitCycleAnsatz]] = None
                ) -> EtaEstimate:
    """eta_j = gamma_opt_j / alpha_in**2, with a linearity check.

    The drive is varied across (1 - window, 1, 1 + window) * alpha_in and
    eta recomputed at each point.  By default the ansatz is held fixed;
    pass `ansatz_provider(alpha_in)` to have it recomputed per drive (e.g.
    from a fresh dynamics run).
    """
    if p.alpha_in <= 0:
        raise ValueError("extract_eta requires alpha_in > 0")
    etas = []
    for factor in (1.0 - window, 1.0, 1.0 + window):
        drive = factor * p.alpha_in
        pw = p.with_drive(drive)
        az = ansatz_provider(drive) if ansatz_provider is not None else ansatz
        etas.append(optical_damping(pw, az, j) / drive**2)
    mean = sum(etas) / 3.0
    spread = max(etas) - min(etas)
    variation = spread / abs(mean) if mean != 0.0 else 0.0
    return EtaEstimate(eta=etas[1], window_variation=variation,
                       window_etas=tuple(etas))
