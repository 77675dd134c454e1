"""Parameter containers for the two-cavity optomechanical system.

All frequencies and rates are angular (rad/s) throughout the package.  The
standard working convention sets omega_r = 1 so that rates are quoted in
units of omega_r and drive amplitudes in units of omega_r^(1/2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace


def _require_finite(name: str, value: float) -> None:
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class SystemParams:
    """Physical parameters of the coupled two-cavity system.

    omega_r   common mechanical frequency (both resonators degenerate)
    gamma_m   intrinsic mechanical damping
    epsilon   mechanical coupling between the two membranes
    eta1/2    damping-conversion coefficients: gamma_opt_j = eta_j * alpha_in**2
    alpha_in  drive amplitude, units (rad/s)^(1/2)
    g         vacuum optomechanical coupling
    kappa     cavity linewidth
    delta1/2  laser-cavity detunings
    """

    omega_r: float
    gamma_m: float
    epsilon: float
    eta1: float
    eta2: float
    alpha_in: float = 0.0
    g: float = 0.0
    kappa: float = 1.0
    delta1: float = 0.0
    delta2: float = 0.0

    def __post_init__(self):
        for name in ("omega_r", "gamma_m", "epsilon", "eta1", "eta2",
                     "alpha_in", "g", "kappa", "delta1", "delta2"):
            _require_finite(name, getattr(self, name))
        if self.omega_r <= 0:
            raise ValueError("omega_r must be positive")
        if self.kappa <= 0:
            raise ValueError("kappa must be positive")
        for name in ("gamma_m", "epsilon", "eta1", "eta2", "alpha_in"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    def with_drive(self, alpha_in: float) -> "SystemParams":
        return replace(self, alpha_in=alpha_in)

    def gamma_opt(self, j: int) -> float:
        """Optical damping of mode j under the linear-in-drive**2 ansatz."""
        eta = self.eta1 if j == 1 else self.eta2
        return eta * self.alpha_in**2

    def effective(self) -> "EffectiveModeParams":
        """Effective mode parameters under the degenerate weak-drive model."""
        return EffectiveModeParams(
            omega_eff_1=self.omega_r,
            omega_eff_2=self.omega_r,
            gamma_eff_1=self.gamma_m + self.gamma_opt(1),
            gamma_eff_2=self.gamma_m + self.gamma_opt(2),
            epsilon=self.epsilon,
        )


@dataclass(frozen=True)
class EffectiveModeParams:
    """Entries of the effective non-Hermitian 2x2 mode matrix.

    Negative gamma_eff_j is allowed (net mechanical gain) and flagged via
    `has_gain` rather than rejected.
    """

    omega_eff_1: float
    omega_eff_2: float
    gamma_eff_1: float
    gamma_eff_2: float
    epsilon: float

    def __post_init__(self):
        for name in ("omega_eff_1", "omega_eff_2", "gamma_eff_1",
                     "gamma_eff_2", "epsilon"):
            _require_finite(name, getattr(self, name))

    @property
    def has_gain(self) -> bool:
        return self.gamma_eff_1 < 0 or self.gamma_eff_2 < 0

    def matrix(self):
        """The explicit 2x2 complex mode matrix (numpy array)."""
        import numpy as np

        return np.array(
            [
                [self.omega_eff_1 - 0.5j * self.gamma_eff_1, -self.epsilon],
                [-self.epsilon, self.omega_eff_2 - 0.5j * self.gamma_eff_2],
            ],
            dtype=complex,
        )
