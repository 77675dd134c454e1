"""Supermode spectrum of the effective non-Hermitian 2x2 mode matrix.

Closed-form complex eigenvalues, the EP drive amplitude, and
continuity-based branch tracking through the square-root branch point.

Branch convention: the complex square root is always the principal branch
(Re >= 0, ties broken toward Im >= 0) and tau_plus carries the +sqrt term.
Below the EP the two eigenvalues share their imaginary part; above it they
share their real part.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import AmbiguousTracking, DegenerateDamping
from .params import EffectiveModeParams, SystemParams


class BranchConvention(Enum):
    PRINCIPAL_SQRT = "principal_sqrt"
    CONTINUITY = "continuity"


@dataclass(frozen=True)
class SupermodeSpectrum:
    """Pair of complex supermode eigenvalues with branch labels."""

    tau_plus: complex
    tau_minus: complex
    branch_convention: BranchConvention = BranchConvention.PRINCIPAL_SQRT

    @property
    def nu_plus(self) -> float:
        return self.tau_plus.real

    @property
    def nu_minus(self) -> float:
        return self.tau_minus.real

    @property
    def ups_plus(self) -> float:
        return self.tau_plus.imag

    @property
    def ups_minus(self) -> float:
        return self.tau_minus.imag

    def dissipation_magnitudes(self) -> tuple[float, float]:
        """(|Ups_+|, |Ups_-|): loss rates without the sign convention."""
        return abs(self.ups_plus), abs(self.ups_minus)


def _check_finite(p: EffectiveModeParams) -> None:
    for v in (p.omega_eff_1, p.omega_eff_2, p.gamma_eff_1, p.gamma_eff_2,
              p.epsilon):
        if not math.isfinite(v):
            raise ValueError("non-finite effective parameter")


def discriminant(p: EffectiveModeParams) -> complex:
    """Complex discriminant whose vanishing marks the EP.

    D = [(w1 - w2) + (i/2)(g2 - g1)]**2 + 4 eps**2
    """
    _check_finite(p)
    d = (p.omega_eff_1 - p.omega_eff_2) + 0.5j * (p.gamma_eff_2 - p.gamma_eff_1)
    return d * d + 4.0 * p.epsilon**2


def eigenvalues_general(p: EffectiveModeParams) -> SupermodeSpectrum:
    """Closed-form eigenvalues of the effective 2x2 mode matrix."""
    _check_finite(p)
    center = 0.5 * (p.omega_eff_1 + p.omega_eff_2) \
        - 0.25j * (p.gamma_eff_1 + p.gamma_eff_2)
    root = 0.5 * cmath.sqrt(discriminant(p))
    return SupermodeSpectrum(tau_plus=center + root, tau_minus=center - root)


def eigenvalues_degenerate(p: SystemParams) -> SupermodeSpectrum:
    """Eigenvalues under the degenerate weak-drive simplification.

    tau_pm = w_r - i(2 gamma_m + (eta1+eta2) a**2)/4
             +- sqrt(eps**2 - a**4 (eta2-eta1)**2 / 16)
    with the principal square root: real below the EP, positive-imaginary
    above it.
    """
    a2 = p.alpha_in**2
    center = p.omega_r - 0.25j * (2.0 * p.gamma_m + (p.eta1 + p.eta2) * a2)
    radicand = p.epsilon**2 - a2 * a2 * (p.eta2 - p.eta1) ** 2 / 16.0
    root = cmath.sqrt(complex(radicand))
    return SupermodeSpectrum(tau_plus=center + root, tau_minus=center - root)


def ep_drive_amplitude(p: SystemParams) -> float:
    """Drive amplitude at which the two eigenvalues coalesce.

    alpha_EP = sqrt(4 eps / |eta2 - eta1|); raises DegenerateDamping when
    eta1 == eta2 (no finite EP).
    """
    if p.eta1 == p.eta2:
        raise DegenerateDamping(
            "eta1 == eta2: no finite EP drive amplitude exists")
    return math.sqrt(4.0 * p.epsilon / abs(p.eta2 - p.eta1))


@dataclass(frozen=True)
class BranchTracks:
    """Two eigenvalue curves labeled by continuity across a sweep."""

    curve_a: np.ndarray
    curve_b: np.ndarray
    reorder_indices: tuple[int, ...]

    def __post_init__(self):
        if self.curve_a.shape != self.curve_b.shape:
            raise ValueError("curves must have equal length")


# Relative tolerance below which the two candidate matchings count as tied.
_TIE_RTOL = 1e-12


def track_branches(sweep: Sequence[EffectiveModeParams]) -> BranchTracks:
    """Track the two eigenvalue branches through a parameter sweep.

    Consecutive steps are matched by minimal total distance in the complex
    plane instead of by the +-sqrt label.  A matching-cost tie occurs when
    the separation vector rotates by 90 degrees between steps; with a
    sufficiently fine sweep that only happens while crossing the branch
    point, where the local gap is small, and such steps are recorded as
    reordering events.  A tie while the gap is large (relative to the
    largest gap in the sweep) is reported as AmbiguousTracking.
    """
    if len(sweep) == 0:
        return BranchTracks(np.empty(0, complex), np.empty(0, complex), ())

    specs = [eigenvalues_general(p) for p in sweep]
    gaps = np.array([abs(s.tau_plus - s.tau_minus) for s in specs])
    max_gap = float(gaps.max())
    a = np.empty(len(sweep), complex)
    b = np.empty(len(sweep), complex)
    a[0], b[0] = specs[0].tau_plus, specs[0].tau_minus
    events: list[int] = []

    for i in range(1, len(sweep)):
        tp, tm = specs[i].tau_plus, specs[i].tau_minus
        cost_keep = abs(tp - a[i - 1]) + abs(tm - b[i - 1])
        cost_swap = abs(tm - a[i - 1]) + abs(tp - b[i - 1])
        scale = max(1.0, abs(tp), abs(tm), abs(a[i - 1]))
        if abs(cost_keep - cost_swap) <= _TIE_RTOL * scale:
            if max_gap > 0 and min(gaps[i - 1], gaps[i]) > 0.25 * max_gap:
                raise AmbiguousTracking(
                    f"matching costs tie away from the branch point at "
                    f"sweep index {i}")
            events.append(i)
            a[i], b[i] = tp, tm
        elif cost_swap < cost_keep:
            events.append(i)
            a[i], b[i] = tm, tp
        else:
            a[i], b[i] = tp, tm

    # A branch point sitting exactly on a grid node produces ties on both
    # adjacent matching steps; that is still a single crossing.
    merged: list[int] = []
    for idx in events:
        if merged and idx == merged[-1] + 1:
            continue
        merged.append(idx)

    return BranchTracks(curve_a=a, curve_b=b, reorder_indices=tuple(merged))
