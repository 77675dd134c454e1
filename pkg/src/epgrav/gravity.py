"""Source-mass gravity: frequency shifts, EP-enhanced supermode response,
and inversion of a measured shift into the Newtonian constant G.

Sign conventions: a source mass only attracts, so the mechanical shift
delta_omega = -G M / (w a^3) is negative; Delta_nu_minus is then the
large negative (EP-enhanced) supermode shift and Delta_nu_plus the small
positive one.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .errors import NoBracket, NonMonotone
from .params import SystemParams

#: CODATA-2014 recommended value of the Newtonian constant (m^3 kg^-1 s^-2).
G_CODATA_2014 = 6.67408e-11
#: One-sigma uncertainty of the 2014 recommended value.
G_CODATA_2014_SIGMA = 0.00031e-11


@dataclass(frozen=True)
class SourceSphere:
    """Uniform source sphere next to the two membranes.

    rho, R    density (kg/m^3) and radius (m); the mass M is derived
    a1, a2    center-to-membrane distances (m), both >= R
    m1, m2    membrane masses (kg)
    """

    rho: float
    R: float
    a1: float
    a2: float
    m1: float
    m2: float

    def __post_init__(self):
        if self.rho <= 0 or self.R <= 0:
            raise ValueError("rho and R must be positive")
        if self.a1 < self.R or self.a2 < self.R:
            raise ValueError("membranes must sit outside the sphere (a_j >= R)")
        if self.m1 <= 0 or self.m2 <= 0:
            raise ValueError("membrane masses must be positive")

    @property
    def M(self) -> float:
        return (4.0 / 3.0) * math.pi * self.R**3 * self.rho

    def a(self, j: int) -> float:
        return self.a1 if j == 1 else self.a2

    def m(self, j: int) -> float:
        return self.m1 if j == 1 else self.m2


def gravitational_force(s: SourceSphere, j: int,
                        G: float = G_CODATA_2014) -> float:
    """Newtonian attraction on membrane j: F = G M m_j / a_j^2."""
    return G * s.M * s.m(j) / s.a(j) ** 2


def frequency_shift_gradient_form(s: SourceSphere, omega_j: float, j: int,
                                  G: float = G_CODATA_2014) -> float:
    """Shift from the force-gradient relation d_w/w = dF/da / (2 m w^2)."""
    a = s.a(j)
    dFda = -2.0 * G * s.M * s.m(j) / a**3
    return omega_j * dFda / (2.0 * s.m(j) * omega_j**2)


def frequency_shift(s: SourceSphere, omega_j: float, j: int,
                    G: float = G_CODATA_2014) -> float:
    """Mechanical frequency shift delta_w_j = -G M / (w_j a_j^3).

    Cross-checked against the gradient form on every call; for an
    inverse-square force the two are algebraically identical.
    """
    if omega_j <= 0:
        raise ValueError("omega_j must be positive")
    shift = -G * s.M / (omega_j * s.a(j) ** 3)
    grad = frequency_shift_gradient_form(s, omega_j, j, G)
    if shift != 0.0 and abs(shift - grad) > 1e-12 * abs(shift):
        raise AssertionError("closed-form and gradient-form shifts disagree")
    return shift


@dataclass(frozen=True)
class PerturbedSpectrum:
    """Perturbed eigenvalues and the resulting eigenfrequency shifts."""

    tau_p_plus: complex
    tau_p_minus: complex
    dnu_plus: float
    dnu_minus: float
    delta_omega: float


def _sqrt_diff(pert: complex, base: complex, inc: complex) -> complex:
    """sqrt(pert) - sqrt(base) with pert = base + inc, computed stably.

    When the principal roots sit in the same half-plane the ratio form
    inc / (sqrt(pert) + sqrt(base)) avoids the cancellation of nearby
    roots; when the perturbation crosses the branch cut the sum nearly
    cancels instead and the direct difference is the well-conditioned one.
    """
    sp = cmath.sqrt(pert)
    sb = cmath.sqrt(base)
    if inc == 0:
        return 0.0
    if abs(sp + sb) >= abs(sp - sb):
        return inc / (sp + sb)
    return sp - sb


def perturbed_eigenvalues(p: SystemParams,
                          delta_omega: float) -> PerturbedSpectrum:
    """Eigenvalues with the near membrane detuned by delta_omega.

    Only mode 2 (the membrane close to the source) is shifted; the far
    membrane's shift is suppressed by (a2/a1)^3 and set exactly to zero.
    Shares the principal-branch pairing with the unperturbed spectrum.
    """
    if abs(delta_omega) >= p.omega_r:
        raise ValueError("|delta_omega| must be below omega_r")
    a2 = p.alpha_in**2
    d_eta = p.eta2 - p.eta1
    center = p.omega_r + 0.5 * delta_omega \
        - 0.25j * (2.0 * p.gamma_m + (p.eta1 + p.eta2) * a2)
    # the perturbed radicand (-dw + i q)^2 + 4 eps^2 is assembled as the
    # unperturbed radicand plus the exact factored increment
    # (u - v)(u + v), u = -dw + i q, v = i q; summing the squared binomial
    # directly would round away the dw^2 term at the 4 eps^2 scale
    x_base = (0.5j * a2 * d_eta) ** 2 + 4.0 * p.epsilon**2
    x_diff = (-delta_omega) * (-delta_omega + 1j * a2 * d_eta)
    x_pert = x_base + x_diff
    root = 0.5 * cmath.sqrt(x_pert)
    tau_p = center + root
    tau_m = center - root
    # dnu naively as Re(tau') - Re(tau) cancels at the eigenvalue scale
    # (~1 ulp of omega_r), far too coarse for small shifts
    d_root = 0.5 * _sqrt_diff(x_pert, x_base, x_diff).real
    return PerturbedSpectrum(
        tau_p_plus=tau_p, tau_p_minus=tau_m,
        dnu_plus=0.5 * delta_omega + d_root,
        dnu_minus=0.5 * delta_omega - d_root,
        delta_omega=delta_omega,
    )


def shift_closed_form(p: SystemParams,
                      delta_omega: float) -> tuple[float, float]:
    """(dnu_plus, dnu_minus) as the direct algebraic expansion.

    Equivalent to perturbed_eigenvalues minus the unperturbed spectrum;
    kept as an independent expression for cross-checks.
    """
    a2 = p.alpha_in**2
    d_eta = p.eta2 - p.eta1
    base_rad = complex(p.epsilon**2 - a2 * a2 * d_eta**2 / 16.0)
    rad_inc = (delta_omega**2 - 1j * delta_omega * a2 * d_eta) / 4.0
    pert_rad = base_rad + rad_inc
    d_root = _sqrt_diff(pert_rad, base_rad, rad_inc).real
    return 0.5 * delta_omega + d_root, 0.5 * delta_omega - d_root


def shift_at_ep(epsilon: float, delta_omega: float) -> tuple[float, float]:
    """(dnu_plus, dnu_minus) with the system driven exactly at the EP.

    dnu_pm = (dw/2) (1 -+ sqrt((1 + sqrt(1 + 16 eps^2/dw^2)) / 2));
    the dw -> 0 limit is (0, 0).  Physical source masses give dw < 0.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if delta_omega == 0.0:
        return 0.0, 0.0
    s = math.sqrt((1.0 + math.sqrt(1.0 + 16.0 * epsilon**2 / delta_omega**2))
                  / 2.0)
    return 0.5 * delta_omega * (1.0 - s), 0.5 * delta_omega * (1.0 + s)


def shift_magnitude_pre_contact(G: float, M: float, a2: float,
                                omega_r: float, epsilon: float) -> float:
    """|dnu_minus| at the EP for explicit sphere mass M and gap a2."""
    lead = G * M / (2.0 * omega_r * a2**3)
    inner = 1.0 + 16.0 * epsilon**2 * omega_r**2 * a2**6 / (G * M) ** 2
    return lead * (1.0 + math.sqrt((1.0 + math.sqrt(inner)) / 2.0))


def shift_magnitude_vs_G(G: float, rho: float, omega_r: float,
                         epsilon: float) -> float:
    """|dnu_minus| at the EP in the contact limit a2 ~ R.

    |dnu_-| = (2 pi G rho / 3 w_r) [1 + sqrt((1 + sqrt(1 + 9 eps^2 w_r^2 /
    (G^2 pi^2 rho^2))) / 2)].  Checked against the pre-contact form with
    a2 = R on every call (the R dependence cancels).
    """
    if min(G, rho, omega_r, epsilon) <= 0:
        raise ValueError("all arguments must be positive")
    lead = 2.0 * math.pi * G * rho / (3.0 * omega_r)
    inner = 1.0 + 9.0 * epsilon**2 * omega_r**2 \
        / (G**2 * math.pi**2 * rho**2)
    value = lead * (1.0 + math.sqrt((1.0 + math.sqrt(inner)) / 2.0))

    R = 1.0  # arbitrary: the contact-limit expression is R-independent
    M = (4.0 / 3.0) * math.pi * R**3 * rho
    pre = shift_magnitude_pre_contact(G, M, R, omega_r, epsilon)
    if abs(pre - value) > 1e-12 * value:
        raise AssertionError("contact-limit and pre-contact forms disagree")
    return value


def shift_magnitude_dG(G: float, rho: float, omega_r: float,
                       epsilon: float) -> float:
    """Analytic derivative d|dnu_minus|/dG of the contact-limit law."""
    P = 2.0 * math.pi * rho / (3.0 * omega_r)
    c = 9.0 * epsilon**2 * omega_r**2 / (math.pi**2 * rho**2)
    Q = math.sqrt(1.0 + c / G**2)
    S = math.sqrt((1.0 + Q) / 2.0)
    return P * (1.0 + S) - P * c / (4.0 * S * Q * G**2)


@dataclass(frozen=True)
class GEstimate:
    G: float
    sigma_G: float | None
    iterations: int


_G_BRACKET = (1e-13, 1e-8)


def invert_g(measured_shift: float, rho: float, omega_r: float,
             epsilon: float, sigma_shift: float | None = None) -> GEstimate:
    """Solve the contact-limit shift law for G.

    Bisection on [1e-13, 1e-8] m^3 kg^-1 s^-2 down to 1e-6 relative,
    followed by a Newton polish with the analytic derivative to 1e-14
    relative.  With sigma_shift given, the uncertainty propagates as
    sigma_G = sigma_shift / |d|dnu|/dG|.
    """
    if measured_shift <= 0:
        raise NoBracket("measured shift must be positive")
    lo, hi = _G_BRACKET
    f_lo = shift_magnitude_vs_G(lo, rho, omega_r, epsilon)
    f_hi = shift_magnitude_vs_G(hi, rho, omega_r, epsilon)
    if f_lo >= f_hi:
        raise NonMonotone("shift law not increasing across the bracket")
    if not (f_lo <= measured_shift <= f_hi):
        raise NoBracket(
            f"measured shift {measured_shift:g} outside the bracket image "
            f"[{f_lo:g}, {f_hi:g}]")

    iters = 0
    while (hi - lo) > 1e-6 * lo:
        mid = math.sqrt(lo * hi)        # geometric: the bracket spans decades
        if shift_magnitude_vs_G(mid, rho, omega_r, epsilon) < measured_shift:
            lo = mid
        else:
            hi = mid
        iters += 1

    g = 0.5 * (lo + hi)
    for _ in range(50):
        f = shift_magnitude_vs_G(g, rho, omega_r, epsilon) - measured_shift
        step = f / shift_magnitude_dG(g, rho, omega_r, epsilon)
        g_new = g - step
        iters += 1
        if abs(g_new - g) <= 1e-14 * abs(g_new):
            g = g_new
            break
        g = g_new

    sigma = None
    if sigma_shift is not None:
        sigma = sigma_shift / abs(shift_magnitude_dG(g, rho, omega_r, epsilon))
    return GEstimate(G=g, sigma_G=sigma, iterations=iters)
