import cmath
import math

import numpy as np
import pytest

from epgrav.errors import NoBracket
from epgrav.gravity import (G_CODATA_2014, SourceSphere, frequency_shift,
                            frequency_shift_gradient_form,
                            gravitational_force, invert_g,
                            perturbed_eigenvalues, shift_at_ep,
                            shift_closed_form, shift_magnitude_dG,
                            shift_magnitude_pre_contact,
                            shift_magnitude_vs_G)
from epgrav.harness import CASE_X, DENSITIES
from epgrav.params import SystemParams
from epgrav.spectra import eigenvalues_degenerate

TUNGSTEN = 19.35e3


def tungsten_sphere(a=0.1):
    return SourceSphere(rho=TUNGSTEN, R=0.1, a1=10.0 * a, a2=a,
                        m1=1e-12, m2=1e-12)


class TestForceAndShift:
    def test_unit_definition(self):
        s = SourceSphere(rho=3.0 / (4.0 * math.pi), R=1.0, a1=1.0, a2=1.0,
                         m1=1.0, m2=1.0)
        assert s.M == pytest.approx(1.0, rel=1e-15)
        assert gravitational_force(s, 2) == pytest.approx(G_CODATA_2014,
                                                          rel=1e-15)

    def test_inverse_square(self):
        s1 = tungsten_sphere(a=0.1)
        s2 = tungsten_sphere(a=0.2)
        assert gravitational_force(s2, 2) == pytest.approx(
            gravitational_force(s1, 2) / 4.0, rel=1e-14)

    def test_tungsten_force_oracle(self):
        s = tungsten_sphere()
        # direct arithmetic oracle, computed from scratch
        M = (4.0 / 3.0) * math.pi * 0.1**3 * TUNGSTEN
        assert M == pytest.approx(81.05, rel=2e-3)
        F = G_CODATA_2014 * M * 1e-12 / 0.1**2
        assert F == pytest.approx(5.41e-19, rel=2e-3)
        assert gravitational_force(s, 2) == pytest.approx(F, rel=1e-14)

    def test_tungsten_shift_oracle(self):
        s = tungsten_sphere()
        shift = frequency_shift(s, 2e9, 2)
        oracle = -G_CODATA_2014 * s.M / (2e9 * 0.1**3)
        assert shift == pytest.approx(oracle, rel=1e-14)
        assert shift == pytest.approx(-2.705e-15, rel=2e-3)

    def test_gradient_form_agrees(self):
        s = tungsten_sphere(a=0.3)
        assert frequency_shift_gradient_form(s, 2e9, 2) == pytest.approx(
            frequency_shift(s, 2e9, 2), rel=1e-14)

    def test_far_membrane_hierarchy(self):
        s = tungsten_sphere(a=0.1)  # a1 = 10 a2
        assert abs(frequency_shift(s, 2e9, 1)) == pytest.approx(
            1e-3 * abs(frequency_shift(s, 2e9, 2)), rel=1e-12)

    def test_hierarchy_guard_property(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            a2 = rng.uniform(0.1, 1.0)
            ratio = rng.uniform(10.0, 1e3)
            s = SourceSphere(rho=1e4, R=0.05, a1=ratio * a2, a2=a2,
                             m1=1e-12, m2=1e-12)
            assert abs(frequency_shift(s, 2e9, 1)) <= \
                1e-3 * abs(frequency_shift(s, 2e9, 2)) * (1 + 1e-12)

    def test_massless_limit(self):
        s = SourceSphere(rho=1e4, R=0.1, a1=1.0, a2=0.5, m1=1e-12, m2=1e-12)
        assert frequency_shift(s, 2e9, 2, G=0.0) == 0.0

    def test_sphere_validation(self):
        with pytest.raises(ValueError):
            SourceSphere(rho=1e4, R=0.2, a1=1.0, a2=0.1, m1=1e-12, m2=1e-12)


class TestPerturbedEigenvalues:
    def test_zero_shift(self):
        p = CASE_X.system(200.0)
        ps = perturbed_eigenvalues(p, 0.0)
        assert ps.dnu_plus == 0.0
        assert ps.dnu_minus == 0.0

    def test_case_x_at_ep_paper_value(self):
        p = CASE_X.system(200.0)
        ps = perturbed_eigenvalues(p, -1e-4)
        assert ps.dnu_minus == pytest.approx(-7.580e-4, rel=2e-3)

    def test_shift_is_real_part_difference(self):
        # agrees with the naive Re(tau') - Re(tau) difference to the
        # rounding floor of the O(omega_r) eigenvalues
        p = CASE_X.system(137.0)
        base = eigenvalues_degenerate(p)
        ps = perturbed_eigenvalues(p, -3e-4)
        assert ps.dnu_plus == pytest.approx(
            ps.tau_p_plus.real - base.tau_plus.real, abs=1e-12)
        assert ps.dnu_minus == pytest.approx(
            ps.tau_p_minus.real - base.tau_minus.real, abs=1e-12)

    def test_matches_closed_form_randomized(self):
        rng = np.random.default_rng(7)
        for _ in range(500):
            p = SystemParams(
                omega_r=1.0, gamma_m=10 ** rng.uniform(-5, -2),
                epsilon=10 ** rng.uniform(-3, -1),
                eta1=10 ** rng.uniform(-7, -5),
                eta2=10 ** rng.uniform(-7, -4.5),
                alpha_in=rng.uniform(0.0, 400.0))
            dw = -(10 ** rng.uniform(-8, -3))
            ps = perturbed_eigenvalues(p, dw)
            cp, cm = shift_closed_form(p, dw)
            scale = max(abs(cp), abs(cm), 1e-300)
            assert abs(ps.dnu_plus - cp) <= 1e-12 * scale
            assert abs(ps.dnu_minus - cm) <= 1e-12 * scale

    def test_requires_small_shift(self):
        with pytest.raises(ValueError):
            perturbed_eigenvalues(CASE_X.system(0.0), 1.5)


class TestShiftAtEp:
    def test_zero_limit(self):
        assert shift_at_ep(1e-2, 0.0) == (0.0, 0.0)

    def test_decoupled_limit(self):
        dw = -1e-4
        dp, dm = shift_at_ep(1e-30, dw)
        assert dp == pytest.approx(0.0, abs=1e-12)
        assert dm == pytest.approx(dw, rel=1e-10)

    def test_enhancement_oracle(self):
        dw = -1e-4
        dp, dm = shift_at_ep(1e-2, dw)
        s = math.sqrt((1 + math.sqrt(1 + 16e-4 / dw**2)) / 2)
        assert dm == pytest.approx(0.5 * dw * (1 + s), rel=1e-14)
        assert dm == pytest.approx(-7.580e-4, rel=2e-3)
        assert abs(dm) > 7.0 * abs(dw)

    def test_consistency_chain_at_ep(self):
        # eigenvalue-difference pipeline == closed-form expansion ==
        # at-EP formula, pairwise, with the drive at alpha_ep
        # alpha is a power of two and d_eta = 4 eps / alpha^2 divides
        # exactly, so the EP condition holds to the last bit and the
        # three routes share a floating-point-exact branch point
        rng = np.random.default_rng(13)
        for _ in range(300):
            eps = 10 ** rng.uniform(-3, -1)
            alpha = float(2 ** rng.integers(5, 9))
            d_eta = 4.0 * eps / alpha**2
            p = SystemParams(omega_r=1.0, gamma_m=1e-4, epsilon=eps,
                             eta1=d_eta, eta2=2.0 * d_eta,
                             alpha_in=alpha)
            dw = -(10 ** rng.uniform(-7, -3))
            ps = perturbed_eigenvalues(p, dw)
            cp, cm = shift_closed_form(p, dw)
            ep, em = shift_at_ep(eps, dw)
            scale = max(abs(em), 1e-300)
            for x, y in ((ps.dnu_plus, cp), (ps.dnu_minus, cm),
                         (cp, ep), (cm, em), (ps.dnu_minus, em)):
                assert abs(x - y) <= 1e-12 * scale

    def test_square_root_response_slope(self):
        eps = 1e-2
        dws = -np.logspace(-8, -6, 40)
        mags = np.array([abs(shift_at_ep(eps, dw)[1]) for dw in dws])
        slopes = np.diff(np.log(mags)) / np.diff(np.log(np.abs(dws)))
        assert np.all(slopes > 0.49)
        assert np.all(slopes < 0.51)

    def test_requires_positive_epsilon(self):
        with pytest.raises(ValueError):
            shift_at_ep(0.0, -1e-4)


class TestShiftMagnitudeVsG:
    def test_small_epsilon_limit(self):
        rho, wr = 1e4, 2e9
        lead = 4.0 * math.pi * G_CODATA_2014 * rho / (3.0 * wr)
        got = shift_magnitude_vs_G(G_CODATA_2014, rho, wr, 1e-30)
        assert got == pytest.approx(lead, rel=1e-9)

    def test_fig_operating_point(self):
        val = shift_magnitude_vs_G(G_CODATA_2014, TUNGSTEN, 2e9, 1e-2 * 2e9)
        # direct arithmetic oracle
        lead = 2 * math.pi * G_CODATA_2014 * TUNGSTEN / (3 * 2e9)
        inner = 1 + 9 * (2e7) ** 2 * (2e9) ** 2 \
            / (G_CODATA_2014**2 * math.pi**2 * TUNGSTEN**2)
        oracle = lead * (1 + math.sqrt((1 + math.sqrt(inner)) / 2))
        assert val == pytest.approx(oracle, rel=1e-14)
        assert val == pytest.approx(1.645e-4, rel=2e-3)

    def test_density_ordering(self):
        rho_by_name = dict(DENSITIES)
        mags = [shift_magnitude_vs_G(G_CODATA_2014, rho_by_name[name],
                                     2e9, 2e7)
                for name in ("steel", "lead", "tungsten")]
        assert mags[0] < mags[1] < mags[2]

    def test_pre_contact_matches_contact(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            rho = rng.uniform(1e3, 3e4)
            wr = 10 ** rng.uniform(6, 10)
            eps = 1e-2 * wr
            R = rng.uniform(0.01, 1.0)
            M = (4.0 / 3.0) * math.pi * R**3 * rho
            pre = shift_magnitude_pre_contact(G_CODATA_2014, M, R, wr, eps)
            con = shift_magnitude_vs_G(G_CODATA_2014, rho, wr, eps)
            assert pre == pytest.approx(con, rel=1e-12)

    def test_monotonicity_grid(self):
        # strictly increasing in G, rho, epsilon; decreasing in omega_r
        gs = np.logspace(-12, -9, 10)
        rhos = np.linspace(1e3, 3e4, 10)
        wrs = np.logspace(7, 10, 10)
        epss = np.logspace(5, 8, 10)
        vals = np.array([[[[shift_magnitude_vs_G(g, r, w, e)
                            for e in epss] for w in wrs]
                          for r in rhos] for g in gs])
        assert np.all(np.diff(vals, axis=0) > 0)
        assert np.all(np.diff(vals, axis=1) > 0)
        assert np.all(np.diff(vals, axis=2) < 0)
        assert np.all(np.diff(vals, axis=3) > 0)

    def test_derivative_matches_finite_difference(self):
        rho, wr, eps = TUNGSTEN, 2e9, 2e7
        for g in np.logspace(-12, -9, 7):
            h = 1e-6 * g
            fd = (shift_magnitude_vs_G(g + h, rho, wr, eps)
                  - shift_magnitude_vs_G(g - h, rho, wr, eps)) / (2 * h)
            assert shift_magnitude_dG(g, rho, wr, eps) == \
                pytest.approx(fd, rel=1e-6)


class TestInvertG:
    def test_roundtrip_log_spaced(self):
        for g0 in np.logspace(-12, -9, 100):
            shift = shift_magnitude_vs_G(g0, TUNGSTEN, 2e9, 2e7)
            est = invert_g(shift, TUNGSTEN, 2e9, 2e7)
            assert est.G == pytest.approx(g0, rel=1e-10)

    def test_codata_operating_point(self):
        shift = shift_magnitude_vs_G(G_CODATA_2014, TUNGSTEN, 2e9, 2e7)
        est = invert_g(shift, TUNGSTEN, 2e9, 2e7)
        assert est.G == pytest.approx(G_CODATA_2014, rel=1e-10)

    def test_uncertainty_propagation(self):
        shift = shift_magnitude_vs_G(G_CODATA_2014, TUNGSTEN, 2e9, 2e7)
        sigma = 1e-3 * shift
        est = invert_g(shift, TUNGSTEN, 2e9, 2e7, sigma_shift=sigma)
        d = shift_magnitude_dG(est.G, TUNGSTEN, 2e9, 2e7)
        assert est.sigma_G == pytest.approx(sigma / d, rel=1e-12)

    def test_zero_shift_raises(self):
        with pytest.raises(NoBracket):
            invert_g(0.0, TUNGSTEN, 2e9, 2e7)

    def test_out_of_bracket_raises(self):
        with pytest.raises(NoBracket):
            invert_g(1e6, TUNGSTEN, 2e9, 2e7)
