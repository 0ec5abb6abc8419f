import math

import numpy as np
import pytest

import renewalops as ro
import renewalops.tauberian as tb
from renewalops.errors import DomainError


class TestFixedQuadratics:
    def test_majorant_quadratic(self):
        q = tb.OneSidedPoly("upper", 2, gap=0.0, b=np.array([0.0, 8.0, -7.0]))
        assert q.sign_check(10**4)
        assert q(np.array([1.0]))[0] == pytest.approx(1.0)
        assert q(np.array([0.0]))[0] == 0.0

    def test_minorant_quadratic(self):
        q = tb.OneSidedPoly("lower", 2, gap=0.0, b=np.array([0.0, -1.0, 2.0]))
        assert q.sign_check(10**4)
        assert q(np.array([1.0]))[0] == pytest.approx(1.0)


class TestIndicatorMajorant:
    @pytest.mark.parametrize("eps", [0.5, 0.1])
    def test_gap_meets_target(self, eps):
        p = tb.indicator_majorant(eps)
        assert 0.0 < p.gap < eps
        assert p(np.array([0.0]))[0] == 0.0

    def test_moment_gap_matches_quadrature(self):
        p = tb.indicator_majorant(0.5)
        assert tb._weighted_gap(p) == pytest.approx(p.gap, abs=5e-3)

    def test_degree_cap_reports_achievable(self):
        with pytest.raises(Exception) as exc:
            tb.indicator_majorant(0.1, degree_cap=512)
        assert "achievable" in str(exc.value)


class TestOneSidedFit:
    def test_minimizer_beats_fixed_quadratic(self):
        # the fixed quadratic is a feasible point of the degree-2 problem
        fit = tb.one_sided_fit(2, "upper")
        fixed = tb.OneSidedPoly("upper", 2, gap=0.0, b=np.array([0.0, 8.0, -7.0]))
        w = tb._basis_gap_moments(2, 0.5)
        fixed_gap = 8 * (w[0] + w[1]) / 2 - 7 * (3 * w[0] + 4 * w[1] + w[2]) / 8 - 1.0
        assert fit.gap <= fixed_gap + 1e-9

    def test_gap_and_coefficient_trends(self):
        gaps, sums = {}, {}
        for m in (4, 8, 16, 32):
            for side in ("upper", "lower"):
                p = tb.one_sided_fit(m, side)
                assert p.sign_check(10**4)
                if side == "upper":
                    gaps[m], sums[m] = p.gap, p.coefficient_sum()
        ms = sorted(gaps)
        assert all(gaps[b] < gaps[a] for a, b in zip(ms, ms[1:]))
        assert max(m * gaps[m] for m in ms) < 4.0
        # log coefficient sums grow about linearly in m: fit C2 and check sanity
        slope = np.polyfit(ms, [math.log(sums[m]) for m in ms], 1)[0]
        assert 0.5 < slope < 5.0  # C2 = e^slope is a finite constant > 1

    def test_monotone_refinement(self):
        g1 = tb.one_sided_fit(8, "upper").gap
        g2 = tb.one_sided_fit(16, "upper").gap
        assert g2 <= g1 + 1e-9

    def test_infeasible_degree(self):
        with pytest.raises(DomainError):
            tb.one_sided_fit(1, "upper")


class TestKernelParams:
    def test_window_constraint_checked(self):
        with pytest.raises(DomainError):
            tb.KernelParams(n=6, p=2, gamma_exp=0.49)

    def test_valid_params(self):
        kp = tb.KernelParams(n=100, p=2, gamma_exp=0.25)
        assert 1.0 - kp.r <= kp.alpha / 4.0


class TestKernelExtract:
    def test_constant_sequence(self):
        phi = lambda z: 1.0 / (1.0 - z)
        ke = tb.kernel_extract(phi, tb.KernelParams(n=100, p=2, gamma_exp=0.25))
        assert abs(ke.estimate - 97.0) <= ke.error_bar
        assert abs(ke.imag_part) < 1e-10

    def test_constant_sequence_tight_window(self):
        phi = lambda z: 1.0 / (1.0 - z)
        for n in (100, 500):
            ke = tb.kernel_extract(phi, tb.KernelParams(n=n, p=2, gamma_exp=0.4))
            direct = n - 4 + 1
            assert abs(ke.estimate - direct) / direct < 5e-3

    def test_delta_sequence(self):
        phi = lambda z: np.ones_like(np.asarray(z, dtype=complex))
        for n in (10, 20, 50):
            ke = tb.kernel_extract(phi, tb.KernelParams(n=n, p=2, gamma_exp=0.3))
            assert abs(ke.estimate - 1.0) <= ke.error_bar + 0.05

    def test_defect_bound_covers_three_sequences(self):
        seqs = {
            "ones": np.ones(600),
            "delta": np.concatenate([[1.0], np.zeros(599)]),
            "geometric": 0.97 ** np.arange(600),
        }
        for name, u in seqs.items():
            phi = tb.phi_from_sequence(u)
            for n in (50, 100, 500):
                params = tb.KernelParams(n=n, p=2, gamma_exp=0.25)
                ke = tb.kernel_extract(phi, params, seq_bound=float(np.max(np.abs(u))))
                direct = float(np.sum(u[: n - 3]))
                assert abs(ke.estimate - direct) <= ke.defect_bound + ke.quad_error, name

    def test_positivity_up_to_error(self):
        u = np.abs(np.sin(np.arange(300))) * 0.5
        phi = tb.phi_from_sequence(u)
        ke = tb.kernel_extract(phi, tb.KernelParams(n=80, p=2, gamma_exp=0.3),
                               seq_bound=0.5)
        assert ke.estimate >= -ke.error_bar

    def test_monomial_weight_decay(self):
        # raw window integral of z^s decays like the per-mode kernel weight
        params = tb.KernelParams(n=60, p=2, gamma_exp=0.3)
        n, p, r, alpha = params.n, params.p, params.r, params.alpha
        for s in (n + 5, n + 20, n + 80):
            def phi(z, s=s):
                return np.asarray(z, dtype=complex) ** s

            def integrand(t):
                z = r * np.exp(1j * t)
                eit = np.exp(1j * t)
                kern = ((eit - np.exp(1j * alpha)) ** p) * ((eit - np.exp(-1j * alpha)) ** p)
                return phi(z) / (1.0 - z) * kern * np.exp(-1j * n * t)

            val, _ = tb.adaptive_oscillatory_quad(integrand, -alpha, alpha, freq=n)
            weight = alpha ** (2 * p) / (alpha**p * abs(s - n) ** p + 1.0)
            assert abs(val) <= 10.0 * weight

    def test_sampled_resolvent_and_window_bounds(self):
        thetas = np.linspace(-np.pi / 2, np.pi / 2, 301)
        thetas = thetas[thetas != 0]
        assert tb.resolvent_bound_constant(50, thetas) <= 2.0
        assert tb.resolvent_bound_constant(500, thetas) <= 2.0
        for n in (50, 200, 1000):
            assert tb.window_weight_ratio(n, 0.25) <= 10.0


class TestTaubTheoremCheck:
    @staticmethod
    def binomial_sequence(gamma_exp, n_terms):
        u = np.empty(n_terms)
        u[0] = 1.0
        for j in range(1, n_terms):
            u[j] = u[j - 1] * (j - 1 + gamma_exp) / j
        return u

    def test_single_power_series(self):
        g = 0.8
        u = self.binomial_sequence(g, 20000)
        rep = tb.taub_theorem_check(u, [1.0], [g], n_grid=[100, 300, 1000, 3000, 10000])
        assert rep["fit"].slope < g / 2
        assert all(abs(h["residual"]) < 5.0 for h in rep["hypothesis"])

    def test_exact_partial_sums_identity(self):
        # hockey stick: sum_{j<n} u_j = Gamma(n+g) / (Gamma(1+g) Gamma(n))
        g = 0.8
        u = self.binomial_sequence(g, 512)
        lhs = float(np.sum(u[:200]))
        rhs = math.exp(math.lgamma(200 + g) - math.lgamma(1 + g) - math.lgamma(200))
        assert lhs == pytest.approx(rhs, rel=1e-12)

    def test_zero_sequence(self):
        rep = tb.taub_theorem_check(np.zeros(100), [], [], n_grid=[10, 20, 50])
        assert np.all(rep["conclusion_residual"] == 0.0)
        assert all(h["residual"] == 0 for h in rep["hypothesis"])

    def test_two_term_mixture(self):
        u = (self.binomial_sequence(0.8, 20000) + self.binomial_sequence(0.4, 20000))
        rep = tb.taub_theorem_check(u, [1.0, 1.0], [0.8, 0.4],
                                    n_grid=[100, 300, 1000, 3000, 10000])
        assert rep["fit"].slope < 0.4
        assert all(abs(h["residual"]) < 5.0 for h in rep["hypothesis"])


class TestContourIntegrals:
    def test_rotated_gamma_value(self):
        val, err = tb.rotated_gamma_integral(0.5, 1.0, 1.0, 1e3)
        assert abs(val - math.sqrt(math.pi)) <= 1e3**-0.5
        assert abs(val.imag) < 1e-7

    def test_rotated_gamma_small_index(self):
        val, _ = tb.rotated_gamma_integral(0.05, 1.0, 1.0, 1e3)
        assert abs(val - math.gamma(0.95)) < 1e-6

    def test_rotated_gamma_tail_trend(self):
        # in the oscillation-dominated regime the deviation decays like R^-beta
        devs = {}
        for r_hi in (1e2, 1e4):
            val, _ = tb.rotated_gamma_integral(0.5, 1e-6, 1.0, r_hi)
            devs[r_hi] = abs(val - math.gamma(0.5))
        ratio = devs[1e2] / devs[1e4]
        assert 3.0 < ratio < 33.0  # 10^{2 beta} = 10 up to oscillation envelope

    @pytest.mark.parametrize("beta", [0.3, 0.5, 0.7])
    def test_line_power_closed_form(self, beta):
        res = tb.line_power_integral(beta)
        assert res.abs_error < 1e-6
        assert abs(res.imag_part) < 1e-8

    def test_line_power_ratio_between_betas(self):
        r3 = tb.line_power_integral(0.3)
        r7 = tb.line_power_integral(0.7)
        assert r3.value / r7.value == pytest.approx(
            math.gamma(1.7) / math.gamma(1.3), rel=1e-6)

    def test_window_power_main_term(self):
        res = tb.window_power_integral(0.5, 0.25, 10**4)
        expect = 2.0 * math.pi / math.e * 100.0 / math.gamma(1.5)
        assert res.main_term == pytest.approx(expect, rel=1e-12)
        assert res.deviation <= (10**4) ** (0.5 * 0.25)

    def test_window_power_deviation_bounded_by_stated_rate(self):
        devs = []
        ns = (10**2, 10**3, 10**4)
        for n in ns:
            res = tb.window_power_integral(0.5, 0.25, n)
            devs.append(res.deviation)
            assert res.deviation <= n ** (0.5 * 0.25)
        fit = ro.slope_fit(np.array(ns, float), np.array(devs))
        assert fit.slope <= 0.5 * 0.25 + 0.1

    def test_window_power_reduces_to_line_integral(self):
        # rho = 1: the window integral is n times the truncated line integral
        n, g = 100, 0.25
        res = tb.window_power_integral(1.0, g, n)
        core, _ = tb._finite_line_integral(2.0, float(n) ** (1 - g))
        assert res.value == pytest.approx(n * core, rel=1e-9)
        assert abs(res.value.real - res.main_term) <= 2.0 * n ** (1.0 * g)
