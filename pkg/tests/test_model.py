"""Prior/channel denoisers and model sampling against quadrature references."""

import numpy as np
import pytest

from emgvamp.model import (
    AwgnChannel,
    BernoulliGaussianPrior,
    CircularGaussianPrior,
    GaussianPrior,
    GlmModel,
    LinearOperator,
    PhaselessAwgnChannel,
    sample_model,
)

from oracles import (
    bernoulli_gaussian_denoise_ref,
    gaussian_product_denoise_ref,
    phaseless_denoise_ref,
    phaseless_loglike_ref,
)


class TestLinearOperator:
    def test_svd_reconstruction_and_unitarity(self):
        rng = np.random.default_rng(0)
        a = rng.standard_normal((12, 7)) + 1j * rng.standard_normal((12, 7))
        op = LinearOperator(a)
        u, s, vh = op.svd
        recon = (u * s) @ vh
        assert np.linalg.norm(recon - a) / np.linalg.norm(a) < 1e-10
        assert np.linalg.norm(u.conj().T @ u - np.eye(7)) < 1e-10
        assert np.linalg.norm(vh @ vh.conj().T - np.eye(7)) < 1e-10

    def test_rank_deficient_cut(self):
        a = np.ones((5, 3))
        op = LinearOperator(a)
        assert np.sum(op.svd[1] > 0) == 1

    def test_rejects_bad_matrix(self):
        with pytest.raises(ValueError):
            LinearOperator(np.ones(4))
        with pytest.raises(ValueError):
            LinearOperator(np.array([[1.0, np.nan]]))


class TestGaussianPriors:
    def test_circular_shrinkage_closed_form(self):
        nu_x, gamma = 2.0, 4.0
        prior = CircularGaussianPrior(0.0, nu_x)
        r = np.array([1.0 + 2.0j, -0.5j])
        res = prior.denoise(r, gamma)
        expect = r * nu_x / (nu_x + 1.0 / gamma)
        assert np.allclose(res.mean, expect, rtol=1e-14)
        assert res.avg_variance == pytest.approx(nu_x * (1 / gamma) / (nu_x + 1 / gamma), rel=1e-14)

    def test_real_shrinkage_matches_quadrature(self):
        prior = GaussianPrior(0.3, 1.7)
        r = 0.9
        gamma = 2.5
        res = prior.denoise(np.array([r]), gamma)
        # posterior of x under N(x; 0.3, 1.7) with measurement N(r; x, 1/gamma)
        v = 1 / (1 / 1.7 + gamma)
        m = v * (0.3 / 1.7 + gamma * r)
        assert res.mean[0] == pytest.approx(m, rel=1e-14)
        assert res.avg_variance == pytest.approx(v, rel=1e-14)

    def test_variance_nonincreasing_in_precision(self):
        prior = CircularGaussianPrior(0.0, 1.3)
        r = np.array([0.7 - 0.2j])
        vs = [prior.denoise(r, g).avg_variance for g in np.logspace(-3, 3, 13)]
        assert all(b <= a for a, b in zip(vs, vs[1:]))

    def test_rejects_nonpositive_gamma(self):
        with pytest.raises(ValueError):
            CircularGaussianPrior(0.0, 1.0).denoise(np.zeros(2, complex), 0.0)

    def test_variance_sanity_bound(self):
        rng = np.random.default_rng(31)
        for _ in range(20):
            gamma = rng.uniform(0.01, 50.0)
            var = rng.uniform(0.1, 5.0)
            r = rng.normal(size=4) + 1j * rng.normal(size=4)
            for prior in (
                CircularGaussianPrior(0.0, var),
                BernoulliGaussianPrior(rng.uniform(0.1, 1.0), var),
            ):
                res = prior.denoise(r, gamma)
                assert 0.0 < res.avg_variance <= 1.0 / gamma + var + 1e-12


class TestBernoulliGaussian:
    def test_sparsity_one_degenerates_exactly(self):
        nu_x, gamma = 1.7, 3.0
        r = np.array([0.4 + 0.1j, -2.0 + 1.0j, 0.0j])
        bg = BernoulliGaussianPrior(1.0, nu_x).denoise(r, gamma)
        cg = CircularGaussianPrior(0.0, nu_x).denoise(r, gamma)
        assert np.array_equal(bg.mean, cg.mean)
        assert bg.avg_variance == cg.avg_variance

    def test_scalar_against_quadrature(self):
        prior = BernoulliGaussianPrior(0.1, 1.0, complex_field=False)
        res = prior.denoise(np.array([2.0]), 4.0)
        m_ref, v_ref = bernoulli_gaussian_denoise_ref(2.0, 4.0, 0.1, 1.0)
        assert res.mean[0] == pytest.approx(m_ref, rel=1e-8)
        assert res.avg_variance == pytest.approx(v_ref, rel=1e-8)

    def test_random_instances_against_quadrature(self):
        rng = np.random.default_rng(5)
        for _ in range(25):
            lam = rng.uniform(0.05, 0.95)
            nu_x = rng.uniform(0.2, 3.0)
            gamma = rng.uniform(0.1, 20.0)
            r = rng.normal(scale=2.0)
            res = BernoulliGaussianPrior(lam, nu_x, complex_field=False).denoise(np.array([r]), gamma)
            m_ref, v_ref = bernoulli_gaussian_denoise_ref(r, gamma, lam, nu_x)
            scale = max(abs(m_ref), np.sqrt(v_ref))
            assert abs(res.mean[0] - m_ref) <= 1e-8 * scale
            assert res.avg_variance == pytest.approx(v_ref, rel=1e-7)

    def test_extreme_evidence_stays_finite(self):
        prior = BernoulliGaussianPrior(0.01, 1.0, complex_field=False)
        res = prior.denoise(np.array([50.0]), 1e6)
        assert np.isfinite(res.mean[0])
        assert res.avg_variance > 0

    def test_rejects_bad_sparsity(self):
        with pytest.raises(ValueError):
            BernoulliGaussianPrior(0.0, 1.0)
        with pytest.raises(ValueError):
            BernoulliGaussianPrior(1.5, 1.0)


class TestAwgnChannel:
    def test_conjugate_shrinkage(self):
        nu_w, tau = 0.5, 2.0
        ch = AwgnChannel(nu_w)
        y = np.array([1.0 + 1.0j])
        p = np.array([0.5 - 0.5j])
        res = ch.denoise(y, p, tau)
        expect = (y / nu_w + tau * p) / (1.0 / nu_w + tau)
        assert np.allclose(res.mean, expect, rtol=1e-14)

    @pytest.mark.parametrize("complex_field", [False, True])
    def test_against_quadrature(self, complex_field):
        rng = np.random.default_rng(9)
        for _ in range(10):
            nu = rng.uniform(0.05, 2.0)
            tau = rng.uniform(0.1, 10.0)
            if complex_field:
                y = rng.normal() + 1j * rng.normal()
                p = rng.normal() + 1j * rng.normal()
            else:
                y, p = rng.normal(), rng.normal()
            res = AwgnChannel(nu).denoise(np.array([y]), np.array([p]), tau)
            m_ref, v_ref = gaussian_product_denoise_ref(y, p, tau, nu, complex_field)
            assert abs(res.mean[0] - m_ref) <= 1e-8 * max(abs(m_ref), 1e-3)
            assert res.avg_variance == pytest.approx(v_ref, rel=1e-7)

    def test_loglike_real_is_gaussian(self):
        ch = AwgnChannel(2.0)
        val = ch.loglike(np.array([1.0]), np.array([0.0]))
        assert val[0] == pytest.approx(-0.5 * np.log(4.0 * np.pi) - 0.25, rel=1e-14)


class TestPhaselessChannel:
    def test_zero_pseudo_mean_gives_zero(self):
        ch = PhaselessAwgnChannel(0.5)
        res = ch.denoise(np.array([1.0, 2.0]), np.array([0.0j, 0.0j]), 1.0)
        assert np.all(res.mean == 0.0)

    def test_documented_instance_against_quadrature(self):
        ch = PhaselessAwgnChannel(0.25)
        res = ch.denoise(np.array([2.0]), np.array([1.5 + 0.5j]), 4.0)
        m_ref, v_ref = phaseless_denoise_ref(2.0, 1.5 + 0.5j, 4.0, 0.25)
        assert abs(res.mean[0] - m_ref) <= 1e-6 * abs(m_ref)
        assert res.avg_variance == pytest.approx(v_ref, rel=1e-6)

    def test_random_instances_against_quadrature(self):
        rng = np.random.default_rng(3)
        for _ in range(30):
            nu = rng.uniform(0.02, 2.0)
            tau = rng.uniform(0.05, 30.0)
            y = rng.uniform(0.0, 4.0)
            p = rng.normal() + 1j * rng.normal()
            res = PhaselessAwgnChannel(nu).denoise(np.array([y]), np.array([p]), tau)
            m_ref, v_ref = phaseless_denoise_ref(y, p, tau, nu)
            scale = max(abs(m_ref), np.sqrt(v_ref))
            assert abs(res.mean[0] - m_ref) <= 1e-6 * scale
            assert res.avg_variance == pytest.approx(v_ref, rel=1e-6)

    def test_output_phase_equals_input_phase(self):
        rng = np.random.default_rng(11)
        p = rng.normal(size=6) + 1j * rng.normal(size=6)
        y = np.abs(rng.normal(size=6)) + 0.5
        res = PhaselessAwgnChannel(0.3).denoise(y, p, 2.0)
        assert np.allclose(np.angle(res.mean), np.angle(p), atol=1e-12)

    def test_variance_nonincreasing_in_tau(self):
        ch = PhaselessAwgnChannel(0.4)
        y = np.array([1.5])
        p = np.array([1.0 + 0.3j])
        vs = [ch.denoise(y, p, t).avg_variance for t in np.logspace(-2, 3, 11)]
        assert all(b <= a * (1 + 1e-9) for a, b in zip(vs, vs[1:]))

    def test_variance_positive_and_below_second_moment(self):
        # the ring regime (small pseudo-prior modulus, large observation) can
        # push the posterior variance above the pseudo-prior variance, but it
        # is always dominated by the posterior second moment
        rng = np.random.default_rng(13)
        ch = PhaselessAwgnChannel(0.05)
        for _ in range(15):
            y = np.array([rng.uniform(0.1, 10.0)])
            p = np.array([0.05 * (rng.normal() + 1j * rng.normal())])
            tau = rng.uniform(0.05, 2.0)
            res = ch.denoise(y, p, tau)
            assert res.avg_variance > 0
            assert res.avg_variance <= y[0] ** 2 + 1.0 / tau + 1.0

    def test_rejects_negative_observations(self):
        ch = PhaselessAwgnChannel(1.0)
        with pytest.raises(ValueError):
            ch.denoise(np.array([-0.1]), np.array([0.0j]), 1.0)

    def test_loglike_zero_signal(self):
        ch = PhaselessAwgnChannel(0.5)
        val = ch.loglike(np.array([2.0]), np.array([0.0j]))
        assert val[0] == pytest.approx(np.log(2.0 * 2.0 / 0.5) - 4.0 / 0.5, rel=1e-14)

    def test_loglike_against_phase_integral(self):
        rng = np.random.default_rng(17)
        ch = PhaselessAwgnChannel(0.7)
        for _ in range(10):
            y = rng.uniform(0.2, 3.0)
            z = rng.normal() + 1j * rng.normal()
            got = ch.loglike(np.array([y]), np.array([z]))[0]
            assert got == pytest.approx(phaseless_loglike_ref(y, z, 0.7), rel=1e-8)

    def test_loglike_negative_observation_is_minus_inf(self):
        ch = PhaselessAwgnChannel(1.0)
        assert ch.loglike(np.array([-1.0]), np.array([1.0 + 0.0j]))[0] == -np.inf

    def test_loglike_finite_over_extreme_grid(self):
        ch_grid = [1e-6, 1e-2, 1.0, 1e2, 1e6]
        y_grid = [1e-6, 1.0, 1e3, 1e6]
        z_grid = [0.0, 1e-6, 1.0, 1e3, 1e6]
        for nu in ch_grid:
            ch = PhaselessAwgnChannel(nu)
            for y in y_grid:
                for az in z_grid:
                    val = ch.loglike(np.array([y]), np.array([az + 0.0j]))[0]
                    assert not np.isnan(val)
                    assert val < np.inf


class TestSampling:
    def _model(self, m=64, n=32, channel=None):
        rng = np.random.default_rng(123)
        a = (rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))) / np.sqrt(2 * n)
        return GlmModel(
            LinearOperator(a),
            CircularGaussianPrior(0.0, 1.0),
            channel or PhaselessAwgnChannel(0.1),
        )

    def test_deterministic_given_seed(self):
        model = self._model()
        x1, z1, y1 = sample_model(model, 42)
        x2, z2, y2 = sample_model(model, 42)
        assert np.array_equal(x1, x2)
        assert np.array_equal(z1, z2)
        assert np.array_equal(y1, y2)

    def test_prior_variance_matches_empirically(self):
        rng = np.random.default_rng(5)
        a = rng.standard_normal((1, 4096))
        model = GlmModel(LinearOperator(a), CircularGaussianPrior(0.0, 2.0), AwgnChannel(1.0))
        x, _, _ = sample_model(model, 7)
        assert np.mean(np.abs(x) ** 2) == pytest.approx(2.0, rel=0.05)

    def test_awgn_noise_variance_matches_empirically(self):
        rng = np.random.default_rng(6)
        n = 8
        a = rng.standard_normal((8192, n)) / np.sqrt(n)
        model = GlmModel(LinearOperator(a), GaussianPrior(0.0, 1.0), AwgnChannel(0.25))
        _, z, y = sample_model(model, 11)
        assert np.mean((y - z) ** 2) == pytest.approx(0.25, rel=0.05)

    def test_phaseless_requires_complex_output(self):
        a = np.ones((4, 2))
        with pytest.raises(ValueError):
            GlmModel(LinearOperator(a), GaussianPrior(0.0, 1.0), PhaselessAwgnChannel(0.1))
