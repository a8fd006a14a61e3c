import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, stats

from cvmemory.bounds import eb_bound
from cvmemory.channels import photon_loss, random_non_gib_channel, synthesize_recalibration
from cvmemory.phasespace import GaussianChannel, identity_channel
from cvmemory.protocol import (
    ConsumedSystemError,
    EBViolationError,
    GaussianPrior,
    JointStrategy,
    OneWayLOCCStrategy,
    QuantumProbe,
    SmoothFlatPrior,
    eb_prior_mean_strategy,
    eb_shrinkage_strategy,
    generic_recalibrated_strategy,
    honest_strategy,
    respond,
    run_round,
    run_rounds,
    tailored_loss_strategy,
    witness_score,
)
from cvmemory.phasespace import coherent_state

from oracles import shrinkage_score

N = 200_000


def mc(strategy, sa, sb, rng, n=N):
    s = run_rounds(strategy, GaussianPrior(sa), GaussianPrior(sb), n, rng).score
    return s.mean(), s.std(ddof=1) / np.sqrt(n)


def close(mean, se, target, z=5):
    return abs(mean - target) < z * se


class TestPriors:
    def test_gaussian_variance(self, rng):
        a = GaussianPrior(3.0).sample(rng, N)
        assert np.allclose(a.var(axis=0), 4.5, rtol=5 * np.sqrt(2 / N))
        assert GaussianPrior(3.0).quadrature_variance == 4.5

    def test_gaussian_invalid(self):
        with pytest.raises(ValueError):
            GaussianPrior(0.0)

    @pytest.mark.parametrize("l, d", [(np.pi, np.pi), (4.0, 0.5), (10.0, 1.0)])
    def test_smoothflat_normalised(self, l, d):
        p = SmoothFlatPrior(l, d)
        a = (l + d) / 2
        one_d, _ = integrate.quad(p.density_1d, -a, a, points=[-(l - d) / 2, (l - d) / 2], limit=200)
        assert abs(one_d**2 - 1) < 1e-6

    def test_smoothflat_samples_follow_density(self, rng):
        p = SmoothFlatPrior(4.0, 1.0)
        x = p.sample(rng, 50_000)
        a = 2.5
        grid = np.linspace(-a, a, 4001)
        cdf = integrate.cumulative_trapezoid(p.density_1d(grid), grid, initial=0)
        for col in range(2):
            res = stats.kstest(x[:, col], lambda t: np.interp(t, grid, cdf))
            assert res.pvalue > 1e-4
        assert np.all(np.abs(x) <= a)

    def test_smoothflat_variance(self, rng):
        p = SmoothFlatPrior(4.0, 1.0)
        x = p.sample(rng, N)
        v = p.quadrature_variance
        assert np.allclose(x.var(axis=0), v, rtol=5 * np.sqrt(2 / N))

    def test_smoothflat_invalid(self):
        with pytest.raises(ValueError):
            SmoothFlatPrior(1.0, 2.0)


class TestScore:
    @given(v=st.lists(st.floats(-1e3, 1e3), min_size=6, max_size=6))
    def test_nonnegative_and_formula(self, v):
        a, b, xi = np.array(v[:2]), np.array(v[2:4]), np.array(v[4:])
        w = witness_score(a, b, xi)
        assert w >= 0
        assert w == pytest.approx((xi[0] - a[0] - b[0]) ** 2 + (xi[1] - a[1] + b[1]) ** 2)

    def test_run_round(self, rng):
        r = run_round(honest_strategy(), GaussianPrior(1.0), GaussianPrior(1.0), rng)
        assert r.score >= 0
        assert r.score == pytest.approx(witness_score(np.array(r.alpha), np.array(r.beta), np.array(r.xi)))


class TestHonest:
    def test_mean_score(self, rng):
        m, se = mc(honest_strategy(), 5, 5, rng)
        assert close(m, se, 1.0)

    def test_unbiased_with_half_variance(self, rng):
        alpha = rng.normal(size=(N, 2)) * 3
        beta = rng.normal(size=(N, 2)) * 3
        xi = respond(honest_strategy(), alpha, beta, rng)
        err = xi - np.stack([alpha[:, 0] + beta[:, 0], alpha[:, 1] - beta[:, 1]], axis=1)
        assert np.all(np.abs(err.mean(axis=0)) < 5 * np.sqrt(0.5 / N))
        assert np.allclose(err.var(axis=0), 0.5, rtol=5 * np.sqrt(2 / N))

    def test_fixed_inputs(self, rng):
        # any alpha, beta: expected score 1
        alpha = np.tile([2.0, -1.0], (N, 1))
        beta = np.tile([-0.5, 3.0], (N, 1))
        s = witness_score(alpha, beta, respond(honest_strategy(), alpha, beta, rng))
        assert close(s.mean(), s.std() / np.sqrt(N), 1.0)


class TestTailored:
    @pytest.mark.parametrize("eta, nu", [(0.8, 1.0), (0.8, 1.2), (1.0, 1.0), (0.6, 1 / 0.6)])
    def test_inverse_eta(self, rng, eta, nu):
        m, se = mc(tailored_loss_strategy(eta, nu), 5, 5, rng)
        assert close(m, se, 1 / eta)

    @pytest.mark.parametrize("eta, nu", [(0.0, 1.0), (1.2, 1.0), (0.5, 0.9), (0.5, 2.5)])
    def test_invalid(self, eta, nu):
        with pytest.raises(ValueError):
            tailored_loss_strategy(eta, nu)


class TestRecalibrated:
    @pytest.mark.parametrize("eta", [0.8, 0.6])
    def test_photon_loss(self, rng, eta):
        m, se = mc(generic_recalibrated_strategy(photon_loss(eta)), 5, 5, rng)
        assert close(m, se, 1 + 1 / (2 * eta))

    def test_random_memories_unbiased_and_below_two(self, rng):
        n = 100_000
        for _ in range(10):
            mem = random_non_gib_channel(rng)
            plan = synthesize_recalibration(mem)
            alpha = rng.normal(size=(n, 2)) * 3
            beta = rng.normal(size=(n, 2)) * 3
            xi = respond(generic_recalibrated_strategy(mem), alpha, beta, rng)
            ex = xi[:, 0] - alpha[:, 0] - beta[:, 0]
            assert abs(ex.mean()) < 5 * ex.std() / np.sqrt(n)
            s = witness_score(alpha, beta, xi)
            assert close(s.mean(), s.std() / np.sqrt(n), plan.predicted_witness)

    def test_gib_memory_rejected(self):
        with pytest.raises(ValueError):
            generic_recalibrated_strategy(photon_loss(0.4))


class TestEBStrategies:
    def test_shrinkage_oracle_values(self):
        assert shrinkage_score(2, 2) == pytest.approx(1.6)
        assert shrinkage_score(2, 2) == pytest.approx(eb_bound(2, 2))

    @pytest.mark.parametrize("sigma", [0.1, 2.0])
    def test_shrinkage(self, rng, sigma):
        m, se = mc(eb_shrinkage_strategy(sigma, sigma), sigma, sigma, rng)
        assert close(m, se, shrinkage_score(sigma, sigma))

    def test_shrinkage_beats_prior_mean_for_narrow_priors(self, rng):
        m, se = mc(eb_shrinkage_strategy(0.1, 0.1), 0.1, 0.1, rng)
        assert close(m, se, 0.02 / 1.01)
        p = GaussianPrior(0.1)
        m2, se2 = mc(eb_prior_mean_strategy(p, p), 0.1, 0.1, rng)
        assert close(m2, se2, 0.02)
        assert m < m2

    def test_prior_mean_unit(self, rng):
        p = GaussianPrior(1.0)
        m, se = mc(eb_prior_mean_strategy(p, p), 1.0, 1.0, rng)
        assert close(m, se, 2.0)

    def test_prior_mean_narrow(self, rng):
        p = GaussianPrior(1e-6)
        m, _ = mc(eb_prior_mean_strategy(p, p), 1e-6, 1e-6, rng)
        assert m < 1e-10

    @given(s=st.floats(0, 1e3))
    def test_prior_mean_dominated_by_bound(self, s):
        assert 2 * s**2 >= eb_bound(s, s)

    def test_prior_mean_sigma_squared_sum(self, rng):
        pa, pb = GaussianPrior(1.5), GaussianPrior(0.5)
        m, se = mc(eb_prior_mean_strategy(pa, pb), 1.5, 0.5, rng)
        assert close(m, se, 1.5**2 + 0.5**2)


class TestProbe:
    def test_single_measurement(self, rng):
        p = QuantumProbe(coherent_state(0, 0))
        p.heterodyne(0, rng)
        assert not p.is_open
        with pytest.raises(ConsumedSystemError):
            p.homodyne(0, "x", rng)
        with pytest.raises(ConsumedSystemError):
            p.apply(identity_channel())

    def test_join_spends_parts(self, rng):
        a, b = QuantumProbe(coherent_state(0, 0)), QuantumProbe(coherent_state(1, 1))
        j = a.join(b)
        assert j.n_modes == 2
        assert not a.is_open and not b.is_open

    def test_no_moment_access(self):
        p = QuantumProbe(coherent_state(1, 2))
        assert not hasattr(p, "disp") and not hasattr(p, "cov") and not hasattr(p, "__dict__")


class TestStructuralEB:
    """A one-way LOCC adversary cannot reach the alpha system after producing its record."""

    def test_stashed_probe_is_dead(self, rng):
        stash = {}

        def measure_alpha(probe, rng):
            stash["alpha"] = probe
            return np.zeros(probe.batch_shape + (2,))

        def estimate(record, beta_probe, rng):
            joint = stash["alpha"].join(beta_probe)
            return joint.quadratures([0, 3], rng)

        cheat = OneWayLOCCStrategy(measure_alpha, estimate, name="cheat")
        with pytest.raises(ConsumedSystemError):
            run_rounds(cheat, GaussianPrior(1.0), GaussianPrior(1.0), 10, rng)

    def test_quantum_record_rejected(self, rng):
        cheat = OneWayLOCCStrategy(lambda probe, rng: probe, lambda rec, b, rng: None, name="cheat")
        with pytest.raises(EBViolationError):
            run_rounds(cheat, GaussianPrior(1.0), GaussianPrior(1.0), 10, rng)

    def test_record_wrapped_probe_rejected(self, rng):
        cheat = OneWayLOCCStrategy(lambda probe, rng: [probe], lambda rec, b, rng: None, name="cheat")
        with pytest.raises(EBViolationError):
            run_rounds(cheat, GaussianPrior(1.0), GaussianPrior(1.0), 1, rng)

    def test_record_is_read_only(self, rng):
        def estimate(record, probe, rng):
            record[:] = 0.0
            return record

        s = OneWayLOCCStrategy(lambda probe, rng: probe.heterodyne(0, rng), estimate)
        with pytest.raises(ValueError):
            run_rounds(s, GaussianPrior(1.0), GaussianPrior(1.0), 4, rng)

    def test_estimate_has_no_alpha_parameter(self):
        import inspect

        params = inspect.signature(OneWayLOCCStrategy.__init__).parameters
        assert list(params)[1:3] == ["measure_alpha", "estimate"]

    def test_joint_strategy_order(self, rng):
        # beta's probe is created only after pre/memory/post acted on alpha: a
        # memory that erases alpha leaves only beta information in xi.
        erase = GaussianChannel(np.zeros((2, 2)), np.eye(2))
        s = JointStrategy(memory=erase)
        alpha = np.tile([5.0, 5.0], (N, 1))
        beta = np.zeros((N, 2))
        xi = respond(s, alpha, beta, rng)
        assert np.all(np.abs(xi.mean(axis=0)) < 5 * np.sqrt(1.0 / N))

    def test_unknown_strategy(self, rng):
        with pytest.raises(TypeError):
            respond(object(), np.zeros((1, 2)), np.zeros((1, 2)), rng)
