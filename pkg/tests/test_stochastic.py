import math
import warnings

import numpy as np
import pytest
from scipy import stats

from phasemollow.model import (
    BlochState,
    ModelParams,
    RegimeWarning,
    build_stochastic_generator,
    quadrature_rates,
)
from phasemollow.spectra import steady_state
from phasemollow.stochastic import (
    FitDegenerateError,
    OUConfig,
    OUTrajectory,
    StepSizeError,
    ensemble_average,
    fit_quadrature_decay,
    generate_ou,
    integrate_trajectory,
    max_stable_dt,
)
from phasemollow.validate import batch_estimate, ou_checks, ou_lag_statistics


@pytest.fixture(autouse=True)
def _quiet_regime():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RegimeWarning)
        yield


GROUND = BlochState(0.0, 0.0, -1.0)


class TestOU:
    def test_config_validation(self):
        with pytest.raises(ValueError):
            OUConfig(dt=0.0, n_steps=10)
        with pytest.raises(ValueError):
            OUConfig(dt=0.1, n_steps=0)
        with pytest.raises(ValueError):
            OUConfig(dt=0.1, n_steps=10, n_traj=0)

    def test_zero_strength(self):
        x = generate_ou(OUConfig(dt=1e-3, n_steps=1000), 0.0, 5.0).samples
        assert np.all(x == 0)

    def test_zero_bandwidth_rejected(self):
        with pytest.raises(ValueError):
            generate_ou(OUConfig(dt=1e-3, n_steps=10), 1.0, 0.0)

    def test_negative_strength_rejected(self):
        with pytest.raises(ValueError):
            generate_ou(OUConfig(dt=1e-3, n_steps=10), -1.0, 1.0)

    def test_reproducible(self):
        cfg = OUConfig(dt=1e-3, n_steps=500, seed=11)
        a = generate_ou(cfg, 2.0, 20.0, index=3).samples
        b = generate_ou(cfg, 2.0, 20.0, index=3).samples
        c = generate_ou(cfg, 2.0, 20.0, index=4).samples
        np.testing.assert_array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_moments(self):
        for check in ou_checks(2.0, 20.0, 5e-3, n_steps=10**6, seed=3):
            assert check.passed, check.line()

    def test_normal_marginal(self):
        x = generate_ou(OUConfig(dt=5e-3, n_steps=400_000, seed=9), 2.0, 20.0).samples
        # thin to roughly independent samples (one per 4 correlation times)
        z = x[:: int(4 / (20 * 5e-3))] / math.sqrt(40.0)
        assert stats.kstest(z, "norm").pvalue > 1e-3

    def test_lag_statistics(self):
        x = generate_ou(OUConfig(dt=1e-2, n_steps=500_000, seed=1), 1.0, 4.0).samples
        for lag, est, se in ou_lag_statistics(x, [0, 25, 50]):
            assert abs(est - 4.0 * math.exp(-4.0 * lag * 1e-2)) < 4 * se

    def test_batch_estimate(self):
        mean, se = batch_estimate(np.arange(1000.0), n_batches=10)
        assert mean == pytest.approx(499.5)
        assert se > 0

    def test_trajectory_validation(self):
        with pytest.raises(ValueError):
            OUTrajectory(np.zeros((2, 2)), 0.1)


class TestIntegration:
    def test_quiet_path_matches_generator(self):
        p = ModelParams(4.0, 1.0, 20.0, 2.0, 0.7)
        zero = ModelParams(4.0, 1.0, 20.0, 0.0, 0.7)
        dt = 1e-3
        path = OUTrajectory(np.zeros(10_000), dt)
        traj = integrate_trajectory(p, path, GROUND, record_every=100)
        exact = build_stochastic_generator(zero).propagate(GROUND.as_array(), traj.times)
        np.testing.assert_allclose(traj.states, exact, atol=1e-8)

    def test_free_decay(self):
        p = ModelParams(0.0, 1.0)
        dt = 1e-2
        traj = integrate_trajectory(p, OUTrajectory(np.zeros(500), dt), BlochState(1.0, 0.0, 0.0))
        np.testing.assert_allclose(traj.states[:, 0], np.exp(-traj.times), atol=1e-9)

    def test_rk4_order(self):
        p = ModelParams(5.0, 1.0, 1.0, 1.0, 0.4)
        exact = build_stochastic_generator(ModelParams(5.0, 1.0, 1.0, 0.0, 0.4)).propagate(
            GROUND.as_array(), 2.0)
        errs = []
        for dt in (0.02, 0.01):
            n = int(round(2.0 / dt))
            s = integrate_trajectory(p, OUTrajectory(np.zeros(n), dt), GROUND).states[-1]
            errs.append(np.max(np.abs(s - exact)))
        assert 8 <= errs[0] / errs[1] <= 32

    def test_step_size_guard(self):
        p = ModelParams(40.0, 1.0, 20.0, 2.0)
        assert max_stable_dt(p) == pytest.approx(2.5e-3)
        with pytest.raises(StepSizeError):
            integrate_trajectory(p, OUTrajectory(np.zeros(10), 3e-3), GROUND)

    def test_start_outside_ball(self):
        p = ModelParams(1.0)
        with pytest.raises(ValueError):
            integrate_trajectory(p, OUTrajectory(np.zeros(10), 1e-3), (1.0, 1.0, 0.0))

    def test_noisy_stays_in_ball(self):
        p = ModelParams(40.0, 1.0, 20.0, 2.0, 1.0)
        cfg = OUConfig(dt=2e-3, n_steps=2000)
        traj = integrate_trajectory(p, generate_ou(cfg, 2.0, 20.0), GROUND, record_every=10)
        assert np.max(np.linalg.norm(traj.states, axis=1)) <= 1 + 1e-6


class TestEnsemble:
    P = ModelParams(40.0, 1.0, 20.0, 2.0, math.pi / 3)

    def test_single_trajectory(self):
        cfg = OUConfig(dt=2e-3, n_steps=500, seed=4, n_traj=1)
        e = ensemble_average(self.P, cfg, GROUND, record_every=5)
        one = integrate_trajectory(self.P, generate_ou(cfg, 2.0, 20.0, index=0), GROUND, record_every=5)
        np.testing.assert_array_equal(e.mean, one.states)
        assert np.all(np.isinf(e.stderr))
        assert e.batch_means is None

    def test_independent_of_blocks_and_threads(self):
        cfg = OUConfig(dt=2e-3, n_steps=300, seed=7, n_traj=50)
        a = ensemble_average(self.P, cfg, GROUND, record_every=10, block_size=50)
        b = ensemble_average(self.P, cfg, GROUND, record_every=10, block_size=7, threads=3)
        np.testing.assert_allclose(a.mean, b.mean, rtol=0, atol=1e-15)
        np.testing.assert_allclose(a.stderr, b.stderr, rtol=0, atol=1e-15)

    def test_stderr_scaling(self):
        cfg = OUConfig(dt=2e-3, n_steps=500, seed=2, n_traj=2000)
        se_small = ensemble_average(self.P, cfg, GROUND, record_every=50).stderr[-1]
        cfg = OUConfig(dt=2e-3, n_steps=500, seed=2, n_traj=8000)
        se_large = ensemble_average(self.P, cfg, GROUND, record_every=50).stderr[-1]
        np.testing.assert_allclose(se_small / se_large, 2.0, rtol=0.2)

    def test_noiseless_has_zero_spread(self):
        p = self.P.replace(d_strength=0.0)
        e = ensemble_average(p, OUConfig(dt=2e-3, n_steps=200, n_traj=10), GROUND, record_every=20)
        assert np.max(e.stderr) < 1e-15

    def test_window_averages(self):
        cfg = OUConfig(dt=2e-3, n_steps=500, seed=2, n_traj=30)
        e = ensemble_average(self.P, cfg, GROUND, record_every=10, window=(0.5, 1.0))
        assert e.per_traj_window["values"].shape == (30, 3)
        with pytest.raises(ValueError):
            ensemble_average(self.P, cfg, GROUND, record_every=10, window=(5.0, 6.0))

    def test_step_guard(self):
        with pytest.raises(StepSizeError):
            ensemble_average(self.P, OUConfig(dt=0.01, n_steps=10, n_traj=2), GROUND)


class TestDecayFit:
    def test_noiseless_free_atom(self):
        p = ModelParams(0.0, 1.0)
        for which, b0 in (("x", (1.0, 0, 0)), ("y", (0, 1.0, 0))):
            e = ensemble_average(p, OUConfig(dt=1e-2, n_steps=800, n_traj=2), b0, record_every=5)
            fit = fit_quadrature_decay(e, which, envelope=False)
            assert fit.rate == pytest.approx(1.0, abs=1e-9)

    def test_needs_two_trajectories(self):
        p = ModelParams(0.0, 1.0)
        e = ensemble_average(p, OUConfig(dt=1e-2, n_steps=100, n_traj=1), (1.0, 0, 0))
        with pytest.raises(FitDegenerateError):
            fit_quadrature_decay(e)

    def test_bad_quadrature(self):
        p = ModelParams(0.0, 1.0)
        e = ensemble_average(p, OUConfig(dt=1e-2, n_steps=100, n_traj=2), (1.0, 0, 0))
        with pytest.raises(ValueError):
            fit_quadrature_decay(e, "z")

    def test_signal_below_noise(self):
        p = ModelParams(0.0, 1.0)
        e = ensemble_average(p, OUConfig(dt=1e-2, n_steps=100, n_traj=2), (0.0, 0, -1.0))
        with pytest.raises(FitDegenerateError):
            fit_quadrature_decay(e)

    def test_phase_zero_x_rate(self):
        # at phi = 0 the noise commutes with sigma_x, so gamma_x is exactly gamma
        p = ModelParams(40.0, 1.0, 20.0, 2.0, 0.0)
        e = ensemble_average(p, OUConfig(dt=2.5e-3, n_steps=4000, seed=1, n_traj=200), (1.0, 0, 0),
                             record_every=10)
        fit = fit_quadrature_decay(e, "x")
        assert fit.rate == pytest.approx(quadrature_rates(p).gamma_x, abs=max(3 * fit.stderr, 1e-8))

    def test_phase_half_pi_x_rate(self):
        p = ModelParams(40.0, 1.0, 20.0, 2.0, math.pi / 2)
        e = ensemble_average(p, OUConfig(dt=2.5e-3, n_steps=2000, seed=1, n_traj=2000), (1.0, 0, 0),
                             record_every=10)
        fit = fit_quadrature_decay(e, "x")
        assert quadrature_rates(p).gamma_x == pytest.approx(1.4)
        assert abs(fit.rate - 1.4) < 3 * fit.stderr
        assert fit.stderr < 0.02


class TestElimination:
    """Trajectory averages approach the effective generator as the noise bandwidth grows."""

    @staticmethod
    def window_inversion(params, n_traj=300, t_end=8.0):
        dt = max_stable_dt(params)
        cfg = OUConfig(dt=dt, n_steps=int(round(t_end / dt)), seed=5, n_traj=n_traj)
        e = ensemble_average(params, cfg, GROUND, record_every=20, window=(t_end / 2, t_end))
        vals = e.per_traj_window["values"][:, 2]
        return vals.mean(), vals.std(ddof=1) / math.sqrt(vals.size)

    @pytest.mark.parametrize("phi", [0.0, math.pi / 4])
    def test_inversion_converges_with_bandwidth(self, phi):
        errors = []
        for kappa in (20.0, 320.0):
            p = ModelParams(40.0, 1.0, kappa, 2.0, phi)
            measured, se = self.window_inversion(p)
            predicted = steady_state(build_stochastic_generator(p)).sz
            errors.append(abs(measured - predicted) / abs(predicted))
        assert errors[1] < errors[0]
        assert errors[1] < 0.01
