import math

import numpy as np
import pytest

from afdm_isac import AfdmConfig, add_cpp, daft, idaft, remove_cpp
from afdm_isac.channel import (
    apply_channel_time,
    basis_grid,
    channel_matrix,
    sample_channel,
)
from afdm_isac.errors import ParameterError
from afdm_isac.estimator import (
    PriorModel,
    build_psi,
    channel_mse,
    effective_noise_covariance,
    equalize_demod,
    iterative_estimate,
    mmse_estimate,
    posterior_variances,
    reconstruct_channel,
    threshold_paths,
)
from afdm_isac.modem import Constellation, FrameSpec, map_bits, random_data_vector
from afdm_isac.pilots import proposed_pilot

from conftest import random_unit_symbols


CFG = AfdmConfig(n_sub=16, n_cpp=4, c1=1 / 8)
GRID = basis_grid(tau_m=2, nu_m=1)  # 9 basis paths


def transmit(x_p, x_d, cfg):
    return add_cpp(idaft(x_p + x_d, cfg), cfg)


def receive(s_cpp, real, cfg, rng=None):
    return daft(remove_cpp(apply_channel_time(s_cpp, real, cfg, rng), cfg), cfg)


class TestBuildPsi:
    def test_identity_column(self):
        x = np.zeros(16, dtype=complex)
        x[0] = 1.0
        psi = build_psi(x, GRID, CFG)
        i = GRID.index_of(0, 0)
        assert np.linalg.norm(psi[:, i] - x) < 1e-12

    def test_column_norms_equal_input_norm(self, rng):
        x = random_unit_symbols(rng, 16) * 1.7
        psi = build_psi(x, GRID, CFG)
        norms = np.linalg.norm(psi, axis=0)
        assert np.allclose(norms, np.linalg.norm(x), atol=1e-10)

    def test_proposed_pilot_columns_orthogonal(self):
        cfg = AfdmConfig(n_sub=64, n_cpp=16, c1=1 / 16)
        x_p = proposed_pilot(cfg, pilot_power=100.0, r=0)
        grid = basis_grid(tau_m=7, nu_m=2)
        psi = build_psi(x_p, grid, cfg)
        gram = psi.conj().T @ psi
        off = gram - np.diag(np.diag(gram))
        assert np.max(np.abs(off)) < 1e-10 * 100.0
        assert np.allclose(np.diag(gram).real, 100.0, atol=1e-9)


class TestEffectiveNoise:
    def test_no_data(self):
        assert effective_noise_covariance(np.ones(5) / 5, 0.0, 0.7) == pytest.approx(0.7)

    def test_unit_case(self):
        assert effective_noise_covariance(np.ones(4) / 4, 1.0, 1.0) == pytest.approx(2.0)

    def test_monte_carlo_covariance(self, rng):
        # sample covariance of the data-interference-plus-noise term
        from afdm_isac.estimator import _basis_stack

        n_draws = 40_000
        gain_var = np.full(len(GRID), 1.0 / len(GRID))
        stack = _basis_stack(CFG, GRID.tau_m, GRID.nu_m)
        pts = Constellation.QPSK.points
        x_d = pts[rng.integers(0, 4, size=(n_draws, 16))]
        alpha = (
            rng.standard_normal((n_draws, len(GRID)))
            + 1j * rng.standard_normal((n_draws, len(GRID)))
        ) * np.sqrt(gain_var / 2)
        shifted = np.einsum("ijk,nk->nij", stack, x_d)
        w = (rng.standard_normal((n_draws, 16)) + 1j * rng.standard_normal((n_draws, 16))) * math.sqrt(0.5)
        samples = np.einsum("ni,nij->nj", alpha, shifted) + w
        emp = samples.conj().T @ samples / n_draws
        model = effective_noise_covariance(gain_var, 1.0, 1.0) * np.eye(16)
        rel = np.linalg.norm(emp - model, 2) / np.linalg.norm(model, 2)
        assert rel < 0.05


class TestMmse:
    def test_zero_observation(self):
        psi = np.eye(4, dtype=complex)
        prior = PriorModel(np.ones(4), 1.0)
        assert np.all(mmse_estimate(np.zeros(4), psi, prior) == 0)

    def test_noiseless_ls_limit(self, rng):
        # orthogonal columns, no noise, flat prior: exact recovery
        cfg = AfdmConfig(n_sub=64, n_cpp=16, c1=1 / 16)
        x_p = proposed_pilot(cfg, pilot_power=100.0, r=0)
        grid = basis_grid(tau_m=3, nu_m=2)
        psi = build_psi(x_p, grid, cfg)
        alpha = (rng.standard_normal(len(grid)) + 1j * rng.standard_normal(len(grid))) / 4
        y = psi @ alpha
        est = mmse_estimate(y, psi, PriorModel(np.full(len(grid), np.inf), 0.0))
        assert np.linalg.norm(est - alpha) < 1e-8

    def test_matches_dense_oracle(self, rng):
        # direct dense evaluation of the regularized estimate
        x_p = random_unit_symbols(rng, 16) * 2.0
        psi = build_psi(x_p, GRID, CFG)
        alpha = (rng.standard_normal(9) + 1j * rng.standard_normal(9)) / 3
        y = psi @ alpha + 0.1 * (rng.standard_normal(16) + 1j * rng.standard_normal(16))
        c = 0.3
        g_var = np.full(9, 1 / 9)
        prior = PriorModel(g_var, c)
        est = mmse_estimate(y, psi, prior)
        c_w = c * np.eye(16)
        c_a = np.diag(g_var).astype(complex)
        oracle = (
            np.linalg.inv(psi.conj().T @ np.linalg.inv(c_w) @ psi + np.linalg.inv(c_a))
            @ psi.conj().T
            @ np.linalg.inv(c_w)
            @ y
        )
        assert np.linalg.norm(est - oracle) < 1e-10


class TestThreshold:
    def test_zero_eps_keeps_all(self):
        a = np.array([0.1, 1.0, 0.01j])
        assert np.all(threshold_paths(a, 0.0) == 1)

    def test_infinite_eps_drops_all(self):
        a = np.array([0.1, 1.0, 100.0])
        assert np.all(threshold_paths(a, np.inf) == 0)

    def test_calibrated_threshold_keeps_strong_paths(self, rng):
        # fixed-magnitude random-phase gains at 20 dB pilot SNR survive a
        # 3-sigma posterior threshold in at least 99% of trials
        cfg = AfdmConfig(n_sub=64, n_cpp=16, c1=1 / 16)
        grid = basis_grid(tau_m=3, nu_m=2)
        x_p = proposed_pilot(cfg, pilot_power=100.0, r=0)
        psi = build_psi(x_p, grid, cfg)
        noise = 1.0  # pilot SNR = 20 dB
        prior = PriorModel(np.full(len(grid), 1.0), noise)
        eps = 3.0 * np.sqrt(posterior_variances(psi, prior))
        l_true = 3
        kept_all = 0
        n_trials = 1000
        for _ in range(n_trials):
            idx = rng.choice(len(grid), l_true, replace=False)
            alpha = np.zeros(len(grid), dtype=complex)
            alpha[idx] = np.exp(2j * np.pi * rng.uniform(size=l_true)) / math.sqrt(l_true)
            w = (rng.standard_normal(64) + 1j * rng.standard_normal(64)) * math.sqrt(noise / 2)
            est = mmse_estimate(psi @ alpha + w, psi, prior)
            b = threshold_paths(est, eps)
            kept_all += int(np.all(b[idx] == 1))
        assert kept_all >= 0.99 * n_trials


class TestReconstruct:
    def test_zero_indicator(self):
        h = reconstruct_channel(np.ones(9), np.zeros(9), GRID, CFG)
        assert np.all(h == 0)

    def test_exact_on_true_support(self, rng):
        real = sample_channel(L=3, tau_m=2, nu_m=1, rng=rng)
        h_true = channel_matrix(real, CFG)
        alpha = np.zeros(9, dtype=complex)
        for p in real.paths:
            alpha[GRID.index_of(p.delay, int(p.doppler))] = p.gain
        h_rec = reconstruct_channel(alpha, np.ones(9), GRID, CFG)
        assert np.linalg.norm(h_rec - h_true) < 1e-10

    def test_matches_dense_oracle(self, rng):
        from afdm_isac.channel import basis_matrix

        alpha = rng.standard_normal(9) + 1j * rng.standard_normal(9)
        b = rng.integers(0, 2, 9)
        h = reconstruct_channel(alpha, b, GRID, CFG)
        oracle = sum(
            alpha[i] * b[i] * basis_matrix(CFG, tau, float(nu))
            for i, (tau, nu) in enumerate(GRID.pairs)
        )
        assert np.linalg.norm(h - oracle) < 1e-10


class TestEqualize:
    def test_identity_channel_no_noise(self, rng):
        spec = FrameSpec(0.0, 1.0, Constellation.QPSK)
        bits, x_d = random_data_vector(16, spec, rng)
        sym, out_bits = equalize_demod(x_d, np.eye(16, dtype=complex), np.zeros(16), spec, 0.0)
        assert np.linalg.norm(sym - x_d) < 1e-10
        assert np.array_equal(out_bits, bits)

    def test_ber_vanishes_with_perfect_csi(self, rng):
        spec = FrameSpec(0.0, 1.0, Constellation.QPSK)
        noise = 1e-4
        errors = 0
        total = 0
        for _ in range(200):
            real = sample_channel(L=3, tau_m=2, nu_m=1, rng=rng, noise_power=noise)
            h = channel_matrix(real, CFG)
            bits, x_d = random_data_vector(16, spec, rng)
            s_cpp = transmit(np.zeros(16), x_d, CFG)
            y = receive(s_cpp, real, CFG, rng)
            _, out_bits = equalize_demod(y, h, np.zeros(16), spec, noise)
            errors += np.sum(out_bits != bits)
            total += bits.size
        assert errors / total < 1e-3


class TestIterative:
    def make_setup(self, rng, noise_power, sigma_d2, pilot_power=100.0):
        cfg = AfdmConfig(n_sub=32, n_cpp=8, c1=5 / 32)
        grid = basis_grid(tau_m=2, nu_m=2)
        spec = FrameSpec(pilot_power, sigma_d2, Constellation.QPSK)
        x_p = proposed_pilot(
            AfdmConfig(n_sub=32, n_cpp=8, c1=8 / 64), pilot_power
        )  # power-of-two rate for the comb
        # use the comb pilot on the working config (same Nc)
        return cfg, grid, spec, x_p

    def test_single_iteration_equals_plain_mmse(self, rng):
        cfg = AfdmConfig(n_sub=32, n_cpp=8, c1=4 / 32)
        grid = basis_grid(tau_m=2, nu_m=1)
        spec = FrameSpec(100.0, 1.0, Constellation.QPSK)
        x_p = proposed_pilot(cfg, 100.0, r=0)
        real = sample_channel(L=3, tau_m=2, nu_m=1, rng=rng, noise_power=0.5)
        _, x_d = random_data_vector(32, spec, rng)
        y = receive(transmit(x_p, x_d, cfg), real, cfg, rng)
        prior = PriorModel.uniform(grid, 0.0)
        res = iterative_estimate(y, x_p, spec, grid, cfg, 0.5, n_iter=1, prior=prior)
        c = effective_noise_covariance(prior.gain_variances, 1.0, 0.5)
        direct = mmse_estimate(y, build_psi(x_p, grid, cfg), PriorModel(prior.gain_variances, c))
        assert np.linalg.norm(res.alpha_hat - direct) < 1e-12

    def test_exact_feedback_recovers_gains(self, rng):
        # no channel noise and genie data feedback: iteration 2 cancels the
        # data and the least-squares limit returns the exact gains (the
        # iteration-1 estimate only enters through a strongly suppressed
        # leakage term, so a dominant pilot makes the recovery exact)
        cfg = AfdmConfig(n_sub=64, n_cpp=16, c1=4 / 64)
        grid = basis_grid(tau_m=3, nu_m=1)
        spec = FrameSpec(1e12, 1.0, Constellation.QPSK)
        x_p = proposed_pilot(cfg, 1e12, r=0)
        real = sample_channel(L=2, tau_m=3, nu_m=1, rng=rng, noise_power=0.0)
        _, x_d = random_data_vector(64, spec, rng)
        y = receive(transmit(x_p, x_d, cfg), real, cfg)
        res = iterative_estimate(
            y, x_p, spec, grid, cfg, 0.0, n_iter=2, eps=0.0, known_data=x_d
        )
        alpha_true = np.zeros(len(grid), dtype=complex)
        for p in real.paths:
            alpha_true[grid.index_of(p.delay, int(p.doppler))] = p.gain
        assert np.linalg.norm(res.alpha_hat - alpha_true) < 1e-8

    def test_second_iteration_rarely_degrades(self, rng):
        # refinement with the default (conservative) threshold: cancelling
        # demodulated data must not worsen the estimate in >= 90% of trials
        cfg = AfdmConfig(n_sub=32, n_cpp=8, c1=4 / 32)
        grid = basis_grid(tau_m=2, nu_m=1)
        noise = 1.0
        sigma_d2 = 10 ** (15 / 10) * noise  # data SNR 15 dB
        spec = FrameSpec(100.0, sigma_d2, Constellation.QPSK)
        x_p = proposed_pilot(cfg, 100.0, r=0)
        non_degrading = 0
        n_trials = 300
        for _ in range(n_trials):
            real = sample_channel(L=3, tau_m=2, nu_m=1, rng=rng, noise_power=noise)
            h_true = channel_matrix(real, cfg)
            _, x_d = random_data_vector(32, spec, rng)
            y = receive(transmit(x_p, x_d, cfg), real, cfg, rng)
            res1 = iterative_estimate(y, x_p, spec, grid, cfg, noise, n_iter=1)
            res2 = iterative_estimate(y, x_p, spec, grid, cfg, noise, n_iter=2)
            if channel_mse(h_true, res2.h_eff_hat) <= channel_mse(h_true, res1.h_eff_hat) + 1e-12:
                non_degrading += 1
        assert non_degrading >= 0.9 * n_trials

    def test_pilot_power_monotonicity(self, rng):
        cfg = AfdmConfig(n_sub=32, n_cpp=8, c1=4 / 32)
        grid = basis_grid(tau_m=2, nu_m=1)
        noise = 1.0
        spec20 = FrameSpec(100.0, 1.0, Constellation.QPSK)
        spec30 = FrameSpec(1000.0, 1.0, Constellation.QPSK)
        mse20 = mse30 = 0.0
        n_trials = 400
        for i in range(n_trials):
            trial_rng = np.random.default_rng(1000 + i)
            real = sample_channel(L=3, tau_m=2, nu_m=1, rng=trial_rng, noise_power=noise)
            h_true = channel_matrix(real, cfg)
            _, x_d = random_data_vector(32, spec20, trial_rng)
            noise_draw = np.random.default_rng(5000 + i)
            for spec, x_p, acc in (
                (spec20, proposed_pilot(cfg, 100.0, r=0), "20"),
                (spec30, proposed_pilot(cfg, 1000.0, r=0), "30"),
            ):
                y = receive(transmit(x_p, x_d, cfg), real, cfg, np.random.default_rng(noise_draw.integers(2**32)))
                res = iterative_estimate(y, x_p, spec, grid, cfg, noise, n_iter=2)
                err = channel_mse(h_true, res.h_eff_hat)
                if acc == "20":
                    mse20 += err
                else:
                    mse30 += err
        assert mse30 < mse20

    def test_global_pilot_phase_equivariance(self, rng):
        cfg = AfdmConfig(n_sub=32, n_cpp=8, c1=4 / 32)
        grid = basis_grid(tau_m=2, nu_m=1)
        spec = FrameSpec(100.0, 0.0, Constellation.QPSK)
        x_p = proposed_pilot(cfg, 100.0, r=0)
        real = sample_channel(L=3, tau_m=2, nu_m=1, rng=rng, noise_power=0.0)
        phase = np.exp(0.7j)
        y1 = receive(transmit(x_p, np.zeros(32), cfg), real, cfg)
        y2 = receive(transmit(phase * x_p, np.zeros(32), cfg), real, cfg)
        res1 = iterative_estimate(y1, x_p, spec, grid, cfg, 0.0, n_iter=1, eps=0.0)
        res2 = iterative_estimate(y2, phase * x_p, spec, grid, cfg, 0.0, n_iter=1, eps=0.0)
        assert np.linalg.norm(res1.h_eff_hat - res2.h_eff_hat) < 1e-8
        assert np.linalg.norm(res2.alpha_hat - res1.alpha_hat) < 1e-8


class TestChannelMse:
    def test_identical(self):
        h = np.eye(4, dtype=complex)
        assert channel_mse(h, h) == 0.0

    def test_zero_estimate(self, rng):
        h = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        assert channel_mse(h, np.zeros_like(h)) == pytest.approx(np.linalg.norm(h))

    def test_rank_one_perturbation(self, rng):
        h = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        u = np.zeros((4, 4), dtype=complex)
        u[1, 2] = 3.0
        assert channel_mse(h, h + u) == pytest.approx(3.0)

    def test_shape_mismatch(self):
        with pytest.raises(ParameterError):
            channel_mse(np.eye(3), np.eye(4))
