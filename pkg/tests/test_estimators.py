import numpy as np
import pytest

from isacsim.channel import SystemConfig, draw_comm_channels, draw_sensing_channel
from isacsim.estimators import ls_comm, ls_sense, nmse
from isacsim.numerics import RngStream, db_to_linear
from isacsim.protocol import (build_pilots, receive_sensing, receive_user,
                              sensing_noise_var, user_noise_var)


class TestNmse:
    def test_perfect_estimate(self, rng, small_system):
        A, _ = draw_sensing_channel(small_system, rng)
        assert nmse(A, A) == 0.0

    def test_zero_estimate(self, rng, small_system):
        A, _ = draw_sensing_channel(small_system, rng)
        assert nmse(np.zeros_like(A), A) == pytest.approx(1.0)

    def test_double_estimate(self, rng, small_system):
        A, _ = draw_sensing_channel(small_system, rng)
        assert nmse(2 * A, A) == pytest.approx(1.0)

    def test_zero_truth_rejected(self):
        with pytest.raises(ValueError):
            nmse(np.ones((2, 2)), np.zeros((2, 2)))

    def test_unitary_invariance(self, rng):
        from isacsim.numerics import randn_complex
        E = randn_complex(4, 4, 1.0, rng)
        T = randn_complex(4, 4, 1.0, rng)
        Q, _ = np.linalg.qr(randn_complex(4, 4, 1.0, rng))
        assert nmse(Q @ E, Q @ T) == pytest.approx(nmse(E, T), rel=1e-10)


class TestNoiselessExactness:
    def test_sensing(self, rng):
        cfg = SystemConfig(m=4, l=8)
        pilots = build_pilots(cfg)
        A, _ = draw_sensing_channel(cfg, rng)
        frames = receive_sensing(A, pilots, 0.0, rng)
        np.testing.assert_allclose(ls_sense(frames, pilots), A, atol=1e-12)

    def test_comm(self, rng):
        cfg = SystemConfig(m=4, l=8)
        pilots = build_pilots(cfg)
        _, _, b_list = draw_comm_channels(cfg, rng)
        frames = receive_user(b_list[0], pilots, 0.0, rng)
        assert nmse(ls_comm(frames, pilots), b_list[0]) <= 1e-10

    def test_comm_degenerate_single_element(self, rng):
        cfg = SystemConfig(m=2, l=1)
        pilots = build_pilots(cfg)
        _, _, b_list = draw_comm_channels(cfg, rng)
        frames = receive_user(b_list[0], pilots, 0.0, rng)
        assert nmse(ls_comm(frames, pilots), b_list[0]) <= 1e-10


class TestAveragingGain:
    def test_one_vs_eight_subframes(self):
        # fixed noise level: eight sub-frame averages cut the NMSE by 8
        snr_db = 10.0
        trials = 4000
        results = {}
        for l_val in (1, 8):
            cfg = SystemConfig(m=2, l=l_val)
            pilots = build_pilots(cfg)
            sigma2 = sensing_noise_var(cfg, snr_db)
            root = RngStream(31)
            acc = []
            for i in range(trials):
                st = root.child(i)
                A, _ = draw_sensing_channel(cfg, st)
                fr = receive_sensing(A, pilots, sigma2, st)
                acc.append(nmse(ls_sense(fr, pilots), A))
            results[l_val] = np.mean(acc)
        assert results[1] / results[8] == pytest.approx(8.0, rel=0.05)


class TestMonteCarloLevels:
    def test_sensing_matches_subframe_count(self):
        # quick statistical check; the full-tolerance sweep lives in the
        # acceptance suite
        cfg = SystemConfig(m=2, l=6)
        pilots = build_pilots(cfg)
        snr_db = 5.0
        sigma2 = sensing_noise_var(cfg, snr_db)
        root = RngStream(17)
        acc = []
        for i in range(3000):
            st = root.child(i)
            A, _ = draw_sensing_channel(cfg, st)
            fr = receive_sensing(A, pilots, sigma2, st)
            acc.append(nmse(ls_sense(fr, pilots), A))
        oracle = 1.0 / (cfg.c * db_to_linear(snr_db))
        assert np.mean(acc) == pytest.approx(oracle, rel=0.06)

    def test_comm_matches_element_count(self):
        cfg = SystemConfig(m=2, l=12)
        pilots = build_pilots(cfg)
        snr_db = 5.0
        vs2 = user_noise_var(cfg, snr_db)
        root = RngStream(19)
        acc = []
        for i in range(3000):
            st = root.child(i)
            _, _, b_list = draw_comm_channels(cfg, st)
            fr = receive_user(b_list[0], pilots, vs2, st)
            acc.append(nmse(ls_comm(fr, pilots), b_list[0]))
        oracle = 1.0 / (cfg.l * db_to_linear(snr_db))
        # small upward bias from averaging 1/||B||^2 over realizations
        assert np.mean(acc) == pytest.approx(oracle, rel=0.12)
