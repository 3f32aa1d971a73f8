"""Decay-clock trajectories, band gadget, readout bounds, decode windows.

Frozen constants (time error bounds, good-probability deficit, window
integers) were computed once from the closed-form expressions with
independently checked inputs and pinned here.
"""

import math

import numpy as np
import pytest

from qmemsim.clock import (ClockCheckpoints, ClockParams, ClockTrajectory,
                           DegenerateWindowError, LevelWindow, checkpoint_times,
                           deterministic_passage, exit_statistics, first_exit,
                           good_prob_bound, is_good, max_time_error,
                           mean_polarization, polarization_variance,
                           sample_count_matrix, sample_trajectory,
                           sample_trajectory_checkpointed, time_error_bound,
                           time_estimate, vertical_exit_rate_bound,
                           window_passage, window_schedule)
from qmemsim.bounds import clock_size_for
from qmemsim.pauli import RngStream

REF = ClockParams(n_bits=4096, epsilon=0.4, t_max=2.0, rate_r=1.0)


def no_flip_trajectory(params, horizon):
    return ClockTrajectory(times=np.empty(0), steps=np.empty(0, dtype=np.int8),
                           n_bits=params.n_bits, horizon=horizon)


@pytest.mark.parametrize("kwargs", [
    dict(n_bits=15), dict(epsilon=0.0), dict(epsilon=0.5), dict(epsilon=-0.1),
    dict(t_max=0.0), dict(rate_r=0.0), dict(rate_r=-1.0),
])
def test_params_validation(kwargs):
    base = dict(n_bits=64, epsilon=0.25, t_max=1.0, rate_r=1.0)
    base.update(kwargs)
    with pytest.raises(ValueError):
        ClockParams(**base)


def test_minimum_register_size_allowed():
    p = ClockParams(n_bits=16, epsilon=0.25, t_max=1.0, rate_r=1.0)
    assert p.band_half_width == pytest.approx(16.0 ** 0.75)


def test_band_half_width():
    assert REF.band_half_width == pytest.approx(4096.0 ** 0.9, rel=1e-15)


def test_mean_and_variance_formulas():
    assert mean_polarization(0.0, REF) == 4096.0
    assert mean_polarization(1.0, REF) == pytest.approx(4096.0 * math.exp(-1.0))
    assert polarization_variance(0.0, REF) == 0.0
    assert polarization_variance(2.0, REF) == pytest.approx(
        4096.0 * (1.0 - math.exp(-4.0)))
    # variance equals 4 K q (1 - q) for the binomial bit count
    q = (1.0 - math.exp(-0.7)) / 2.0
    assert polarization_variance(0.7, REF) == pytest.approx(
        4.0 * 4096.0 * q * (1.0 - q), rel=1e-12)


def test_time_estimate_inversion_and_clamps():
    for t in (0.1, 0.5, 1.7):
        assert time_estimate(mean_polarization(t, REF), REF) == pytest.approx(
            t, abs=1e-12)
    assert time_estimate(0, REF) == REF.t_max
    assert time_estimate(-3, REF) == REF.t_max
    assert time_estimate(REF.n_bits, REF) == 0.0
    assert time_estimate(1e-9, REF) == REF.t_max  # clamp beats huge log
    est = time_estimate(np.array([4096, 0, 2048]), REF)
    assert est.shape == (3,)
    assert est[1] == REF.t_max


def test_time_error_bound_frozen():
    assert time_error_bound(REF) == pytest.approx(3.21627347457537, rel=1e-12)
    big = ClockParams(n_bits=100_000_000, epsilon=0.25, t_max=2.0, rate_r=1.0)
    # r K^{1/4} = 100 exactly, so the bound is e^2 / 100
    assert time_error_bound(big) == pytest.approx(0.0738905609893065, rel=1e-12)
    assert time_error_bound(big) == pytest.approx(math.exp(2.0) / 100.0, rel=1e-14)


def test_good_prob_bound_frozen_and_vacuous_flag():
    gpb = good_prob_bound(REF)
    assert gpb.value == 1.0  # deficit underflows the subtraction
    assert gpb.deficit == pytest.approx(6.085273776041149e-39, rel=1e-12)
    assert not gpb.vacuous
    # huge register: deficit is exactly 0 in float
    big = ClockParams(n_bits=100_000_000, epsilon=0.25, t_max=2.0, rate_r=1.0)
    gpb_big = good_prob_bound(big)
    assert gpb_big.value == 1.0 and gpb_big.deficit == 0.0
    # tiny register: the bound goes negative and must be flagged, not raised
    weak = good_prob_bound(ClockParams(n_bits=64, epsilon=0.1, t_max=1.0,
                                       rate_r=1.0))
    assert weak.value < 0.0 and weak.vacuous


def test_vertical_exit_rate_bound_monotone_in_register():
    small = ClockParams(n_bits=4096, epsilon=0.4, t_max=2.0, rate_r=1.0)
    large = ClockParams(n_bits=8192, epsilon=0.4, t_max=2.0, rate_r=1.0)
    assert vertical_exit_rate_bound(large) < vertical_exit_rate_bound(small)
    assert vertical_exit_rate_bound(small) < 1e-30


def test_clock_size_for_frozen_and_semantics():
    # tau = 0, r = 1, delta = 0.1: base 20, exponents 3 and 4
    assert clock_size_for(0.0, 1.0, 0.1, 1.0 / 6.0) == 8000
    assert clock_size_for(0.0, 1.0, 0.1, 0.25) == 160_000
    assert clock_size_for(0.0, 1.0, 1e6, 0.25) == 16  # clamped to minimum
    with pytest.raises(ValueError):
        clock_size_for(1.0, 1.0, 0.0, 0.25)
    gen = RngStream(12).generator()
    for _ in range(100):
        tau = float(gen.uniform(0.0, 2.0))
        r = float(gen.uniform(0.5, 2.0))
        delta = float(gen.uniform(1e-4, 1e-1))
        eps = float(gen.uniform(0.05, 0.45))
        k = clock_size_for(tau, r, delta, eps)
        sized = ClockParams(n_bits=k, epsilon=eps, t_max=tau or 1e-9, rate_r=r)
        assert 2.0 * time_error_bound(sized) <= delta * (1.0 + 1e-9)
        if k // 2 >= 16:
            half = ClockParams(n_bits=k // 2, epsilon=eps, t_max=tau or 1e-9,
                               rate_r=r)
            assert 2.0 * time_error_bound(half) > delta


def test_sample_trajectory_structure():
    params = ClockParams(n_bits=64, epsilon=0.25, t_max=1.0, rate_r=1.0)
    traj = sample_trajectory(params, horizon=1.5, rng=RngStream(7))
    assert np.all(np.diff(traj.times) >= 0)
    assert traj.times.size == 0 or (traj.times[0] >= 0 and traj.times[-1] <= 1.5)
    assert set(np.unique(traj.steps)).issubset({-2, 2})
    # a fresh register's first flip is always downward
    if len(traj):
        assert traj.steps[0] == -2
    assert np.abs(traj.k_values).max() <= 64
    with pytest.raises(ValueError):
        sample_trajectory(params, horizon=0.0, rng=RngStream(1))


def test_trajectory_parity_and_k_at():
    params = ClockParams(n_bits=64, epsilon=0.25, t_max=1.0, rate_r=1.0)
    traj = sample_trajectory(params, horizon=1.0, rng=RngStream(8))
    ks = traj.k_at(np.linspace(0.0, 1.0, 17))
    assert np.all((64 - ks) % 2 == 0)  # steps of +-2 preserve parity
    assert traj.k_at(0.0) == 64
    starts, ends, values = traj.pieces(upto=1.0)
    assert starts[0] == 0.0 and ends[-1] == 1.0
    assert np.all(starts[1:] == ends[:-1])
    mid = (starts + ends) / 2.0
    assert np.array_equal(traj.k_at(mid), values)


def test_trajectory_marginal_moments():
    params = ClockParams(n_bits=64, epsilon=0.25, t_max=2.0, rate_r=1.0)
    trials, t_obs = 3000, 0.7
    ks = np.array([sample_trajectory(params, 1.5, RngStream(21, key=(i,))).k_at(t_obs)
                   for i in range(trials)], dtype=float)
    mean = mean_polarization(t_obs, params)
    var = polarization_variance(t_obs, params)
    assert abs(ks.mean() - mean) < 5.0 * math.sqrt(var / trials)
    assert abs(ks.var() - var) < 0.15 * var


def test_trajectory_conditional_decay():
    # given k(t1), the mean of k(t2) is k(t1) e^{-r (t2 - t1)}
    params = ClockParams(n_bits=64, epsilon=0.25, t_max=2.0, rate_r=1.0)
    trials, t1, t2 = 3000, 0.4, 1.0
    resid = np.empty(trials)
    for i in range(trials):
        traj = sample_trajectory(params, 1.5, RngStream(22, key=(i,)))
        resid[i] = traj.k_at(t2) - traj.k_at(t1) * math.exp(-(t2 - t1))
    assert abs(resid.mean()) < 4.0 * resid.std(ddof=1) / math.sqrt(trials)


def test_expected_flip_count():
    # each bit flips at Poisson rate r/2, so total events ~ K r h / 2
    params = ClockParams(n_bits=256, epsilon=0.25, t_max=2.0, rate_r=1.0)
    counts = [len(sample_trajectory(params, 2.0, RngStream(23, key=(i,))))
              for i in range(200)]
    expected = 256 * 1.0 * 2.0 / 2.0
    sigma = math.sqrt(expected / 200)
    assert abs(np.mean(counts) - expected) < 5.0 * sigma


def test_checkpoint_times_grid():
    times = checkpoint_times(0.3, 1.0)
    assert times.tolist() == pytest.approx([0.0, 0.3, 0.6, 0.9, 1.0])
    exact = checkpoint_times(0.25, 1.0)
    assert exact.tolist() == pytest.approx([0.0, 0.25, 0.5, 0.75, 1.0])
    assert exact[-1] == 1.0
    with pytest.raises(ValueError):
        checkpoint_times(0.0, 1.0)
    with pytest.raises(ValueError):
        checkpoint_times(2.0, 1.0)


def test_count_matrix_moments():
    params = ClockParams(n_bits=256, epsilon=0.25, t_max=2.0, rate_r=1.0)
    times = np.array([0.5, 1.0])
    n = sample_count_matrix(params, times, 4000, RngStream(24))
    assert n.shape == (4000, 2)
    for c, t in enumerate(times):
        k = 2 * n[:, c] - 256
        mean = mean_polarization(t, params)
        var = polarization_variance(t, params)
        assert abs(k.mean() - mean) < 5.0 * math.sqrt(var / 4000)
    with pytest.raises(ValueError):
        sample_count_matrix(params, np.array([1.0, 0.5]), 10, RngStream(1))


def test_checkpointed_trajectory():
    params = ClockParams(n_bits=4096, epsilon=0.4, t_max=2.0, rate_r=1.0)
    traj = sample_trajectory_checkpointed(params, 0.05, 2.0, RngStream(25))
    assert isinstance(traj, ClockCheckpoints)
    assert traj.times[0] == 0.0 and traj.k_values[0] == 4096
    assert traj.times[-1] == 2.0
    assert isinstance(is_good(traj, params), bool)
    assert max_time_error(traj, params) >= 0.0


def test_is_good_requires_coverage():
    traj = no_flip_trajectory(REF, horizon=1.0)
    with pytest.raises(ValueError):
        is_good(traj, REF)


def test_no_flip_trajectory_exits_horizontally():
    traj = no_flip_trajectory(REF, horizon=2.0)
    assert not is_good(traj, REF)
    exit_ = first_exit(traj, REF)
    assert exit_ is not None
    t_star = math.log(4096.0 / (4096.0 - REF.band_half_width))
    assert exit_[1] == "horizontal"
    assert exit_[0] == pytest.approx(t_star, rel=1e-12)
    # constant k = K estimates time 0 forever: worst error is t_max
    assert max_time_error(traj, REF) == pytest.approx(REF.t_max)


def test_crafted_vertical_exit():
    # one huge downward jump at t = 0.1 lands far below the band
    traj = ClockTrajectory(times=np.array([0.1]),
                           steps=np.array([-3000], dtype=np.int64),
                           n_bits=4096, horizon=2.0)
    exit_ = first_exit(traj, REF)
    assert exit_ == (pytest.approx(0.1), "vertical")
    assert not is_good(traj, REF)


def test_good_trajectory_within_band():
    # follow the mean closely: stay good, no exit, small time error
    params = ClockParams(n_bits=4096, epsilon=0.4, t_max=0.5, rate_r=1.0)
    times = np.linspace(0.001, 0.5, 400)
    steps = np.full(400, -2, dtype=np.int64)  # k falls 4096 -> 3296
    traj = ClockTrajectory(times=times, steps=steps, n_bits=4096, horizon=0.5)
    assert is_good(traj, params)
    assert first_exit(traj, params) is None
    assert max_time_error(traj, params) <= time_error_bound(params)


def test_exit_statistics_partition():
    params = ClockParams(n_bits=64, epsilon=0.1, t_max=1.0, rate_r=1.0)
    trajs = [sample_trajectory(params, 1.0, RngStream(26, key=(i,)))
             for i in range(200)]
    stats = exit_statistics(trajs, params)
    assert stats.n_good + stats.n_vertical + stats.n_horizontal == 200
    assert stats.good_fraction == stats.n_good / 200
    assert stats.vertical_rate == stats.n_vertical / 200.0
    with pytest.raises(ValueError):
        exit_statistics([], params)


def test_monte_carlo_respects_bounds():
    # theorem bounds must hold empirically where they are non-vacuous
    trajs = [sample_trajectory(REF, 2.0, RngStream(27, key=(i,)))
             for i in range(300)]
    stats = exit_statistics(trajs, REF)
    gpb = good_prob_bound(REF)
    assert not gpb.vacuous
    assert stats.good_fraction >= gpb.value - 3.0 * math.sqrt(
        gpb.deficit) - 1e-12
    delta_half = time_error_bound(REF)
    for traj in trajs:
        if is_good(traj, REF):
            assert max_time_error(traj, REF) <= delta_half


def test_large_register_readout_accuracy():
    # checkpointed large-K mode: good paths read time to within the bound
    params = ClockParams(n_bits=100_000_000, epsilon=0.25, t_max=2.0,
                         rate_r=1.0)
    delta_half = time_error_bound(params)
    n_good = 0
    for i in range(50):
        traj = sample_trajectory_checkpointed(params, 0.01, 2.0,
                                              RngStream(28, key=(i,)))
        if is_good(traj, params):
            n_good += 1
            assert max_time_error(traj, params) <= delta_half
    assert n_good == 50  # fluctuations ~ 1e4 vs band ~ 3e5


def test_window_schedule_frozen_example():
    params = ClockParams(n_bits=1_000_000, epsilon=1.0 / 6.0, t_max=1.0,
                         rate_r=1.0)
    sched = window_schedule(4, t_prot=0.025, t_dec=0.00125, params=params)
    assert len(sched) == 4
    first = sched.windows[0]
    assert first.level == 1 and first.t_start == pytest.approx(0.025)
    assert first.k_on == 975309  # floor(1e6 e^{-0.025})
    for w in sched:
        assert w.k_on > w.k_off
    for earlier, later in zip(sched.windows, sched.windows[1:]):
        assert later.k_on < earlier.k_off


@pytest.mark.parametrize("n_bits", [100_000, 1_000_000])
@pytest.mark.parametrize("t_dec", [0.00125, 0.005])
def test_window_schedule_disjoint(n_bits, t_dec):
    params = ClockParams(n_bits=n_bits, epsilon=1.0 / 6.0, t_max=1.0,
                         rate_r=1.0)
    sched = window_schedule(8, t_prot=0.025, t_dec=t_dec, params=params)
    for earlier, later in zip(sched.windows, sched.windows[1:]):
        assert later.k_on < earlier.k_off


def test_window_schedule_degenerate():
    # a 16-bit clock cannot resolve millisecond windows
    params = ClockParams(n_bits=16, epsilon=0.25, t_max=1.0, rate_r=1.0)
    with pytest.raises(DegenerateWindowError):
        window_schedule(1, t_prot=0.025, t_dec=0.00125, params=params)
    with pytest.raises(ValueError):
        window_schedule(0, t_prot=0.025, t_dec=0.00125, params=params)


def test_window_passage_crafted():
    window = LevelWindow(level=1, t_start=0.2, k_on=30, k_off=28)
    traj = ClockTrajectory(times=np.array([0.2, 0.4, 1.0, 1.2]),
                           steps=np.array([-2, -2, 2, -2], dtype=np.int64),
                           n_bits=32, horizon=2.0)
    # in-window pieces: [0.2,0.4] k=30, [0.4,1.0] k=28, [1.0,1.2] k=30,
    # [1.2,2.0] k=28; active time accumulates 0.5 at t = 0.7
    decode, total = window_passage(traj, window, t_dec=0.5)
    assert decode == pytest.approx(0.7)
    assert total == pytest.approx(1.8)
    # dwell shorter than t_dec: decode at the last exit from the window
    decode, total = window_passage(traj, window, t_dec=5.0)
    assert decode == pytest.approx(2.0)
    # window never entered
    never = LevelWindow(level=1, t_start=0.2, k_on=20, k_off=18)
    assert window_passage(traj, never, t_dec=0.5) == (None, 0.0)


def test_deterministic_passage():
    params = ClockParams(n_bits=1_000_000, epsilon=1.0 / 6.0, t_max=1.0,
                         rate_r=1.0)
    sched = window_schedule(2, t_prot=0.025, t_dec=0.00125, params=params)
    w = sched.windows[0]
    t_enter = math.log(1_000_000 / w.k_on)
    t_exit = math.log(1_000_000 / w.k_off)
    decode, total = deterministic_passage(w, params, t_dec=0.00125)
    assert total == pytest.approx(t_exit - t_enter, rel=1e-12)
    # integer windows round inward, so the mean path dwells slightly less
    # than t_dec and decodes at the window exit
    assert total < 0.00125
    assert decode == pytest.approx(t_exit, rel=1e-12)
    assert decode == pytest.approx(w.t_start + 0.00125, abs=3e-6)
    # a generous hand-made window dwells past t_dec and decodes mid-window
    wide = LevelWindow(level=1, t_start=0.5, k_on=630_000, k_off=440_000)
    decode, total = deterministic_passage(wide, params, t_dec=0.3)
    assert total >= 0.3
    assert decode == pytest.approx(math.log(1e6 / 630_000) + 0.3, rel=1e-12)


def test_event_and_mean_passages_agree_for_large_registers():
    params = ClockParams(n_bits=1_000_000, epsilon=1.0 / 6.0, t_max=1.0,
                         rate_r=1.0)
    sched = window_schedule(1, t_prot=0.2, t_dec=0.05, params=params)
    w = sched.windows[0]
    det_decode, _ = deterministic_passage(w, params, t_dec=0.05)
    traj = sample_trajectory(
        ClockParams(n_bits=4096, epsilon=1.0 / 6.0, t_max=1.0, rate_r=1.0),
        1.0, RngStream(29))
    # scale the window to the smaller register to keep sampling cheap
    small = window_schedule(1, t_prot=0.2, t_dec=0.05,
                            params=ClockParams(n_bits=4096, epsilon=1.0 / 6.0,
                                               t_max=1.0, rate_r=1.0))
    decode, total = window_passage(traj, small.windows[0], t_dec=0.05)
    assert decode is not None
    # fluctuation scale sqrt(K)/K ~ 1.6% of the rate: generous window
    assert decode == pytest.approx(det_decode, abs=0.05)
