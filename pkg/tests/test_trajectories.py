"""Unit tests for sampling, integration and ensemble diagnostics."""

import numpy as np
import pytest

from bohmwave.errors import OverlapTooLarge, WindowTooShort
from bohmwave.packets import GaussianPacket
from bohmwave.superposition import BoundaryLine, Superposition
from bohmwave.trajectories import (
    IntegratorConfig,
    SamplingStrategy,
    TrajectoryEnsemble,
    asymptotic_slope_fit,
    check_non_crossing,
    cluster_slopes,
    count_region_transfer,
    integrate_trajectory,
    packet_overlap,
    run_ensemble,
    sample_initial_positions,
)


def mirror_pair(p=10.0, x0=3.0, sigma0=0.5):
    p1 = GaussianPacket(x0=-x0, p0=p, sigma0=sigma0)
    p2 = GaussianPacket(x0=x0, p0=-p, sigma0=sigma0)
    return Superposition(p1, p2)


def test_config_validation():
    with pytest.raises(ValueError):
        IntegratorConfig(rel_tol=0.0)
    with pytest.raises(ValueError):
        IntegratorConfig(min_step=1.0, max_step=0.5)
    with pytest.raises(ValueError):
        SamplingStrategy(kind="nope")
    with pytest.raises(ValueError):
        SamplingStrategy(count_per_packet=(0, 5))


def test_packet_overlap_gaussian_integral():
    sup = mirror_pair()
    var = 2 * 0.5**2
    expected = np.exp(-36.0 / (2 * var)) / (2 * np.sqrt(np.pi * var))
    assert packet_overlap(sup) == pytest.approx(expected, rel=1e-12)


def test_sampling_counts_and_order():
    sup = mirror_pair()
    for kind in ("density_quantile", "equal_probability_spacing"):
        xs, labels = sample_initial_positions(
            sup, SamplingStrategy(kind=kind, count_per_packet=(7, 5))
        )
        assert xs.size == 12
        assert np.all(np.diff(xs) > 0)
        assert np.sum(labels == 1) == 7
        assert np.sum(labels == 2) == 5
        assert np.all(xs[labels == 1] < 0) and np.all(xs[labels == 2] > 0)


def test_sampling_explicit_list():
    strat = SamplingStrategy(
        kind="explicit_list", positions=((1.5, 2), (-2.0, 1), (0.5, 2))
    )
    xs, labels = sample_initial_positions(None, strat)
    assert np.allclose(xs, [-2.0, 0.5, 1.5])
    assert list(labels) == [1, 2, 2]


def test_sampling_rejects_overlapping_packets():
    p1 = GaussianPacket(x0=-0.5, p0=1.0, sigma0=0.5)
    p2 = GaussianPacket(x0=0.5, p0=-1.0, sigma0=0.5)
    with pytest.raises(OverlapTooLarge):
        sample_initial_positions(Superposition(p1, p2), SamplingStrategy())


def test_single_packet_ensemble_matches_closed_form():
    pk = GaussianPacket(x0=-3.0, p0=10.0, sigma0=0.5)
    starts = np.array([-4.0, -3.0, -2.0])
    t_grid = np.linspace(0.0, 0.8, 17)
    ens = run_ensemble(pk, (starts, np.ones(3, dtype=int)), t_grid)
    for i, x0 in enumerate(starts):
        assert np.max(np.abs(ens.paths[i] - pk.bohmian_path(x0, t_grid))) < 1e-6


def test_run_ensemble_threads_match_serial():
    pk = GaussianPacket(x0=-3.0, p0=10.0, sigma0=0.5)
    starts = np.linspace(-4.0, -2.0, 8)
    labels = np.ones(8, dtype=int)
    t_grid = np.linspace(0.0, 0.5, 11)
    serial = run_ensemble(pk, (starts, labels), t_grid, threads=1)
    parallel = run_ensemble(pk, (starts, labels), t_grid, threads=4)
    assert np.array_equal(serial.paths, parallel.paths)


def test_integrate_trajectory_constant_field():
    class Drift:
        def velocity(self, x, t):
            return 2.0

    t_eval = np.linspace(0.0, 1.0, 5)
    xs = integrate_trajectory(Drift(), 1.0, 0.0, 1.0, t_eval)
    assert np.allclose(xs, 1.0 + 2.0 * t_eval, atol=1e-9)


def test_ensemble_validation():
    with pytest.raises(ValueError):
        TrajectoryEnsemble(
            times=np.array([0.0, 0.0, 1.0]),
            paths=np.zeros((2, 3)),
            origin_labels=np.array([1, 2]),
        )
    with pytest.raises(ValueError):
        TrajectoryEnsemble(
            times=np.array([0.0, 1.0]),
            paths=np.zeros((2, 3)),
            origin_labels=np.array([1, 2]),
        )


def test_non_crossing_detects_violation():
    times = np.linspace(0.0, 1.0, 5)
    ok = TrajectoryEnsemble(
        times=times,
        paths=np.vstack([times, times + 1.0]),
        origin_labels=np.array([1, 2]),
    )
    assert check_non_crossing(ok, tol=1e-6).ok
    crossing = TrajectoryEnsemble(
        times=times,
        paths=np.vstack([times, 1.0 - 2.0 * times]),
        origin_labels=np.array([1, 2]),
    )
    report = check_non_crossing(crossing, tol=1e-6)
    assert not report.ok
    assert report.first_violation is not None
    # the paths cross at t = 1/3; the first sampled time past it is 0.5
    assert report.first_violation[2] == pytest.approx(0.5)


def test_count_region_transfer():
    times = np.linspace(0.0, 1.0, 5)
    paths = np.array(
        [
            -1.0 - times,  # stays left
            -0.5 + 2.0 * times,  # crosses to the right
            0.5 + times,  # stays right
        ]
    )
    ens = TrajectoryEnsemble(times=times, paths=paths, origin_labels=np.array([1, 1, 2]))
    counts = count_region_transfer(ens, BoundaryLine(x_bar_0=0.0, v_bar=0.0), 1.0)
    assert counts.n_region1_final == 1
    assert counts.n_region2_final == 2
    assert counts.transfers_from_1 == 1
    assert counts.transfers_from_2 == 0
    assert counts.total_transfers == 1


def test_slope_fit_and_clustering():
    rng = np.random.default_rng(77)
    times = np.linspace(0.0, 10.0, 101)
    true = np.array([-0.6, 0.0, 0.0, 0.62, 0.64])
    paths = true[:, None] * times[None, :] + 0.001 * rng.standard_normal((5, 101))
    ens = TrajectoryEnsemble(
        times=times, paths=paths, origin_labels=np.ones(5, dtype=int)
    )
    slopes = asymptotic_slope_fit(ens, (5.0, 10.0))
    clusters = cluster_slopes(slopes, [-0.628, 0.0, 0.628])
    assert clusters[0.0][0] == 2
    assert clusters[0.628][0] == 2
    assert clusters[-0.628][0] == 1
    assert clusters[0.628][1] == pytest.approx(0.63, abs=0.01)
    with pytest.raises(WindowTooShort):
        asymptotic_slope_fit(ens, (9.8, 10.0))


def test_csv_round_trip(tmp_path):
    from bohmwave.scenarios import read_trajectory_csv

    times = np.linspace(0.0, 1.0, 7)
    rng = np.random.default_rng(123)
    paths = rng.standard_normal((4, 7)).cumsum(axis=1) * 0.01 + np.sort(
        rng.uniform(-2, 2, 4)
    )[:, None]
    ens = TrajectoryEnsemble(
        times=times, paths=paths, origin_labels=np.array([1, 1, 2, 2])
    )
    path = tmp_path / "traj.csv"
    ens.to_csv(path)
    back = read_trajectory_csv(path)
    assert np.array_equal(back.times, ens.times)
    assert np.array_equal(back.paths, ens.paths)
    assert np.array_equal(back.origin_labels, ens.origin_labels)
