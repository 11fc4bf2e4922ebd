"""Unit tests for peak/fringe measurement and run-comparison metrics."""

import numpy as np
import pytest

from bohmwave.analysis import (
    boundary_drift_fit,
    density_l2,
    gap_midpoint_track,
    innermost_peak_width_ratio,
    minima_positions,
    minima_spacing,
    peak_positions,
    peak_widths_node_to_node,
    trajectory_rms,
)
from bohmwave.errors import IncompatibleSampling
from bohmwave.trajectories import TrajectoryEnsemble


def test_peak_and_minima_positions():
    x = np.linspace(0.0, 10.0, 2001)
    y = np.cos(x) ** 2
    peaks = peak_positions(x, y)
    mins = minima_positions(x, y)
    assert np.allclose(peaks, [np.pi, 2 * np.pi, 3 * np.pi], atol=1e-4)
    expected_mins = [np.pi / 2, 3 * np.pi / 2, 5 * np.pi / 2]
    assert np.allclose(mins, expected_mins, atol=1e-4)
    assert minima_spacing(x, y) == pytest.approx(np.pi, abs=1e-4)


def test_minima_spacing_needs_two_minima():
    x = np.linspace(-3.0, 3.0, 301)
    with pytest.raises(ValueError):
        minima_spacing(x, np.exp(-(x**2)))


def test_peak_widths_node_to_node():
    x = np.linspace(0.0, 10.0, 2001)
    y = np.sin(x) ** 2
    pw = peak_widths_node_to_node(x, y)
    # interior peaks have two flanking zeros each, width pi
    for pos, width in pw:
        assert width == pytest.approx(np.pi, abs=1e-3)


def test_innermost_peak_width_ratio_half_width():
    # peak pressed against a node at x = 0 with half the free fringe width
    x = np.linspace(-10.0, 0.0, 4001)
    y = np.sin(2.0 * x) ** 2
    y[x < -9.4] = 0.0
    ratio = innermost_peak_width_ratio(x, y, wall_x=0.0)
    # every lobe of sin(2x)^2 has the same width; the wall node makes the
    # innermost full width equal to the others, so the ratio is 1
    assert ratio == pytest.approx(1.0, abs=0.02)
    # replace the innermost lobe by one of half the width (both pieces
    # share a node at -pi/4, so the splice is continuous)
    y2 = np.where(x > -np.pi / 4, np.sin(4.0 * x) ** 2, np.sin(2.0 * (x + np.pi / 4)) ** 2)
    y2[x < -9.4] = 0.0
    assert innermost_peak_width_ratio(x, y2, wall_x=0.0) == pytest.approx(0.5, abs=0.05)


def test_gap_midpoint_track_and_drift():
    times = np.linspace(0.0, 1.0, 21)
    lower = np.vstack([-2.0 - times, -1.0 - times])
    upper = np.vstack([1.0 + 0.5 * times, 2.0 + 0.5 * times])
    ens = TrajectoryEnsemble(
        times=times,
        paths=np.vstack([lower, upper]),
        origin_labels=np.array([1, 1, 2, 2]),
    )
    mids = gap_midpoint_track(ens)
    assert np.allclose(mids, -0.25 * times)
    b0, slope = boundary_drift_fit(ens, (0.0, 1.0))
    assert b0 == pytest.approx(0.0, abs=1e-12)
    assert slope == pytest.approx(-0.25, abs=1e-12)
    mids_w = gap_midpoint_track(ens, method="widest_gap")
    assert np.allclose(mids_w, -0.25 * times)


def test_density_l2():
    x = np.linspace(-5.0, 5.0, 1001)
    rho = np.exp(-(x**2))
    rep = density_l2(x, rho, x, rho)
    assert rep.overall == 0.0
    shifted = np.exp(-((x - 0.5) ** 2))
    rep2 = density_l2(x, rho, x, shifted, window=(-1.0, 1.0))
    assert rep2.overall > 0.0
    assert rep2.inside_window > rep2.outside_window
    with pytest.raises(IncompatibleSampling):
        density_l2(x, rho, x[:-1], rho[:-1])


def test_trajectory_rms():
    times = np.linspace(0.0, 1.0, 11)
    paths = np.vstack([times, -times])
    ens_a = TrajectoryEnsemble(
        times=times, paths=paths, origin_labels=np.array([1, 2])
    )
    ens_b = TrajectoryEnsemble(
        times=times, paths=paths + 0.1, origin_labels=np.array([1, 2])
    )
    rep = trajectory_rms(ens_a, ens_a)
    assert rep.overall == 0.0
    rep2 = trajectory_rms(ens_a, ens_b, t_window=(0.0, 0.5))
    assert rep2.overall == pytest.approx(0.1, rel=1e-12)
    assert rep2.inside_window == pytest.approx(0.1, rel=1e-12)
    ens_c = TrajectoryEnsemble(
        times=times[:-1], paths=paths[:, :-1], origin_labels=np.array([1, 2])
    )
    with pytest.raises(IncompatibleSampling):
        trajectory_rms(ens_a, ens_c)
