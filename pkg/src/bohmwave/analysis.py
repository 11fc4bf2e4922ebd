"""Post-processing of densities and trajectory ensembles.

Peak and minimum locations (with sub-grid parabolic refinement), fringe
spacing and node-to-node peak widths, the drifting midpoint of the gap
between two trajectory swarms, and normalized comparison metrics between
two runs (density L2, trajectory RMS) with an inside/outside breakdown
over an interference window.
"""

from dataclasses import dataclass

import numpy as np
from scipy.signal import find_peaks

from .errors import IncompatibleSampling


def _refine(x, y, idx):
    """Parabolic sub-grid refinement of extremum positions."""
    out = np.empty(idx.size)
    for j, i in enumerate(idx):
        if 0 < i < y.size - 1:
            denom = y[i - 1] - 2.0 * y[i] + y[i + 1]
            shift = 0.0 if denom == 0 else 0.5 * (y[i - 1] - y[i + 1]) / denom
            out[j] = x[i] + shift * (x[1] - x[0])
        else:
            out[j] = x[i]
    return out


def peak_positions(x, y, prominence_frac=0.01):
    """Positions of local maxima with prominence above the given fraction
    of the global maximum."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    idx, _ = find_peaks(y, prominence=prominence_frac * np.max(y))
    return _refine(x, y, idx)


def minima_positions(x, y, prominence_frac=0.01):
    """Positions of local minima (peaks of -y)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    idx, _ = find_peaks(-y, prominence=prominence_frac * np.max(y))
    return _refine(x, -y, idx)


def minima_spacing(x, y, prominence_frac=0.01):
    """Mean spacing between consecutive density minima."""
    mins = minima_positions(x, y, prominence_frac)
    if mins.size < 2:
        raise ValueError("fewer than two minima found")
    return float(np.mean(np.diff(mins)))


def peak_widths_node_to_node(x, y, prominence_frac=0.01, extra_nodes=()):
    """(position, width) per peak, the width being the distance between the
    flanking minima (or the domain edge where a peak has no flanking
    minimum, in which case the peak is dropped).  extra_nodes lists known
    node positions, such as a hard wall, that count as minima."""
    peaks = peak_positions(x, y, prominence_frac)
    mins = minima_positions(x, y, prominence_frac)
    mins = np.sort(np.concatenate([mins, np.asarray(extra_nodes, dtype=float)]))
    out = []
    for p in peaks:
        left = mins[mins < p]
        right = mins[mins > p]
        if left.size and right.size:
            out.append((float(p), float(right.min() - left.max())))
    return out


def innermost_peak_width_ratio(x, y, wall_x=0.0, prominence_frac=0.01):
    """Width of the peak nearest the wall over the mean width of the
    remaining peaks.  The wall itself counts as a node, so a resonance
    peak pressed against it keeps its half width."""
    pw = peak_widths_node_to_node(x, y, prominence_frac, extra_nodes=(wall_x,))
    if len(pw) < 2:
        raise ValueError("need at least two measurable peaks")
    dist = [abs(p - wall_x) for p, _ in pw]
    k = int(np.argmin(dist))
    inner = pw[k][1]
    outer = [w for j, (_, w) in enumerate(pw) if j != k]
    return inner / float(np.mean(outer))


# -- swarm-gap tracking -----------------------------------------------------------


def gap_midpoint_track(ens, method="auto"):
    """Midpoint of the gap separating the two trajectory swarms at each
    sampled time.

    With 'origin_split' the tracked pair is the adjacent pair (in the
    preserved initial ordering) where the origin label changes; this hugs
    the bounce line even while the swarms interpenetrate.  'widest_gap'
    picks the largest inter-trajectory gap instead.  'auto' uses the origin
    split when both packets contributed trajectories.
    """
    if method == "auto":
        labels = set(int(v) for v in ens.origin_labels)
        method = "origin_split" if labels == {1, 2} else "widest_gap"
    order = np.argsort(ens.initial_positions(), kind="stable")
    mids = np.empty(ens.times.size)
    if method == "origin_split":
        sorted_labels = ens.origin_labels[order]
        changes = np.flatnonzero(np.diff(sorted_labels) != 0)
        if changes.size != 1:
            raise ValueError("origin labels are not two contiguous blocks")
        i = int(changes[0])
        lower = ens.paths[order[i]]
        upper = ens.paths[order[i + 1]]
        return 0.5 * (lower + upper)
    for k in range(ens.times.size):
        xs = np.sort(ens.paths[:, k])
        gaps = np.diff(xs)
        i = int(np.argmax(gaps))
        mids[k] = 0.5 * (xs[i] + xs[i + 1])
    return mids


def boundary_drift_fit(ens, t_window, method="auto"):
    """Straight-line fit (intercept at t=0, slope) of the gap midpoint over
    the given time window."""
    t_lo, t_hi = t_window
    mask = (ens.times >= t_lo) & (ens.times <= t_hi)
    if np.sum(mask) < 2:
        raise ValueError("window holds fewer than 2 samples")
    mids = gap_midpoint_track(ens, method)
    slope, intercept = np.polyfit(ens.times[mask], mids[mask], 1)
    return float(intercept), float(slope)


# -- run comparison ---------------------------------------------------------------


@dataclass(frozen=True)
class CompareReport:
    metric: str
    overall: float
    inside_window: float
    outside_window: float
    window: tuple


def density_l2(x_a, rho_a, x_b, rho_b, window=None):
    """Normalized L2 difference of two densities on a common grid, with an
    inside/outside breakdown over an x-window."""
    x_a = np.asarray(x_a, dtype=float)
    x_b = np.asarray(x_b, dtype=float)
    if x_a.shape != x_b.shape or not np.allclose(x_a, x_b, rtol=0, atol=1e-12):
        raise IncompatibleSampling("density grids differ")
    rho_a = np.asarray(rho_a, dtype=float)
    rho_b = np.asarray(rho_b, dtype=float)
    ref = np.sqrt(np.trapezoid(rho_a**2, x_a))

    def metric(mask):
        if not np.any(mask):
            return 0.0
        d = np.where(mask, rho_a - rho_b, 0.0)
        return float(np.sqrt(np.trapezoid(d**2, x_a)) / ref)

    full = np.ones_like(x_a, dtype=bool)
    if window is None:
        return CompareReport("density_L2", metric(full), metric(full), 0.0, (None, None))
    lo, hi = window
    inside = (x_a >= lo) & (x_a <= hi)
    return CompareReport("density_L2", metric(full), metric(inside), metric(~inside), (lo, hi))


def trajectory_rms(ens_a, ens_b, t_window=None):
    """RMS position difference between matched trajectories of two
    ensembles sharing times and trajectory count, with an inside/outside
    breakdown over a time window."""
    if ens_a.times.shape != ens_b.times.shape or not np.allclose(
        ens_a.times, ens_b.times, rtol=0, atol=1e-12
    ):
        raise IncompatibleSampling("ensemble time grids differ")
    if ens_a.paths.shape != ens_b.paths.shape:
        raise IncompatibleSampling("ensembles hold different trajectory counts")
    diff2 = (ens_a.paths - ens_b.paths) ** 2

    def metric(mask):
        if not np.any(mask):
            return 0.0
        return float(np.sqrt(np.mean(diff2[:, mask])))

    full = np.ones_like(ens_a.times, dtype=bool)
    if t_window is None:
        return CompareReport("trajectory_RMS", metric(full), metric(full), 0.0, (None, None))
    lo, hi = t_window
    inside = (ens_a.times >= lo) & (ens_a.times <= hi)
    return CompareReport(
        "trajectory_RMS", metric(full), metric(inside), metric(~inside), (lo, hi)
    )
