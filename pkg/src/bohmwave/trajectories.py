"""Bohmian trajectory ensembles.

Initial positions are sampled from the packets' t = 0 densities (either at
density quantiles or at evenly spaced density levels), integrated through
any velocity field with an adaptive embedded Runge-Kutta pair, and checked
for the non-crossing property and inter-region transfer statistics.

A velocity field is anything with a ``velocity(x, t)`` method; analytic
packets/superpositions and grid-backed fields both qualify.
"""

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.stats import norm

from .errors import (
    EnsembleError,
    NearNode,
    NodeEncounter,
    OverlapTooLarge,
    StepFailure,
    WindowTooShort,
)
from .io_utils import atomic_write_text, fmt

DENSITY_QUANTILE = "density_quantile"
EQUAL_PROBABILITY_SPACING = "equal_probability_spacing"
EXPLICIT_LIST = "explicit_list"


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    max_step: float = np.inf
    min_step: float = 0.0  # advisory; RK45 controls steps by tolerance

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if not self.min_step < self.max_step:
            raise ValueError("min_step must be smaller than max_step")


@dataclass(frozen=True)
class SamplingStrategy:
    kind: str = DENSITY_QUANTILE
    count_per_packet: tuple = (20, 20)
    span: float = 4.0  # sampling window half-width, in units of sigma0
    positions: tuple = ()  # (x, origin_label) pairs for explicit_list

    def __post_init__(self):
        if self.kind not in (DENSITY_QUANTILE, EQUAL_PROBABILITY_SPACING, EXPLICIT_LIST):
            raise ValueError(f"unknown sampling kind {self.kind!r}")
        if self.kind != EXPLICIT_LIST and any(n < 1 for n in self.count_per_packet):
            raise ValueError("counts must be >= 1")


@dataclass(frozen=True)
class TrajectoryEnsemble:
    times: np.ndarray  # (n_times,) strictly increasing
    paths: np.ndarray  # (n_traj, n_times)
    origin_labels: np.ndarray  # (n_traj,) packet index 1 or 2

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        paths = np.asarray(self.paths, dtype=float)
        labels = np.asarray(self.origin_labels, dtype=int)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "paths", paths)
        object.__setattr__(self, "origin_labels", labels)
        if times.ndim != 1 or np.any(np.diff(times) <= 0):
            raise ValueError("times must be 1-D and strictly increasing")
        if paths.shape != (labels.size, times.size):
            raise ValueError("paths must be (n_traj, n_times)")

    def __len__(self):
        return self.paths.shape[0]

    def initial_positions(self):
        return self.paths[:, 0]

    def to_csv(self, path):
        lines = ["trajectory_id,origin_label,t,x"]
        for i in range(len(self)):
            label = int(self.origin_labels[i])
            for k, t in enumerate(self.times):
                lines.append(f"{i},{label},{fmt(t)},{fmt(self.paths[i, k])}")
        atomic_write_text(path, "\n".join(lines) + "\n")

    def to_json(self, path):
        doc = {
            "times": [float(t) for t in self.times],
            "trajectories": [
                {
                    "trajectory_id": i,
                    "origin_label": int(self.origin_labels[i]),
                    "x": [float(v) for v in self.paths[i]],
                }
                for i in range(len(self))
            ],
        }
        atomic_write_text(path, json.dumps(doc, indent=1) + "\n")


# -- initial-condition sampling ------------------------------------------------


def packet_overlap(sup):
    """Integral of rho1 * rho2 at t = 0 for unit-norm packet densities."""
    p1, p2 = sup.packet1, sup.packet2
    var = p1.sigma0**2 + p2.sigma0**2
    d = p1.x0 - p2.x0
    prefactor = 1.0 / (2.0 * np.sqrt(np.pi) * np.sqrt(var))
    return prefactor * np.exp(-(d**2) / (2.0 * var))


def _quantile_positions(packet, n, span):
    qs = np.arange(1, n + 1) / (n + 1.0)
    xs = packet.x0 + packet.sigma0 * norm.ppf(qs)
    return np.clip(xs, packet.x0 - span * packet.sigma0, packet.x0 + span * packet.sigma0)


def _equal_density_positions(packet, n, span):
    """Positions where the initial density takes evenly spaced fractions of
    its peak value: symmetric pairs, plus the centroid when n is odd."""
    sigma = packet.sigma0
    offs = []
    if n % 2 == 1:
        k = (n + 1) // 2
        offs.append(0.0)
        levels = np.arange(1, k) / k
    else:
        k = n // 2
        levels = (2.0 * np.arange(1, k + 1) - 1.0) / (2.0 * k)
    for u in levels:
        d = sigma * np.sqrt(-2.0 * np.log(u))
        d = min(d, span * sigma)
        offs.extend([-d, d])
    return packet.x0 + np.sort(np.asarray(offs))


def sample_initial_positions(sup, strategy, overlap_threshold=1e-6):
    """Initial (position, origin_label) pairs, sorted by position.

    Requires negligible initial overlap so that each position can be
    attributed to one packet.
    """
    if strategy.kind == EXPLICIT_LIST:
        pairs = sorted((float(x), int(lab)) for x, lab in strategy.positions)
        xs = np.array([x for x, _ in pairs])
        labels = np.array([lab for _, lab in pairs], dtype=int)
        return xs, labels

    ov = packet_overlap(sup)
    if ov > overlap_threshold:
        raise OverlapTooLarge(
            f"initial packet overlap {ov:.3e} exceeds threshold {overlap_threshold:.3e}"
        )
    n1, n2 = strategy.count_per_packet
    pick = _quantile_positions if strategy.kind == DENSITY_QUANTILE else _equal_density_positions
    x1 = pick(sup.packet1, n1, strategy.span)
    x2 = pick(sup.packet2, n2, strategy.span)
    xs = np.concatenate([x1, x2])
    labels = np.concatenate([np.full(n1, 1, dtype=int), np.full(n2, 2, dtype=int)])
    order = np.argsort(xs, kind="stable")
    return xs[order], labels[order]


# -- integration ----------------------------------------------------------------


def integrate_trajectory(velocity_field, x_start, t0, t1, t_eval, cfg=IntegratorConfig()):
    """Integrate dx/dt = v(x, t) from (x_start, t0) to t1, sampled at t_eval.

    Trial steps of the embedded pair can overshoot into density-node
    regions the exact trajectory never visits; when the node guard trips,
    the step-size cap is halved and the integration retried, down to
    min_step (or a 1e-6 fraction of the interval if min_step is 0).
    """

    def rhs(t, y):
        return [velocity_field.velocity(float(y[0]), float(t))]

    span = t1 - t0
    max_step = cfg.max_step if np.isfinite(cfg.max_step) else span / 64.0
    floor = max(cfg.min_step, span * 1e-6)
    last_exc = None
    while max_step >= floor:
        try:
            sol = solve_ivp(
                rhs,
                (t0, t1),
                [float(x_start)],
                method="RK45",
                rtol=cfg.rel_tol,
                atol=cfg.abs_tol,
                max_step=max_step,
                t_eval=np.asarray(t_eval, dtype=float),
                dense_output=False,
            )
        except NearNode as exc:
            last_exc = exc
            max_step /= 2.0
            continue
        if not sol.success:
            raise StepFailure(f"trajectory from x={x_start}: {sol.message}")
        return sol.y[0]
    raise NodeEncounter(
        f"trajectory from x={x_start} hit a density node: {last_exc}"
    ) from last_exc


def run_ensemble(velocity_field, samples, t_grid, cfg=IntegratorConfig(), threads=1):
    """Integrate one trajectory per sample.  Trajectories are independent;
    results do not depend on the execution schedule."""
    xs, labels = samples
    t_grid = np.asarray(t_grid, dtype=float)

    def one(x):
        return integrate_trajectory(velocity_field, x, t_grid[0], t_grid[-1], t_grid, cfg)

    failures = []
    paths = np.empty((len(xs), t_grid.size))
    if threads > 1 and len(xs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda x: _capture(one, x), xs))
    else:
        results = [_capture(one, x) for x in xs]
    for i, res in enumerate(results):
        if isinstance(res, Exception):
            failures.append((i, res))
        else:
            paths[i] = res
    if failures:
        raise EnsembleError(failures)
    return TrajectoryEnsemble(times=t_grid, paths=paths, origin_labels=labels)


def _capture(fn, x):
    try:
        return fn(x)
    except Exception as exc:  # aggregated by run_ensemble
        return exc


# -- diagnostics ------------------------------------------------------------------


@dataclass(frozen=True)
class NonCrossingReport:
    violation_count: int
    first_violation: tuple = None  # (traj_i, traj_j, t) or None

    @property
    def ok(self):
        return self.violation_count == 0


def check_non_crossing(ens, tol):
    """Verify that the initial position ordering is preserved at every
    sampled time, within tol."""
    order = np.argsort(ens.initial_positions(), kind="stable")
    sorted_paths = ens.paths[order]
    gaps = np.diff(sorted_paths, axis=0)  # (n_traj-1, n_times)
    bad = np.argwhere(gaps < -tol)
    if bad.size == 0:
        return NonCrossingReport(violation_count=0)
    k_first = bad[np.argmin(bad[:, 1])]
    i = int(order[k_first[0]])
    j = int(order[k_first[0] + 1])
    return NonCrossingReport(
        violation_count=int(bad.shape[0]),
        first_violation=(i, j, float(ens.times[k_first[1]])),
    )


@dataclass(frozen=True)
class TransferCounts:
    n_region1_final: int  # trajectories below the boundary at t_final
    n_region2_final: int
    transfers_from_1: int  # origin-1 trajectories that changed side
    transfers_from_2: int

    @property
    def total_transfers(self):
        return self.transfers_from_1 + self.transfers_from_2


def count_region_transfer(ens, boundary, t_final):
    """Count trajectories on each side of the boundary line at t_final and
    how many changed side relative to t = 0, per packet of origin."""
    k = int(np.argmin(np.abs(ens.times - t_final)))
    side0 = ens.paths[:, 0] > boundary.position(ens.times[0])
    side1 = ens.paths[:, k] > boundary.position(ens.times[k])
    moved = side0 != side1
    return TransferCounts(
        n_region1_final=int(np.sum(~side1)),
        n_region2_final=int(np.sum(side1)),
        transfers_from_1=int(np.sum(moved & (ens.origin_labels == 1))),
        transfers_from_2=int(np.sum(moved & (ens.origin_labels == 2))),
    )


def asymptotic_slope_fit(ens, t_window):
    """Least-squares slope of each path over the given (t_lo, t_hi) window."""
    t_lo, t_hi = t_window
    mask = (ens.times >= t_lo) & (ens.times <= t_hi)
    if np.sum(mask) < 5:
        raise WindowTooShort(f"window {t_window} holds {np.sum(mask)} samples, need >= 5")
    t = ens.times[mask]
    slopes = np.empty(len(ens))
    for i in range(len(ens)):
        slopes[i] = np.polyfit(t, ens.paths[i, mask], 1)[0]
    return slopes


def cluster_slopes(slopes, reference_slopes):
    """Group fitted slopes by nearest reference slope; returns
    {reference: (count, mean)} for non-empty groups."""
    refs = np.asarray(reference_slopes, dtype=float)
    assignment = np.argmin(np.abs(slopes[:, None] - refs[None, :]), axis=1)
    out = {}
    for j, ref in enumerate(refs):
        sel = slopes[assignment == j]
        if sel.size:
            out[float(ref)] = (int(sel.size), float(np.mean(sel)))
    return out
