"""Scenario configuration, figure presets and batch execution.

A scenario is a JSON document selecting one of four modes:

- analytic_superposition: exact two-packet fields, trajectory ensemble,
  boundary/transfer/fringe analysis;
- wall_scattering: one packet against an impenetrable wall (TDSE);
- well_wall_scattering: wall preceded by the resonance well (TDSE);
- dynamic_potential_scattering: wall with the moving well edge (TDSE).

The TDSE modes also build the corresponding two-packet analytic reference
on the half domain x <= 0 and report density/trajectory agreement metrics.

Every run writes trajectories.csv, density.csv, analysis.json (and SVG
plots unless disabled) into its output directory with deterministic
formatting, so repeated runs are byte-identical.
"""

import json
import os
from dataclasses import dataclass

import numpy as np

from . import potentials, tdse
from .analysis import (
    boundary_drift_fit,
    density_l2,
    innermost_peak_width_ratio,
    minima_spacing,
    peak_positions,
    peak_widths_node_to_node,
    trajectory_rms,
)
from .errors import IncompatibleSampling, ParseError, ValidationError
from .io_utils import atomic_write_text, fmt
from .packets import GaussianPacket, classify_regime
from .superposition import (
    Superposition,
    boundary_case_a,
    boundary_case_b,
    boundary_case_c,
    BoundaryLine,
    fringe_spacing_collision,
    fraunhofer_slope,
    max_interference_time,
)
from .trajectories import (
    IntegratorConfig,
    SamplingStrategy,
    TrajectoryEnsemble,
    asymptotic_slope_fit,
    check_non_crossing,
    cluster_slopes,
    count_region_transfer,
    run_ensemble,
    sample_initial_positions,
)
from .units import NATURAL, UnitSystem

ANALYTIC = "analytic_superposition"
WALL = "wall_scattering"
WELL_WALL = "well_wall_scattering"
DYNAMIC_POT = "dynamic_potential_scattering"
MODES = (ANALYTIC, WALL, WELL_WALL, DYNAMIC_POT)
TDSE_MODES = (WALL, WELL_WALL, DYNAMIC_POT)

_PACKET_KEYS = {"x0", "p0", "sigma0"}
_TOP_KEYS = {
    "name",
    "mode",
    "packet1",
    "packet2",
    "alpha",
    "normalized_packets",
    "units",
    "t_final",
    "n_times",
    "sampling",
    "integrator",
    "grid",
    "well_n",
}
_SAMPLING_KEYS = {"kind", "count_per_packet", "span"}
_INTEGRATOR_KEYS = {"rel_tol", "abs_tol", "max_step"}
_GRID_KEYS = {"x_lo", "x_hi", "n_points", "dt"}
_UNITS_KEYS = {"hbar", "mass"}


@dataclass(frozen=True)
class Scenario:
    name: str
    mode: str
    packet1: tuple  # (x0, p0, sigma0)
    packet2: tuple  # (x0, p0, sigma0) or None
    alpha: float
    normalized_packets: bool
    units: tuple  # (hbar, mass)
    t_final: float
    n_times: int
    sampling: tuple  # (kind, (n1, n2), span)
    integrator: tuple  # (rel_tol, abs_tol, max_step)
    grid: tuple  # (x_lo, x_hi, n_points, dt) or None
    well_n: float = 1.0  # well-depth multiple (static and dynamic wells)

    def unit_system(self):
        return UnitSystem(hbar=self.units[0], mass=self.units[1])

    def make_packet1(self):
        return GaussianPacket(*self.packet1, units=self.unit_system())

    def make_packet2(self):
        if self.packet2 is None:
            return None
        return GaussianPacket(*self.packet2, units=self.unit_system())

    def make_superposition(self):
        """The two-packet state: the scenario's pair in analytic mode, the
        mirror-image pair in the scattering modes."""
        p1 = self.make_packet1()
        if self.mode == ANALYTIC:
            p2 = self.make_packet2()
            sup = Superposition.from_alpha(p1, p2, self.alpha)
            if not self.normalized_packets:
                sup = Superposition(
                    p1, p2, c1=sup.c1, c2=sup.c2, normalized_packets=False
                )
            return sup
        mirror = GaussianPacket(-p1.x0, -p1.p0, p1.sigma0, units=p1.units)
        return Superposition.from_alpha(p1, mirror, 1.0)

    def sampling_strategy(self):
        kind, counts, span = self.sampling
        return SamplingStrategy(kind=kind, count_per_packet=counts, span=span)

    def integrator_config(self):
        return IntegratorConfig(
            rel_tol=self.integrator[0],
            abs_tol=self.integrator[1],
            max_step=self.integrator[2] if self.integrator[2] else np.inf,
        )

    def make_grid(self):
        if self.grid is None:
            return None
        return tdse.Grid1D(
            x_lo=self.grid[0], x_hi=self.grid[1], n_points=self.grid[2], dt=self.grid[3]
        )

    def time_grid(self):
        return np.linspace(0.0, self.t_final, self.n_times)


def _require_finite(value, name):
    try:
        v = float(value)
    except (TypeError, ValueError):
        raise ValidationError(f"{name} must be a number, got {value!r}")
    if not np.isfinite(v):
        raise ValidationError(f"{name} must be finite, got {value!r}")
    return v


def _check_keys(d, allowed, where):
    unknown = set(d) - allowed
    if unknown:
        raise ValidationError(f"unknown keys in {where}: {sorted(unknown)}")


def _parse_packet(d, where):
    if not isinstance(d, dict):
        raise ValidationError(f"{where} must be an object")
    _check_keys(d, _PACKET_KEYS, where)
    for key in _PACKET_KEYS:
        if key not in d:
            raise ValidationError(f"{where} is missing {key}")
    x0 = _require_finite(d["x0"], f"{where}.x0")
    p0 = _require_finite(d["p0"], f"{where}.p0")
    sigma0 = _require_finite(d["sigma0"], f"{where}.sigma0")
    if sigma0 <= 0:
        raise ValidationError(f"{where}.sigma0 must be > 0")
    return (x0, p0, sigma0)


def scenario_from_dict(doc):
    if not isinstance(doc, dict):
        raise ValidationError("scenario document must be a JSON object")
    _check_keys(doc, _TOP_KEYS, "scenario")
    mode = doc.get("mode")
    if mode not in MODES:
        raise ValidationError(f"mode must be one of {MODES}, got {mode!r}")
    name = doc.get("name", "scenario")
    if not isinstance(name, str) or not name:
        raise ValidationError("name must be a nonempty string")

    if "packet1" not in doc:
        raise ValidationError("packet1 is required")
    packet1 = _parse_packet(doc["packet1"], "packet1")
    packet2 = None
    if mode == ANALYTIC:
        if "packet2" not in doc:
            raise ValidationError("analytic mode requires packet2")
        packet2 = _parse_packet(doc["packet2"], "packet2")
    elif "packet2" in doc:
        raise ValidationError("packet2 only applies to analytic mode")

    alpha = _require_finite(doc.get("alpha", 1.0), "alpha")
    if alpha < 0:
        raise ValidationError("alpha must be >= 0")
    normalized = doc.get("normalized_packets", True)
    if not isinstance(normalized, bool):
        raise ValidationError("normalized_packets must be a boolean")

    u = doc.get("units", {})
    if not isinstance(u, dict):
        raise ValidationError("units must be an object")
    _check_keys(u, _UNITS_KEYS, "units")
    hbar = _require_finite(u.get("hbar", 1.0), "units.hbar")
    mass = _require_finite(u.get("mass", 1.0), "units.mass")
    if hbar <= 0 or mass <= 0:
        raise ValidationError("units must be strictly positive")

    t_final = _require_finite(doc.get("t_final", 1.0), "t_final")
    if t_final <= 0:
        raise ValidationError("t_final must be > 0")
    n_times = doc.get("n_times", 101)
    if not isinstance(n_times, int) or n_times < 2:
        raise ValidationError("n_times must be an integer >= 2")

    s = doc.get("sampling", {})
    if not isinstance(s, dict):
        raise ValidationError("sampling must be an object")
    _check_keys(s, _SAMPLING_KEYS, "sampling")
    kind = s.get("kind", "density_quantile")
    counts = s.get("count_per_packet", [20, 20])
    if (
        not isinstance(counts, (list, tuple))
        or len(counts) != 2
        or not all(isinstance(c, int) and c >= 1 for c in counts)
    ):
        raise ValidationError("sampling.count_per_packet must be two integers >= 1")
    span = _require_finite(s.get("span", 4.0), "sampling.span")
    if span <= 0:
        raise ValidationError("sampling.span must be > 0")
    try:
        SamplingStrategy(kind=kind, count_per_packet=tuple(counts), span=span)
    except ValueError as exc:
        raise ValidationError(str(exc))

    integ = doc.get("integrator", {})
    if not isinstance(integ, dict):
        raise ValidationError("integrator must be an object")
    _check_keys(integ, _INTEGRATOR_KEYS, "integrator")
    rel_tol = _require_finite(integ.get("rel_tol", 1e-8), "integrator.rel_tol")
    abs_tol = _require_finite(
        integ.get("abs_tol", 1e-10 * packet1[2]), "integrator.abs_tol"
    )
    max_step = integ.get("max_step", 0.0)
    max_step = _require_finite(max_step, "integrator.max_step")
    if rel_tol <= 0 or abs_tol <= 0 or max_step < 0:
        raise ValidationError("integrator tolerances must be positive")

    well_n = _require_finite(doc.get("well_n", 1.0), "well_n")
    if well_n <= 0:
        raise ValidationError("well_n must be > 0")
    if "well_n" in doc and mode not in (WELL_WALL, DYNAMIC_POT):
        raise ValidationError("well_n only applies to the well-bearing modes")

    grid = None
    if mode in TDSE_MODES:
        g = doc.get("grid", {})
        if not isinstance(g, dict):
            raise ValidationError("grid must be an object")
        _check_keys(g, _GRID_KEYS, "grid")
        grid = _resolve_grid(g, packet1, mode, t_final, hbar, mass)
    elif "grid" in doc:
        raise ValidationError("grid only applies to the TDSE modes")

    return Scenario(
        name=name,
        mode=mode,
        packet1=packet1,
        packet2=packet2,
        alpha=alpha,
        normalized_packets=normalized,
        units=(hbar, mass),
        t_final=t_final,
        n_times=n_times,
        sampling=(kind, tuple(counts), span),
        integrator=(rel_tol, abs_tol, max_step),
        grid=grid,
        well_n=well_n,
    )


def _resolve_grid(g, packet1, mode, t_final, hbar, mass):
    """Fill grid defaults: dx = sigma0/40, dt = 2e-4 tau, wall at x = 0,
    left edge far enough for the reflected, spread packet."""
    x0, p0, sigma0 = packet1
    tau = 2.0 * mass * sigma0**2 / hbar
    sig_final = sigma0 * np.sqrt(1.0 + (t_final / tau) ** 2)
    v_p = abs(p0) / mass
    default_lo = -(abs(x0) + v_p * t_final + 4.0 * sig_final + 10.0 * sigma0)
    x_hi = _require_finite(g.get("x_hi", 0.0), "grid.x_hi")
    x_lo = _require_finite(g.get("x_lo", default_lo), "grid.x_lo")
    dt = _require_finite(g.get("dt", 2e-4 * tau), "grid.dt")
    if "n_points" in g:
        n_points = g["n_points"]
        if not isinstance(n_points, int) or n_points < 16:
            raise ValidationError("grid.n_points must be an integer >= 16")
    else:
        dx = sigma0 / 40.0
        n_points = int(np.ceil((x_hi - x_lo) / dx)) + 1
        x_lo = x_hi - (n_points - 1) * dx  # keep spacing exactly sigma0/40
    if not x_lo < x_hi:
        raise ValidationError("grid.x_lo must be below grid.x_hi")
    if dt <= 0:
        raise ValidationError("grid.dt must be > 0")
    return (x_lo, x_hi, n_points, dt)


def parse_scenario(text):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}")
    return scenario_from_dict(doc)


def scenario_to_dict(s):
    doc = {
        "name": s.name,
        "mode": s.mode,
        "packet1": {"x0": s.packet1[0], "p0": s.packet1[1], "sigma0": s.packet1[2]},
        "alpha": s.alpha,
        "normalized_packets": s.normalized_packets,
        "units": {"hbar": s.units[0], "mass": s.units[1]},
        "t_final": s.t_final,
        "n_times": s.n_times,
        "sampling": {
            "kind": s.sampling[0],
            "count_per_packet": list(s.sampling[1]),
            "span": s.sampling[2],
        },
        "integrator": {
            "rel_tol": s.integrator[0],
            "abs_tol": s.integrator[1],
            "max_step": s.integrator[2],
        },
    }
    if s.packet2 is not None:
        doc["packet2"] = {"x0": s.packet2[0], "p0": s.packet2[1], "sigma0": s.packet2[2]}
    if s.mode in (WELL_WALL, DYNAMIC_POT):
        doc["well_n"] = s.well_n
    if s.grid is not None:
        doc["grid"] = {
            "x_lo": s.grid[0],
            "x_hi": s.grid[1],
            "n_points": s.grid[2],
            "dt": s.grid[3],
        }
    return doc


def dump_scenario(s):
    """Normalized JSON dump: all defaults explicit, keys sorted."""
    return json.dumps(scenario_to_dict(s), indent=1, sort_keys=True) + "\n"


# -- presets --------------------------------------------------------------------


def _preset_docs():
    sym = {"x0": -3.0, "p0": 10.0, "sigma0": 0.5}
    sym_r = {"x0": 3.0, "p0": -10.0, "sigma0": 0.5}
    docs = {
        # symmetric head-on collision, equal weights
        "fig2": {
            "mode": ANALYTIC,
            "packet1": dict(sym),
            "packet2": dict(sym_r),
            "t_final": 0.6,
            "n_times": 121,
        },
        # same collision, sparser fan for trajectory comparison plots
        "fig3": {
            "mode": ANALYTIC,
            "packet1": dict(sym),
            "packet2": dict(sym_r),
            "t_final": 0.6,
            "n_times": 121,
            "sampling": {"kind": "density_quantile", "count_per_packet": [9, 9]},
        },
        # different momenta, equal widths (moving boundary)
        "fig5": {
            "mode": ANALYTIC,
            "packet1": {"x0": -3.0, "p0": 10.0, "sigma0": 0.5},
            "packet2": {"x0": 3.0, "p0": -30.0, "sigma0": 0.5},
            "t_final": 0.6,
            "n_times": 121,
        },
        # equal speeds, different widths (normalized packets); the packets
        # meet early, while the spreading is still negligible, so the
        # constant-width boundary line applies
        "fig6": {
            "mode": ANALYTIC,
            "packet1": {"x0": -4.0, "p0": 20.0, "sigma0": 0.5},
            "packet2": {"x0": 4.0, "p0": -20.0, "sigma0": 1.5},
            "t_final": 0.4,
            "n_times": 161,
        },
        # same pair without per-packet normalization (width-weighted drift)
        "fig7": {
            "mode": ANALYTIC,
            "packet1": {"x0": -4.0, "p0": 20.0, "sigma0": 0.5},
            "packet2": {"x0": 4.0, "p0": -20.0, "sigma0": 1.5},
            "normalized_packets": False,
            "t_final": 0.4,
            "n_times": 161,
        },
        # unequal weights: trajectory transfer across the midline
        "fig8": {
            "mode": ANALYTIC,
            "packet1": dict(sym),
            "packet2": dict(sym_r),
            "alpha": 0.5,
            "t_final": 1.2,
            "n_times": 121,
            "sampling": {
                "kind": "equal_probability_spacing",
                "count_per_packet": [23, 11],
            },
            # the trajectory from packet 1's median rides the separatrix
            # between the outgoing lobes; it needs tight tolerances to stay
            # on the correct side of the region boundary
            "integrator": {"rel_tol": 1e-11, "abs_tol": 1e-13},
        },
        # bare impenetrable wall, collision speed
        "fig9": {
            "mode": WALL,
            "packet1": dict(sym),
            "t_final": 0.6,
            "n_times": 61,
            "sampling": {"kind": "density_quantile", "count_per_packet": [20, 1]},
        },
        # wall plus static resonance well; the depth multiple makes the
        # well reflection-neutral at the packet energy (k'w = pi), which
        # lines the outside peaks up with the two-packet pattern
        "fig10": {
            "mode": WELL_WALL,
            "packet1": dict(sym),
            "t_final": 0.6,
            "n_times": 61,
            "sampling": {"kind": "density_quantile", "count_per_packet": [20, 1]},
            "well_n": potentials.RESONANT_WELL_N,
        },
        # slow packet against the moving-edge well (diffraction regime);
        # the depth multiple is calibrated numerically: the adiabatic
        # resonance analysis gives 3 pi^2/16 ~ 1.85, and the motion of the
        # well edge pushes the best-aligned depth slightly higher
        "fig11": {
            "mode": DYNAMIC_POT,
            "packet1": {"x0": -3.0, "p0": 0.1, "sigma0": 0.5},
            "t_final": 5.0,
            "n_times": 51,
            "sampling": {"kind": "density_quantile", "count_per_packet": [20, 1]},
            "well_n": 2.2,
        },
        # geometry of the moving well itself (edge position and depth)
        "fig12": {
            "mode": DYNAMIC_POT,
            "packet1": {"x0": -3.0, "p0": 0.1, "sigma0": 0.5},
            "t_final": 5.0,
            "n_times": 51,
            "sampling": {"kind": "density_quantile", "count_per_packet": [10, 1]},
            "well_n": 2.2,
        },
    }
    for name, doc in docs.items():
        doc["name"] = name
    return docs


def list_presets():
    return sorted(_preset_docs())


def preset_scenario(name):
    docs = _preset_docs()
    if name not in docs:
        raise ValidationError(f"unknown preset {name!r}; known: {sorted(docs)}")
    return scenario_from_dict(docs[name])


# -- execution ---------------------------------------------------------------------


@dataclass
class RunResult:
    scenario: Scenario
    times: np.ndarray
    x_grid: np.ndarray
    densities: np.ndarray  # (n_sampled_times, nx)
    density_times: np.ndarray
    ensemble: TrajectoryEnsemble
    analysis: dict
    out_dir: str = None


def _pick_boundary(sup, scenario):
    """Boundary choice: analytic case A/B lines where their preconditions
    hold, the weighted-envelope curve for unequal weights, otherwise the
    static midpoint convention."""
    p1, p2 = sup.packet1, sup.packet2
    widths_equal = abs(p1.sigma0 - p2.sigma0) <= 1e-12 * p1.sigma0
    momenta_mirror = abs(abs(p1.p0) - abs(p2.p0)) <= 1e-12 * max(1.0, abs(p1.p0))
    if abs(sup.alpha - 1.0) > 1e-12:
        if widths_equal and sup.c1 != 0 and sup.c2 != 0:
            return boundary_case_c(sup), "case_c_weighted_envelope"
        mid = 0.5 * (p1.x0 + p2.x0)
        return BoundaryLine(x_bar_0=mid, v_bar=0.0), "midpoint_convention"
    if widths_equal:
        return boundary_case_a(sup), "case_a"
    if momenta_mirror:
        return boundary_case_b(sup), "case_b"
    mid = 0.5 * (p1.x0 + p2.x0)
    return BoundaryLine(x_bar_0=mid, v_bar=0.0), "midpoint_convention"


def _density_snapshot_times(scenario, sup):
    """Times at which density profiles are exported: start, maximal
    interference (when defined and inside the run), end."""
    ts = [0.0, scenario.t_final]
    try:
        tm = max_interference_time(sup)
        if 0.0 < tm < scenario.t_final:
            ts.insert(1, tm)
    except Exception:
        pass
    return np.array(ts)


def _write_density_csv(path, times, x, amplitudes):
    lines = ["t,x,re_psi,im_psi,rho"]
    for k, t in enumerate(times):
        a = amplitudes[k]
        for j in range(x.size):
            lines.append(
                f"{fmt(t)},{fmt(x[j])},{fmt(a[j].real)},{fmt(a[j].imag)},{fmt(abs(a[j]) ** 2)}"
            )
    atomic_write_text(path, "\n".join(lines) + "\n")


def _interference_time_window(sup, scenario):
    """Time window around maximal interference during which the packets
    overlap appreciably: t_int +/- 2 sigma_t / |v_rel/2|."""
    try:
        tm = max_interference_time(sup)
    except Exception:
        return None
    v_half = 0.5 * abs(sup.packet1.v_p - sup.packet2.v_p)
    if v_half == 0:
        return None
    half = 2.0 * float(sup.packet1.spread(tm)) / v_half
    return (max(0.0, tm - half), min(scenario.t_final, tm + half))


def run_scenario(scenario, out_dir=None, plots=True, threads=1, tolerance_profile="fast"):
    if tolerance_profile not in ("fast", "strict"):
        raise ValidationError("tolerance-profile must be fast or strict")
    cfg = scenario.integrator_config()
    if tolerance_profile == "strict":
        cfg = IntegratorConfig(
            rel_tol=cfg.rel_tol * 1e-2, abs_tol=cfg.abs_tol * 1e-2, max_step=cfg.max_step
        )
    if scenario.mode == ANALYTIC:
        result = _run_analytic(scenario, cfg, threads)
    else:
        result = _run_tdse(scenario, cfg, threads)
    if out_dir is not None:
        _emit(result, out_dir, plots)
    return result


def _run_analytic(scenario, cfg, threads):
    sup = scenario.make_superposition()
    t_grid = scenario.time_grid()
    samples = sample_initial_positions(sup, scenario.sampling_strategy())
    ens = run_ensemble(sup, samples, t_grid, cfg, threads=threads)

    boundary, boundary_kind = _pick_boundary(sup, scenario)
    report = check_non_crossing(ens, tol=1e-6)
    transfer = count_region_transfer(ens, boundary, scenario.t_final)
    regime = classify_regime(sup)

    p1, p2 = sup.packet1, sup.packet2
    sig_end = max(float(p1.spread(scenario.t_final)), float(p2.spread(scenario.t_final)))
    lo = min(p1.x0, p2.x0, p1.x0 + p1.v_p * scenario.t_final, p2.x0 + p2.v_p * scenario.t_final)
    hi = max(p1.x0, p2.x0, p1.x0 + p1.v_p * scenario.t_final, p2.x0 + p2.v_p * scenario.t_final)
    x = np.linspace(lo - 4.0 * sig_end, hi + 4.0 * sig_end, 1201)

    d_times = _density_snapshot_times(scenario, sup)
    amps = [sup.amplitude(x, t) for t in d_times]
    densities = np.array([np.abs(a) ** 2 for a in amps])

    analysis = {
        "mode": scenario.mode,
        "regime": regime,
        "boundary": {
            "kind": boundary_kind,
            "x_bar_0": getattr(boundary, "x_bar_0", float(boundary.position(0.0))),
            "v_bar": getattr(boundary, "v_bar", None),
            "position_final": float(boundary.position(scenario.t_final)),
        },
        "non_crossing": {
            "violations": report.violation_count,
            "first_violation": report.first_violation,
        },
        "transfer": {
            "n_region1_final": transfer.n_region1_final,
            "n_region2_final": transfer.n_region2_final,
            "transfers_from_1": transfer.transfers_from_1,
            "transfers_from_2": transfer.transfers_from_2,
        },
    }
    if boundary_kind == "midpoint_convention":
        analysis["boundary"]["note"] = (
            "no analytic boundary for this parameter set; static midpoint used"
        )
    try:
        tm = max_interference_time(sup)
        analysis["t_max_interference"] = tm
    except Exception:
        tm = None
    window = _interference_time_window(sup, scenario)
    if window is not None:
        analysis["interference_time_window"] = list(window)

    if regime == "collision_like" and tm is not None and 0 < tm < scenario.t_final:
        w0 = fringe_spacing_collision(sup)
        rho_int = np.abs(sup.amplitude(x, tm)) ** 2
        try:
            measured = minima_spacing(x, rho_int)
        except ValueError:
            measured = None
        analysis["fringes"] = {"w0": w0, "measured_minima_spacing": measured}
    # boundary drift measured from the inter-swarm gap midpoint while the
    # packets interfere (the bounce line tracks the boundary there)
    if window is not None:
        try:
            b0, slope = boundary_drift_fit(ens, window)
            analysis["boundary"]["measured_drift_velocity"] = slope
            analysis["boundary"]["measured_intercept"] = b0
        except ValueError:
            pass
    if regime == "diffraction_like":
        t_lo = 0.5 * scenario.t_final
        try:
            slopes = asymptotic_slope_fit(ens, (t_lo, scenario.t_final))
            refs = [fraunhofer_slope(sup, n) for n in range(-3, 4)]
            clusters = cluster_slopes(slopes, refs)
            analysis["slope_clusters"] = {
                repr(k): {"count": c, "mean": m} for k, (c, m) in clusters.items()
            }
        except Exception:
            pass

    return RunResult(
        scenario=scenario,
        times=t_grid,
        x_grid=x,
        densities=densities,
        density_times=d_times,
        ensemble=ens,
        analysis=analysis,
    )


def _make_potential(scenario, packet):
    if scenario.mode == WALL:
        return potentials.wall_only(0.0)
    if scenario.mode == WELL_WALL:
        return potentials.static_wall_well(packet.p0, packet.units, n=scenario.well_n)
    return potentials.dynamic_potential(
        packet.p0, packet.sigma0, abs(packet.x0), packet.units, n=scenario.well_n
    )


def _run_tdse(scenario, cfg, threads):
    units = scenario.unit_system()
    packet = scenario.make_packet1()
    if packet.x0 >= 0 or packet.p0 <= 0:
        raise ValidationError(
            "TDSE modes expect the packet at x0 < 0 moving towards the wall (p0 > 0)"
        )
    potential = _make_potential(scenario, packet)
    grid = scenario.make_grid()
    # the grid's upper end is the wall: a truncated tail there is physical
    state = tdse.init_from_packet(grid, packet, tail_tol_hi=1e-3)
    t_grid = scenario.time_grid()
    # trajectory extraction needs the velocity field resolved in time on
    # the fringe-sweep scale, which is much finer than the export times
    n_dense = max(scenario.n_times, 601)
    t_dense = np.linspace(0.0, scenario.t_final, n_dense)
    sample_times = np.union1d(t_dense, t_grid)
    snapshots_all = tdse.propagate(state, potential, scenario.t_final, sample_times, units)
    snap_times = np.array([s.t for s in snapshots_all])
    snapshots = [
        snapshots_all[int(np.argmin(np.abs(snap_times - t)))] for t in t_grid
    ]

    n_starts = scenario.sampling[1][0]
    strategy = SamplingStrategy(
        kind=scenario.sampling[0] if scenario.sampling[0] != "explicit_list" else "density_quantile",
        count_per_packet=(n_starts, 1),
        span=scenario.sampling[2],
    )
    sup = scenario.make_superposition()
    starts, _ = sample_initial_positions(sup, strategy)
    starts = starts[:n_starts]  # the packet-1 half of the pair
    ens = tdse.bohmian_trajectories_from_grid(
        snapshots_all, starts, cfg, units, sample_times=t_grid
    )

    # analytic two-packet ensemble from the same starts, for comparison
    labels = np.ones(starts.size, dtype=int)
    ens_ref = run_ensemble(sup, (starts, labels), t_grid, cfg, threads=threads)

    report = check_non_crossing(ens, tol=1e-6)
    window = _interference_time_window(sup, scenario)
    rms = trajectory_rms(ens, ens_ref, t_window=window)

    x = grid.x
    final = snapshots[-1]
    # density comparison at the interference time (centroid reaches the
    # wall), or at the end of a run too short to get there
    t_int = abs(packet.x0) / packet.v_p
    t_cmp = min(t_int, scenario.t_final)
    cmp_state = snapshots_all[int(np.argmin(np.abs(snap_times - t_cmp)))]
    rho_cmp = np.abs(cmp_state.psi) ** 2
    # half-domain two-packet reference carries half the total mass
    rho_ref = 2.0 * sup.density_direct(x, cmp_state.t)

    analysis = {
        "mode": scenario.mode,
        "regime": classify_regime(packet),
        "norm_drift": abs(final.norm() - 1.0),
        "non_crossing": {
            "violations": report.violation_count,
            "first_violation": report.first_violation,
        },
        "trajectory_rms_vs_analytic": {
            "overall": rms.overall,
            "inside_window": rms.inside_window,
            "outside_window": rms.outside_window,
            "window": list(rms.window),
        },
    }
    if window is not None:
        analysis["interference_time_window"] = list(window)

    # compare the fully resolved (node-to-node) peaks of the run against
    # all reference maxima; a resonance peak pressed against the wall
    # pairs with the reference's central maximum at the wall itself and
    # is judged by its width instead
    peaks_num = np.array([p for p, _ in peak_widths_node_to_node(x, rho_cmp)])
    peaks_ref = peak_positions(x, rho_ref)
    analysis["comparison_time"] = float(cmp_state.t)
    analysis["density_peaks"] = [float(p) for p in peaks_num]
    analysis["reference_density_peaks"] = [float(p) for p in peaks_ref]
    if peaks_num.size and peaks_ref.size:
        errs = [float(np.min(np.abs(peaks_ref - p))) for p in peaks_num]
        analysis["max_peak_position_error"] = max(errs)
        analysis["innermost_peak_position"] = float(peaks_num[np.argmax(peaks_num)])
    try:
        analysis["reference_fringe_spacing"] = minima_spacing(x, rho_ref)
    except ValueError:
        pass
    if packet.p0 / units.mass > packet.v_s:
        analysis["fringes"] = {
            "w0": float(np.pi * units.hbar / (units.mass * packet.v_p))
        }
        try:
            analysis["innermost_peak_width_ratio"] = innermost_peak_width_ratio(
                x, rho_cmp
            )
        except ValueError:
            pass
    if potential.time_dependence == potentials.DYNAMIC:
        tt = np.linspace(0.0, scenario.t_final, 101)
        analysis["effective_potential"] = {
            "t": [float(v) for v in tt],
            "x_min": [float(potential.x_min_fn(v)) for v in tt],
            "v0": [float(potential.v0_fn(v)) for v in tt],
        }

    d_states = [snapshots[0]]
    if snapshots[0].t < cmp_state.t < final.t:
        d_states.append(cmp_state)
    d_states.append(final)
    d_times = np.array([s.t for s in d_states])
    amps = np.array([s.psi for s in d_states])
    densities = np.abs(amps) ** 2
    result = RunResult(
        scenario=scenario,
        times=t_grid,
        x_grid=x,
        densities=densities,
        density_times=d_times,
        ensemble=ens,
        analysis=analysis,
    )
    result._amplitudes = amps
    result._potential = potential
    result._rho_ref = rho_ref
    result._ens_ref = ens_ref
    return result


def _emit(result, out_dir, plots):
    os.makedirs(out_dir, exist_ok=True)
    s = result.scenario
    result.out_dir = out_dir
    result.ensemble.to_csv(os.path.join(out_dir, "trajectories.csv"))

    if hasattr(result, "_amplitudes"):
        amps = result._amplitudes
    else:
        sup = s.make_superposition()
        amps = [sup.amplitude(result.x_grid, t) for t in result.density_times]
    _write_density_csv(
        os.path.join(out_dir, "density.csv"), result.density_times, result.x_grid, amps
    )

    analysis = dict(result.analysis)
    analysis.pop("reference_density_final", None)
    atomic_write_text(
        os.path.join(out_dir, "analysis.json"),
        json.dumps(analysis, indent=1, sort_keys=True) + "\n",
    )
    atomic_write_text(os.path.join(out_dir, "scenario.json"), dump_scenario(s))

    if hasattr(result, "_potential"):
        xg = result.x_grid
        result._potential.to_csv(os.path.join(out_dir, "potential.csv"), xg, 0.0)

    if plots:
        from . import plotting

        curves = {
            f"t={result.density_times[k]:g}": result.densities[k]
            for k in range(result.density_times.size)
        }
        if hasattr(result, "_rho_ref"):
            curves["two-packet reference (final)"] = result._rho_ref
        plotting.plot_density_profiles(
            result.x_grid, curves, os.path.join(out_dir, "density.svg"), title=s.name
        )
        plotting.plot_trajectory_fan(
            result.ensemble, os.path.join(out_dir, "trajectories.svg"), title=s.name
        )
        ep = result.analysis.get("effective_potential")
        if ep:
            plotting.plot_potential_curves(
                ep["t"], ep["x_min"], ep["v0"],
                os.path.join(out_dir, "effective_potential.svg"), title=s.name,
            )


# -- comparison ------------------------------------------------------------------


def read_trajectory_csv(path):
    ids, labels, ts, xs = [], [], [], []
    with open(path) as handle:
        header = handle.readline().strip()
        if header != "trajectory_id,origin_label,t,x":
            raise IncompatibleSampling(f"unexpected trajectory CSV header: {header}")
        for line in handle:
            a, b, c, d = line.strip().split(",")
            ids.append(int(a))
            labels.append(int(b))
            ts.append(float(c))
            xs.append(float(d))
    ids = np.array(ids)
    n_traj = ids.max() + 1 if ids.size else 0
    times = np.array(ts[: len(ts) // n_traj]) if n_traj else np.array([])
    paths = np.array(xs).reshape(n_traj, -1)
    origin = np.array(labels).reshape(n_traj, -1)[:, 0]
    return TrajectoryEnsemble(times=times, paths=paths, origin_labels=origin)


def read_density_csv(path):
    """Returns (times, x, rho) with rho of shape (n_times, nx)."""
    ts, xs, rhos = [], [], []
    with open(path) as handle:
        header = handle.readline().strip()
        if header != "t,x,re_psi,im_psi,rho":
            raise IncompatibleSampling(f"unexpected density CSV header: {header}")
        for line in handle:
            t, x, _, _, r = line.strip().split(",")
            ts.append(float(t))
            xs.append(float(x))
            rhos.append(float(r))
    ts = np.array(ts)
    times = np.unique(ts)
    nx = ts.size // times.size
    x = np.array(xs[:nx])
    rho = np.array(rhos).reshape(times.size, nx)
    return np.sort(times), x, rho


def compare_runs(dir_a, dir_b, metric):
    """Compare two run directories; metric is density_L2 or trajectory_RMS."""
    if metric == "density_L2":
        _, xa, ra = read_density_csv(os.path.join(dir_a, "density.csv"))
        _, xb, rb = read_density_csv(os.path.join(dir_b, "density.csv"))
        rep = density_l2(xa, ra[-1], xb, rb[-1])
    elif metric == "trajectory_RMS":
        ea = read_trajectory_csv(os.path.join(dir_a, "trajectories.csv"))
        eb = read_trajectory_csv(os.path.join(dir_b, "trajectories.csv"))
        rep = trajectory_rms(ea, eb)
    else:
        raise ValidationError(f"unknown metric {metric!r}")
    return {
        "metric": rep.metric,
        "overall": rep.overall,
        "inside_window": rep.inside_window,
        "outside_window": rep.outside_window,
        "window": list(rep.window),
    }
