"""Effective potentials that replace one packet of a colliding pair.

In the fast-collision regime the removed packet acts on the survivor as an
impenetrable wall preceded by a short attractive well: the well width is
half the fringe spacing, w = pi hbar / 2p, and its depth follows from the
lowest bound-state condition V0 a^2 = hbar^2 / 2m with a = w/2, giving
V0 = 16 p^2 / (2 m pi^2).

In the slow (diffraction) regime the construction becomes time dependent:
the well edge tracks the first density minimum x_min(t) and the depth is
2 hbar^2 / (m x_min^2), which reduces to the static value when
x_min = pi hbar / 2p.

Sign convention: the surviving packet starts at -x0 with momentum +p > 0
towards the wall at x = 0, so its mirror centroid is x_t = x0 - v_p t.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import NonpositiveMomentum
from .io_utils import atomic_write_text, fmt
from .units import NATURAL

FREE = "free"
WELL = "well"
HARD_WALL = "hard_wall"

STATIC = "static"
DYNAMIC = "dynamic"


@dataclass(frozen=True)
class Segment:
    x_lo: float
    x_hi: float
    kind: str
    value: float = 0.0  # well depth magnitude, applied as -value

    def __post_init__(self):
        if self.kind not in (FREE, WELL, HARD_WALL):
            raise ValueError(f"unknown segment kind {self.kind!r}")
        if not self.x_lo < self.x_hi:
            raise ValueError("segment interval must be nonempty")
        if self.value < 0:
            raise ValueError("depth/height magnitude must be >= 0")


@dataclass(frozen=True)
class PotentialSpec:
    segments: tuple
    time_dependence: str = STATIC
    x_min_fn: callable = field(default=None, repr=False)
    v0_fn: callable = field(default=None, repr=False)

    def __post_init__(self):
        segs = tuple(self.segments)
        object.__setattr__(self, "segments", segs)
        for a, b in zip(segs, segs[1:]):
            if a.x_hi > b.x_lo:
                raise ValueError("segments must be ordered and non-overlapping")
        if self.time_dependence == DYNAMIC and (self.x_min_fn is None or self.v0_fn is None):
            raise ValueError("dynamic specs need x_min_fn and v0_fn")

    @property
    def wall_position(self):
        """Left edge of the hard-wall segment, or None if there is no wall."""
        for seg in self.segments:
            if seg.kind == HARD_WALL:
                return seg.x_lo
        return None

    def well_interval(self, t=0.0):
        """(x_lo, x_hi, depth) of the well at time t, or None."""
        if self.time_dependence == DYNAMIC:
            edge = float(self.x_min_fn(t))
            return (-edge, 0.0, float(self.v0_fn(t)))
        for seg in self.segments:
            if seg.kind == WELL:
                return (seg.x_lo, seg.x_hi, seg.value)
        return None

    def values(self, x, t=0.0):
        """Potential energy on the given positions.  Hard walls are not
        encoded as finite values; solvers impose psi = 0 there instead."""
        x = np.asarray(x, dtype=float)
        v = np.zeros_like(x)
        well = self.well_interval(t)
        if well is not None:
            lo, hi, depth = well
            v[(x >= lo) & (x <= hi)] = -depth
        return v

    def max_abs(self, t=0.0):
        """max |V| at time t, for solver stability guards."""
        well = self.well_interval(t)
        return 0.0 if well is None else abs(well[2])

    def to_csv(self, path, x, t=0.0):
        x = np.asarray(x, dtype=float)
        v = self.values(x, t)
        lines = ["x,V"]
        lines.extend(f"{fmt(xi)},{fmt(vi)}" for xi, vi in zip(x, v))
        atomic_write_text(path, "\n".join(lines) + "\n")


# The n giving an exact reflection resonance at energy p^2/2m: the wave
# number inside the well, k' = sqrt(k^2 + 2mV0/hbar^2), then satisfies
# k'w = pi, so the well is reflection-neutral and the interference peaks
# outside line up with the two-packet pattern.  With w = pi hbar/2p this
# gives V0 = 3p^2/2m, i.e. n = 3 pi^2/16 in V0 (w/2)^2 = n hbar^2/2m.
RESONANT_WELL_N = 3.0 * np.pi**2 / 16.0


def static_wall_well(p, units=NATURAL, n=1):
    """Wall at x = 0 preceded by a well of width pi hbar / 2p and depth
    16 p^2 / (2 m pi^2) (for n = 1, the default)."""
    if not p > 0:
        raise NonpositiveMomentum(f"wall/well construction needs p > 0, got {p}")
    hbar, m = units.hbar, units.mass
    w = np.pi * hbar / (2.0 * p)
    # depth from V0 (w/2)^2 = n hbar^2 / 2m
    v0 = n * hbar**2 / (2.0 * m) / (w / 2.0) ** 2
    return PotentialSpec(
        segments=(
            Segment(-np.inf, -w, FREE),
            Segment(-w, 0.0, WELL, v0),
            Segment(0.0, np.inf, HARD_WALL),
        )
    )


def xmin_of_t(p, sigma0, x0, t, units=NATURAL):
    """Distance from the wall to the first density minimum at time t."""
    hbar, m = units.hbar, units.mass
    t = np.asarray(t, dtype=float)
    tau = 2.0 * m * sigma0**2 / hbar
    sig_t2 = sigma0**2 * (1.0 + (t / tau) ** 2)
    xt = x0 - (p / m) * t
    f = (hbar * t / (2.0 * m * sigma0**2)) * xt / sig_t2 + 2.0 * p / hbar
    return np.pi / f


def xmin_of_t_alt(p, sigma0, x0, t, units=NATURAL):
    """Algebraically equivalent second form of xmin_of_t, kept as a
    cross-check: pi sigma_t^2 / (2 p sigma0^2 / hbar + (hbar t / 2 m sigma0^2) x0)."""
    hbar, m = units.hbar, units.mass
    t = np.asarray(t, dtype=float)
    tau = 2.0 * m * sigma0**2 / hbar
    sig_t2 = sigma0**2 * (1.0 + (t / tau) ** 2)
    return np.pi * sig_t2 / (2.0 * p * sigma0**2 / hbar + (hbar * t / (2.0 * m * sigma0**2)) * x0)


def tmin(p, sigma0, x0, units=NATURAL):
    """Time at which xmin_of_t reaches its minimum."""
    if not x0 > 0:
        raise ValueError("x0 must be > 0")
    hbar, m = units.hbar, units.mass
    p_s = hbar / (2.0 * sigma0)
    return (4.0 * m * sigma0**4 / (hbar**2 * x0)) * (
        -p + np.sqrt(p**2 + p_s**2 * (x0 / sigma0) ** 2)
    )


def density_at_min(p, sigma0, x0, t, units=NATURAL):
    """Unnormalized two-packet density evaluated at the first minimum,
    4 exp(-(x_min^2 + x_t^2) / 2 sigma_t^2) sinh^2(x_min x_t / 2 sigma_t^2).

    Shares the normalization of closed_form_symmetric_density.
    """
    hbar, m = units.hbar, units.mass
    t = np.asarray(t, dtype=float)
    tau = 2.0 * m * sigma0**2 / hbar
    sig_t2 = sigma0**2 * (1.0 + (t / tau) ** 2)
    xt = x0 - (p / m) * t
    xm = xmin_of_t(p, sigma0, x0, t, units)
    return 4.0 * np.exp(-(xm**2 + xt**2) / (2.0 * sig_t2)) * np.sinh(
        xm * xt / (2.0 * sig_t2)
    ) ** 2


def dynamic_well_depth(p, sigma0, x0, t, units=NATURAL):
    """Time-dependent well depth 2 hbar^2 / (m x_min(t)^2)."""
    xm = xmin_of_t(p, sigma0, x0, t, units)
    return 2.0 * units.hbar**2 / (units.mass * xm**2)


def dynamic_potential(p, sigma0, x0, units=NATURAL, n=1):
    """Wall at x = 0 with a moving well on [-x_min(t), 0] whose depth is
    n * 2 hbar^2 / (m x_min^2) (n = 1 by default; n = RESONANT_WELL_N
    makes the well reflection-neutral at the local fringe wavenumber)."""
    if not x0 > 0:
        raise ValueError("x0 must be > 0")

    def edge(t):
        return xmin_of_t(p, sigma0, x0, t, units)

    def depth(t):
        return n * dynamic_well_depth(p, sigma0, x0, t, units)

    return PotentialSpec(
        segments=(
            Segment(-np.inf, 0.0, WELL, 0.0),
            Segment(0.0, np.inf, HARD_WALL),
        ),
        time_dependence=DYNAMIC,
        x_min_fn=edge,
        v0_fn=depth,
    )


def free_potential():
    """No potential anywhere; for free-propagation validation runs."""
    return PotentialSpec(segments=(Segment(-np.inf, np.inf, FREE),))


def wall_only(position=0.0):
    """Impenetrable wall with no well, for the pure-reflection scenario."""
    return PotentialSpec(
        segments=(
            Segment(-np.inf, position, FREE),
            Segment(position, np.inf, HARD_WALL),
        )
    )
