"""Velocity field reconstructed from TDSE grid snapshots.

The complex amplitude (not the velocity) is interpolated: one cubic
spline per snapshot for the real and imaginary parts, blended linearly
in t.  The velocity hbar/m * Im(conj(psi) dpsi/dx) / |psi|^2 then stays
accurate near density nodes, where a direct spline of the velocity
would have to follow a near-divergence.
"""

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import NearNode, OutOfDomain
from .tdse import ABSORBING

RHO_FLOOR_FIELD = 1e-30


class GridVelocityField:
    """Callable-velocity wrapper over a time-ordered snapshot sequence."""

    def __init__(self, snapshots, units=None):
        if len(snapshots) < 2:
            raise ValueError("need at least two snapshots to interpolate in time")
        self.grid = snapshots[0].grid
        self.times = np.array([s.t for s in snapshots])
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("snapshots must be strictly increasing in time")
        x = self.grid.x
        self._re = [CubicSpline(x, s.psi.real) for s in snapshots]
        self._im = [CubicSpline(x, s.psi.imag) for s in snapshots]
        self.x_lo = self.grid.x_lo
        self.x_hi = self.grid.x_hi
        if self.grid.boundary == ABSORBING:
            self.x_lo = self.grid.x_lo + self.grid.absorb_width
        hbar = 1.0 if units is None else units.hbar
        mass = 1.0 if units is None else units.mass
        self._hbar_over_m = hbar / mass

    def velocity(self, x, t):
        # integrator trial steps may poke a fraction of a cell past the
        # ends; clamp those, and reject anything further out
        slack = 2.0 * self.grid.dx
        if x < self.x_lo - slack or x > self.x_hi + slack:
            raise OutOfDomain(f"x = {x} left the usable grid [{self.x_lo}, {self.x_hi}]")
        clamped = min(max(x, self.x_lo), self.x_hi)
        # tolerate integrator evaluations a rounding error past the ends
        t = min(max(t, self.times[0]), self.times[-1])
        k = int(np.searchsorted(self.times, t, side="right")) - 1
        k = min(max(k, 0), self.times.size - 2)
        t0, t1 = self.times[k], self.times[k + 1]
        w = (t - t0) / (t1 - t0)
        re = (1.0 - w) * float(self._re[k](clamped)) + w * float(self._re[k + 1](clamped))
        im = (1.0 - w) * float(self._im[k](clamped)) + w * float(self._im[k + 1](clamped))
        d_re = (1.0 - w) * float(self._re[k](clamped, 1)) + w * float(
            self._re[k + 1](clamped, 1)
        )
        d_im = (1.0 - w) * float(self._im[k](clamped, 1)) + w * float(
            self._im[k + 1](clamped, 1)
        )
        rho = re * re + im * im
        if rho < RHO_FLOOR_FIELD:
            # the ends carry pinned zeros: stationary node lines whose
            # limiting velocity is their own speed, zero
            if clamped <= self.x_lo + self.grid.dx or clamped >= self.x_hi - self.grid.dx:
                return 0.0
            raise NearNode(f"grid density underflow at x = {x}, t = {t}")
        v = self._hbar_over_m * (re * d_im - im * d_re) / rho
        # the grid ends are node lines trajectories cannot cross; any
        # outward velocity there is interpolation error, so cap it
        if x >= self.x_hi:
            v = min(v, 0.0)
        elif x <= self.x_lo:
            v = max(v, 0.0)
        return v
