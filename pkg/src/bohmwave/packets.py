"""Analytic free Gaussian wave packet.

A packet is parametrized by its initial centroid x0, mean momentum p0 and
initial width sigma0.  Everything here is closed form: amplitude, width
growth, Bohmian velocity field, quantum potential, and the exact guided
path x(t) = x_t + (x(0) - x0) * sigma_t / sigma0.

All functions accept scalars or numpy arrays for x and t.
"""

from dataclasses import dataclass, field

import numpy as np

from .units import NATURAL, UnitSystem

COLLISION_LIKE = "collision_like"
DIFFRACTION_LIKE = "diffraction_like"
INTERMEDIATE = "intermediate"

# Default thresholds on v_p/v_s for the regime classification.
REGIME_RATIO_HI = 5.0
REGIME_RATIO_LO = 0.2


@dataclass(frozen=True)
class GaussianPacket:
    x0: float
    p0: float
    sigma0: float
    units: UnitSystem = field(default=NATURAL)

    def __post_init__(self):
        if not self.sigma0 > 0:
            raise ValueError("sigma0 must be strictly positive")

    # -- derived constants -------------------------------------------------

    @property
    def v_p(self):
        """Propagation (centroid) velocity."""
        return self.p0 / self.units.mass

    @property
    def v_s(self):
        """Spreading velocity hbar / (2 m sigma0)."""
        return self.units.hbar / (2.0 * self.units.mass * self.sigma0)

    @property
    def p_s(self):
        """Effective spreading momentum hbar / (2 sigma0)."""
        return self.units.hbar / (2.0 * self.sigma0)

    @property
    def tau(self):
        """Spreading timescale 2 m sigma0^2 / hbar."""
        return 2.0 * self.units.mass * self.sigma0**2 / self.units.hbar

    @property
    def energy_propagation(self):
        return self.p0**2 / (2.0 * self.units.mass)

    @property
    def energy_spreading(self):
        return self.p_s**2 / (2.0 * self.units.mass)

    # -- time-dependent geometry -------------------------------------------

    def center(self, t):
        return self.x0 + self.v_p * t

    def complex_spread(self, t):
        """sigma0 * (1 + i hbar t / 2 m sigma0^2)."""
        return self.sigma0 * (1.0 + 1j * np.asarray(t, dtype=float) / self.tau)

    def spread(self, t):
        """|complex_spread|, the physical width at time t."""
        return self.sigma0 * np.sqrt(1.0 + (np.asarray(t, dtype=float) / self.tau) ** 2)

    # -- wave function and polar pieces ------------------------------------

    def evaluate(self, x, t, normalized=True):
        """Complex amplitude of the packet at (x, t).

        The normalization prefactor (2 pi sigma_tilde^2)^(-1/4) uses the
        principal square root of sigma_tilde, which is continuous in t
        because Re(sigma_tilde) = sigma0 > 0.  With normalized=False the
        prefactor is dropped (peak amplitude 1), the variant used by the
        unnormalized two-packet superposition.
        """
        hbar = self.units.hbar
        st = self.complex_spread(t)
        xt = self.center(t)
        e = self.energy_propagation
        phase = 1j * (self.p0 * (np.asarray(x) - xt) + e * np.asarray(t)) / hbar
        body = np.exp(-((np.asarray(x) - xt) ** 2) / (4.0 * st * self.sigma0) + phase)
        if not normalized:
            return body
        return (2.0 * np.pi) ** (-0.25) / np.sqrt(st) * body

    def sqrt_density(self, x, t, normalized=True):
        """rho^(1/2), real and positive."""
        sig_t = self.spread(t)
        g = np.exp(-((np.asarray(x) - self.center(t)) ** 2) / (4.0 * sig_t**2))
        if not normalized:
            return g
        return (2.0 * np.pi * sig_t**2) ** (-0.25) * g

    def d_sqrt_density(self, x, t, normalized=True):
        """d/dx of rho^(1/2)."""
        sig_t = self.spread(t)
        return self.sqrt_density(x, t, normalized) * (
            -(np.asarray(x) - self.center(t)) / (2.0 * sig_t**2)
        )

    def action(self, x, t, normalized=True):
        """Phase action S(x, t) with Psi = rho^(1/2) exp(i S / hbar)."""
        hbar = self.units.hbar
        theta = np.asarray(t, dtype=float) / self.tau
        sig_t2 = self.spread(t) ** 2
        dx = np.asarray(x) - self.center(t)
        s = hbar * theta * dx**2 / (4.0 * sig_t2) + self.p0 * dx + self.energy_propagation * np.asarray(t)
        if normalized:
            s = s - 0.5 * hbar * np.arctan(theta)
        return s

    def grad_action(self, x, t):
        """dS/dx; the Bohmian momentum field."""
        hbar = self.units.hbar
        theta = np.asarray(t, dtype=float) / self.tau
        sig_t2 = self.spread(t) ** 2
        return self.p0 + hbar * theta * (np.asarray(x) - self.center(t)) / (2.0 * sig_t2)

    def velocity(self, x, t):
        """Bohmian velocity v = dS/dx / m = v_p + (x - x_t) v_s^2 t / sigma_t^2."""
        return self.grad_action(x, t) / self.units.mass

    def quantum_potential(self, x, t):
        """Q = -(hbar^2/2m) (d^2 rho^(1/2)/dx^2) / rho^(1/2), closed form."""
        hbar, m = self.units.hbar, self.units.mass
        sig_t2 = self.spread(t) ** 2
        dx2 = (np.asarray(x) - self.center(t)) ** 2
        return hbar**2 / (4.0 * m * sig_t2) * (1.0 - dx2 / (2.0 * sig_t2))

    def bohmian_path(self, x_start, t):
        """Exact guided trajectory from x_start at t = 0."""
        return self.center(t) + (x_start - self.x0) * self.spread(t) / self.sigma0


@dataclass(frozen=True)
class EnergySplit:
    total: float
    propagation: float
    spreading: float
    p_s: float
    v_p: float
    v_s: float
    tau: float


def energy_decomposition(packet):
    """Time-independent split of the mean energy into propagation and
    spreading parts, plus the associated velocities and timescale."""
    e_p = packet.energy_propagation
    e_s = packet.energy_spreading
    return EnergySplit(
        total=e_p + e_s,
        propagation=e_p,
        spreading=e_s,
        p_s=packet.p_s,
        v_p=packet.v_p,
        v_s=packet.v_s,
        tau=packet.tau,
    )


def classify_regime(obj, ratio_hi=REGIME_RATIO_HI, ratio_lo=REGIME_RATIO_LO):
    """Classify dynamics by the v_p/v_s ratio.

    Accepts a GaussianPacket, a superposition (uses packet 1, whose speed
    and width match packet 2 in the symmetric setups), or a bare ratio.
    """
    if hasattr(obj, "packet1"):
        obj = obj.packet1
    if hasattr(obj, "v_p"):
        ratio = abs(obj.v_p) / obj.v_s
    else:
        ratio = float(obj)
    if ratio >= ratio_hi:
        return COLLISION_LIKE
    if ratio <= ratio_lo:
        return DIFFRACTION_LIKE
    return INTERMEDIATE
