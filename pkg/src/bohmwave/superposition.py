"""Exact fields of a two-packet coherent superposition.

Density, probability current, Bohmian velocity and quantum potential are
available both from the polar-form expressions (rho_i, S_i of each packet)
and from the direct complex sum c1*psi1 + c2*psi2; the two routes agree to
rounding and are cross-checked in the tests.

Also provides the inter-region boundary lines for the asymmetric
collision setups (different momenta / different widths), the weights of
the unnormalized-packet variant, and the fringe geometry of the symmetric
collision and diffraction regimes.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import NearNode, ParallelCentroids, PreconditionError
from .packets import GaussianPacket

# Absolute density floor under which velocity/Q evaluation is refused.
# Exact Bohmian trajectories never reach nodes, so tripping this guard
# signals integrator overshoot rather than physics.
RHO_FLOOR = 1e-300


@dataclass(frozen=True)
class FieldSample:
    rho: float
    current: float
    velocity: float
    quantum_potential: float
    phase_diff: float


@dataclass(frozen=True)
class BoundaryLine:
    x_bar_0: float
    v_bar: float

    def position(self, t):
        return self.x_bar_0 + self.v_bar * np.asarray(t, dtype=float)


def _warn_or_raise(strict, message):
    if strict:
        raise PreconditionError(message)
    warnings.warn(message, stacklevel=3)


@dataclass(frozen=True)
class Superposition:
    packet1: GaussianPacket
    packet2: GaussianPacket
    c1: float = np.sqrt(0.5)
    c2: float = np.sqrt(0.5)
    normalized_packets: bool = True

    def __post_init__(self):
        if self.packet1.units != self.packet2.units:
            raise ValueError("packets must share a unit system")
        if self.normalized_packets and abs(self.c1**2 + self.c2**2 - 1.0) > 1e-9:
            warnings.warn(
                "weights of a normalized superposition do not satisfy "
                "c1^2 + c2^2 = 1", stacklevel=2,
            )

    @classmethod
    def from_alpha(cls, packet1, packet2, alpha):
        """Equal-normalization construction with weight ratio alpha = (c2/c1)^2."""
        if alpha < 0:
            raise ValueError("alpha must be >= 0")
        c1 = 1.0 / np.sqrt(1.0 + alpha)
        return cls(packet1, packet2, c1=c1, c2=c1 * np.sqrt(alpha))

    @property
    def units(self):
        return self.packet1.units

    @property
    def alpha(self):
        return (self.c2 / self.c1) ** 2

    @property
    def weight_ratio(self):
        """Signed amplitude ratio c2/c1 (equals sqrt(alpha) for c2 >= 0)."""
        return self.c2 / self.c1

    # -- wave function -------------------------------------------------------

    def amplitude(self, x, t):
        n = self.normalized_packets
        return self.c1 * self.packet1.evaluate(x, t, n) + self.c2 * self.packet2.evaluate(x, t, n)

    def phase_difference(self, x, t):
        """(S2 - S1)/hbar from the analytic (globally unwrapped) actions."""
        n = self.normalized_packets
        return (self.packet2.action(x, t, n) - self.packet1.action(x, t, n)) / self.units.hbar

    # -- fields, polar route -------------------------------------------------

    def _polar_pieces(self, x, t):
        n = self.normalized_packets
        r1 = self.packet1.sqrt_density(x, t, n)
        r2 = self.packet2.sqrt_density(x, t, n)
        phi = self.phase_difference(x, t)
        return r1, r2, phi

    def density(self, x, t):
        r1, r2, phi = self._polar_pieces(x, t)
        r = self.weight_ratio
        return self.c1**2 * (r1**2 + r**2 * r2**2 + 2.0 * r * r1 * r2 * np.cos(phi))

    def density_direct(self, x, t):
        """|c1 psi1 + c2 psi2|^2; independent code path used as an oracle."""
        return np.abs(self.amplitude(x, t)) ** 2

    def current_parts(self, x, t):
        """The two current contributions: the cos(phi) flux-combination part
        and the sin(phi) asymmetry part."""
        n = self.normalized_packets
        m = self.units.mass
        hbar = self.units.hbar
        r = self.weight_ratio
        r1, r2, phi = self._polar_pieces(x, t)
        ds1 = self.packet1.grad_action(x, t)
        ds2 = self.packet2.grad_action(x, t)
        j_cos = (self.c1**2 / m) * (
            r1**2 * ds1
            + r**2 * r2**2 * ds2
            + r * r1 * r2 * (ds1 + ds2) * np.cos(phi)
        )
        dr1 = self.packet1.d_sqrt_density(x, t, n)
        dr2 = self.packet2.d_sqrt_density(x, t, n)
        j_sin = (self.c1**2 / m) * hbar * r * (r1 * dr2 - r2 * dr1) * np.sin(phi)
        return j_cos, j_sin

    def current(self, x, t):
        j_cos, j_sin = self.current_parts(x, t)
        return j_cos + j_sin

    def velocity(self, x, t):
        rho = self.density(x, t)
        if np.any(np.asarray(rho) < RHO_FLOOR):
            raise NearNode(f"density below node guard at x={x}, t={t}")
        return self.current(x, t) / rho

    def velocity_contributions(self, x, t):
        """Velocity split into the cos-phi and sin-phi contributions."""
        rho = self.density(x, t)
        if np.any(np.asarray(rho) < RHO_FLOOR):
            raise NearNode(f"density below node guard at x={x}, t={t}")
        j_cos, j_sin = self.current_parts(x, t)
        return j_cos / rho, j_sin / rho

    def quantum_potential(self, x, t):
        """Q from 5-point central differences of rho^(1/2); the closed form
        of the superposition's second derivative is not worth the risk."""
        rho = self.density(x, t)
        if np.any(np.asarray(rho) < RHO_FLOOR):
            raise NearNode(f"density below node guard at x={x}, t={t}")
        sig = min(float(np.min(self.packet1.spread(t))), float(np.min(self.packet2.spread(t))))
        h = sig * 1e-4
        x = np.asarray(x, dtype=float)
        stencil = (
            -self._sqrt_rho(x - 2 * h, t)
            + 16.0 * self._sqrt_rho(x - h, t)
            - 30.0 * self._sqrt_rho(x, t)
            + 16.0 * self._sqrt_rho(x + h, t)
            - self._sqrt_rho(x + 2 * h, t)
        ) / (12.0 * h**2)
        hbar, m = self.units.hbar, self.units.mass
        return -(hbar**2) / (2.0 * m) * stencil / np.sqrt(rho)

    def _sqrt_rho(self, x, t):
        return np.sqrt(self.density(x, t))

    def field_sample(self, x, t):
        rho = float(self.density(x, t))
        if rho < RHO_FLOOR:
            raise NearNode(f"density below node guard at x={x}, t={t}")
        j = float(self.current(x, t))
        return FieldSample(
            rho=rho,
            current=j,
            velocity=j / rho,
            quantum_potential=float(self.quantum_potential(x, t)),
            phase_diff=float(self.phase_difference(x, t)),
        )


# -- weights of the unnormalized variant -------------------------------------

def weights(sup, strict=False):
    """Probabilities carried by each packet of the unnormalized variant,
    P_i = sigma0_i / (sigma0_1 + sigma0_2)."""
    if sup.normalized_packets:
        _warn_or_raise(strict, "weights() applies to the unnormalized-packet variant")
    s1, s2 = sup.packet1.sigma0, sup.packet2.sigma0
    return s1 / (s1 + s2), s2 / (s1 + s2)


def unnormalized_momentum_expectation(sup, strict=False):
    """<p> of the unnormalized superposition, ((s1 - s2)/(s1 + s2)) p0.

    Adding m * v_bar of the different-width boundary line gives zero.
    """
    if sup.normalized_packets:
        _warn_or_raise(strict, "momentum expectation applies to the unnormalized variant")
    if abs(abs(sup.packet1.p0) - abs(sup.packet2.p0)) > 1e-9 * max(1.0, abs(sup.packet1.p0)):
        _warn_or_raise(strict, "momenta must be equal in modulus")
    s1, s2 = sup.packet1.sigma0, sup.packet2.sigma0
    p0 = abs(sup.packet1.p0)
    return (s1 - s2) / (s1 + s2) * p0


# -- boundary lines -----------------------------------------------------------

def boundary_case_a(sup, strict=False):
    """Boundary for identical-width packets with different |p0|:
    moves at the superposition's mean velocity (p01 + p02) / 2m."""
    p1, p2 = sup.packet1, sup.packet2
    if abs(p1.sigma0 - p2.sigma0) > 1e-12 * p1.sigma0:
        _warn_or_raise(strict, "case A expects identical widths")
    if abs(sup.alpha - 1.0) > 1e-12:
        _warn_or_raise(strict, "case A expects alpha = 1")
    m = sup.units.mass
    return BoundaryLine(
        x_bar_0=0.5 * (p1.x0 + p2.x0),
        v_bar=(p1.p0 + p2.p0) / (2.0 * m),
    )


def boundary_case_b(sup, strict=False):
    """Boundary for equal-|p0| packets with different widths: moves at the
    inverse-width weighted mean velocity."""
    p1, p2 = sup.packet1, sup.packet2
    if abs(abs(p1.p0) - abs(p2.p0)) > 1e-12 * max(1.0, abs(p1.p0)):
        _warn_or_raise(strict, "case B expects momenta equal in modulus")
    if abs(sup.alpha - 1.0) > 1e-12:
        _warn_or_raise(strict, "case B expects alpha = 1")
    w1, w2 = 1.0 / p1.sigma0, 1.0 / p2.sigma0
    return BoundaryLine(
        x_bar_0=(w1 * p1.x0 + w2 * p2.x0) / (w1 + w2),
        v_bar=(w1 * p1.v_p + w2 * p2.v_p) / (w1 + w2),
    )


@dataclass(frozen=True)
class WeightedEnvelopeBoundary:
    """Region boundary for unequal weights: the locus where the weighted
    packet envelopes balance, c1^2 rho1 = c2^2 rho2.

    For identical-width mirror packets this is the midpoint plus a
    weight-dependent offset sigma_t^2 ln(c1^2/c2^2) / (2 (x2t - x1t)); it
    reduces to the equal-weight midline when c1 = c2.  Near the centroid
    crossing the offset is singular and the midpoint is used instead.
    """

    sup: "Superposition"

    def position(self, t):
        p1, p2 = self.sup.packet1, self.sup.packet2
        x1t = p1.center(t)
        x2t = p2.center(t)
        mid = 0.5 * (x1t + x2t)
        gap = x2t - x1t
        sig2 = p1.spread(t) * p2.spread(t)
        log_ratio = 2.0 * np.log(abs(self.sup.c1 / self.sup.c2))
        offset = np.where(
            np.abs(gap) > 1e-9, sig2 * log_ratio / (2.0 * np.where(gap == 0, 1.0, gap)), 0.0
        )
        return mid + offset


def boundary_case_c(sup, strict=False):
    """Boundary for unequal weights (alpha != 1): the weighted-envelope
    balance curve.  The construction is a convention; it is only located
    qualitatively between the innermost trajectories of the two swarms."""
    p1, p2 = sup.packet1, sup.packet2
    if abs(p1.sigma0 - p2.sigma0) > 1e-12 * p1.sigma0:
        _warn_or_raise(strict, "the weighted-envelope boundary expects identical widths")
    if sup.c1 == 0 or sup.c2 == 0:
        raise ValueError("both weights must be nonzero")
    return WeightedEnvelopeBoundary(sup)


# -- interference geometry ----------------------------------------------------

def max_interference_time(sup):
    """Time at which the packet centroids coincide."""
    p1, p2 = sup.packet1, sup.packet2
    dv = p1.v_p - p2.v_p
    if dv == 0.0:
        raise ParallelCentroids("centroids move at equal velocities")
    return (p2.x0 - p1.x0) / dv


def fringe_spacing_collision(sup):
    """Spacing between consecutive density minima in the symmetric
    collision, w0 = pi hbar / (m v_p)."""
    vp = abs(sup.packet1.v_p)
    if vp == 0.0:
        raise ZeroDivisionError("fringe spacing undefined for v_p = 0")
    return np.pi * sup.units.hbar / (sup.units.mass * vp)


def _symmetric_params(sup, strict=False):
    p1, p2 = sup.packet1, sup.packet2
    if abs(p1.sigma0 - p2.sigma0) > 1e-12 * p1.sigma0 or abs(p1.x0 + p2.x0) > 1e-9 or abs(p1.p0 + p2.p0) > 1e-9:
        _warn_or_raise(strict, "symmetric closed form expects mirror-image packets")
    if abs(sup.alpha - 1.0) > 1e-12:
        _warn_or_raise(strict, "symmetric closed form expects alpha = 1")
    # convention of the effective-potential construction: packet 1 sits at
    # -x0 moving +v_p, packet 2 at +x0 moving -v_p, so x_t = x0 - v_p t
    x0 = p2.x0
    p = p1.p0
    return p1.sigma0, x0, p


def symmetric_parameters(sup, strict=False):
    """(sigma0, x0, p) of a mirror-image pair in the convention where the
    packets start at -x0 and +x0 and approach each other, x_t = x0 - v_p t."""
    return _symmetric_params(sup, strict)


def closed_form_symmetric_density(sup, x, t, strict=False):
    """Unnormalized density of the symmetric alpha = 1 superposition,
    two displaced Gaussians plus a cos(f(t) x) interference term.

    Proportional to density(sup, x, t); the constant is
    c1^2 (2 pi sigma_t^2)^(-1/2).
    """
    sigma0, x0, p = _symmetric_params(sup, strict)
    hbar, m = sup.units.hbar, sup.units.mass
    x = np.asarray(x, dtype=float)
    xt = x0 - (p / m) * t
    sig_t2 = sup.packet1.spread(t) ** 2
    f = (hbar * t / (2.0 * m * sigma0**2)) * xt / sig_t2 + 2.0 * p / hbar
    return (
        np.exp(-((x + xt) ** 2) / (2.0 * sig_t2))
        + np.exp(-((x - xt) ** 2) / (2.0 * sig_t2))
        + 2.0 * np.exp(-(x**2 + xt**2) / (2.0 * sig_t2)) * np.cos(f * x)
    )


def fraunhofer_slope(sup, n, strict=False):
    """Quantized asymptotic trajectory slope 2 pi n (sigma0/x0) v_s in the
    diffraction regime."""
    p1 = sup.packet1
    if abs(p1.v_p) > p1.v_s:
        _warn_or_raise(strict, "Fraunhofer slopes expect the diffraction regime (v_s >> v_p)")
    x0 = 0.5 * abs(sup.packet2.x0 - sup.packet1.x0)
    if x0 == 0.0:
        raise ZeroDivisionError("packets must be initially separated")
    return 2.0 * np.pi * n * p1.sigma0 * p1.v_s / x0
