"""Unit tests for the two-packet superposition fields and boundary lines."""

import warnings

import numpy as np
import pytest

from bohmwave.errors import NearNode, ParallelCentroids, PreconditionError
from bohmwave.packets import GaussianPacket
from bohmwave.superposition import (
    Superposition,
    boundary_case_a,
    boundary_case_b,
    boundary_case_c,
    closed_form_symmetric_density,
    fraunhofer_slope,
    fringe_spacing_collision,
    max_interference_time,
    symmetric_parameters,
    unnormalized_momentum_expectation,
    weights,
)


def mirror_pair(p=10.0, x0=3.0, sigma0=0.5):
    p1 = GaussianPacket(x0=-x0, p0=p, sigma0=sigma0)
    p2 = GaussianPacket(x0=x0, p0=-p, sigma0=sigma0)
    return Superposition(p1, p2)


def test_polar_density_matches_direct_sum():
    rng = np.random.default_rng(101)
    sup = mirror_pair()
    for _ in range(200):
        x = rng.uniform(-5.0, 5.0)
        t = rng.uniform(0.0, 0.8)
        a = float(sup.density(x, t))
        b = float(sup.density_direct(x, t))
        assert a == pytest.approx(b, rel=1e-12, abs=1e-300)


def test_current_matches_wavefunction_derivative():
    # J = (hbar/m) Im(psi* dpsi/dx), via central differences of the amplitude
    rng = np.random.default_rng(5)
    sup = mirror_pair()
    h = 1e-6
    for _ in range(50):
        x = rng.uniform(-4.0, 4.0)
        t = rng.uniform(0.0, 0.6)
        psi = complex(sup.amplitude(x, t))
        dpsi = complex(sup.amplitude(x + h, t) - sup.amplitude(x - h, t)) / (2 * h)
        j_fd = np.imag(np.conj(psi) * dpsi)
        assert float(sup.current(x, t)) == pytest.approx(j_fd, abs=1e-8)


def test_velocity_vanishes_at_midpoint():
    sup = mirror_pair()
    for t in (0.0, 0.15, 0.3, 0.45, 0.6):
        assert float(sup.velocity(0.0, t)) == pytest.approx(0.0, abs=1e-12)


def test_velocity_contributions_sum():
    sup = mirror_pair()
    v1, v2 = sup.velocity_contributions(-1.2, 0.25)
    assert float(v1 + v2) == pytest.approx(float(sup.velocity(-1.2, 0.25)), rel=1e-12)


def test_single_packet_limit():
    p1 = GaussianPacket(x0=-3.0, p0=10.0, sigma0=0.5)
    p2 = GaussianPacket(x0=3.0, p0=-10.0, sigma0=0.5)
    sup = Superposition(p1, p2, c1=1.0, c2=0.0, normalized_packets=True)
    x = np.array([-3.5, -3.0, -2.5])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        j = sup.current(x, 0.2)
    rho1 = p1.sqrt_density(x, 0.2) ** 2
    assert np.allclose(j, rho1 * p1.velocity(x, 0.2), rtol=1e-10)


def test_continuity_residual_analytic():
    # |d(rho)/dt + d(J)/dx| < 1e-6 away from nodes, central differences
    rng = np.random.default_rng(2026)
    sup = mirror_pair()
    checked = 0
    while checked < 100:
        t = rng.uniform(0.05, 0.6)
        x = rng.uniform(-4.0, 4.0)
        if float(sup.density(x, t)) < 0.05:
            continue
        checked += 1
        ht = 1e-5
        hx = float(sup.packet1.spread(t)) * 1e-5
        drho = (float(sup.density(x, t + ht)) - float(sup.density(x, t - ht))) / (2 * ht)
        dj = (float(sup.current(x + hx, t)) - float(sup.current(x - hx, t))) / (2 * hx)
        assert abs(drho + dj) < 1e-6


def test_node_guard():
    # at maximal interference the density has exact zeros between fringes;
    # velocity evaluation there must refuse instead of overflowing
    sup = mirror_pair()
    tm = max_interference_time(sup)
    w0 = fringe_spacing_collision(sup)
    with pytest.raises(NearNode):
        sup.velocity(w0 / 2.0, tm)  # first node off the central peak


def test_boundary_case_a_static_for_mirror_pair():
    line = boundary_case_a(mirror_pair())
    assert line.x_bar_0 == pytest.approx(0.0)
    assert line.v_bar == pytest.approx(0.0)
    assert line.position(0.37) == pytest.approx(0.0)


def test_boundary_case_a_different_momenta():
    p1 = GaussianPacket(x0=-3.0, p0=10.0, sigma0=0.5)
    p2 = GaussianPacket(x0=3.0, p0=-30.0, sigma0=0.5)
    line = boundary_case_a(Superposition(p1, p2))
    assert line.v_bar == pytest.approx(-10.0)
    assert line.x_bar_0 == pytest.approx(0.0)


def test_boundary_case_a_strict_precondition():
    p1 = GaussianPacket(x0=-3.0, p0=10.0, sigma0=0.5)
    p2 = GaussianPacket(x0=3.0, p0=-10.0, sigma0=1.5)
    with pytest.raises(PreconditionError):
        boundary_case_a(Superposition(p1, p2), strict=True)


def test_boundary_case_b_different_widths():
    p1 = GaussianPacket(x0=-4.0, p0=20.0, sigma0=0.5)
    p2 = GaussianPacket(x0=4.0, p0=-20.0, sigma0=1.5)
    line = boundary_case_b(Superposition(p1, p2))
    # inverse-width weighting: v_bar = (20/0.5 - 20/1.5)/(1/0.5 + 1/1.5)
    assert line.v_bar == pytest.approx(10.0)
    assert line.x_bar_0 == pytest.approx(-2.0)  # -x0/2 for x0 = 4


def test_boundary_case_c_reduces_to_midline():
    sup = mirror_pair()
    curve = boundary_case_c(sup)
    t = np.linspace(0.0, 0.25, 11)
    assert np.max(np.abs(curve.position(t))) < 1e-12


def test_boundary_case_c_offset_sign():
    # heavier packet 1 pushes the balance point towards packet 2
    p1 = GaussianPacket(x0=-3.0, p0=10.0, sigma0=0.5)
    p2 = GaussianPacket(x0=3.0, p0=-10.0, sigma0=0.5)
    sup = Superposition.from_alpha(p1, p2, alpha=0.5)
    curve = boundary_case_c(sup)
    assert float(curve.position(0.0)) > 0.0


def test_unnormalized_weights():
    p1 = GaussianPacket(x0=-4.0, p0=20.0, sigma0=0.5)
    p2 = GaussianPacket(x0=4.0, p0=-20.0, sigma0=1.5)
    sup = Superposition(p1, p2, normalized_packets=False)
    w1, w2 = weights(sup)
    assert w1 == pytest.approx(0.25)
    assert w2 == pytest.approx(0.75)
    # <p> = ((s1 - s2)/(s1 + s2)) p0, and it cancels m * v_bar of case B
    pexp = unnormalized_momentum_expectation(sup)
    assert pexp == pytest.approx(-10.0)
    assert pexp + boundary_case_b(sup).v_bar == pytest.approx(0.0, abs=1e-12)


def test_interference_geometry():
    sup = mirror_pair()
    assert max_interference_time(sup) == pytest.approx(0.3)
    assert fringe_spacing_collision(sup) == pytest.approx(np.pi / 10.0)
    sigma0, x0, p = symmetric_parameters(sup)
    assert (sigma0, x0, p) == (0.5, 3.0, 10.0)


def test_max_interference_time_parallel():
    p1 = GaussianPacket(x0=-5.0, p0=0.0, sigma0=0.5)
    p2 = GaussianPacket(x0=5.0, p0=0.0, sigma0=0.5)
    with pytest.raises(ParallelCentroids):
        max_interference_time(Superposition(p1, p2))


def test_closed_form_symmetric_density_proportional():
    sup = mirror_pair()
    x = np.linspace(-4.0, 4.0, 401)
    for t in (0.1, 0.3, 0.5):
        direct = sup.density_direct(x, t)
        closed = closed_form_symmetric_density(sup, x, t)
        mask = direct > 1e-12
        ratios = closed[mask] / direct[mask]
        assert np.max(ratios) / np.min(ratios) == pytest.approx(1.0, rel=1e-9)


def test_fraunhofer_slopes():
    p1 = GaussianPacket(x0=-5.0, p0=0.0, sigma0=0.5)
    p2 = GaussianPacket(x0=5.0, p0=0.0, sigma0=0.5)
    sup = Superposition(p1, p2)
    assert fraunhofer_slope(sup, 0) == 0.0
    assert fraunhofer_slope(sup, 1) == pytest.approx(0.6283, abs=5e-5)
    assert fraunhofer_slope(sup, 2) == pytest.approx(2.0 * fraunhofer_slope(sup, 1))


def test_from_alpha_weights():
    p1 = GaussianPacket(x0=-3.0, p0=10.0, sigma0=0.5)
    p2 = GaussianPacket(x0=3.0, p0=-10.0, sigma0=0.5)
    sup = Superposition.from_alpha(p1, p2, alpha=0.5)
    assert sup.alpha == pytest.approx(0.5)
    assert sup.c1**2 + sup.c2**2 == pytest.approx(1.0)
    with pytest.raises(ValueError):
        Superposition.from_alpha(p1, p2, alpha=-0.1)
