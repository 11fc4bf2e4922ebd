"""Unit tests for the effective wall/well potentials."""

import numpy as np
import pytest

from bohmwave.errors import NonpositiveMomentum
from bohmwave.potentials import (
    DYNAMIC,
    RESONANT_WELL_N,
    PotentialSpec,
    Segment,
    density_at_min,
    dynamic_potential,
    dynamic_well_depth,
    free_potential,
    static_wall_well,
    tmin,
    wall_only,
    xmin_of_t,
    xmin_of_t_alt,
)


def test_segment_validation():
    with pytest.raises(ValueError):
        Segment(0.0, 1.0, "bogus")
    with pytest.raises(ValueError):
        Segment(1.0, 1.0, "free")
    with pytest.raises(ValueError):
        Segment(0.0, 1.0, "well", -2.0)


def test_spec_requires_ordered_segments():
    with pytest.raises(ValueError):
        PotentialSpec(
            segments=(Segment(0.0, 2.0, "free"), Segment(1.0, 3.0, "well", 1.0))
        )


def test_dynamic_spec_requires_functions():
    with pytest.raises(ValueError):
        PotentialSpec(segments=(Segment(0.0, 1.0, "free"),), time_dependence=DYNAMIC)


def test_static_wall_well_geometry():
    p = 10.0
    spec = static_wall_well(p)
    assert spec.wall_position == pytest.approx(0.0)
    lo, hi, depth = spec.well_interval()
    assert lo == pytest.approx(-np.pi / 20.0)
    assert hi == pytest.approx(0.0)
    assert depth == pytest.approx(16.0 * p**2 / (2.0 * np.pi**2))
    # depth scales linearly with the multiple n
    _, _, d2 = static_wall_well(p, n=2.0).well_interval()
    assert d2 == pytest.approx(2.0 * depth)


def test_static_wall_well_requires_positive_momentum():
    with pytest.raises(NonpositiveMomentum):
        static_wall_well(0.0)
    with pytest.raises(NonpositiveMomentum):
        static_wall_well(-3.0)


def test_values_and_max_abs():
    spec = static_wall_well(10.0)
    lo, hi, depth = spec.well_interval()
    x = np.array([lo - 0.1, 0.5 * (lo + hi), hi + 0.1])
    v = spec.values(x)
    assert v[0] == 0.0
    assert v[1] == pytest.approx(-depth)
    assert spec.max_abs() == pytest.approx(depth)
    assert free_potential().max_abs() == 0.0
    assert wall_only(0.0).wall_position == 0.0
    assert free_potential().wall_position is None


def test_xmin_forms_agree():
    rng = np.random.default_rng(314)
    for _ in range(100):
        p = rng.uniform(0.1, 30.0)
        sigma0 = rng.uniform(0.2, 2.0)
        x0 = rng.uniform(1.0, 8.0)
        t = rng.uniform(0.0, 2.0)
        a = xmin_of_t(p, sigma0, x0, t)
        b = xmin_of_t_alt(p, sigma0, x0, t)
        assert a == pytest.approx(b, rel=1e-12)


def test_tmin_is_the_argmin():
    rng = np.random.default_rng(271828)
    for _ in range(20):
        p = rng.uniform(0.05, 5.0)
        sigma0 = rng.uniform(0.2, 2.0)
        x0 = rng.uniform(1.0, 8.0)
        tm = tmin(p, sigma0, x0)
        t = np.linspace(0.5 * tm, 2.0 * tm, 20001)
        xm = xmin_of_t(p, sigma0, x0, t)
        assert abs(t[np.argmin(xm)] - tm) / tm < 1e-3
    with pytest.raises(ValueError):
        tmin(1.0, 0.5, -1.0)


def test_tmin_slow_limit():
    # for p -> 0 the edge is closest one spreading time in
    sigma0, x0 = 0.5, 5.0
    tau = 2.0 * sigma0**2
    assert tmin(1e-8, sigma0, x0) / tau == pytest.approx(1.0, abs=1e-3)


def test_xmin_wide_packet_limit():
    # for sigma0 -> infinity the first minimum sits half a fringe out
    p = 10.0
    assert xmin_of_t(p, 1e4, 5.0, 1.0) == pytest.approx(np.pi / (2.0 * p), abs=1e-6)


def test_dynamic_depth_reduces_to_static():
    p = 10.0
    v0 = dynamic_well_depth(p, 1e4, 5.0, 1.0)
    assert v0 == pytest.approx((16.0 / np.pi**2) * p**2 / 2.0, rel=1e-6)


def test_density_at_min_matches_closed_form():
    from bohmwave.packets import GaussianPacket
    from bohmwave.superposition import Superposition, closed_form_symmetric_density

    p, sigma0, x0 = 10.0, 0.5, 3.0
    sup = Superposition(
        GaussianPacket(x0=-x0, p0=p, sigma0=sigma0),
        GaussianPacket(x0=x0, p0=-p, sigma0=sigma0),
    )
    for t in (0.05, 0.2, 0.29):
        xm = xmin_of_t(p, sigma0, x0, t)
        want = closed_form_symmetric_density(sup, -xm, t)
        assert density_at_min(p, sigma0, x0, t) == pytest.approx(
            float(want), rel=1e-9, abs=1e-30
        )


def test_dynamic_potential_tracks_edge():
    p, sigma0, x0 = 0.1, 0.5, 3.0
    spec = dynamic_potential(p, sigma0, x0)
    for t in (0.0, 1.0, 4.0):
        lo, hi, depth = spec.well_interval(t)
        assert hi == 0.0
        assert lo == pytest.approx(-xmin_of_t(p, sigma0, x0, t))
        assert depth == pytest.approx(dynamic_well_depth(p, sigma0, x0, t))
    deep = dynamic_potential(p, sigma0, x0, n=2.2)
    assert deep.well_interval(1.0)[2] == pytest.approx(
        2.2 * dynamic_well_depth(p, sigma0, x0, 1.0)
    )
    with pytest.raises(ValueError):
        dynamic_potential(p, sigma0, -1.0)


def test_resonant_well_multiple():
    # k' w = pi with w = pi/(2 p): k'^2 = k^2 + 2 V0 means V0 = 3 p^2 / 2,
    # i.e. 3 pi^2 / 16 in units of the base depth
    assert RESONANT_WELL_N == pytest.approx(3.0 * np.pi**2 / 16.0)
    p = 10.0
    _, _, v0 = static_wall_well(p, n=RESONANT_WELL_N).well_interval()
    k_in_well = np.sqrt(p**2 + 2.0 * v0)
    w = np.pi / (2.0 * p)
    assert k_in_well * w == pytest.approx(np.pi, rel=1e-12)


def test_potential_csv(tmp_path):
    spec = static_wall_well(10.0)
    path = tmp_path / "potential.csv"
    spec.to_csv(path, np.linspace(-1.0, 0.0, 11))
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "x,V"
    assert len(lines) == 12
