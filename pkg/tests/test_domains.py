import json

import numpy as np
import pytest

from normlab import (
    DomainSpec,
    Lebesgue,
    epsilon_falsifier,
    make_grid,
    mask,
    norm,
    parse_domain,
)
from normlab.domains import zero_extend_field


BOX2 = ((-1.0, -1.0), (1.0, 1.0))


def test_mask_full_box():
    g = make_grid(1, -1.0, 1.0, 16)
    dom = DomainSpec("full", box=(g.lo, g.hi))
    assert mask(dom, g).cells.all()


def test_mask_ball_1d():
    g = make_grid(1, -2.0, 2.0, 8)
    dom = DomainSpec("ball", center=0.0, radius=1.0)
    m = mask(dom, g)
    assert np.array_equal(m.cells.ravel(), np.abs(g.axis_centers(0)) < 1.0)


def test_mask_monotone_in_radius():
    g = make_grid(2, -2.0, 2.0, 16)
    small = mask(DomainSpec("ball", center=0.0, radius=0.8), g)
    big = mask(DomainSpec("ball", center=0.0, radius=1.5), g)
    assert np.all(big.cells[small.cells])


def test_slitbox_mask_is_full_at_centers():
    g = make_grid(2, -1.0, 1.0, 16)
    dom = DomainSpec("slitbox", box=BOX2, axis=0, pos=0.1234, start=0.0)
    assert mask(dom, g).cells.all()


def test_mask_empty_rejected():
    g = make_grid(1, -2.0, 2.0, 8)
    with pytest.raises(ValueError):
        mask(DomainSpec("ball", center=10.0, radius=0.1), g)


def test_parse_domain_roundtrip():
    dom = parse_domain("ball:center=0.5;0.5,radius=1.0", box=BOX2)
    assert dom.kind == "ball"
    dom2 = parse_domain(dom.canonical(), box=BOX2)
    assert dom2.canonical() == dom.canonical()


def test_zero_extend_indicator_norm():
    g = make_grid(1, -2.0, 2.0, 64)
    dom = DomainSpec("ball", center=0.0, radius=1.0)
    m = mask(dom, g)
    f = zero_extend_field(np.ones(int(m.cells.sum())), m)
    assert norm(f, Lebesgue(1.0)) == pytest.approx(m.measure, rel=1e-12)


def test_boundary_distance_closed_forms():
    ball = DomainSpec("ball", center=(0.0, 0.0), radius=1.0)
    assert ball.boundary_distance(np.array([[0.5, 0.0]]))[0] == pytest.approx(0.5)
    ann = DomainSpec("annulus", center=(0.0, 0.0), r1=0.5, r2=1.0)
    assert ann.boundary_distance(np.array([[0.7, 0.0]]))[0] == pytest.approx(0.2)
    half = DomainSpec("halfspace", box=BOX2, axis=1, offset=-0.5)
    assert half.boundary_distance(np.array([[0.0, 0.0]]))[0] == pytest.approx(0.5)
    slit = DomainSpec("slitbox", box=BOX2, axis=0, pos=0.0, start=0.0)
    d = slit.boundary_distance(np.array([[0.25, 0.5]]))[0]
    assert d == pytest.approx(0.25)  # nearest boundary piece is the slit
    below = slit.boundary_distance(np.array([[0.05, -0.2]]))[0]
    assert below == pytest.approx(np.hypot(0.05, 0.2))  # slit tip is nearest


def test_lshape_distance_near_notch():
    # union of [0,2]x[0,1] and [0,1]x[0,2]
    dom = DomainSpec("lshape", lo1=(0.0, 0.0), hi1=(2.0, 1.0),
                     lo2=(0.0, 0.0), hi2=(1.0, 2.0))
    assert dom.predicate(np.array([[1.5, 0.5]]))[0]
    assert not dom.predicate(np.array([[1.5, 1.5]]))[0]
    # distance to the reentrant corner (1,1) from inside box 1
    d = dom.boundary_distance(np.array([[1.2, 0.8]]))[0]
    assert d == pytest.approx(0.2)  # the y=1 face of box 1 is exposed at x>1
    deep = dom.boundary_distance(np.array([[0.5, 0.5]]))[0]
    assert deep == pytest.approx(0.5)


def test_segment_blocked_slit_and_annulus():
    slit = DomainSpec("slitbox", box=BOX2, axis=0, pos=0.0, start=0.0)
    a = np.array([-0.1, 0.5])
    b = np.array([0.1, 0.5])
    assert slit.segment_blocked(a, b)
    assert not slit.segment_blocked(np.array([-0.1, -0.5]), np.array([0.1, -0.5]))
    ann = DomainSpec("annulus", center=(0.0, 0.0), r1=0.5, r2=1.0)
    assert ann.segment_blocked(np.array([-0.8, 0.0]), np.array([0.8, 0.0]))
    assert not ann.segment_blocked(np.array([0.0, 0.8]), np.array([0.4, 0.7]))


def test_falsifier_convex_clean():
    for dom in (DomainSpec("ball", center=(0.0, 0.0), radius=1.0),
                DomainSpec("halfspace", box=BOX2, axis=0, offset=0.0),
                DomainSpec("full", box=BOX2)):
        cert = epsilon_falsifier(dom, 0.5, 2000, seed=5)
        assert cert.verdict == "not-refuted", (dom.kind, cert.witness)


def test_falsifier_slit_refuted_with_witness_near_slit():
    dom = DomainSpec("slitbox", box=BOX2, axis=0, pos=0.1234, start=0.0)
    for eps in (0.1, 0.5, 1.0):
        cert = epsilon_falsifier(dom, eps, 300, seed=7)
        assert cert.verdict == "refuted"
        x = np.asarray(cert.witness["x"])
        y = np.asarray(cert.witness["y"])
        assert abs(x[0] - 0.1234) < 0.1 and abs(y[0] - 0.1234) < 0.1
        assert not cert.exhaustive and "advisory-refutation" in cert.flags


def test_falsifier_certificate_serializes():
    dom = DomainSpec("ball", center=(0.0, 0.0), radius=1.0)
    cert = epsilon_falsifier(dom, 0.5, 50, seed=1)
    payload = json.loads(cert.to_json())
    assert payload["verdict"] == "not-refuted"
    assert payload["samples"] >= 50


def test_falsifier_rejects_bad_eps():
    dom = DomainSpec("ball", center=(0.0, 0.0), radius=1.0)
    with pytest.raises(ValueError):
        epsilon_falsifier(dom, 1.5, 10)
    with pytest.raises(ValueError):
        epsilon_falsifier(dom, 0.5, 0)


def test_falsifier_deterministic_given_seed():
    dom = DomainSpec("slitbox", box=BOX2, axis=0, pos=0.1234, start=0.0)
    a = epsilon_falsifier(dom, 0.5, 100, seed=3)
    b = epsilon_falsifier(dom, 0.5, 100, seed=3)
    assert a.to_json() == b.to_json()
