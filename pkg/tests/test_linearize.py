import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from petalflow.errors import NoConvergence
from petalflow.flow import FlowOptions, advance
from petalflow.generators import (
    Complete, boundary_null_points, example1, example2, example3, identity_field,
)
from petalflow.linearize import (
    SpiralWedge, StarlikeClosedForm, build_spirallike, contour_derivative, invert,
    koenigs_iterate, monodromy, q_at_eta, starlike_from_measure, theta_at_eta,
    visser_ostrowski, visser_ostrowski_of, wedge_contains, wedge_eval,
)
from petalflow.oracles import example1_h, koebe
from petalflow.verify import random_berkson_porta

from conftest import disk_grid

HALF = Complete(-0.5, 0.0)  # f(z) = (z**2 - 1)/2, tau = 1


def cayley(z):
    return (1 - z) / (1 + z)


# ---------------------------------------------------------------- construction

def test_identity_linearizer():
    h = build_spirallike(identity_field(), 1.0, 0.3, 0.3)
    z = disk_grid(50, 0.95)
    assert np.max(np.abs(h(z) - z)) < 1e-10


def test_example3_gives_koebe():
    h = build_spirallike(example3())
    z = disk_grid(50, 0.9)
    assert np.max(np.abs(h(z) - koebe(z)) / np.abs(koebe(z))) < 1e-8


def test_boundary_tau_cayley():
    h = build_spirallike(HALF, 1.0)
    z = disk_grid(50, 0.95)
    assert np.max(np.abs(h(z) - cayley(z))) < 1e-10


@pytest.mark.parametrize("n", [1, 2, 3])
def test_example1_linearizer(n):
    h = build_spirallike(example1(n))
    z = disk_grid(50, 0.9)
    assert np.max(np.abs(h(z) - example1_h(n, z))) < 1e-10


def test_example2_linearizer():
    h = build_spirallike(example2())
    z = disk_grid(50, 0.9)
    assert np.max(np.abs(h(z) - (1 - z) / np.sqrt(1 + z * z))) < 1e-10


def test_reference_linearizer(ref_gen):
    # [DERIVED] mpmath quadrature of beta/f - 1/(w - tau) on the segment from tau
    h = build_spirallike(ref_gen)
    assert abs(h(0.5 + 0.2j) - (0.1306824601988255 + 0.1595447511391961j)) < 1e-12


def test_build_validation():
    with pytest.raises(ValueError):
        build_spirallike(example3(), mu=2.0)
    with pytest.raises(ValueError):
        build_spirallike(example2(), mu=-1.0)
    with pytest.raises(ValueError):
        build_spirallike(example3(), z0=0.2)


@pytest.mark.parametrize("gen", [example1(2), example2(), example3(), HALF])
def test_log_derivative_identity(gen):
    mu = gen.beta
    h = build_spirallike(gen, mu)
    z = disk_grid(40, 0.9)
    dh = contour_derivative(h, z)
    hz = h(z)
    assert np.max(np.abs(dh * gen.eval(z) - mu * hz) / np.abs(hz)) < 1e-8


@pytest.mark.parametrize("gen", [example1(1), example2(), example3()])
def test_schroeder_equation(gen):
    h = build_spirallike(gen)
    z = disk_grid(50)
    hz = h(z)
    for t in np.linspace(0, 3, 7):
        r = np.abs(h(advance(gen, z, t)) - np.exp(-gen.beta * t) * hz) / np.abs(hz)
        assert np.max(r) < 1e-7


@given(seed=st.integers(0, 2**32 - 1))
def test_schroeder_random(seed):
    g = random_berkson_porta(np.random.default_rng(seed))
    h = build_spirallike(g)
    z = disk_grid(20, 0.8, seed % 1000)
    hz = h(z)
    r = np.abs(h(advance(g, z, 1.0)) - np.exp(-g.beta) * hz) / np.abs(hz)
    assert np.max(r) < 1e-7


# ---------------------------------------------------------------- inversion

def test_invert_roundtrip_koebe():
    h = build_spirallike(example3())
    assert abs(invert(h, h(0.3)) - 0.3) < 1e-10


def test_invert_koebe_one():
    h = build_spirallike(example3())
    assert abs(invert(h, 1.0) - (3 - math.sqrt(5)) / 2) < 1e-10


def test_invert_cayley():
    h = build_spirallike(HALF, 1.0)
    assert abs(invert(h, 2.0, seed=0.0) - (-1 / 3)) < 1e-10


def test_invert_outside_image_fails():
    # h(Delta) = {Re w > -1/2} for example1 n=1
    h = build_spirallike(example1(1))
    with pytest.raises(NoConvergence):
        invert(h, -3.0)


@given(seed=st.integers(0, 10000))
def test_invert_roundtrip_random_points(seed):
    h = build_spirallike(example2())
    z = disk_grid(5, 0.95, seed)
    for zz in z:
        assert abs(invert(h, h(zz), seed=0.0) - zz) < 1e-9


# ---------------------------------------------------------------- starlike closed forms

def test_starlike_koebe():
    s = starlike_from_measure(StarlikeClosedForm(1.0, 0j, 1.0, 1.0, ()))
    z = disk_grid(30)
    assert np.max(np.abs(s(z) - koebe(z))) < 1e-12


def test_starlike_atom_at_minus_one():
    s = starlike_from_measure(StarlikeClosedForm(1.0, 0j, atoms=((math.pi, 1.0),)))
    z = disk_grid(30)
    assert np.max(np.abs(s(z) - z / (1 + z) ** 2)) < 1e-12


@pytest.mark.parametrize("a", [0.25, 0.5, 1.0])
def test_starlike_q_equals_minus_two_a(a):
    s = StarlikeClosedForm(1.0, 0j, 1.0, a, ((math.pi, 1.0),))
    assert abs(s.q_at_eta() + 2 * a) < 1e-6


def test_starlike_validation():
    with pytest.raises(ValueError):
        StarlikeClosedForm(1.0, 0j, atoms=((0.0, 0.5),))
    with pytest.raises(ValueError):
        StarlikeClosedForm(1.0, 0j, 1.0, 1.5, ())
    with pytest.raises(ValueError):
        StarlikeClosedForm(0.0, 0j, atoms=((0.0, 1.0),))


def test_starlike_json_roundtrip():
    s = StarlikeClosedForm(2 - 1j, 0.2j, 1j, 0.5, ((0.3, 0.4), (2.0, 0.6)))
    back = StarlikeClosedForm.from_json(s.to_json())
    z = disk_grid(10)
    assert np.allclose(back(z), s(z), atol=1e-13)


_weights = st.lists(st.floats(0.1, 1.0), min_size=1, max_size=4)


@given(w=_weights, shift=st.floats(0.3, 5.9), a=st.floats(0.05, 1.0))
def test_robertson_inequality(w, shift, a):
    total = sum(w)
    m = len(w)
    atoms = tuple((shift + 2 * math.pi * k / (m + 1), x / total) for k, x in enumerate(w))
    # tau = 1 with h(0) = 1 and a distinguished point at -1
    s = StarlikeClosedForm(-1.0, 1.0, -1.0, a, atoms)
    z = disk_grid(100, 0.98)
    val = z * s.log_derivative(z) + (1 + z) / (1 - z)
    assert abs(s(0.0) - 1) < 1e-14
    assert np.min(val.real) > -1e-9


# ---------------------------------------------------------------- quotients

def test_visser_ostrowski_examples():
    assert abs(visser_ostrowski(koebe, 1.0) + 2) < 1e-6
    assert abs(visser_ostrowski(lambda z: np.asarray(z), 1.0) - 1) < 1e-6
    assert abs(visser_ostrowski(cayley, -1.0) + 1) < 1e-6


@pytest.mark.parametrize("gen,eta,val", [
    (example3(), 1.0, -2.0),
    (example1(2), -1.0, -0.5),
    (HALF, -1.0, -1.0),
])
def test_q_at_eta(gen, eta, val):
    h = build_spirallike(gen, 1.0)
    q = min(boundary_null_points(gen), key=lambda q: abs(q.eta - eta))
    assert abs(q_at_eta(h, q) - val) < 1e-6


@pytest.mark.parametrize("gen", [example1(1), example1(3), example2(), example3()])
def test_q_matches_visser_ostrowski(gen):
    h = build_spirallike(gen)
    for q in boundary_null_points(gen):
        assert abs(q_at_eta(h, q) - visser_ostrowski_of(h, q.eta)) < 1e-4


def test_quotient_of_reciprocal_has_opposite_sign():
    h = build_spirallike(example3())
    inv = lambda z: 1 / np.asarray(h(z))
    assert abs(visser_ostrowski(inv, 1.0, limit="finite") - 2) < 1e-4


# ---------------------------------------------------------------- theta

def test_theta_examples():
    h3 = build_spirallike(example3())
    assert abs(theta_at_eta(h3, 1.0, -2.0)) < 1e-9
    h1 = build_spirallike(example1(1))
    assert abs(theta_at_eta(h1, 1.0, -1.0)) < 1e-9
    hc = build_spirallike(HALF, 1.0)
    assert abs(theta_at_eta(hc, -1.0, -1.0)) < 1e-9


def test_theta_insensitive_to_small_eta_error():
    h = build_spirallike(example2())
    a = theta_at_eta(h, 1j, -0.5)
    assert abs(a + math.pi / 4) < 1e-12


# ---------------------------------------------------------------- monodromy

@pytest.mark.parametrize("gen", [example1(1), example1(4), example3()])
def test_monodromy_examples(gen):
    assert abs(monodromy(gen) - 2j * math.pi) < 1e-8


@given(seed=st.integers(0, 2**32 - 1))
def test_monodromy_random(seed):
    g = random_berkson_porta(np.random.default_rng(seed))
    assert abs(monodromy(g) - 2j * math.pi) < 1e-8


# ---------------------------------------------------------------- Koenigs

def test_koenigs_linear():
    z = disk_grid(10)
    for n in (1, 5, 30):
        assert np.allclose(koenigs_iterate(lambda w: w / 2, 0, 0.5, z, n), z, atol=1e-15)


def test_koenigs_matches_path_integral():
    g = example1(1)
    # iterates shrink toward tau, so the step control must be purely relative
    opts = FlowOptions(rel_tol=1e-12, abs_tol=1e-300)
    F = lambda w: advance(g, w, 1.0, opts)
    h = build_spirallike(g)
    z = disk_grid(10, 0.7)
    k = koenigs_iterate(F, 0, math.exp(-1), z, 40)
    scale = koenigs_iterate(F, 0, math.exp(-1), 0.5, 40) / h(0.5)
    assert np.max(np.abs(k - scale * h(z))) < 1e-6


def test_koenigs_self_consistency():
    F = lambda w: w / (2 - w)
    z = disk_grid(10, 0.9)
    hk = lambda w: koenigs_iterate(F, 0, 0.5, w, 60)
    assert np.max(np.abs(hk(F(z)) - 0.5 * hk(z))) < 1e-8


def test_koenigs_detects_escape():
    with pytest.raises(OverflowError):
        koenigs_iterate(lambda w: 2 * w, 0, 0.5, 0.3, 200)


# ---------------------------------------------------------------- wedges

def test_wedge_examples():
    w = SpiralWedge(1.0, 0.0)
    assert abs(wedge_eval(w, 0) - 1) < 1e-15 and wedge_contains(w, 1.0)
    w2 = SpiralWedge(2.0, 0.0)
    assert wedge_contains(w2, complex(math.cos(math.pi - 0.01), math.sin(math.pi - 0.01)))
    assert not wedge_contains(w2, -1.0)
    w3 = SpiralWedge(1 + 1j, 0.0)
    assert wedge_contains(w3, np.exp((1 + 1j) * 5))


@given(r=st.floats(0, 0.95), phi=st.floats(-math.pi, math.pi), theta=st.floats(-3, 3),
       seed=st.integers(0, 1000))
def test_wedge_contains_its_image(r, phi, theta, seed):
    # admissible exponents fill the disk |lam - 1| <= 1
    w = SpiralWedge(1 + r * complex(math.cos(phi), math.sin(phi)), theta)
    z = disk_grid(20, 0.95, seed)
    assert np.all(wedge_contains(w, wedge_eval(w, z)))


def test_wedge_distortion_probes():
    # h(Delta) contains the sector of half-angle (|nu| - 0.05) pi/2 at every scale
    for n in (1, 2):
        g = example1(n)
        h = build_spirallike(g)
        for q in boundary_null_points(g):
            nu = h.mu / q.gamma
            theta = theta_at_eta(h, q.eta, nu)
            for R in np.geomspace(1e-3, 1e3, 7):
                for s in (-1, 1):
                    ang = theta + s * (abs(nu) - 0.05) * math.pi / 2
                    assert abs(invert(h, R * complex(math.cos(ang), math.sin(ang)))) < 1
            for s in (-1, 1):
                ang = theta + s * (abs(nu) + 0.05) * math.pi / 2
                fails = 0
                for R in (5.0, 20.0, 100.0):
                    try:
                        invert(h, R * complex(math.cos(ang), math.sin(ang)))
                    except NoConvergence:
                        fails += 1
                assert fails >= 1
