import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from petalflow.errors import AlphaTooSmall
from petalflow.flow import advance, boundary_multiplier
from petalflow.generators import boundary_null_points, example1, example2, example3, identity_field
from petalflow.oracles import example_model
from petalflow.petals import (
    Flower, build_flower, conjugation_check, disk_samples, is_maximal, membership,
    solve_petal, backward_orbit,
)

from conftest import disk_grid


def _eta(gen, target):
    return min(boundary_null_points(gen), key=lambda q: abs(q.eta - target))


def _seg_dist(p, a, b):
    # distance from points p to the segments [a_i, b_i]
    d = b - a
    s = np.clip(((p[:, None] - a[None, :]) * np.conj(d)[None, :]).real
                / np.maximum(np.abs(d) ** 2, 1e-300)[None, :], 0, 1)
    return np.min(np.abs(p[:, None] - (a[None, :] + s * d[None, :])), axis=1)


def hausdorff(poly, target):
    """Two-sided distance between a polyline and densely sampled target points."""
    to_target = _seg_dist(poly, target[:-1], target[1:])
    to_poly = _seg_dist(target, poly[:-1], poly[1:])
    return max(float(np.max(to_target)), float(np.max(to_poly)))


# ---------------------------------------------------------------- solve_petal

def test_example1_petal_map(grid100):
    p = solve_petal(example1(1), _eta(example1(1), 1), 1.0)
    assert abs(p.phi(0.0) - 0.5) < 1e-8
    assert np.max(np.abs(p.phi(grid100) - (1 - grid100) / 2)) < 1e-6
    # radial limits at -1 and 1
    assert abs(p.phi(-1 + 1e-9) - 1) < 1e-6
    assert abs(p.phi(1 - 1e-9)) < 1e-6


@pytest.mark.parametrize("n", [2, 3])
def test_example1_petals_match_closed_form(n, grid100):
    gen = example1(n)
    for model in example_model("example1", n).petals:
        p = solve_petal(gen, _eta(gen, model.eta), float(n))
        assert np.max(np.abs(p.phi(grid100) - model.phi(grid100))) < 1e-6


def test_example3_petal_seed():
    p = solve_petal(example3(), _eta(example3(), 1), 0.5)
    assert abs(p.phi(0.0) - (3 - math.sqrt(5)) / 2) < 1e-8


def test_example2_petals_match_closed_form(grid100):
    gen = example2()
    for model in example_model("example2").petals:
        p = solve_petal(gen, _eta(gen, model.eta), 2.0)
        z = grid100[np.abs(grid100) < 0.8]
        assert np.max(np.abs(p.phi(z) - model.phi(z))) < 1e-6


def test_alpha_too_small():
    with pytest.raises(AlphaTooSmall):
        solve_petal(example1(1), _eta(example1(1), 1), 0.5)


def test_alpha_at_bound_with_rounding():
    q = _eta(example1(1), 1)
    p = solve_petal(example1(1), q, -q.gamma - 1e-10)
    assert is_maximal(p)


def test_phi_rejects_points_outside():
    p = solve_petal(example1(1), _eta(example1(1), 1), 1.0)
    with pytest.raises(ValueError):
        p.phi(1.5)


@pytest.mark.parametrize("key", ["ex1n1", "ex1n2", "ex1n3", "ex2", "ex3"])
def test_ode_residual(flowers, key, grid100):
    for p in flowers[key].petals:
        z = grid100[np.abs(grid100) < 0.85]
        assert np.max(p.ode_residual(z)) < 1e-6


def test_petal_json_fields(flowers):
    d = flowers["ex3"].petals[0].to_json()
    assert set(d) == {"eta_angle", "gamma", "alpha", "theta", "boundary"}
    assert abs(d["gamma"] + 0.5) < 1e-6 and abs(d["alpha"] - 0.5) < 1e-6
    assert abs(d["theta"]) < 1e-9


# ---------------------------------------------------------------- membership

def test_membership_example2(flowers):
    up = min(flowers["ex2"].petals, key=lambda p: abs(p.eta.eta - 1j))
    assert membership(up, 0.5j)
    assert not membership(up, -0.5j)
    assert not membership(up, up.tau)


def test_membership_example3(flowers):
    p = flowers["ex3"].petals[0]
    assert not membership(p, -0.5)
    assert membership(p, 0.5)
    assert not membership(p, 0.0)


def test_membership_vectorized(flowers):
    p = flowers["ex1n1"].petals[0]
    z = np.array([[0.5, 0.9j], [1.2, 0.25 + 0.1j]])
    m = membership(p, z)
    assert m.shape == (2, 2)
    assert m.tolist() == [[True, False], [False, True]]


def test_membership_matches_closed_form_disk(flowers):
    p = flowers["ex1n1"].petals[0]
    z = disk_samples(2000, 0.999)
    inside = np.abs(z - 0.5) < 0.5
    clear = np.abs(np.abs(z - 0.5) - 0.5) > 1e-6
    assert np.array_equal(membership(p, z[clear]), inside[clear])


def test_is_maximal():
    q3 = _eta(example1(3), 1)
    assert is_maximal(solve_petal(example1(3), q3, 3.0))
    q1 = _eta(example1(1), 1)
    assert not is_maximal(solve_petal(example1(1), q1, 2.0))
    assert is_maximal(solve_petal(example3(), _eta(example3(), 1), 0.5))


@pytest.mark.parametrize("a1,a2", [(1.0, 1.5), (1.0, 3.0), (2.0, 2.5)])
def test_petals_shrink_as_alpha_grows(a1, a2):
    gen = example1(1)
    q = _eta(gen, 1)
    p1, p2 = solve_petal(gen, q, a1), solve_petal(gen, q, a2)
    z = disk_samples(2000, 0.999)
    m1, m2 = membership(p1, z), membership(p2, z)
    assert not np.any(m2 & ~m1)
    assert np.any(m1 & ~m2)


# ---------------------------------------------------------------- boundary tracing

def test_trace_example1_circle(flowers):
    b = flowers["ex1n1"].petals[0].boundary
    circle = 0.5 + 0.5 * np.exp(1j * np.linspace(0, 2 * np.pi, 4001))
    assert hausdorff(b.points, circle) < 1e-4
    assert b.gap_tau < 1e-4 and b.gap_eta < 1e-4


def test_trace_example2_half_disk(flowers):
    up = min(flowers["ex2"].petals, key=lambda p: abs(p.eta.eta - 1j))
    arc = np.exp(1j * np.linspace(0, np.pi, 4001))
    target = np.concatenate([arc, np.linspace(-1, 1, 2001)])
    assert hausdorff(up.boundary.points, target) < 1e-3


def test_trace_example3_slit_disk(flowers):
    b = flowers["ex3"].petals[0].boundary
    top = np.exp(1j * np.linspace(0, np.pi, 4001))
    target = np.concatenate([np.linspace(0, -1, 2001), top[::-1], np.conj(top), np.linspace(-1, 0, 2001)])
    assert hausdorff(b.points, target) < 1e-3


@pytest.mark.parametrize("key", ["ex1n1", "ex1n2", "ex1n3", "ex2", "ex3"])
def test_trace_hits_vertices(flowers, key):
    for p in flowers[key].petals:
        pts = p.boundary.points
        assert pts[0] == pts[-1] == p.tau
        assert np.min(np.abs(pts - p.eta.eta)) < 1e-4
        assert p.boundary.gap_tau < 1e-4 and p.boundary.gap_eta < 1e-4
        assert np.all(np.abs(pts) <= 1 + 1e-12)


def test_boundary_csv(flowers):
    text = flowers["ex1n1"].petals[0].boundary.to_csv()
    lines = text.splitlines()
    assert lines[0] == "re,im" and len(lines) == len(flowers["ex1n1"].petals[0].boundary.points) + 1


# ---------------------------------------------------------------- flowers

def test_flower_example1_n2(flowers):
    fl = flowers["ex1n2"]
    assert len(fl) == 2
    meet = fl.closure_intersection(0, 1)
    assert len(meet) > 0 and np.max(np.abs(meet)) < 1e-2
    assert fl.overlaps() == 0


def test_flower_example2(flowers):
    fl = flowers["ex2"]
    assert len(fl) == 2
    meet = fl.closure_intersection(0, 1)
    assert len(meet) > 20 and np.max(np.abs(meet.imag)) < 1e-2
    assert np.ptp(meet.real) > 1.5
    assert fl.overlaps() == 0


@pytest.mark.parametrize("key,count", [("ex1n1", 1), ("ex1n3", 3), ("ex3", 1)])
def test_flower_counts_and_maximality(flowers, key, count):
    fl = flowers[key]
    assert len(fl) == count
    assert all(is_maximal(p) for p in fl.petals)
    etas = [p.eta.eta for p in fl.petals]
    assert min(abs(a - b) for i, a in enumerate(etas) for b in etas[i + 1:]) > 0.1 if count > 1 else True
    assert fl.overlaps() == 0


def test_flower_identity_empty():
    fl = build_flower(identity_field())
    assert isinstance(fl, Flower) and len(fl) == 0
    assert fl.to_json(False)["petals"] == []


def test_flower_json(flowers):
    d = flowers["ex1n2"].to_json(with_boundary=False)
    assert d["tau"] == [0.0, 0.0] and len(d["petals"]) == 2


# ---------------------------------------------------------------- group orbits

def test_backward_orbit_example1(flowers):
    p = flowers["ex1n1"].petals[0]
    assert abs(backward_orbit(p, 0.4, -30.0) - 1) < 1e-3
    assert backward_orbit(p, 0.4, 0.0) == pytest.approx(0.4, abs=1e-14)


def test_backward_orbit_closed_form(flowers):
    # F_t extends to all real t on the petal |w - 1/2| < 1/2
    p = flowers["ex1n1"].petals[0]
    F = example_model("example1", 1).F
    z = 0.5 + 0.3 * np.exp(1j * np.linspace(0, 6, 12))
    for t in (-3.0, -1.0, 2.0):
        assert np.max(np.abs(backward_orbit(p, z, t) - F(t, z))) < 1e-9


def test_backward_orbit_roundtrip(flowers):
    up = min(flowers["ex2"].petals, key=lambda p: abs(p.eta.eta - 1j))
    w = backward_orbit(up, 0.5j, -1.0)
    assert abs(backward_orbit(up, w, 1.0) - 0.5j) < 1e-9


@pytest.mark.parametrize("key", ["ex1n2", "ex2", "ex3"])
def test_backward_orbit_limits(flowers, key):
    for p in flowers[key].petals:
        z = p.seed
        assert abs(backward_orbit(p, z, -40.0) - p.eta.eta) < 1e-3
        assert abs(advance(p.gen, z, 40.0) - p.tau) < 1e-3


@pytest.mark.parametrize("key", ["ex1n1", "ex2", "ex3"])
def test_forward_orbit_agrees_with_flow(flowers, key):
    for p in flowers[key].petals:
        z = p.phi(disk_grid(10, 0.7))
        for t in (0.5, 2.0):
            assert np.max(np.abs(backward_orbit(p, z, t) - advance(p.gen, z, t))) < 1e-7


@settings(max_examples=10)
@given(seed=st.integers(0, 10000))
def test_flow_invariance(flowers, seed):
    rng = np.random.default_rng(seed)
    for key in ("ex1n2", "ex2", "ex3"):
        for p in flowers[key].petals:
            z = p.phi(disk_grid(50, 0.9, seed))
            t = rng.uniform(-5, 5, 50)
            w = np.array([backward_orbit(p, zz, tt) for zz, tt in zip(z, t)])
            assert np.all(membership(p, w))


@pytest.mark.parametrize("key", ["ex1n1", "ex1n3", "ex2", "ex3"])
def test_boundary_multiplier_at_eta(flowers, key):
    for p in flowers[key].petals:
        A = math.exp(-p.eta.gamma)
        assert abs(boundary_multiplier(p.gen, p.eta.eta, 1.0) - A) < 1e-4 * A


# ---------------------------------------------------------------- conjugation

def test_conjugation_equal_images():
    q = _eta(example1(1), 1)
    rep = conjugation_check(example1(1), q, math.e)
    assert rep.residual < 1e-6 and rep.images_equal


def test_conjugation_strict_inclusion():
    q = _eta(example1(1), 1)
    rep = conjugation_check(example1(1), q, math.e**2)
    assert rep.residual < 1e-6 and rep.inclusion and rep.strict


def test_conjugation_rejects_small_B():
    q = _eta(example1(1), 1)
    with pytest.raises(ValueError):
        conjugation_check(example1(1), q, 2.0)
