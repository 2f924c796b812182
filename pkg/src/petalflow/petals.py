"""Backward flow-invariant domains (petals) and flowers.

A petal attached to a repelling boundary fixed point ``eta`` is the image
``Omega = h^{-1}(W)`` of a canonical spiral wedge ``W`` under the inverse
linearizer. Its Riemann map is ``phi = h^{-1} o h0`` with
``h0(z) = e^{i theta} ((1 - z)/(1 + z))**(beta/alpha)``, which solves
``alpha phi'(z)(z**2 - 1) = 2 f(phi(z))``.
"""
from __future__ import annotations

import cmath
import csv
import io
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.stats import qmc

from .errors import AlphaTooSmall, NoConvergence, UnsupportedRegime
from .flow import advance
from .generators import BoundaryFixedPoint, Generator, boundary_null_points
from .linearize import (
    SpiralWedge,
    SpirallikeMap,
    build_spirallike,
    contour_derivative,
    continue_log,
    theta_at_eta,
)

_HALF_PI = 0.5 * math.pi


def _out(z_in, v):
    return v if np.ndim(z_in) else v.reshape(()).item()


@dataclass(frozen=True)
class TracedBoundary:
    """Closed polyline ``tau -> (+ edge) -> eta -> (- edge) -> tau``.

    ``gap_tau`` and ``gap_eta`` are the distances between the last traced
    points and the vertices they approach.
    """

    points: np.ndarray
    gap_tau: float
    gap_eta: float

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["re", "im"])
        for z in self.points:
            w.writerow([repr(float(z.real)), repr(float(z.imag))])
        return buf.getvalue()


@dataclass(frozen=True, eq=False)
class Petal:
    """Flow-invariant domain ``Omega`` attached to ``eta`` with parameter ``alpha``.

    Attributes
    ----------
    gen : Generator
    eta : BoundaryFixedPoint
    alpha : float
    theta : float
        Bisector angle of the wedge ``W_{beta/alpha, theta}``.
    hmap : SpirallikeMap
    seed : complex
        ``phi(0)``; satisfies ``h(seed) = e^{i theta}``.
    seed_log : complex
        The branch of ``log h(seed)`` used for continuation.
    """

    gen: Generator
    eta: BoundaryFixedPoint
    alpha: float
    theta: float
    hmap: SpirallikeMap
    seed: complex
    seed_log: complex
    trace_samples: int = field(default=800, compare=False)

    @property
    def lam(self) -> complex:
        return self.gen.beta / self.alpha

    @property
    def wedge(self) -> SpiralWedge:
        return SpiralWedge(self.lam, self.theta)

    @property
    def tau(self) -> complex:
        return self.gen.tau

    def h0_log(self, z):
        """``log h0(z)`` on the branch of ``seed_log``."""
        za = np.asarray(z, dtype=complex)
        return self.seed_log + self.lam * np.log((1 - za) / (1 + za))

    def phi(self, z, strict: bool = True):
        """Riemann map ``phi(z) = h^{-1}(h0(z))`` of the petal.

        Raises
        ------
        NoConvergence
            If ``strict`` and some point could not be inverted.
        """
        za = np.asarray(z, dtype=complex)
        flat = za.reshape(-1)
        if np.any(np.abs(flat) >= 1):
            raise ValueError("phi is evaluated inside the open unit disk only")
        L = self.h0_log(flat)
        w, ok = continue_log(self.hmap, L, self.seed, self.seed_log)
        if strict and not np.all(ok):
            bad = flat[~ok][0]
            raise NoConvergence(f"petal map could not be evaluated at {bad!r}", parameter=bad)
        return _out(z, w.reshape(za.shape))

    def phi_derivative(self, z):
        """``phi'(z)`` by contour differentiation of :meth:`phi`."""
        return contour_derivative(self.phi, z)

    def ode_residual(self, z):
        """``|alpha phi'(z)(z**2 - 1) - 2 f(phi(z))|``."""
        za = np.asarray(z, dtype=complex)
        d = np.asarray(self.phi_derivative(za))
        p = np.asarray(self.phi(za))
        return np.abs(self.alpha * d * (za * za - 1) - 2 * np.asarray(self.gen.eval(p)))

    def contains(self, z):
        return membership(self, z)

    @cached_property
    def boundary(self) -> TracedBoundary:
        return trace_boundary(self, self.trace_samples)

    def to_json(self, with_boundary: bool = True) -> dict:
        d = {
            "eta_angle": self.eta.angle,
            "gamma": self.eta.gamma,
            "alpha": self.alpha,
            "theta": self.theta,
        }
        if with_boundary:
            d["boundary"] = [[float(z.real), float(z.imag)] for z in self.boundary.points]
        return d


def solve_petal(gen: Generator, eta: BoundaryFixedPoint, alpha: float,
                seed_radius: float = 1 - 1e-3) -> Petal:
    """Construct the petal at ``eta`` for ``alpha >= -gamma``.

    The wedge bisector ``theta`` is the radial limit of the argument of
    ``h`` at ``eta`` (in the spiral sense). The seed ``phi(0)`` is found by
    flowing ``(1 - 1e-3) eta`` forward until ``|h| = 1`` and then solving
    ``h = e^{i theta}`` by continuation.

    Raises
    ------
    AlphaTooSmall
        If ``alpha < -gamma``.
    """
    beta = gen.beta
    if not beta.real > 0:
        raise UnsupportedRegime("petals need Re f'(tau) > 0")
    gamma = float(eta.gamma)
    if not (math.isfinite(gamma) and gamma < 0):
        raise ValueError("eta must be a repelling point with finite gamma < 0")
    alpha = float(alpha)
    if alpha < -gamma - 1e-9:
        raise AlphaTooSmall(f"alpha={alpha} is below -gamma={-gamma}")
    hmap = build_spirallike(gen)
    nu = hmap.mu / gamma
    theta = theta_at_eta(hmap, eta.eta, nu)
    s0 = seed_radius * eta.eta
    L0 = complex(hmap.log_eval(s0))
    t_star = L0.real / beta.real
    if t_star > 0:
        s1 = complex(advance(gen, s0, t_star))
        L1 = complex(hmap.log_eval(s1))
    else:
        s1, L1 = s0, L0
    target = 1j * theta + 2j * math.pi * round((L1.imag - theta) / (2 * math.pi))
    z, ok = continue_log(hmap, target, s1, L1)
    if not ok[0]:
        raise NoConvergence("could not place the petal seed", parameter=target)
    seed = complex(z[0])
    petal = Petal(gen, eta, alpha, theta, hmap, seed, target)
    if not membership(petal, seed):
        raise NoConvergence("petal seed is not inside the wedge preimage", parameter=seed)
    return petal


def membership(petal: Petal, z):
    """``True`` where ``h(z)`` lies in the petal's wedge."""
    za = np.asarray(z, dtype=complex)
    flat = za.reshape(-1)
    res = np.zeros(flat.shape, bool)
    # h(tau) = 0 is never in the wedge
    inside = (np.abs(flat) < 1) & (flat != petal.tau)
    if np.any(inside):
        L = np.asarray(petal.hmap.log_eval(flat[inside]))
        res[inside] = petal.wedge.contains_log(L)
    return bool(res[0]) if za.ndim == 0 else res.reshape(za.shape)


def is_maximal(petal: Petal, tol: float = 1e-8) -> bool:
    """``|alpha + gamma| <= tol``."""
    return abs(petal.alpha + petal.eta.gamma) <= tol


def _march(petal, L_of, x0, z0, direction, stop, ds_max, x_limit):
    """Follow ``log h(z) = L_of(x)`` from ``x0`` in ``direction`` until ``stop(z)``."""
    hmap, mu = petal.hmap, petal.hmap.mu
    pts = []
    x, z = x0, z0
    dx = 0.01
    prev = 0j
    from .linearize import _newton

    for _ in range(200000):
        if stop(z) or abs(x) > x_limit:
            break
        xn = x + direction * dx
        Lc, Ln = L_of(x), L_of(xn)
        fz = complex(hmap.gen.eval(z))
        zp = z + (Ln - Lc) * fz / mu
        if not abs(zp) < 1:
            # near the circle keep the current distance to it
            zp = zp / abs(zp) * abs(z)
        zc, conv, its = _newton(hmap, np.array([zp]), np.array([Ln]), 1e-12)
        zn = complex(zc[0])
        step = zn - z
        # corners (zeros of h') need short steps to be resolved
        turn = abs(cmath.phase(step / prev)) if prev and step else 0.0
        sharp = turn > 0.2 and abs(step) > 1e-3 * ds_max
        if conv[0] and abs(zn) < 1 and abs(step) <= ds_max and not sharp:
            x, z = xn, zn
            pts.append(z)
            prev = step
            if abs(step) < 0.5 * ds_max and its[0] <= 2 and turn < 0.05:
                dx = min(dx * 1.5, 1.0)
        else:
            dx *= 0.5
            if dx < 1e-13:
                raise NoConvergence("boundary tracing stalled", parameter=x)
    return pts


def trace_boundary(petal: Petal, samples: int = 800, end_tol: float = 1e-5,
                   inset: float = 1e-8) -> TracedBoundary:
    """Trace ``h^{-1}`` of the two wedge edges and close the curve at ``tau`` and ``eta``.

    Parameters
    ----------
    samples : int
        Controls the maximal spacing of traced points (about ``4/samples``).
    end_tol : float
        Tracing toward ``tau`` and ``eta`` stops at this distance.
    inset : float
        Relative offset of the traced curves inside the wedge.
    """
    lam = petal.lam
    tau, eta = petal.tau, petal.eta.eta
    ds_max = 4.0 / max(int(samples), 16)
    x_limit = 200.0 / max(lam.real, 1e-3)
    edges = []
    for sigma in (1.0, -1.0):
        y = sigma * _HALF_PI * (1 - inset)

        def L_of(x, y=y):
            return petal.seed_log + lam * complex(x, y)

        z0, ok = continue_log(petal.hmap, L_of(0.0), petal.seed, petal.seed_log)
        if not ok[0]:
            raise NoConvergence("could not reach the wedge edge", parameter=0.0)
        z0 = complex(z0[0])
        up = _march(petal, L_of, 0.0, z0, 1.0, lambda z: abs(z - eta) < end_tol, ds_max, x_limit)
        down = _march(petal, L_of, 0.0, z0, -1.0, lambda z: abs(z - tau) < end_tol, ds_max,
                      x_limit)
        edges.append(down[::-1] + [z0] + up)
    plus, minus = edges
    gap_tau = max(abs(plus[0] - tau), abs(minus[0] - tau))
    gap_eta = max(abs(plus[-1] - eta), abs(minus[-1] - eta))
    pts = np.array([tau] + plus + [eta] + minus[::-1] + [tau], dtype=complex)
    return TracedBoundary(pts, float(gap_tau), float(gap_eta))


def backward_orbit(petal: Petal, z, t: float):
    """Group extension ``h^{-1}(e^{-beta t} h(z))`` of the semiflow on the petal.

    Valid for every real ``t`` when ``z`` lies in the petal. Orbits that
    approach ``eta`` closer than double precision can resolve stop at the
    last resolvable point, which agrees with the true one to about ``1e-9``.
    """
    za = np.asarray(z, dtype=complex)
    flat = za.reshape(-1)
    L = np.asarray(petal.hmap.log_eval(flat))
    target = L - petal.gen.beta * t
    w, ok = continue_log(petal.hmap, target, flat, L, partial=True)
    ok = ok | (np.abs(w - petal.eta.eta) < 1e-9)
    if not np.all(ok):
        raise NoConvergence(f"orbit continuation failed at t={t}", parameter=t)
    return _out(z, w.reshape(za.shape))


def disk_samples(n: int, radius: float = 1.0, center: complex = 0j, skip: int = 1) -> np.ndarray:
    """Deterministic quasi-random points in a disk (Halton sequence)."""
    pts = qmc.Halton(d=2, scramble=False).random(n + skip)[skip:]
    r = radius * np.sqrt(pts[:, 0]) * (1 - 1e-9)
    return center + r * np.exp(2j * np.pi * pts[:, 1])


@dataclass(frozen=True, eq=False)
class Flower:
    """Maximal petals of a generator, one per repelling boundary fixed point."""

    gen: Generator
    petals: tuple

    def __len__(self):
        return len(self.petals)

    def sample_points(self, samples: int = 2000) -> np.ndarray:
        pts = disk_samples(samples)
        tau = self.gen.tau
        # extra points around the common vertex, where petals touch
        zoom = disk_samples(samples // 4, radius=0.05, center=tau)
        zoom = zoom[np.abs(zoom) < 1]
        return np.concatenate([pts, zoom])

    def membership_matrix(self, pts) -> np.ndarray:
        return np.array([membership(p, pts) for p in self.petals]).reshape(len(self.petals), -1)

    def overlaps(self, samples: int = 2000) -> int:
        """Number of sampled points lying in two or more petals."""
        if len(self.petals) < 2:
            return 0
        m = self.membership_matrix(self.sample_points(samples))
        return int(np.sum(m.sum(axis=0) >= 2))

    def closure_intersection(self, i: int, j: int, samples: int = 2000,
                             collar: float = 5e-3) -> np.ndarray:
        """Sampled points within ``collar`` of both petal ``i`` and petal ``j``."""
        pts = self.sample_points(samples)
        offs = np.concatenate([[0], collar * np.exp(2j * np.pi * np.arange(8) / 8)])
        stencil = pts[:, None] + offs[None, :]
        valid = np.abs(stencil) < 1
        near = []
        for k in (i, j):
            m = np.zeros(stencil.shape, bool)
            m[valid] = membership(self.petals[k], stencil[valid])
            near.append(m.any(axis=1))
        return pts[near[0] & near[1]]

    def to_json(self, with_boundary: bool = True) -> dict:
        try:
            g = self.gen.to_json()
        except (ValueError, NotImplementedError):
            g = {"label": self.gen.label}
        return {
            "generator": g,
            "tau": [self.gen.tau.real, self.gen.tau.imag],
            "beta": [self.gen.beta.real, self.gen.beta.imag],
            "petals": [p.to_json(with_boundary) for p in self.petals],
        }


def build_flower(gen: Generator, scan_count: int = 4096, trace_samples: int = 800) -> Flower:
    """One maximal petal (``alpha = -gamma``) per detected repelling point."""
    if not gen.beta.real > 0:
        raise UnsupportedRegime("flowers need Re f'(tau) > 0")
    petals = []
    for q in boundary_null_points(gen, scan_count):
        p = solve_petal(gen, q, -q.gamma)
        petals.append(Petal(p.gen, p.eta, p.alpha, p.theta, p.hmap, p.seed, p.seed_log,
                            trace_samples))
    return Flower(gen, tuple(petals))


@dataclass(frozen=True)
class ConjugationReport:
    """Outcome of :func:`conjugation_check`."""

    A: float
    B: float
    residual: float
    inclusion: bool
    strict: bool

    @property
    def images_equal(self) -> bool:
        return self.inclusion and not self.strict


def _grid(n_r=10, n_t=10, r_max=0.9):
    r = np.linspace(0.05, r_max, n_r)
    t = 2 * np.pi * (np.arange(n_t) + 0.25) / n_t
    return (r[:, None] * np.exp(1j * t)[None, :]).ravel()


def conjugation_check(gen: Generator, eta: BoundaryFixedPoint, B: float, grid=None,
                      samples: int = 2000) -> ConjugationReport:
    """Check ``phi_B o G_1 = F_1 o phi_B`` and ``phi_B(Delta) subset phi_A(Delta)``.

    ``A = exp(-gamma)``; ``phi_B`` is the petal map with ``alpha = ln B`` and
    ``G_1(z) = (z + b)/(1 + b z)`` with ``b = (B - 1)/(B + 1)``.
    """
    A = math.exp(-eta.gamma)
    if B < A * (1 - 1e-12):
        raise ValueError(f"B={B} must be at least A={A}")
    pB = solve_petal(gen, eta, math.log(B))
    pA = solve_petal(gen, eta, -eta.gamma)
    b = (B - 1) / (B + 1)
    z = _grid() if grid is None else np.asarray(grid, dtype=complex)
    lhs = np.asarray(pB.phi((z + b) / (1 + b * z)))
    rhs = np.asarray(advance(gen, np.asarray(pB.phi(z)), 1.0))
    residual = float(np.max(np.abs(lhs - rhs)))
    pts = disk_samples(samples, radius=0.999)
    inclusion = bool(np.all(membership(pA, np.asarray(pB.phi(pts)))))
    inA = membership(pA, pts)
    inB = membership(pB, pts)
    strict = bool(np.any(inA & ~inB))
    return ConjugationReport(A, float(B), residual, inclusion, strict)
