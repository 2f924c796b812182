"""Closed-form reference models and Moebius utilities.

These evaluators are independent of the numerical machinery in
:mod:`petalflow.flow`, :mod:`petalflow.linearize` and :mod:`petalflow.petals`
and serve as test oracles for it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .generators import Generator, example1, example2, example3


def _out(z_in, v):
    return complex(v) if np.ndim(z_in) == 0 and np.ndim(v) == 0 else v


@dataclass(frozen=True)
class PetalModel:
    """Exact petal map ``phi`` for the repelling point ``eta``."""

    eta: complex
    gamma: float
    alpha: float
    theta: float
    phi: Callable


@dataclass(frozen=True)
class ClosedFormModel:
    """Exact generator, semiflow, linearizer and petals of a worked example.

    The linearizer ``h`` is normalized by ``h'(tau) = 1`` for an interior
    Denjoy--Wolff point and by ``h(0) = 1`` for a boundary one.
    """

    name: str
    n: int | None
    gen: Generator
    flow: Callable
    h: Callable
    petals: tuple

    def f(self, z):
        return self.gen.eval(z)

    def F(self, t, z):
        """Closed-form ``F_t(z)``."""
        return self.flow(t, z)


# ---------------------------------------------------------------- example 1

def _ex1_flow(n):
    def F(t, z):
        z = np.asarray(z, dtype=complex)
        zn = z**n
        # q(t) runs along a straight line through q(0)=1 as e^{-nt} varies,
        # so its principal n-th root is the branch continuous in t
        q = 1 - zn + zn * math.exp(-n * t)
        return _out(z, z * math.exp(-t) / q ** (1.0 / n))
    return F


def example1_h(n: int, z):
    """Linearizer ``z (1 - z**n)**(-1/n)`` of ``f(z) = z(1 - z**n)``."""
    z = np.asarray(z, dtype=complex)
    return _out(z, z * (1 - z**n) ** (-1.0 / n))


def _ex1_petal(n, k):
    eta = complex(np.exp(2j * np.pi * k / n))

    def phi(z):
        z = np.asarray(z, dtype=complex)
        return _out(z, eta * ((1 - z) / 2) ** (1.0 / n))
    return PetalModel(eta, -float(n), float(n), 2 * math.pi * k / n, phi)


# ---------------------------------------------------------------- example 2

def _ex2_flow(t, z):
    z = np.asarray(z, dtype=complex)
    A = (1 + z * z) * math.exp(2 * t)
    R = 2 * A - (1 - z) ** 2
    # R(t) moves on a ray that avoids 0; S(0) = 1 + z fixes the branch
    S = (1 + z) * np.sqrt(R / (1 + z) ** 2)
    return _out(z, (A - (1 - z) ** 2) / (A + (1 - z) * S))


def _ex2_h(z):
    z = np.asarray(z, dtype=complex)
    return _out(z, (1 - z) / np.sqrt(1 + z * z))


def _ex2_upper(z):
    z = np.asarray(z, dtype=complex)
    c = -1j * (1 - z) / (1 + z)
    # (1 - phi)^2 / (1 + phi^2) = c ; roots are phi and 1/phi
    d = 1 - c
    s = np.sqrt(1 - d * d)
    r1 = (1 + s) / d
    r2 = (1 - s) / d
    return _out(z, np.where(np.abs(r1) < np.abs(r2), r1, r2))


def _ex2_lower(z):
    z = np.asarray(z, dtype=complex)
    return _out(z, np.conj(_ex2_upper(np.conj(z))))


# ---------------------------------------------------------------- example 3

def koebe(z):
    """Koebe function ``z / (1 - z)**2``."""
    z = np.asarray(z, dtype=complex)
    return _out(z, z / (1 - z) ** 2)


def koebe_inverse(w):
    """Inverse of the Koebe function on ``C minus (-inf, -1/4]``."""
    w = np.asarray(w, dtype=complex)
    s = np.sqrt(1 + 4 * w)
    return _out(w, (s - 1) / (s + 1))


def _ex3_flow(t, z):
    return koebe_inverse(math.exp(-t) * np.asarray(koebe(z)))


def _ex3_phi(z):
    z = np.asarray(z, dtype=complex)
    return _out(z, koebe_inverse(((1 - z) / (1 + z)) ** 2))


def example_model(name: str, n: int | None = None) -> ClosedFormModel:
    """Reference model ``example1`` (with ``n``), ``example2`` or ``example3``."""
    if name == "example1":
        n = 1 if n is None else int(n)
        if n < 1:
            raise ValueError("example1 requires n >= 1")
        petals = tuple(_ex1_petal(n, k) for k in range(n))
        return ClosedFormModel(name, n, example1(n), _ex1_flow(n),
                               lambda z: example1_h(n, z), petals)
    if name == "example2":
        petals = (
            PetalModel(1j, -2.0, 2.0, -math.pi / 4, _ex2_upper),
            PetalModel(-1j, -2.0, 2.0, math.pi / 4, _ex2_lower),
        )
        return ClosedFormModel(name, None, example2(), _ex2_flow, _ex2_h, petals)
    if name == "example3":
        petals = (PetalModel(1 + 0j, -0.5, 0.5, 0.0, _ex3_phi),)
        return ClosedFormModel(name, None, example3(), _ex3_flow, koebe, petals)
    raise ValueError(f"unknown example {name!r}")


# ---------------------------------------------------------------- Moebius maps

@dataclass(frozen=True)
class MobiusMap:
    """``z -> (a z + b) / (c z + d)`` with ``a d - b c != 0``."""

    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        for k in "abcd":
            object.__setattr__(self, k, complex(getattr(self, k)))
        if self.det == 0:
            raise ValueError("degenerate Moebius map (ad - bc = 0)")

    @property
    def det(self) -> complex:
        return self.a * self.d - self.b * self.c

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore"):
            return _out(z, (self.a * z + self.b) / (self.c * z + self.d))

    def derivative(self, z):
        z = np.asarray(z, dtype=complex)
        return _out(z, self.det / (self.c * z + self.d) ** 2)

    def __matmul__(self, other: "MobiusMap") -> "MobiusMap":
        m = np.array([[self.a, self.b], [self.c, self.d]]) @ np.array(
            [[other.a, other.b], [other.c, other.d]])
        return MobiusMap(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    def inverse(self) -> "MobiusMap":
        return MobiusMap(self.d, -self.b, -self.c, self.a)

    @classmethod
    def from_fixed_points(cls, z0: complex, z1: complex, multiplier: complex) -> "MobiusMap":
        """Map with fixed points ``z0, z1`` and ``F'(z0) = multiplier``.

        Conjugate of ``w -> multiplier*w`` by ``T(z) = (z - z0)/(z - z1)``.
        """
        T = cls(1, -z0, 1, -z1)
        return T.inverse() @ cls(multiplier, 0, 0, 1) @ T


class FixedPoints(NamedTuple):
    z0: complex
    z1: complex
    multiplier: complex
    parabolic: bool


def mobius_fixed_points(m: MobiusMap) -> FixedPoints:
    """Fixed points of ``m``; ``z0`` is the finite one with smaller ``|F'|``.

    ``z1`` is ``inf`` when the map fixes infinity.
    """
    a, b, c, d = m.a, m.b, m.c, m.d
    scale = max(abs(a), abs(b), abs(c), abs(d))
    if abs(b) <= 1e-15 * scale and abs(c) <= 1e-15 * scale and abs(a - d) <= 1e-15 * scale:
        raise ValueError("identity map has no isolated fixed points")
    if abs(c) <= 1e-15 * scale:
        if abs(d - a) <= 1e-15 * scale:
            inf = complex(math.inf, 0)
            return FixedPoints(inf, inf, 1 + 0j, True)
        z = b / (d - a)
        return FixedPoints(z, complex(math.inf, 0), m.derivative(z), False)
    # a double root splits by sqrt(eps) in floating point, so test the discriminant
    disc = (d - a) ** 2 + 4 * b * c
    if abs(disc) <= 1e-13 * scale**2:
        z = (a - d) / (2 * c)
        return FixedPoints(z, z, m.derivative(z), True)
    roots = [complex(r) for r in np.roots([c, d - a, -b])]
    roots.sort(key=lambda z: abs(m.derivative(z)))
    return FixedPoints(roots[0], roots[1], m.derivative(roots[0]), False)


def invariant_disk_check(m: MobiusMap, center: complex, radius: float, samples: int = 256,
                         rtol: float = 1e-9) -> bool:
    """Sampled test of ``F(D) subset closure(D)`` for the disk ``|z - center| < radius``."""
    center = complex(center)
    ang = 2 * np.pi * (np.arange(samples) + 0.5) / samples
    rings = np.concatenate([[1.0], np.linspace(0.0, 1.0, 9)[:-1]])
    pts = (center + radius * rings[:, None] * np.exp(1j * ang)[None, :]).ravel()
    den = m.c * pts + m.d
    if np.any(np.abs(den) <= 1e-14 * max(1.0, abs(m.c))):
        return False
    # a pole inside the closed disk sends part of it to infinity
    if abs(m.c) > 0 and abs(-m.d / m.c - center) <= radius * (1 + rtol):
        return False
    img = m(pts)
    return bool(np.all(np.abs(img - center) <= radius * (1 + rtol)))


def hyperbolic_mobius(b_param: float):
    """Moebius map ``(z + b)/(1 + b z)`` fixing -1 and 1."""
    return MobiusMap(1, b_param, b_param, 1)
