"""Infinitesimal generators of holomorphic semiflows on the unit disk.

Three concrete variants share the :class:`Generator` interface:

* :class:`BerksonPorta` -- ``f(z) = (z - tau)(1 - z conj(tau)) p(z)`` with an
  atomic Herglotz function ``p``.
* :class:`Complete` -- the automorphism fields ``f(z) = a - conj(a) z**2 + i b z``.
* :class:`ClosedForm` -- user supplied analytic evaluators for ``f`` and ``f'``.

Every evaluator is vectorized over numpy arrays and returns a Python
``complex`` for scalar input.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np
from scipy import optimize

from ._limits import RADIAL_KS, richardson
from .errors import DivergentLimit

ELLIPTIC = "elliptic-group"
INTERIOR = "interior-attracting"
HYPERBOLIC = "boundary-hyperbolic"
PARABOLIC = "boundary-parabolic"
AUTOMORPHISM = "automorphism-flow"

# |tau| closer than this to 1 is treated as a boundary point
BOUNDARY_TOL = 1e-12


def _as_output(z_in, value):
    if np.ndim(z_in) == 0:
        return complex(value)
    return value


def unit(angle: float) -> complex:
    """Unimodular number ``exp(i*angle)``."""
    return complex(math.cos(angle), math.sin(angle))


@dataclass(frozen=True)
class AtomicHerglotz:
    """Herglotz function ``p(z) = c + sum_j w_j (1 + z conj(z_j)) / (1 - z conj(z_j))``.

    Parameters
    ----------
    constant : complex
        Constant term, ``Re(constant) >= 0``.
    atoms : tuple of (complex, float)
        Pairs ``(zeta_j, w_j)`` with ``|zeta_j| = 1`` (renormalized on
        construction) and ``w_j > 0``.
    """

    constant: complex = 1.0
    atoms: tuple = ()

    def __post_init__(self):
        c = complex(self.constant)
        if c.real < 0:
            raise ValueError("Herglotz constant must have nonnegative real part")
        atoms = []
        for zeta, w in self.atoms:
            zeta = complex(zeta)
            if abs(zeta) == 0 or not math.isfinite(abs(zeta)):
                raise ValueError("atom location must be a nonzero finite number")
            if not w > 0:
                raise ValueError("atom weights must be positive")
            atoms.append((zeta / abs(zeta), float(w)))
        object.__setattr__(self, "constant", c)
        object.__setattr__(self, "atoms", tuple(atoms))

    @classmethod
    def from_angles(cls, constant=1.0, atoms=()):
        """Build from ``(angle, weight)`` pairs."""
        return cls(constant, tuple((unit(a), w) for a, w in atoms))

    def __call__(self, z):
        z_arr = np.asarray(z, dtype=complex)
        out = np.full(z_arr.shape, self.constant, dtype=complex)
        for zeta, w in self.atoms:
            u = z_arr * zeta.conjugate()
            out = out + w * (1 + u) / (1 - u)
        return _as_output(z, out)

    def derivative(self, z):
        z_arr = np.asarray(z, dtype=complex)
        out = np.zeros(z_arr.shape, dtype=complex)
        for zeta, w in self.atoms:
            zc = zeta.conjugate()
            out = out + 2 * w * zc / (1 - z_arr * zc) ** 2
        return _as_output(z, out)

    def scaled(self, c: float) -> "AtomicHerglotz":
        return AtomicHerglotz(self.constant * c, tuple((z, w * c) for z, w in self.atoms))


@dataclass(frozen=True)
class DenjoyWolffInfo:
    """Denjoy--Wolff data ``(tau, beta)`` and the dynamical regime."""

    tau: complex
    beta: complex
    regime: str

    @property
    def interior(self) -> bool:
        return abs(self.tau) < 1 - BOUNDARY_TOL

    def to_json(self) -> dict:
        return {
            "tau": [self.tau.real, self.tau.imag],
            "beta": [self.beta.real, self.beta.imag],
            "regime": self.regime,
        }


@dataclass(frozen=True)
class BoundaryFixedPoint:
    """Repelling boundary null point ``eta`` with angular derivative ``gamma < 0``."""

    eta: complex
    gamma: float
    quality: float = 0.0

    @property
    def angle(self) -> float:
        """Argument of ``eta`` in ``[0, 2*pi)``."""
        a = math.atan2(self.eta.imag, self.eta.real)
        return a + 2 * math.pi if a < 0 else a

    @classmethod
    def at_angle(cls, angle, gamma, quality=0.0):
        return cls(unit(angle), float(gamma), quality)


class Generator:
    """Common interface of all generator variants.

    Subclasses implement ``_f``, ``_df`` and ``_dw`` (which returns ``(tau, beta)``).
    """

    kind = "abstract"

    def _f(self, z):
        raise NotImplementedError

    def _df(self, z):
        raise NotImplementedError

    def _dw(self):
        raise NotImplementedError

    def __call__(self, z):
        return self.eval(z)

    def eval(self, z):
        """Evaluate ``f`` at ``z`` (scalar or array)."""
        return _as_output(z, self._f(np.asarray(z, dtype=complex)))

    def deriv(self, z):
        """Evaluate ``f'`` at ``z`` (scalar or array)."""
        return _as_output(z, self._df(np.asarray(z, dtype=complex)))

    @cached_property
    def dw(self):
        tau, beta = self._dw()
        return complex(tau), complex(beta)

    @property
    def tau(self) -> complex:
        return self.dw[0]

    @property
    def beta(self) -> complex:
        return self.dw[1]

    @property
    def interior(self) -> bool:
        return abs(self.tau) < 1 - BOUNDARY_TOL

    @property
    def label(self) -> str:
        return self.kind

    def scaled(self, c: float) -> "Generator":
        """Return the generator ``c*f`` for ``c > 0``."""
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class BerksonPorta(Generator):
    """``f(z) = (z - tau)(1 - z conj(tau)) p(z)``."""

    tau0: complex
    p: AtomicHerglotz
    name: str = field(default="berkson_porta", compare=False)

    kind = "berkson_porta"

    def __post_init__(self):
        t = complex(self.tau0)
        if abs(t) > 1 + BOUNDARY_TOL:
            raise ValueError("tau must lie in the closed unit disk")
        if abs(abs(t) - 1) <= BOUNDARY_TOL:
            t = t / abs(t)
        object.__setattr__(self, "tau0", t)

    def _f(self, z):
        t = self.tau0
        return (z - t) * (1 - z * t.conjugate()) * self.p(z)

    def _df(self, z):
        t = self.tau0
        tc = t.conjugate()
        q = (z - t) * (1 - z * tc)
        dq = 1 + abs(t) ** 2 - 2 * z * tc
        return dq * self.p(z) + q * self.p.derivative(z)

    def _dw(self):
        t = self.tau0
        if abs(t) < 1:
            return t, (1 - abs(t) ** 2) * self.p(t)
        # f/(z - tau) -> 2 * (atom mass at tau) along any nontangential path
        mass = sum(w for zeta, w in self.p.atoms if abs(zeta - t) < 1e-14)
        return t, complex(2 * mass)

    @property
    def label(self):
        return self.name

    def scaled(self, c):
        return BerksonPorta(self.tau0, self.p.scaled(c))

    def to_json(self):
        return {
            "kind": "berkson_porta",
            "tau": [self.tau0.real, self.tau0.imag],
            "constant": [self.p.constant.real, self.p.constant.imag],
            "atoms": [
                {"zeta_angle": math.atan2(z.imag, z.real), "weight": w}
                for z, w in self.p.atoms
            ],
        }


def _complete_dw(a: complex, b: float):
    if a == 0:
        return 0j, complex(0, b)
    ac = a.conjugate()
    roots = np.roots([ac, -1j * b, -a])
    inside = [r for r in roots if abs(r) < 1 - 1e-10]
    if inside:
        r = complex(inside[0])
        return r, -2 * ac * r + 1j * b
    r0, r1 = (complex(r) / abs(r) for r in roots)
    if abs(r0 - r1) < 1e-7:
        return r0, 0j
    d0 = -2 * ac * r0 + 1j * b
    d1 = -2 * ac * r1 + 1j * b
    t, d = (r0, d0) if d0.real > d1.real else (r1, d1)
    return t, complex(d.real)


@dataclass(frozen=True, eq=False)
class Complete(Generator):
    """Automorphism field ``f(z) = a - conj(a) z**2 + i b z`` (``b`` real)."""

    a: complex
    b: float

    kind = "complete"

    def __post_init__(self):
        object.__setattr__(self, "a", complex(self.a))
        object.__setattr__(self, "b", float(self.b))

    def _f(self, z):
        return self.a - self.a.conjugate() * z * z + 1j * self.b * z

    def _df(self, z):
        return -2 * self.a.conjugate() * z + 1j * self.b

    def _dw(self):
        return _complete_dw(self.a, self.b)

    @property
    def label(self):
        return f"complete(a={self.a!r}, b={self.b!r})"

    def scaled(self, c):
        return Complete(self.a * c, self.b * c)

    def to_json(self):
        return {"kind": "complete", "a": [self.a.real, self.a.imag], "b": self.b}


@dataclass(frozen=True, eq=False)
class ClosedForm(Generator):
    """Generator given by analytic evaluators.

    Parameters
    ----------
    name : str
        Label used in reports.
    f, df : callable
        Vectorized evaluators of ``f`` and ``f'``.
    tau0 : complex
        Denjoy--Wolff point.
    beta0 : complex, optional
        ``f'(tau)``; computed from ``df`` (interior) or by radial
        extrapolation (boundary) when omitted.
    spec : dict, optional
        JSON description used by :meth:`to_json`.
    """

    name: str
    f: Callable
    df: Callable
    tau0: complex
    beta0: complex | None = None
    spec: dict | None = field(default=None, compare=False)

    kind = "closed_form"

    def _f(self, z):
        return np.asarray(self.f(z), dtype=complex)

    def _df(self, z):
        return np.asarray(self.df(z), dtype=complex)

    def _dw(self):
        t = complex(self.tau0)
        if self.beta0 is not None:
            return t, complex(self.beta0)
        if abs(t) < 1 - BOUNDARY_TOL:
            return t, complex(self.df(t))
        t = t / abs(t)
        val, err = _radial_quotient(self, t)
        return t, val

    @property
    def label(self):
        return self.name

    def scaled(self, c):
        f, df = self.f, self.df
        beta = None if self.beta0 is None else self.beta0 * c
        return ClosedForm(f"{c}*{self.name}", lambda z: c * f(z), lambda z: c * df(z),
                          self.tau0, beta)

    def to_json(self):
        if self.spec is None:
            raise ValueError(f"closed-form generator {self.name!r} has no JSON form")
        return dict(self.spec)


def make_berkson_porta(tau, p: AtomicHerglotz) -> BerksonPorta:
    """Construct ``f(z) = (z - tau)(1 - z conj(tau)) p(z)``."""
    return BerksonPorta(complex(tau), p)


def evaluate(gen: Generator, z):
    """Evaluate the generator at interior point(s) ``z``."""
    return gen.eval(z)


def classify(gen: Generator) -> DenjoyWolffInfo:
    """Denjoy--Wolff point, ``beta = f'(tau)`` and regime of ``gen``.

    Complete fields with an interior null point are elliptic groups; the
    remaining complete fields are labelled ``automorphism-flow``.
    """
    tau, beta = gen.tau, gen.beta
    interior = abs(tau) < 1 - BOUNDARY_TOL
    if isinstance(gen, Complete) and not interior:
        regime = AUTOMORPHISM
    elif interior:
        regime = ELLIPTIC if abs(beta.real) <= 1e-12 * max(1.0, abs(beta)) else INTERIOR
    else:
        regime = HYPERBOLIC if beta.real > 1e-12 else PARABOLIC
    return DenjoyWolffInfo(tau, beta, regime)


def _radial_quotient(gen: Generator, eta: complex, ks=RADIAL_KS):
    vals = []
    for k in ks:
        h = 2.0**-k
        vals.append(gen.eval((1 - h) * eta) / (-h * eta))
    return richardson(vals)


def angular_derivative(gen: Generator, eta: complex, ks=RADIAL_KS) -> float:
    """Angular derivative ``gamma = f'(eta)`` at a boundary null point.

    Richardson extrapolation of ``f(r eta) / ((r - 1) eta)`` along
    ``r = 1 - 2**-k``.

    Raises
    ------
    DivergentLimit
        If the quotient does not settle, or the limit is not real and
        negative within ``1e-4``.
    """
    eta = complex(eta) / abs(eta)
    val, err = _radial_quotient(gen, eta, ks)
    if not np.isfinite(val) or err > 1e-6 * max(1.0, abs(val)):
        raise DivergentLimit(f"radial quotient at {eta} does not converge (err={err:.3g})")
    if abs(val.imag) > 1e-4 * max(1.0, abs(val)) or val.real >= 0:
        raise DivergentLimit(f"angular derivative {val} at {eta} is not real negative")
    return float(val.real)


def _angle_min(gen, r, lo, hi):
    """Angle in ``[lo, hi]`` minimizing ``|f(r e^{i phi})|``, or None."""

    def slope(phi):
        z = r * unit(phi)
        # d/dphi |f|^2 / 2 = Re(conj(f) f'(z) i z)
        return (gen.eval(z).conjugate() * gen.deriv(z) * 1j * z).real

    a, b = slope(lo), slope(hi)
    if not (a < 0 < b):
        return None
    return optimize.brentq(slope, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def _polish_null(gen, eta, steps=4):
    # Newton on the analytic continuation of f across the circle; kept only
    # if it stays close and actually lowers |f|
    z = eta
    with np.errstate(all="ignore"):
        try:
            best = abs(complex(gen.eval(z)))
            for _ in range(steps):
                fz, dz = complex(gen.eval(z)), complex(gen.deriv(z))
                if not (math.isfinite(abs(fz)) and math.isfinite(abs(dz))) or dz == 0:
                    break
                w = z - fz / dz
                w /= abs(w)
                fw = abs(complex(gen.eval(w)))
                if not math.isfinite(fw) or abs(w - eta) > 1e-6 or fw > best:
                    break
                z, best = w, fw
        except (ArithmeticError, ValueError):
            return eta
    return z


def boundary_null_points(gen: Generator, scan_count: int = 4096, radius: float = 1 - 1e-4,
                         threshold: float = 1e-2) -> list:
    """Detect repelling boundary null points ``eta != tau``.

    Scans ``|f(r e^{i phi})|`` on ``scan_count`` angles, refines local minima
    below threshold by a bracketed root search for the stationary angle at two radii, extrapolates the
    angle to ``r = 1`` and keeps points whose angular derivative exists and
    is negative.

    Returns
    -------
    list of BoundaryFixedPoint
        Sorted by angle in ``[0, 2*pi)``.
    """
    n = int(scan_count)
    if n < 8:
        raise ValueError("scan_count must be at least 8")
    dphi = 2 * math.pi / n
    phis = np.arange(n) * dphi
    vals = np.abs(gen.eval(radius * np.exp(1j * phis)))
    dvals = np.abs(gen.deriv(radius * np.exp(1j * phis)))
    left, right = np.roll(vals, 1), np.roll(vals, -1)
    local = (vals <= left) & (vals < right)
    thresh = np.maximum(threshold, 2 * dphi * dvals)
    cand = np.nonzero(local & (vals < thresh) & np.isfinite(vals))[0]
    delta = 1 - radius
    tau = gen.tau
    boundary_tau = abs(tau) >= 1 - BOUNDARY_TOL
    found = []
    for i in cand:
        mid = phis[i]
        lo, hi = mid - dphi, mid + dphi
        phi1 = _angle_min(gen, radius, lo, hi)
        phi2 = _angle_min(gen, 1 - delta / 2, lo, hi)
        if phi1 is None or phi2 is None:
            continue
        phi = (4 * phi2 - phi1) / 3
        eta = _polish_null(gen, unit(phi % (2 * math.pi)))
        if boundary_tau and abs(eta - tau) < 1e-6:
            continue
        if any(abs(eta - q.eta) < 1e-6 for q in found):
            continue
        try:
            val, err = _radial_quotient(gen, eta)
            gamma = angular_derivative(gen, eta)
        except DivergentLimit:
            continue
        found.append(BoundaryFixedPoint(eta, gamma, float(err)))
    found.sort(key=lambda q: q.angle)
    return found


def is_complete(gen: Generator, tol: float = 1e-12):
    """Test whether ``f(z) = a - conj(a) z**2 + i b z``.

    Returns
    -------
    (bool, (a, b) or None)
    """
    zs = 0.5 * np.exp(2j * np.pi * np.arange(5) / 5)
    vals = np.asarray(gen.eval(zs), dtype=complex)
    V = np.vander(zs, 3, increasing=True)
    coef, *_ = np.linalg.lstsq(V, vals, rcond=None)
    scale = max(1.0, float(np.max(np.abs(vals))))
    resid = float(np.max(np.abs(V @ coef - vals)))
    c0, c1, c2 = (complex(c) for c in coef)
    ok = (
        resid < tol * scale
        and abs(c2 + c0.conjugate()) < 10 * tol * scale
        and abs(c1.real) < 10 * tol * scale
    )
    return (True, (c0, c1.imag)) if ok else (False, None)


# ---------------------------------------------------------------- built-ins

def example1(n: int = 1) -> ClosedForm:
    """``f(z) = z (1 - z**n)``: interior DW point 0, petals at the n-th roots of unity."""
    n = int(n)
    if n < 1:
        raise ValueError("example1 requires n >= 1")
    return ClosedForm(
        f"example1:n={n}",
        lambda z: z * (1 - z**n),
        lambda z: 1 - (n + 1) * z**n,
        0j,
        1.0 + 0j,
        spec={"kind": "example", "name": "example1", "n": n},
    )


def example2() -> BerksonPorta:
    """``f(z) = -(1 - z)(1 + z**2)/(1 + z)``: boundary DW point 1."""
    return BerksonPorta(1 + 0j, AtomicHerglotz(0j, ((1 + 0j, 0.5), (-1 + 0j, 0.5))), "example2")


def example3() -> BerksonPorta:
    """``f(z) = z (1 - z)/(1 + z)``: linearized by the Koebe function."""
    return BerksonPorta(0j, AtomicHerglotz(0j, ((-1 + 0j, 1.0),)), "example3")


def identity_field() -> BerksonPorta:
    """``f(z) = z``."""
    return BerksonPorta(0j, AtomicHerglotz(1.0, ()), "identity")


def example_generator(name: str, n: int | None = None) -> Generator:
    if name == "example1":
        return example1(1 if n is None else n)
    if name == "example2":
        return example2()
    if name == "example3":
        return example3()
    if name == "identity":
        return identity_field()
    raise ValueError(f"unknown example generator {name!r}")


# ---------------------------------------------------------------- JSON

def _pair(v, what):
    if not (isinstance(v, (list, tuple)) and len(v) == 2):
        raise ValueError(f"{what} must be a [re, im] pair")
    return complex(float(v[0]), float(v[1]))


def generator_from_json(obj: dict) -> Generator:
    """Inverse of :meth:`Generator.to_json`."""
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ValueError("generator JSON must be an object with a 'kind' field")
    kind = obj["kind"]
    if kind == "berkson_porta":
        tau = _pair(obj.get("tau", [0, 0]), "tau")
        const = _pair(obj.get("constant", [0, 0]), "constant")
        atoms = []
        for a in obj.get("atoms", []):
            atoms.append((float(a["zeta_angle"]), float(a["weight"])))
        return make_berkson_porta(tau, AtomicHerglotz.from_angles(const, atoms))
    if kind == "complete":
        return Complete(_pair(obj["a"], "a"), float(obj["b"]))
    if kind == "example":
        return example_generator(obj["name"], obj.get("n"))
    raise ValueError(f"unknown generator kind {kind!r}")


def generator_to_json(gen: Generator) -> dict:
    return gen.to_json()

