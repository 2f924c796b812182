"""Spirallike linearizers ``h`` with ``mu h = h' f`` and related tools.

The linearizer is evaluated through its logarithm. For an interior
Denjoy--Wolff point ``tau`` the pole of ``mu/f`` at ``tau`` is removed
analytically,

    log h(z) = log(z - tau) + int_tau^z (mu/f(w) - 1/(w - tau)) dw,

and for a boundary ``tau`` one integrates ``mu/f`` from the origin. Both
integrands are holomorphic in the disk, so the straight segment is an
admissible path; it is integrated by composite Gauss--Legendre rules that
are graded geometrically toward the end point.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from ._limits import richardson
from .errors import DivergentLimit, NoConvergence, PathThroughZero, UnsupportedRegime
from .generators import BoundaryFixedPoint, Generator

_EPS = np.finfo(float).eps
_GX, _GW = np.polynomial.legendre.leggauss(20)
_GX = 0.5 * (_GX + 1)
_GW = 0.5 * _GW
_TWO_PI_I = 2j * math.pi


def _out(z_in, v):
    return complex(v) if np.ndim(z_in) == 0 else v


@lru_cache(maxsize=512)
def _nodes(J: int, k: int):
    bps = [0.0] + [1 - 2.0**-j for j in range(1, J + 1)] + [1.0]
    S, W = [], []
    for a, b in zip(bps[:-1], bps[1:]):
        edges = np.linspace(a, b, k + 1)
        for c, d in zip(edges[:-1], edges[1:]):
            S.append(c + (d - c) * _GX)
            W.append((d - c) * _GW)
    return np.concatenate(S), np.concatenate(W)


def _segment_integral(func, a: complex, z: np.ndarray, chunk: int = 256):
    """``int_0^1 func(a + s(z - a)) ds`` for each entry of the 1-D array ``z``."""
    out = np.zeros(z.shape, dtype=complex)
    if z.size == 0:
        return out
    dist = np.maximum(1 - np.abs(z), 1e-300)
    ratio = np.abs(z - a) / dist
    J = np.clip(np.ceil(np.log2(np.maximum(ratio, 1.0))).astype(int) + 1, 1, 60)
    k = int(math.ceil((1 + abs(a)) / (1 - abs(a))))
    for j in np.unique(J):
        idx = np.nonzero(J == j)[0]
        S, W = _nodes(int(j), k)
        for c in range(0, idx.size, chunk):
            sub = idx[c:c + chunk]
            pts = a + S[None, :] * (z[sub] - a)[:, None]
            vals = func(pts)
            out[sub] = vals @ W
    return out


@dataclass(frozen=True, eq=False)
class SpirallikeMap:
    """Linearizer ``h`` of ``gen`` with ``h'/h = mu/f``.

    Parameters
    ----------
    gen : Generator
    mu : complex
        Spiral parameter, ``Re mu > 0``.
    base_point, base_value : complex or None
        Custom normalization ``h(base_point) = base_value``; when absent
        the canonical normalization is used (``h'(tau) = 1`` for interior
        ``tau``, ``h(0) = 1`` for boundary ``tau``).
    normalization : str
        Human readable description of the normalization.
    """

    gen: Generator
    mu: complex
    base_point: complex | None
    base_value: complex | None
    normalization: str
    offset: complex = 0j

    @property
    def tau(self) -> complex:
        return self.gen.tau

    @property
    def interior(self) -> bool:
        return self.gen.interior

    def _canonical_log(self, z: np.ndarray) -> np.ndarray:
        gen, mu = self.gen, self.mu
        flat = z.reshape(-1)
        bad = []

        if self.interior:
            tau = self.tau

            def g(w):
                fw = gen.eval(w)
                bad.append(not np.all(np.isfinite(fw)) or np.any(fw == 0))
                return mu / fw - 1 / (w - tau)

            with np.errstate(divide="ignore", invalid="ignore"):
                integral = _segment_integral(g, tau, flat)
                res = np.log(flat - tau) + (flat - tau) * integral
            res = np.where(flat == tau, complex(-np.inf, 0), res)
        else:
            def g(w):
                fw = gen.eval(w)
                bad.append(not np.all(np.isfinite(fw)) or np.any(fw == 0))
                return 1 / fw

            with np.errstate(divide="ignore", invalid="ignore"):
                res = mu * flat * _segment_integral(g, 0j, flat)
        if any(bad):
            raise PathThroughZero("integration path met a zero or singularity of f")
        return res.reshape(z.shape)

    def log_eval(self, z):
        """A branch of ``log h(z)`` (defined modulo ``2 pi i`` for interior ``tau``)."""
        za = np.asarray(z, dtype=complex)
        if np.any(np.abs(za) >= 1):
            raise ValueError("h is evaluated inside the open unit disk only")
        return _out(z, self._canonical_log(za) + self.offset)

    def __call__(self, z):
        with np.errstate(over="ignore", under="ignore"):
            return _out(z, np.exp(np.asarray(self.log_eval(z))))

    def deriv(self, z):
        """``h'(z) = mu h(z) / f(z)``."""
        za = np.asarray(z, dtype=complex)
        h = np.asarray(self(za))
        fz = np.asarray(self.gen.eval(za))
        if self.interior:
            # removable singularity at tau: h'(tau) = exp(offset)
            with np.errstate(divide="ignore", invalid="ignore"):
                d = np.where(za == self.tau, np.exp(self.offset), self.mu * h / fz)
        else:
            d = self.mu * h / fz
        return _out(z, d)


def build_spirallike(gen: Generator, mu=None, z0=None, value=None) -> SpirallikeMap:
    """Construct the linearizer of ``gen`` with parameter ``mu``.

    ``mu`` defaults to ``beta = f'(tau)``. For an interior ``tau`` only
    ``mu = beta`` is admissible; for a boundary ``tau`` any ``mu`` with
    ``|mu - beta| <= beta`` is. Passing ``z0`` and ``value`` normalizes by
    ``h(z0) = value``.
    """
    beta = gen.beta
    mu = beta if mu is None else complex(mu)
    if not mu.real > 0:
        raise UnsupportedRegime("spirallike linearizer needs Re mu > 0")
    if gen.interior:
        if abs(mu - beta) > 1e-9 * max(1.0, abs(beta)):
            raise ValueError("for interior tau the spiral parameter must equal f'(tau)")
    else:
        if not beta.real > 0:
            raise UnsupportedRegime("parabolic semiflows have no spirallike linearizer")
        if abs(mu - beta) > abs(beta) * (1 + 1e-12):
            raise ValueError("mu must lie in the disk |mu - beta| <= beta")
    if z0 is None:
        norm = "h'(tau)=1" if gen.interior else "h(0)=1"
        return SpirallikeMap(gen, mu, None, None, norm)
    z0 = complex(z0)
    if value is None:
        raise ValueError("a custom base point needs a base value")
    value = complex(value)
    if value == 0 or abs(z0) >= 1:
        raise ValueError("base point must be interior with nonzero base value")
    f0 = gen.eval(z0)
    if f0 == 0 or not np.isfinite(f0):
        raise PathThroughZero("f vanishes at the base point")
    plain = SpirallikeMap(gen, mu, None, None, "canonical")
    off = cmath.log(value) - plain.log_eval(z0)
    return SpirallikeMap(gen, mu, z0, value, f"h({z0!r})={value!r}", off)


# ---------------------------------------------------------------- inversion

def _reduce(d):
    return d - _TWO_PI_I * np.round(d.imag / (2 * math.pi))


def _resolution(hmap, z, L, fz):
    with np.errstate(divide="ignore", invalid="ignore"):
        r = 8 * _EPS * (np.abs(L) + np.abs(z) * np.abs(hmap.mu / fz))
    return np.where(np.isfinite(r), r, 0.0)


def _newton(hmap: SpirallikeMap, z, L, tol, maxit=8):
    """Solve ``log h(z) = L (mod 2 pi i)`` from ``z``; returns (z, converged, iterations)."""
    z = z.copy()
    tol = np.broadcast_to(np.asarray(tol, dtype=float), z.shape)
    conv = np.zeros(z.shape, bool)
    alive = np.isfinite(z) & (np.abs(z) < 1)
    its = np.zeros(z.shape, int)
    prev = np.full(z.shape, np.inf)
    for _ in range(maxit + 1):
        idx = np.nonzero(alive & ~conv)[0]
        if idx.size == 0:
            break
        zi = z[idx]
        try:
            with np.errstate(all="ignore"):
                d = _reduce(np.asarray(hmap.log_eval(zi)) - L[idx])
                fz = np.asarray(hmap.gen.eval(zi))
        except PathThroughZero:
            alive[idx] = False
            break
        ad = np.abs(d)
        good = np.isfinite(ad)
        c = good & (ad <= np.maximum(tol[idx], _resolution(hmap, zi, L[idx], fz)))
        conv[idx[c]] = True
        # stop elements that diverge
        div = ~good | (ad > 2 * prev[idx]) | (its[idx] >= maxit)
        alive[idx[div & ~c]] = False
        prev[idx] = ad
        upd = ~c & ~div
        if not np.any(upd):
            continue
        ui = idx[upd]
        step = d[upd] * fz[upd] / hmap.mu
        znew = zi[upd] - step
        lam = np.ones(ui.size)
        for _ in range(30):
            out = ~(np.abs(znew) < 1)
            if not np.any(out):
                break
            lam[out] *= 0.5
            znew[out] = zi[upd][out] - lam[out] * step[out]
        z[ui] = znew
        its[ui] += 1
        alive[ui[~(np.abs(znew) < 1)]] = False
    return z, conv & alive | conv, its


def continue_log(hmap: SpirallikeMap, L_target, z_start, L_start, tol=1e-12, max_dz=None,
                 max_iter=2000, partial=False):
    """Track the solution of ``log h(z) = L`` along ``L(s) = L_start + s (L_target - L_start)``.

    Vectorized natural-parameter continuation with an Euler predictor
    ``dz/dL = f/mu`` and a Newton corrector; each element adapts its own
    step. ``z_start`` must satisfy ``log h(z_start) = L_start``.

    Returns
    -------
    z : ndarray
        End points. Where tracking failed this is ``nan``, or the last
        tracked point when ``partial`` is set.
    ok : ndarray of bool
    """
    Lt = np.atleast_1d(np.asarray(L_target, dtype=complex)).copy()
    B = Lt.size
    L0 = np.broadcast_to(np.asarray(L_start, dtype=complex), (B,)).copy()
    z = np.broadcast_to(np.asarray(z_start, dtype=complex), (B,)).copy()
    s = np.zeros(B)
    ds = np.ones(B)
    ok = np.zeros(B, bool)
    active = np.isfinite(Lt) & np.isfinite(z)
    mu = hmap.mu
    for _ in range(max_iter):
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            break
        s_new = np.minimum(s[idx] + ds[idx], 1.0)
        final = s_new >= 1.0
        Lc = L0[idx] + s[idx] * (Lt[idx] - L0[idx])
        Ln = np.where(final, Lt[idx], L0[idx] + s_new * (Lt[idx] - L0[idx]))
        zi = z[idx]
        with np.errstate(all="ignore"):
            fz = np.asarray(hmap.gen.eval(zi))
            zp = zi + (Ln - Lc) * fz / mu
        zp = np.where(np.abs(zp) < 1, zp, zi)
        stage_tol = np.where(final, tol, 1e-8)
        zc, conv, its = _newton(hmap, zp, Ln, stage_tol)
        good = conv & np.isfinite(zc) & (np.abs(zc) < 1)
        if max_dz is not None:
            good &= np.abs(zc - zi) <= max_dz
        gi = idx[good]
        z[gi] = zc[good]
        s[gi] = s_new[good]
        fast = good & (its <= 2)
        ds[idx[fast]] *= 2.0
        bi = idx[~good]
        ds[bi] *= 0.25
        done = good & final
        ok[idx[done]] = True
        active[idx[done]] = False
        stalled = ~good & (ds[idx] < 1e-11)
        active[idx[stalled]] = False
    if not partial:
        z = np.where(ok, z, np.nan + 0j)
    return z, ok


def invert_log(hmap: SpirallikeMap, L, seed=None, L_seed=None, tol=1e-12):
    """Solve ``log h(z) = L`` for an array of targets.

    With an interior Denjoy--Wolff point the solution is reached along the
    spiral ``L - mu s`` coming out of ``tau`` (inside ``h(Delta)`` by
    spirallikeness), so no seed is needed. Otherwise continuation runs along
    the straight segment from ``seed`` in the logarithmic plane.

    Returns
    -------
    z : ndarray, ok : ndarray of bool
    """
    L = np.atleast_1d(np.asarray(L, dtype=complex))
    if hmap.interior and seed is None:
        tau = hmap.tau
        eps0 = 1e-4 * (1 - abs(tau))
        # depth T with |exp(L - mu T - offset)| = eps0
        T = np.maximum((L.real - hmap.offset.real - math.log(eps0)) / hmap.mu.real, 0.0)
        Ld = L - hmap.mu * T
        zs = tau + np.exp(Ld - hmap.offset)
        zs, conv, _ = _newton(hmap, zs, Ld, 1e-12)
        z, ok = continue_log(hmap, L, zs, Ld, tol=tol)
        return z, ok & conv
    if seed is None:
        seed = hmap.base_point if hmap.base_point is not None else 0j
    seed = complex(seed)
    if L_seed is None:
        L_seed = hmap.log_eval(seed)
    return continue_log(hmap, L, seed, L_seed, tol=tol)


def invert(hmap: SpirallikeMap, w: complex, seed=None, tol=1e-12) -> complex:
    """Solve ``h(z) = w``.

    Raises
    ------
    NoConvergence
        If ``w`` is not reached (typically ``w`` is outside ``h(Delta)``).
    """
    w = complex(w)
    if w == 0:
        if hmap.interior:
            return hmap.tau
        raise NoConvergence("0 is not in the image of h", parameter=w)
    Lw = cmath.log(w)
    if seed is not None:
        Ls = complex(hmap.log_eval(complex(seed)))
        Lw += _TWO_PI_I * round((Ls.imag - Lw.imag) / (2 * math.pi))
        if hmap.interior:
            z, ok = invert_log(hmap, Lw, None)
        else:
            z, ok = invert_log(hmap, Lw, seed, Ls, tol)
    else:
        z, ok = invert_log(hmap, Lw, None, tol=tol)
    if not ok[0]:
        raise NoConvergence(f"could not invert h at w={w!r}", parameter=w)
    return complex(z[0])


# ---------------------------------------------------------------- boundary data

def contour_derivative(g: Callable, z, radius=None, n: int = 16):
    """Derivative of a holomorphic map by the trapezoid rule on a small circle."""
    za = np.asarray(z, dtype=complex)
    flat = za.reshape(-1)
    rho = np.minimum(0.02, (1 - np.abs(flat)) / 4) if radius is None else np.full(flat.shape, radius)
    e = np.exp(2j * np.pi * np.arange(n) / n)
    pts = flat[:, None] + rho[:, None] * e[None, :]
    vals = np.asarray(g(pts.ravel())).reshape(pts.shape)
    d = (vals * e.conj()[None, :]).mean(axis=1) / rho
    return _out(z, d.reshape(za.shape))


def visser_ostrowski(g: Callable, zeta: complex, radii=None, dg: Callable | None = None,
                     limit: str = "auto"):
    """Radial limit of the Visser--Ostrowski quotient of ``g`` at ``zeta``.

    For a finite boundary value ``g(zeta)`` this is
    ``(z - zeta) g'(z) / (g(z) - g(zeta))``; when ``g -> infinity`` the
    quotient ``(z - zeta) g'(z) / g(z)`` is used.

    Parameters
    ----------
    g : callable
        Vectorized map.
    zeta : complex
        Boundary point.
    radii : sequence of float, optional
        Radii ``r_k`` with ``1 - r_k`` halving; default ``1 - 2**-k`` for
        ``k = 4..18``.
    dg : callable, optional
        Derivative; contour differentiation is used when absent.
    limit : {"auto", "finite", "infinite"}
    """
    zeta = complex(zeta) / abs(complex(zeta))
    if radii is None:
        radii = [1 - 2.0**-k for k in range(4, 19)]
    radii = np.asarray(radii, dtype=float)
    zs = radii * zeta
    gv = np.asarray(g(zs), dtype=complex)
    dv = np.asarray(dg(zs) if dg is not None else contour_derivative(g, zs), dtype=complex)
    if limit == "auto":
        limit = "infinite" if abs(gv[-1]) > 1e3 * max(1.0, abs(gv[0])) else "finite"
    if limit == "infinite":
        q = (zs - zeta) * dv / gv
    else:
        g_zeta, err = richardson(gv)
        q = (zs - zeta) * dv / (gv - g_zeta)
        q = q[: max(3, len(q) - 4)]  # differences near zeta lose digits
    val, err = richardson(q)
    if not np.isfinite(val) or err > 1e-5 * max(1.0, abs(val)):
        raise DivergentLimit(f"Visser-Ostrowski quotient at {zeta} does not settle")
    return val


def q_at_eta(hmap: SpirallikeMap, eta: BoundaryFixedPoint) -> complex:
    """``Q_h(eta) = mu / gamma``."""
    if not np.isfinite(eta.gamma) or eta.gamma == 0:
        raise DivergentLimit("angular derivative must be finite and nonzero")
    return hmap.mu / eta.gamma


def visser_ostrowski_of(hmap: SpirallikeMap, eta: complex) -> complex:
    """Extrapolated quotient of ``h`` itself at ``eta``, the cross-check of :func:`q_at_eta`.

    ``h'`` comes from contour differentiation of ``h``, not from ``mu h / f``,
    so the check does not reuse the angular derivative.
    """
    return visser_ostrowski(hmap, eta, limit="infinite")


def theta_at_eta(hmap: SpirallikeMap, eta: complex, nu: complex) -> float:
    """Bisector angle of the spiral wedge of ``h`` at ``eta``.

    ``theta = (|nu|**2 / Re nu) * lim Im(log h(r eta) / nu)`` along the
    radius, which for real ``nu`` is the limit of ``arg h(r eta)``. The
    argument is followed continuously along the radius. Returned in
    ``(-pi, pi]``.
    """
    eta = complex(eta) / abs(complex(eta))
    nu = complex(nu)
    if nu.real == 0:
        raise ValueError("nu must have nonzero real part")
    js = np.arange(2, 81)
    r = 1 - 2.0 ** (-js / 4)
    L = np.asarray(hmap.log_eval(r * eta))
    L = L.real + 1j * np.unwrap(L.imag)
    # remove the singular part nu*log(z - eta); the remainder is smooth at eta,
    # so a slightly misplaced eta only perturbs the limit to first order
    arg_m = cmath.phase(-eta)
    G = L - nu * (np.log(1 - r) + 1j * arg_m)
    seq = G[js % 4 == 0][-14:]
    G0, err = richardson(seq)
    if not np.isfinite(G0) or err > 1e-8 * max(1.0, abs(G0)):
        raise DivergentLimit(f"argument of h does not settle at {eta}")
    val = (G0 / nu).imag + arg_m
    theta = (abs(nu) ** 2 / nu.real) * val
    return float(math.remainder(theta, 2 * math.pi))


def monodromy(gen: Generator, mu=None, radius=None, n: int = 64) -> complex:
    """``oint mu/f dz`` on a small circle about an interior ``tau``; equals ``2 pi i``."""
    if not gen.interior:
        raise UnsupportedRegime("monodromy is defined for an interior Denjoy-Wolff point")
    tau = gen.tau
    mu = gen.beta if mu is None else complex(mu)
    rho = min(1e-2, (1 - abs(tau)) / 2) if radius is None else radius
    e = np.exp(2j * np.pi * np.arange(n) / n)
    vals = mu / np.asarray(gen.eval(tau + rho * e))
    return complex(np.sum(vals * 1j * rho * e) * (2 * math.pi / n))


# ---------------------------------------------------------------- starlike closed form

@dataclass(frozen=True)
class StarlikeClosedForm:
    """Starlike function from an atomic probability measure.

    Without ``eta``::

        h(z) = C (z - tau)(1 - z conj(tau)) prod_j (1 - z conj(zeta_j))**(-2 w_j)

    With ``eta`` and ``a`` in ``(0, 1]`` the factor ``(1 - z conj(eta))**(-2a)``
    is added and the atom exponents become ``-2 (1 - a) w_j``.

    ``atoms`` holds ``(angle, weight)`` pairs with weights summing to one.
    """

    C: complex
    tau: complex
    eta: complex | None = None
    a: float | None = None
    atoms: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "C", complex(self.C))
        object.__setattr__(self, "tau", complex(self.tau))
        object.__setattr__(self, "atoms", tuple((float(t), float(w)) for t, w in self.atoms))
        if self.C == 0:
            raise ValueError("C must be nonzero")
        if abs(self.tau) > 1 + 1e-12:
            raise ValueError("tau must lie in the closed disk")
        if any(w <= 0 for _, w in self.atoms):
            raise ValueError("atom weights must be positive")
        total = sum(w for _, w in self.atoms)
        if self.eta is not None:
            eta = complex(self.eta) / abs(complex(self.eta))
            object.__setattr__(self, "eta", eta)
            if self.a is None or not 0 < self.a <= 1:
                raise ValueError("a must lie in (0, 1]")
            if abs(eta - self.tau) < 1e-12:
                raise ValueError("eta must differ from tau")
            for t, _ in self.atoms:
                if abs(cmath.exp(1j * t) - eta) < 1e-12:
                    raise ValueError("the measure must not charge eta")
            if self.a < 1 and abs(total - 1) > 1e-12:
                raise ValueError("atom weights must sum to 1")
        elif abs(total - 1) > 1e-12:
            raise ValueError("atom weights must sum to 1")

    @property
    def _terms(self):
        out = []
        scale = 1.0
        if self.eta is not None:
            out.append((self.eta, 2 * self.a))
            scale = 1 - self.a
        for t, w in self.atoms:
            out.append((cmath.exp(1j * t), 2 * scale * w))
        return out

    def __call__(self, z):
        za = np.asarray(z, dtype=complex)
        t = self.tau
        val = self.C * (za - t) * (1 - za * t.conjugate())
        for zeta, e in self._terms:
            val = val * (1 - za * zeta.conjugate()) ** (-e)
        return _out(z, val)

    def log_derivative(self, z):
        za = np.asarray(z, dtype=complex)
        t = self.tau
        tc = t.conjugate()
        with np.errstate(divide="ignore", invalid="ignore"):
            val = 1 / (za - t) - tc / (1 - za * tc)
            for zeta, e in self._terms:
                val = val + e * zeta.conjugate() / (1 - za * zeta.conjugate())
        return _out(z, val)

    def deriv(self, z):
        return _out(z, np.asarray(self(z)) * np.asarray(self.log_derivative(z)))

    def q_at_eta(self) -> complex:
        """Extrapolated Visser--Ostrowski quotient at ``eta`` (equals ``-2a``)."""
        if self.eta is None:
            raise ValueError("no distinguished boundary point")
        return visser_ostrowski(self, self.eta, dg=self.deriv, limit="infinite")

    def to_json(self) -> dict:
        d = {
            "kind": "starlike",
            "C": [self.C.real, self.C.imag],
            "tau": [self.tau.real, self.tau.imag],
            "atoms": [{"zeta_angle": t, "weight": w} for t, w in self.atoms],
        }
        if self.eta is not None:
            d["a"] = self.a
            d["eta_angle"] = math.atan2(self.eta.imag, self.eta.real)
        return d

    @classmethod
    def from_json(cls, obj: dict) -> "StarlikeClosedForm":
        C = complex(*obj["C"])
        tau = complex(*obj.get("tau", [0, 0]))
        atoms = tuple((a["zeta_angle"], a["weight"]) for a in obj.get("atoms", []))
        eta = None
        if "eta_angle" in obj:
            eta = cmath.exp(1j * obj["eta_angle"])
        return cls(C, tau, eta, obj.get("a"), atoms)


def starlike_from_measure(spec: StarlikeClosedForm) -> StarlikeClosedForm:
    """Validate ``spec`` and return it as a vectorized evaluator."""
    if not isinstance(spec, StarlikeClosedForm):
        raise TypeError("expected a StarlikeClosedForm")
    return spec


# ---------------------------------------------------------------- Koenigs and wedges

def koenigs_iterate(F: Callable, z_fixed: complex, multiplier: complex, z, n: int):
    """``(F^n(z) - z_fixed) / multiplier**n``.

    Raises
    ------
    OverflowError
        If the iterates stop contracting toward ``z_fixed``.
    """
    multiplier = complex(multiplier)
    if not 0 < abs(multiplier) < 1:
        raise ValueError("multiplier must satisfy 0 < |multiplier| < 1")
    w = z
    d0 = np.max(np.abs(np.asarray(z) - z_fixed))
    for k in range(1, int(n) + 1):
        w = F(w)
        dk = np.max(np.abs(np.asarray(w) - z_fixed))
        if not np.isfinite(dk) or dk > max(2 * d0, 1e-300) + 1:
            raise OverflowError(f"iterates do not contract at step {k}")
    return (np.asarray(w) - z_fixed) / multiplier**n if np.ndim(z) else complex(
        (w - z_fixed) / multiplier**n)


@dataclass(frozen=True)
class SpiralWedge:
    """Canonical spiral wedge ``W = {e^{i theta} ((1 - z)/(1 + z))**lam : |z| < 1}``."""

    lam: complex
    theta: float

    def __post_init__(self):
        lam = complex(self.lam)
        object.__setattr__(self, "lam", lam)
        if lam == 0 or abs(lam - 1) > 1 + 1e-12:
            raise ValueError("lambda must satisfy |lambda - 1| <= 1, lambda != 0")

    def eval(self, z):
        za = np.asarray(z, dtype=complex)
        return _out(z, np.exp(1j * self.theta + self.lam * np.log((1 - za) / (1 + za))))

    def contains_log(self, L):
        """Membership of ``exp(L)`` given any branch of its logarithm."""
        La = np.asarray(L, dtype=complex)
        u0 = (La - 1j * self.theta) / self.lam
        period = 2 * math.pi * (1 / self.lam).real  # >= pi on the admissible region
        with np.errstate(invalid="ignore"):
            y = np.mod(u0.imag + period / 2, period) - period / 2
            res = np.isfinite(La) & (np.abs(y) < math.pi / 2)
        return bool(res) if La.ndim == 0 else res

    def contains(self, w):
        wa = np.asarray(w, dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore"):
            L = np.log(wa)
        res = self.contains_log(np.where(wa == 0, complex(-np.inf, 0), L))
        return res


def wedge_eval(w: SpiralWedge, z):
    return w.eval(z)


def wedge_contains(w: SpiralWedge, value):
    return w.contains(value)
