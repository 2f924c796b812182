"""Semiflow integration ``du/dt = -f(u)`` forward and backward in time."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, replace

import numpy as np

from ._limits import RADIAL_KS, richardson
from .errors import DivergentLimit, StepUnderflow
from .generators import Generator

# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])
# dense output coefficients (Hairer, contd5)
_D = np.array([
    -12715105075 / 11282082432, 0.0, 87487479700 / 32700410799,
    -10690763975 / 1880347072, 701980252875 / 199316789632,
    -1453857185 / 822651844, 69997945 / 29380423,
])

_ONE_MINUS = np.nextafter(1.0, 0.0)


@dataclass(frozen=True)
class FlowOptions:
    """Tolerances for the adaptive integrator.

    The local error of each step is kept below ``abs_tol + rel_tol*|u|``
    componentwise.
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = math.inf
    escape_radius: float = 1 - 1e-12
    min_step: float = 1e-14
    max_steps: int = 200000
    linearize_radius: float = 1e-8

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if not (0 < self.escape_radius < 1):
            raise ValueError("escape_radius must lie in (0, 1)")


DEFAULT_OPTIONS = FlowOptions()


@dataclass(frozen=True)
class ExitedDisk:
    """Backward orbit left the disk at time ``t_exit`` (a negative number)."""

    t_exit: float
    z_exit: complex


@dataclass
class _Step:
    t0: float
    t1: float
    y0: np.ndarray
    y1: np.ndarray
    rcont: tuple | None = None
    linear: tuple | None = None

    def dense(self, t):
        if self.t1 == self.t0:
            return self.y1.copy()
        if self.linear is not None:
            tau, beta = self.linear
            return tau + np.exp(-beta * (t - self.t0)) * (self.y0 - tau)
        th = (t - self.t0) / (self.t1 - self.t0)
        r1, r2, r3, r4, r5 = self.rcont
        return r1 + th * (r2 + (1 - th) * (r3 + th * (r4 + (1 - th) * r5)))


def _rhs(gen):
    def rhs(y):
        with np.errstate(all="ignore"):
            return -np.asarray(gen.eval(y), dtype=complex)
    return rhs


def _initial_step(rhs, y, k1, opts, span):
    sc = opts.abs_tol + opts.rel_tol * np.abs(y)
    d0 = np.max(np.abs(y) / sc)
    d1 = np.max(np.abs(k1) / sc)
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h0 = min(h0, abs(span))
    with np.errstate(all="ignore"):
        k2 = rhs(y + h0 * math.copysign(1, span) * k1)
    d2 = np.max(np.abs(k2 - k1) / sc) / h0
    if not np.isfinite(d2):
        return h0 * 1e-3
    m = max(d1, d2)
    h1 = max(1e-6, h0 * 1e-3) if m <= 1e-15 else (0.01 / m) ** 0.2
    return min(100 * h0, h1, abs(span))


def _steps(gen: Generator, y0, t_end: float, opts: FlowOptions, clamp=True, linear_tail=True):
    """Yield accepted ``_Step`` objects integrating ``u' = -f(u)`` from 0 to ``t_end``."""
    rhs = _rhs(gen)
    y = np.array(y0, dtype=complex).reshape(-1)
    t = 0.0
    if t_end == 0:
        return
    direction = 1.0 if t_end > 0 else -1.0
    tau, beta = gen.tau, gen.beta
    use_linear = (
        linear_tail and direction > 0 and gen.interior and beta.real > 0
    )
    k1 = rhs(y)
    h = _initial_step(rhs, y, k1, opts, t_end)
    nsteps = 0
    while direction * (t_end - t) > 0:
        if use_linear and np.max(np.abs(y - tau)) < opts.linearize_radius:
            y1 = tau + np.exp(-beta * (t_end - t)) * (y - tau)
            yield _Step(t, t_end, y, y1, linear=(tau, beta))
            return
        nsteps += 1
        if nsteps > opts.max_steps:
            raise StepUnderflow(f"exceeded {opts.max_steps} steps at t={t}")
        h = min(h, opts.max_step, abs(t_end - t))
        hs = direction * h
        k = [k1]
        with np.errstate(all="ignore"):
            for i in range(1, 7):
                yi = y.copy()
                for j, a in enumerate(_A[i]):
                    if a:
                        yi = yi + hs * a * k[j]
                k.append(rhs(yi))
            y1 = yi  # stage 7 is evaluated at the 5th order solution
            errv = hs * sum(e * kk for e, kk in zip(_E, k) if e)
            sc = opts.abs_tol + opts.rel_tol * np.maximum(np.abs(y), np.abs(y1))
            err = float(np.max(np.abs(errv) / sc))
        if not np.isfinite(err) or not np.all(np.isfinite(y1)):
            err = math.inf
        if err <= 1.0:
            t1 = t_end if h == abs(t_end - t) else t + hs
            r2 = y1 - y
            r3 = hs * k[0] - r2
            r4 = r2 - hs * k[6] - r3
            r5 = hs * sum(d * kk for d, kk in zip(_D, k) if d)
            if clamp and direction > 0:
                m = np.abs(y1)
                bad = m >= 1
                if np.any(bad):
                    y1 = np.where(bad, y1 / np.where(bad, m, 1) * _ONE_MINUS, y1)
            step = _Step(t, t1, y, y1, rcont=(y, r2, r3, r4, r5))
            yield step
            t, y, k1 = t1, y1, k[6]
            fac = 5.0 if err == 0 else min(5.0, max(0.2, 0.9 * err**-0.2))
            h = h * fac
        else:
            fac = 0.2 if not np.isfinite(err) else max(0.2, 0.9 * err**-0.2)
            h = h * fac
            if h < opts.min_step * max(1.0, abs(t)):
                raise StepUnderflow(f"step size underflow at t={t:.6g}", )


def _check_z0(z0):
    z = np.asarray(z0, dtype=complex)
    if np.any(~np.isfinite(z)) or np.any(np.abs(z) >= 1):
        raise ValueError("initial points must lie in the open unit disk")
    return z


def advance(gen: Generator, z0, t: float, opts: FlowOptions = DEFAULT_OPTIONS):
    """Forward flow ``F_t(z0)`` for ``t >= 0``.

    ``z0`` may be a scalar or an array; all components share the adaptive
    step sequence.

    Raises
    ------
    StepUnderflow
        If the step size collapses.
    """
    z = _check_z0(z0)
    if t < 0:
        raise ValueError("advance requires t >= 0; use advance_backward")
    y = z.reshape(-1)
    for step in _steps(gen, y, float(t), opts):
        y = step.y1
    y = y.reshape(z.shape)
    return complex(y) if z.ndim == 0 else y


def _first_exit(step: _Step, radius: float):
    """Time at which the dense output of ``step`` first reaches ``radius``."""
    ts = np.linspace(step.t0, step.t1, 33)
    mods = np.array([abs(complex(step.dense(s)[0])) for s in ts])
    idx = int(np.argmax(mods >= radius))
    lo, hi = ts[max(idx - 1, 0)], ts[idx]
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if abs(complex(step.dense(mid)[0])) >= radius:
            hi = mid
        else:
            lo = mid
    return hi, complex(step.dense(hi)[0])


def advance_backward(gen: Generator, z0: complex, t: float, opts: FlowOptions = DEFAULT_OPTIONS):
    """Backward flow for ``t <= 0``.

    Returns
    -------
    complex or ExitedDisk
        The point ``F_t(z0)`` if the orbit stays within ``escape_radius``,
        otherwise the time and place where it leaves.
    """
    z = complex(_check_z0(z0))
    if t > 0:
        raise ValueError("advance_backward requires t <= 0")
    if t == 0:
        return z
    y = np.array([z])
    R = opts.escape_radius
    tcur = 0.0
    try:
        for step in _steps(gen, y, float(t), opts, clamp=False):
            tcur = step.t1
            if abs(step.y1[0]) >= R or np.max(np.abs(
                    [step.dense(s)[0] for s in np.linspace(step.t0, step.t1, 5)[1:-1]])) >= R:
                te, ze = _first_exit(step, R)
                return ExitedDisk(float(te), ze)
            y = step.y1
    except StepUnderflow:
        if abs(y[0]) > 1 - 1e-6:
            return ExitedDisk(float(tcur), complex(y[0]))
        raise
    return complex(y[0])


@dataclass
class Trajectory:
    """Sampled orbit ``(t_k, z_k)`` with strictly increasing times."""

    t: np.ndarray
    z: np.ndarray
    generator_label: str = ""
    exit_time: float | None = None

    @property
    def samples(self):
        return list(zip(self.t.tolist(), self.z.tolist()))

    def __len__(self):
        return len(self.t)

    def to_jsonl(self) -> str:
        lines = [
            json.dumps({"t": float(t), "re": float(z.real), "im": float(z.imag)})
            for t, z in zip(self.t, self.z)
        ]
        return "\n".join(lines) + ("\n" if lines else "")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "re", "im"])
        for t, z in zip(self.t, self.z):
            w.writerow([repr(float(t)), repr(float(z.real)), repr(float(z.imag))])
        return buf.getvalue()


def _sample_leg(gen, z0, t_end, times, opts, backward):
    """Dense samples at ``times`` (ordered away from 0) along one leg."""
    out = np.full(len(times), np.nan + 0j)
    if len(times) == 0 or t_end == 0:
        out[:] = z0
        return out, None
    i = 0
    while i < len(times) and times[i] == 0:
        out[i] = z0
        i += 1
    y = np.array([z0])
    R = opts.escape_radius
    try:
        for step in _steps(gen, y, t_end, opts, clamp=not backward):
            if backward and abs(step.y1[0]) >= R:
                te, _ = _first_exit(step, R)
                while i < len(times) and times[i] > te:
                    out[i] = complex(step.dense(times[i])[0])
                    i += 1
                return out[:i], te
            lo, hi = sorted((step.t0, step.t1))
            while i < len(times) and lo <= times[i] <= hi:
                out[i] = complex(step.dense(times[i])[0])
                i += 1
            y = step.y1
    except StepUnderflow:
        if backward and abs(y[0]) > 1 - 1e-6:
            return out[:i], None
        raise
    while i < len(times):
        out[i] = y[0]
        i += 1
    return out, None


def trajectory(gen: Generator, z0: complex, t_min: float, t_max: float, sample_count: int = 201,
               opts: FlowOptions = DEFAULT_OPTIONS) -> Trajectory:
    """Sample the orbit of ``z0`` on an even time grid over ``[t_min, t_max]``.

    The backward leg stops where the orbit leaves the disk; the exit time
    is recorded in :attr:`Trajectory.exit_time`.
    """
    if not t_min <= 0 <= t_max:
        raise ValueError("need t_min <= 0 <= t_max")
    z0 = complex(_check_z0(z0))
    times = np.linspace(t_min, t_max, int(sample_count))
    back_t = times[times < 0][::-1]
    fwd_t = times[times >= 0]
    fwd, _ = _sample_leg(gen, z0, float(t_max), fwd_t, opts, False)
    back, t_exit = _sample_leg(gen, z0, float(t_min), back_t, opts, True)
    t_all = np.concatenate([back_t[: len(back)][::-1], fwd_t])
    z_all = np.concatenate([back[::-1], fwd])
    return Trajectory(t_all, z_all, gen.label, t_exit)


def hyperbolic_group(alpha: float, t: float, z):
    """Hyperbolic automorphism group fixing 1 (attracting) and -1 (repelling).

    ``G_t(z) = (z + 1 + e^{-alpha t}(z - 1)) / (z + 1 - e^{-alpha t}(z - 1))``.
    """
    e = math.exp(-alpha * t)
    z = np.asarray(z, dtype=complex)
    out = (z + 1 + e * (z - 1)) / (z + 1 - e * (z - 1))
    return complex(out) if out.ndim == 0 else out


TIGHT_OPTIONS = FlowOptions(rel_tol=1e-13, abs_tol=1e-16)


def boundary_multiplier(gen: Generator, eta: complex, t: float,
                        opts: FlowOptions = TIGHT_OPTIONS) -> float:
    """Radial derivative of ``F_t`` at the boundary fixed point ``eta``.

    Richardson extrapolation of ``(F_t(r eta) - eta) / ((r - 1) eta)``.
    For a repelling point this equals ``exp(-t gamma)``.
    """
    eta = complex(eta) / abs(eta)
    if t == 0:
        return 1.0
    hs = np.array([2.0**-k for k in RADIAL_KS])
    zs = (1 - hs) * eta
    F = advance(gen, zs, t, opts)
    q = (F - eta) / (-hs * eta)
    val, err = richardson(q)
    if not np.isfinite(val) or err > 1e-6 * max(1.0, abs(val)):
        raise DivergentLimit(f"radial derivative of F_t at {eta} does not converge")
    return float(val.real)


def with_options(opts: FlowOptions, **kw) -> FlowOptions:
    return replace(opts, **kw)
