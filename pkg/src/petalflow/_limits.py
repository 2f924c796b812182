"""Richardson extrapolation of limits along a radius."""
from __future__ import annotations

import math

import numpy as np

from .errors import DivergentLimit

RADIAL_KS = tuple(range(8, 21))


def richardson(values, ratio=2.0):
    """Extrapolate ``values`` sampled at step sizes h0/ratio**k to h -> 0.

    Assumes an expansion in integer powers of h. Returns ``(estimate, err)``
    where ``err`` is the Ridders-style error estimate of the chosen entry.
    """
    vals = [complex(v) for v in values]
    if not vals:
        raise ValueError("need at least one value")
    prev = [vals[0]]
    best, err = vals[0], math.inf
    for k in range(1, len(vals)):
        row = [vals[k]]
        for j in range(1, k + 1):
            fac = ratio**j - 1.0
            row.append(row[j - 1] + (row[j - 1] - prev[j - 1]) / fac)
            e = max(abs(row[j] - row[j - 1]), abs(row[j] - prev[j - 1]))
            if e < err:
                best, err = row[j], e
        # once the table starts growing the later entries are noise
        if abs(row[k] - prev[k - 1]) >= 2.0 * err and k > 3:
            break
        prev = row
    if not np.isfinite(best):
        return complex(np.nan), math.inf
    return best, err


def radial_limit(fn, eta, ks=RADIAL_KS, rtol=1e-6, what="radial limit"):
    """Limit of ``fn(r*eta)`` as r -> 1- along r = 1 - 2**-k.

    ``fn`` receives the point z and the distance ``1 - r``.
    Raises DivergentLimit if the tableau does not settle within ``rtol``.
    """
    vals = []
    for k in ks:
        h = 2.0**-k
        vals.append(fn((1.0 - h) * eta, h))
    est, err = richardson(vals)
    if not np.isfinite(est) or err > rtol * max(1.0, abs(est)):
        raise DivergentLimit(f"{what} at {eta} did not stabilize (err={err:.3g})")
    return est
