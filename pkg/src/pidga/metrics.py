"""Error-integral performance indices, step-response measures, stability.

Indices are dt-weighted Riemann sums, i.e. true approximations of the
continuous integrals (IAE = sum |e| dt and so on, MSE = ISE/horizon).  That
keeps them dimensionally consistent and comparable across sampling rates;
orderings between tuning methods are unaffected by the constant dt factor.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from .lti import poly_add, poly_mul, poly_trim

OBJECTIVES = ("mse", "itae", "iae", "ise", "itse")

FITNESS_CAP = 1e12
DIVERGED_FITNESS = 1e-12


@dataclass(frozen=True)
class PerformanceIndices:
    mse: float
    itae: float
    iae: float
    ise: float
    itse: float

    def by_name(self, name):
        if name not in OBJECTIVES:
            raise KeyError(f"unknown objective {name!r}")
        return getattr(self, name)


def index_sums(e, t, dt, horizon):
    """(mse, itae, iae, ise, itse) for error samples along the last axis.

    Vectorized: e may be a single trace (n,) or a stack (..., n) sharing the
    time grid t, so a whole GA population evaluates in one call.
    """
    ae = np.abs(e)
    se = e * e
    iae = ae.sum(axis=-1) * dt
    ise = se.sum(axis=-1) * dt
    itae = (ae * t).sum(axis=-1) * dt
    itse = (se * t).sum(axis=-1) * dt
    mse = ise / horizon
    return mse, itae, iae, ise, itse


def indices(resp):
    """The five indices of a step response (diverged traces included as
    clamped: padding samples simply keep contributing their last error)."""
    vals = index_sums(resp.e, resp.t, resp.dt, resp.horizon)
    return PerformanceIndices(*(float(v) for v in vals))


def fitness(index_value, diverged=False):
    """Reciprocal-index fitness, capped at 1e12 for a vanishing index.

    Diverged responses get the flat penalty 1e-12 regardless of their
    (meaningless) clamped index.  Accepts scalars or arrays.
    """
    iv = np.asarray(index_value, dtype=float)
    with np.errstate(divide="ignore"):
        f = np.where(iv < 1e-12, FITNESS_CAP, 1.0 / np.where(iv > 0, iv, 1.0))
    f = np.where(diverged, DIVERGED_FITNESS, f)
    if np.ndim(index_value) == 0 and np.ndim(diverged) == 0:
        return float(f)
    return f


@dataclass(frozen=True)
class StandardMeasures:
    """Classical step-response measures: 5% settling band, 0-95% rise time.

    stability_margin is not derivable from the trace alone and is filled in
    separately (see stability_margin); it defaults to nan.
    """

    percent_overshoot: float
    settling_time: float
    rise_time: float
    peak_time: float
    steady_state_error: float
    stability_margin: float = math.nan

    def with_margin(self, margin):
        return replace(self, stability_margin=float(margin))


def standard_measures(resp):
    """Measure a non-diverged step response against its own final value.

    The final value is the last sample, not the reference: integral action
    drives them together, but P/PD gain sets explored by the optimizer have
    offset, and measuring against the actual asymptote keeps the numbers
    meaningful there too.  A non-positive final value has no sensible
    percent-of-final semantics and raises.
    """
    if resp.diverged:
        raise ValueError("measures undefined for a diverged response")
    y = resp.y
    t = resp.t
    final = y[-1]
    if final <= 0:
        raise ValueError("non-positive final value; measures undefined")
    k_peak = int(np.argmax(y))  # first maximum
    overshoot = max(0.0, (y[k_peak] - final) / final * 100.0)
    outside = np.abs(y - final) > 0.05 * final
    if outside.any():
        settling = t[np.flatnonzero(outside)[-1] + 1]
    else:
        settling = 0.0
    rise = t[int(np.argmax(y >= 0.95 * final))]
    return StandardMeasures(
        percent_overshoot=float(overshoot),
        settling_time=float(settling),
        rise_time=float(rise),
        peak_time=float(t[k_peak]),
        steady_state_error=float(1.0 - final),
    )


def routh_stable(poly):
    """Strict Hurwitz test: every first-column Routh entry positive.

    The leading sign is normalized first.  A pivot at or below 1e-12 of the
    current row scale counts as a zero pivot and returns False: marginal
    polynomials are "not strictly stable", which is exactly the boundary the
    margin bisection hunts for.
    """
    c = poly_trim(poly)
    if len(c) == 1:
        if c[0] == 0:
            raise ValueError("zero polynomial")
        raise ValueError("constant polynomial: stability test needs degree >= 1")
    if c[0] < 0:
        c = -c
    deg = len(c) - 1
    width = deg // 2 + 1
    r0 = np.zeros(width)
    r1 = np.zeros(width)
    r0[:len(c[0::2])] = c[0::2]
    r1[:len(c[1::2])] = c[1::2]
    for _ in range(deg):
        scale = max(np.abs(r0).max(), np.abs(r1).max(), 1e-300)
        pivot = r1[0]
        if pivot <= 1e-12 * scale:  # catches negatives and near-zero pivots
            return False
        nxt = np.zeros(width)
        nxt[:width - 1] = r0[1:] - (r0[0] / pivot) * r1[1:]
        r0, r1 = r1, nxt
    return True


def stability_margin(controller, plant, delay=None, k_max=1e6, rel_tol=1e-4):
    """Smallest loop-gain multiplier K_c > 1 that destabilizes the loop.

    The whole loop L = controller*plant*delay is scaled by K_c and the
    characteristic polynomial den(L) + K_c*num(L) is tested with
    routh_stable: double K_c until the test fails, then bisect to relative
    width rel_tol.  Returns math.inf if still stable at k_max; raises if the
    nominal (K_c = 1) loop is already unstable.
    """
    num_l = poly_mul(controller.num, plant.num)
    den_l = poly_mul(controller.den, plant.den)
    if delay is not None:
        num_l = poly_mul(num_l, delay.num)
        den_l = poly_mul(den_l, delay.den)

    def stable(k):
        return routh_stable(poly_add(den_l, k * num_l))

    if not stable(1.0):
        raise ValueError("nominal closed loop is unstable")
    lo, hi = 1.0, 2.0
    while stable(hi):
        lo = hi
        if hi >= k_max:
            return math.inf
        hi = min(hi * 2.0, k_max)
    while hi - lo > rel_tol * lo:
        mid = 0.5 * (lo + hi)
        if stable(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
