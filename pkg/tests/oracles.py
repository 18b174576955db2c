"""Independent oracles the tests check the library against.

These deliberately avoid the library's searchsorted rounding path: nearest
values are found by scanning distances over the full enumerated value list,
with exact Fraction arithmetic resolving anything too close to call in
float64.
"""

from fractions import Fraction

import numpy as np

from mxquant.formats import FormatSpec, enumerate_values


def _parities(spec: FormatSpec) -> np.ndarray:
    codes = np.array([cv.code for cv in enumerate_values(spec)])
    if spec.mantissa_bits > 0:
        fields = codes & ((1 << spec.mantissa_bits) - 1)
    else:
        fields = codes
    return (fields & 1) == 0


def _exact_pick(v: float, a: float, b: float, a_even: bool, b_even: bool) -> float:
    fv = Fraction(v)
    da, db = abs(fv - Fraction(a)), abs(fv - Fraction(b))
    if da < db:
        return a
    if db < da:
        return b
    return a if a_even else b


def nearest_by_scan(spec: FormatSpec, x: np.ndarray) -> np.ndarray:
    """Nearest representable value by distance scan, exact ties to even."""
    vals = np.array([cv.value for cv in enumerate_values(spec)])
    even = _parities(spec)
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    for start in range(0, len(x), 4096):
        xs = x[start : start + 4096]
        d = np.abs(xs[:, None] - vals[None, :])
        i1 = np.argmin(d, axis=1)
        d1 = d[np.arange(len(xs)), i1]
        d[np.arange(len(xs)), i1] = np.inf
        i2 = np.argmin(d, axis=1)
        d2 = d[np.arange(len(xs)), i2]
        res = vals[i1]
        # Anything within float noise of a tie gets re-decided exactly.
        close = d2 - d1 <= 1e-12 * np.maximum(d2, 1e-300)
        for j in np.nonzero(close)[0]:
            res[j] = _exact_pick(
                float(xs[j]), float(vals[i1[j]]), float(vals[i2[j]]),
                bool(even[i1[j]]), bool(even[i2[j]]),
            )
        out[start : start + 4096] = res
    return out


def nearest_scalar(spec: FormatSpec, v: float) -> float:
    """Pure-python linear scan with exact Fraction distances throughout."""
    fv = Fraction(v)
    best_val, best_d, best_even = None, None, False
    for cv, ev in zip(enumerate_values(spec), _parities(spec)):
        d = abs(fv - Fraction(cv.value))
        if best_d is None or d < best_d:
            best_val, best_d, best_even = cv.value, d, bool(ev)
        elif d == best_d and ev and not best_even:
            best_val, best_even = cv.value, True
    return best_val


def brute_force_scan(block: np.ndarray, spec: FormatSpec) -> tuple[float, float]:
    """Exhaustive scale search by python loop; returns (scale, sse).

    Ties between equal-SSE candidates go to the smallest scale.
    """
    from mxquant.formats import round_e2m1

    best_s, best_sse = None, None
    for cv in enumerate_values(spec):
        if cv.value <= 0:
            continue
        q = round_e2m1(np.asarray(block) / cv.value)
        sse = float(np.sum((np.asarray(block) - q * cv.value) ** 2))
        if best_sse is None or sse < best_sse:
            best_s, best_sse = cv.value, sse
    return best_s, best_sse
