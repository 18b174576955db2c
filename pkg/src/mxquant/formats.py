"""Minifloat format descriptors and bit-exact round-to-nearest-even codecs.

All arithmetic runs in float64 working precision. Every representable value of
the supported formats (and every midpoint between adjacent values) is exactly
representable in float64, so nearest/tie decisions are deterministic.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable

import numpy as np

SPECIAL_NONE = "none"
SPECIAL_NAN_AT_MAX_CODE = "nan_at_max_code"


@dataclass(frozen=True)
class FormatSpec:
    """Parameters of a small floating-point format (8 bits or fewer)."""

    name: str
    exponent_bits: int
    mantissa_bits: int
    signed: bool
    bias: int
    special_policy: str = SPECIAL_NONE

    def __post_init__(self) -> None:
        width = self.exponent_bits + self.mantissa_bits + (1 if self.signed else 0)
        if not 1 <= width <= 8:
            raise ValueError(f"format {self.name!r} is {width} bits wide, expected 1..8")
        if self.special_policy not in (SPECIAL_NONE, SPECIAL_NAN_AT_MAX_CODE):
            raise ValueError(f"unknown special_policy {self.special_policy!r}")

    @property
    def width(self) -> int:
        return self.exponent_bits + self.mantissa_bits + (1 if self.signed else 0)

    @property
    def max_value(self) -> float:
        return float(_value_table(self).values[-1])

    @property
    def min_positive(self) -> float:
        vals = _value_table(self).values
        pos = vals[vals > 0.0]
        return float(pos[0])


@dataclass(frozen=True)
class CodeValue:
    """A raw code within a format's bit width and its decoded value."""

    code: int
    value: float


# Built-in formats used throughout the toolkit.
E2M1 = FormatSpec("e2m1", exponent_bits=2, mantissa_bits=1, signed=True, bias=1)
E4M3 = FormatSpec(
    "e4m3", exponent_bits=4, mantissa_bits=3, signed=True, bias=7,
    special_policy=SPECIAL_NAN_AT_MAX_CODE,
)
E8M0 = FormatSpec(
    "e8m0", exponent_bits=8, mantissa_bits=0, signed=False, bias=127,
    special_policy=SPECIAL_NAN_AT_MAX_CODE,
)
# UE5M3 follows IEEE conventions: bias 2^(5-1)-1 = 15, subnormals enabled,
# no reserved codes, so the max value is 2^16 * 1.875.
UE5M3 = FormatSpec("ue5m3", exponent_bits=5, mantissa_bits=3, signed=False, bias=15)

BUILTIN_FORMATS = {f.name: f for f in (E2M1, E4M3, E8M0, UE5M3)}

E2M1_MAX = 6.0
E2M1_MAGNITUDES = (0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0)


def _decode_code(spec: FormatSpec, code: int) -> float:
    """Decode a raw code; returns NaN for codes consumed by the special policy."""
    e, m = spec.exponent_bits, spec.mantissa_bits
    mant = code & ((1 << m) - 1)
    exp = (code >> m) & ((1 << e) - 1)
    sign = -1.0 if spec.signed and (code >> (e + m)) & 1 else 1.0

    if spec.special_policy == SPECIAL_NAN_AT_MAX_CODE:
        if exp == (1 << e) - 1 and mant == (1 << m) - 1:
            return float("nan")

    if m == 0:
        # Exponent-only format: pure power of two, no zero, no subnormals.
        return sign * float(2.0 ** (exp - spec.bias))
    if exp == 0:
        return sign * (mant / (1 << m)) * 2.0 ** (1 - spec.bias)
    return sign * (1.0 + mant / (1 << m)) * 2.0 ** (exp - spec.bias)


class _ValueTable:
    """Sorted representable values plus the metadata RNE rounding needs."""

    __slots__ = ("values", "codes", "mids", "tie_parity_even", "code_of_value")

    def __init__(self, spec: FormatSpec):
        entries: list[tuple[float, int]] = []
        for code in range(1 << spec.width):
            v = _decode_code(spec, code)
            if np.isnan(v):
                continue
            if v == 0.0 and spec.signed and (code >> (spec.exponent_bits + spec.mantissa_bits)) & 1:
                continue  # collapse negative zero to one logical zero
            entries.append((v, code))
        entries.sort()
        self.values = np.array([v for v, _ in entries], dtype=np.float64)
        self.codes = np.array([c for _, c in entries], dtype=np.int64)
        # Midpoints of adjacent values are exact in float64.
        self.mids = (self.values[:-1] + self.values[1:]) / 2.0
        if spec.mantissa_bits > 0:
            fields = self.codes & ((1 << spec.mantissa_bits) - 1)
        else:
            fields = self.codes  # exponent-only: ties go to the even code
        self.tie_parity_even = (fields & 1) == 0
        self.code_of_value = {v: int(c) for v, c in entries}


@lru_cache(maxsize=None)
def _value_table(spec: FormatSpec) -> _ValueTable:
    return _ValueTable(spec)


def enumerate_values(spec: FormatSpec) -> list[CodeValue]:
    """All finite representable values in ascending order (one logical zero)."""
    t = _value_table(spec)
    return [CodeValue(int(c), float(v)) for v, c in zip(t.values, t.codes)]


def round_values(spec: FormatSpec, x: np.ndarray) -> np.ndarray:
    """Vectorized round-to-nearest-even onto the format's value grid.

    Saturates outside the representable range (clipping). Exact ties resolve
    to the value whose code has an even mantissa field.
    """
    x = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise ValueError("cannot round non-finite values")
    t = _value_table(spec)
    idx = np.searchsorted(t.mids, x, side="right")
    # searchsorted(side='right') sends exact midpoints up; pull back the ties
    # whose lower neighbour has the even code.
    lo = np.clip(idx - 1, 0, len(t.mids) - 1)
    tie = (idx > 0) & (x == t.mids[lo]) & t.tie_parity_even[lo]
    idx = np.where(tie, lo, idx)
    return t.values[idx]


def round_to_format(spec: FormatSpec, v: float) -> CodeValue:
    """Round one working-precision value to the nearest representable value."""
    value = float(round_values(spec, np.asarray([v]))[0])
    return CodeValue(_value_table(spec).code_of_value[value], value)


def encode_exact(spec: FormatSpec, v: float) -> CodeValue:
    """Encode a value that must already be on the format's grid."""
    code = _value_table(spec).code_of_value.get(float(v))
    if code is None:
        raise ValueError(f"{v!r} is not representable in {spec.name}")
    return CodeValue(code, float(v))


def encode_element_fp4(v_scaled: float) -> CodeValue:
    """Round an already-scaled element onto the E2M1 grid (saturating at 6)."""
    return round_to_format(E2M1, v_scaled)


def round_e2m1(x: np.ndarray) -> np.ndarray:
    return round_values(E2M1, x)


def format_table_csv(spec: FormatSpec) -> str:
    """The format's value table as CSV: one row per code, ascending by value."""
    buf = io.StringIO()
    buf.write("code,value\n")
    for cv in enumerate_values(spec):
        buf.write(f"{cv.code},{cv.value!r}\n")
    return buf.getvalue()


def magnitudes(spec: FormatSpec) -> list[float]:
    """Distinct absolute values of the format, ascending."""
    t = _value_table(spec)
    return sorted(set(float(abs(v)) for v in t.values))


def lookup_format(name: str) -> FormatSpec:
    try:
        return BUILTIN_FORMATS[name.lower()]
    except KeyError:
        raise KeyError(
            f"unknown format {name!r}; expected one of {sorted(BUILTIN_FORMATS)}"
        ) from None


def positive_values(spec: FormatSpec) -> np.ndarray:
    """Strictly positive representable values, ascending (brute-force candidates)."""
    t = _value_table(spec)
    return t.values[t.values > 0.0].copy()


def is_finite_array(values: Iterable[float]) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.size and not np.all(np.isfinite(arr)):
        raise ValueError("input contains non-finite values")
    return arr
