"""Signed fixed-point numbers with round-half-away-from-zero and saturation.

Values are stored as integer tick counts; one tick is one LSB, ``2**-frac_bits``.
The scalar API (:func:`quantize`, :func:`to_real`, :func:`sat_add`) works on
:class:`FixedValue` objects. The filter engine uses the array helpers
(:func:`quantize_ticks`, :func:`sat_add_ticks`) which follow identical rules.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class FormatMismatch(ValueError):
    pass


@dataclass(frozen=True)
class QFormat:
    """Fixed-point format with ``int_bits`` integer bits (sign included)."""

    frac_bits: int = 12
    int_bits: int = 4

    def __post_init__(self):
        if self.frac_bits < 1:
            raise ValueError(f"frac_bits must be >= 1, got {self.frac_bits}")
        if self.int_bits < 1:
            raise ValueError(f"int_bits must be >= 1, got {self.int_bits}")
        if self.frac_bits + self.int_bits > 62:
            raise ValueError("format wider than 62 bits does not fit int64 ticks")

    @property
    def lsb(self) -> float:
        return math.ldexp(1.0, -self.frac_bits)

    @property
    def min_tick(self) -> int:
        return -(1 << (self.int_bits - 1 + self.frac_bits))

    @property
    def max_tick(self) -> int:
        return (1 << (self.int_bits - 1 + self.frac_bits)) - 1

    @property
    def min_real(self) -> float:
        return self.min_tick * self.lsb

    @property
    def max_real(self) -> float:
        return self.max_tick * self.lsb


@dataclass(frozen=True)
class FixedValue:
    ticks: int
    fmt: QFormat
    saturated: bool = False

    def __post_init__(self):
        if not self.fmt.min_tick <= self.ticks <= self.fmt.max_tick:
            raise ValueError(f"{self.ticks} ticks outside format range")

    def __neg__(self) -> FixedValue:
        t = -self.ticks
        clamped = min(max(t, self.fmt.min_tick), self.fmt.max_tick)
        return FixedValue(clamped, self.fmt, self.saturated or clamped != t)

    def __float__(self) -> float:
        return to_real(self)


def round_half_away(y):
    """Nearest integer, exact halves rounded away from zero. Works on scalars and arrays."""
    a = np.abs(y)
    whole = np.floor(a)
    # a - whole is exact, unlike a + 0.5 which rounds just below a half upward
    return np.copysign(whole + (a - whole >= 0.5), y)


def quantize_ticks(x, fmt: QFormat):
    """Array quantizer: returns ``(ticks, saturated)`` as int64 / bool arrays."""
    x = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise ValueError("cannot quantize non-finite values")
    # pre-clip so huge inputs cannot overflow; x / lsb is exact (power of two)
    y = np.clip(x, fmt.min_real - fmt.lsb, fmt.max_real + fmt.lsb) / fmt.lsb
    r = round_half_away(y)
    saturated = (r > fmt.max_tick) | (r < fmt.min_tick)
    ticks = np.clip(r, fmt.min_tick, fmt.max_tick).astype(np.int64)
    return ticks, saturated


def sat_add_ticks(a, b, fmt: QFormat):
    """Tick-exact saturating addition of int64 arrays; returns ``(ticks, saturated)``."""
    # operands are within +-2**61 so the int64 sum cannot wrap
    s = np.asarray(a, dtype=np.int64) + np.asarray(b, dtype=np.int64)
    saturated = (s > fmt.max_tick) | (s < fmt.min_tick)
    return np.clip(s, fmt.min_tick, fmt.max_tick), saturated


def quantize(x: float, fmt: QFormat) -> FixedValue:
    if not math.isfinite(x):
        raise ValueError(f"cannot quantize non-finite value {x!r}")
    ticks, sat = quantize_ticks(x, fmt)
    return FixedValue(int(ticks), fmt, bool(sat))


def to_real(v: FixedValue) -> float:
    return v.ticks * v.fmt.lsb


def sat_add(a: FixedValue, b: FixedValue) -> FixedValue:
    if a.fmt != b.fmt:
        raise FormatMismatch(f"cannot add {a.fmt} and {b.fmt}")
    s = a.ticks + b.ticks
    clamped = min(max(s, a.fmt.min_tick), a.fmt.max_tick)
    return FixedValue(clamped, a.fmt, a.saturated or b.saturated or clamped != s)


def sat_sub(a: FixedValue, b: FixedValue) -> FixedValue:
    return sat_add(a, -b)
