"""Seeded white-noise sources for the injected noise and AR innovations.

The bit stream comes from numpy's Philox4x64-10 counter-based generator keyed
directly with the 64-bit seed; the counter starts at ``(0, 0, 0, stream)`` so
that one seed can feed several independent streams. Uniform
doubles are taken in fixed blocks of ``BLOCK`` so that the sequence seen by a
consumer does not depend on how it slices its requests (scalar ``sample`` calls
and ``sample_many`` interleave freely).

Gaussian draws use the basic Box-Muller transform on consecutive uniform pairs
``(u1, u2)`` in ``[0, 1)``::

    r = sqrt(-2 * log(1 - u1))
    z0 = r * cos(2*pi*u2),  z1 = r * sin(2*pi*u2)

emitted in the order z0, z1.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

BLOCK = 4096
KINDS = ("none", "uniform", "gaussian")


@dataclass(frozen=True)
class NoiseSpec:
    """Distribution of a white-noise source.

    ``scale`` is the half-width for ``uniform`` and the standard deviation for
    ``gaussian``; it is ignored for ``none``.
    """

    kind: str = "none"
    scale: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"noise kind must be one of {KINDS}, got {self.kind!r}")
        if self.kind != "none" and not self.scale > 0:
            raise ValueError(f"{self.kind} noise needs a positive scale, got {self.scale}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")

    @classmethod
    def uniform(cls, half_width: float, seed: int = 0) -> NoiseSpec:
        return cls("uniform", half_width, seed)

    @classmethod
    def gaussian(cls, sigma: float, seed: int = 0) -> NoiseSpec:
        return cls("gaussian", sigma, seed)

    def with_seed(self, seed: int) -> NoiseSpec:
        return NoiseSpec(self.kind, self.scale, seed)

    def derived(self, run_index: int) -> NoiseSpec:
        """Spec for ensemble member ``run_index`` (seed xor index)."""
        return self.with_seed(self.seed ^ run_index)

    @property
    def variance(self) -> float:
        if self.kind == "uniform":
            return self.scale**2 / 3.0
        if self.kind == "gaussian":
            return self.scale**2
        return 0.0


class NoiseGenerator:
    def __init__(self, spec: NoiseSpec, stream: int = 0):
        self.spec = spec
        self.stream = stream
        bits = np.random.Philox(key=spec.seed, counter=[0, 0, 0, stream])
        self._bits = np.random.Generator(bits)
        self._buf = np.empty(0)
        self._pos = 0

    def _refill(self):
        u = self._bits.random(BLOCK)
        if self.spec.kind == "uniform":
            self._buf = self.spec.scale * (2.0 * u - 1.0)
        else:
            u1, u2 = u[0::2], u[1::2]
            r = np.sqrt(-2.0 * np.log1p(-u1))
            z = np.empty(BLOCK)
            z[0::2] = r * np.cos(2.0 * np.pi * u2)
            z[1::2] = r * np.sin(2.0 * np.pi * u2)
            self._buf = self.spec.scale * z
        self._pos = 0

    def sample(self) -> float:
        if self.spec.kind == "none":
            return 0.0
        if self._pos >= len(self._buf):
            self._refill()
        x = self._buf[self._pos]
        self._pos += 1
        return float(x)

    def sample_many(self, n: int) -> np.ndarray:
        if self.spec.kind == "none":
            return np.zeros(n)
        out = np.empty(n)
        filled = 0
        while filled < n:
            if self._pos >= len(self._buf):
                self._refill()
            take = min(n - filled, len(self._buf) - self._pos)
            out[filled:filled + take] = self._buf[self._pos:self._pos + take]
            self._pos += take
            filled += take
        return out


def sample(gen: NoiseGenerator) -> float:
    return gen.sample()
