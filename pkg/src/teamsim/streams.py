"""Buffered draw streams for the simulation hot loop.

Each simulation phase gets its own PCG64 generator; DrawBuffer wraps one
and serves scalar and vector draws from pre-drawn blocks so the per-draw
cost stays small. Scalar and array reads share a single cursor per draw
kind, so consumption order (and therefore every downstream result) does
not depend on how calls happen to be batched.
"""

from __future__ import annotations

import numpy as np

_BLOCK = 4096


class DrawBuffer:
    """Sequential uniform/normal draws from one generator, block-buffered."""

    __slots__ = ("rng", "block", "_u", "_ui", "_z", "_zi")

    def __init__(self, rng: np.random.Generator, block: int = _BLOCK):
        self.rng = rng
        self.block = block
        self._u: list[float] | None = None
        self._ui = 0
        self._z: np.ndarray | None = None
        self._zi = 0

    # Uniforms are kept as a plain list: every consumer reads them one at
    # a time and float list indexing is cheaper than ndarray item access.

    def uniform(self) -> float:
        """One draw from U[0, 1)."""
        u, i = self._u, self._ui
        if u is None or i >= len(u):
            self._u = u = self.rng.random(self.block).tolist()
            i = 0
        self._ui = i + 1
        return u[i]

    def uniforms(self, n: int) -> list[float]:
        """The next n uniform draws."""
        u, i = self._u, self._ui
        if u is not None and i + n <= len(u):
            self._ui = i + n
            return u[i : i + n]
        return [self.uniform() for _ in range(n)]

    def randbelow(self, n: int) -> int:
        """Uniform integer in [0, n)."""
        return int(self.uniform() * n)

    def normal(self) -> float:
        """One standard normal draw."""
        z, i = self._z, self._zi
        if z is None or i >= z.size:
            self._z = z = self.rng.standard_normal(self.block)
            i = 0
        self._zi = i + 1
        return float(z[i])

    def normals(self, n: int) -> list[float]:
        """The next n standard normal draws as a list."""
        return self.normals_np(n).tolist()

    def normals_np(self, n: int) -> np.ndarray:
        """The next n standard normal draws as an array view."""
        z, i = self._z, self._zi
        if n == 0:
            return np.empty(0)
        if z is not None and i + n <= z.size:
            self._zi = i + n
            return z[i : i + n]
        # Refill in block-sized chunks exactly as scalar reads would, so
        # the generator state after any request matches one-at-a-time
        # consumption and the other draw kind stays in sync.
        parts = []
        have = 0
        if z is not None and i < z.size:
            parts.append(z[i:])
            have = z.size - i
        while have < n:
            chunk = self.rng.standard_normal(self.block)
            take = min(n - have, self.block)
            self._z = chunk
            self._zi = take
            parts.append(chunk[:take])
            have += take
        return np.concatenate(parts) if len(parts) > 1 else parts[0]
