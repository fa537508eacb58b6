"""Periodic box, physical parameters and the complex field container."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Literal

import numpy as np
import scipy.fft as sfft

FFT_WORKERS = -1

Sign = Literal["focusing", "defocusing"]


class GridError(ValueError):
    pass


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on ``[-l, l)^d`` with ``n`` points per axis.

    Wavevectors are stored per axis in FFT order, ``k = (pi/l) m`` with
    ``m`` running over ``-n/2 .. n/2-1``.  Index ``n//2`` of every axis sits
    at ``x = 0``.
    """

    d: int
    n: int
    l: float

    @property
    def dx(self) -> float:
        return 2.0 * self.l / self.n

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.d

    @property
    def size(self) -> int:
        return self.n ** self.d

    @property
    def cell_volume(self) -> float:
        return self.dx ** self.d

    @property
    def volume(self) -> float:
        return (2.0 * self.l) ** self.d

    @cached_property
    def axis(self) -> np.ndarray:
        return -self.l + self.dx * np.arange(self.n)

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        # fftfreq gives m/(n dx); 2 pi m /(n dx) = pi m / l
        return 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.dx)

    @cached_property
    def coords(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*([self.axis] * self.d), indexing="ij", sparse=True))

    @cached_property
    def kvec(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*([self.wavenumbers] * self.d), indexing="ij", sparse=True))

    @cached_property
    def kvec_odd(self) -> tuple[np.ndarray, ...]:
        """Wavevectors with the Nyquist entry zeroed (for odd-order derivatives)."""
        k = self.wavenumbers.copy()
        k[self.n // 2] = 0.0
        return tuple(np.meshgrid(*([k] * self.d), indexing="ij", sparse=True))

    @cached_property
    def k2(self) -> np.ndarray:
        out = np.zeros(self.shape)
        for kj in self.kvec:
            out = out + kj ** 2
        return out

    @cached_property
    def kabs(self) -> np.ndarray:
        return np.sqrt(self.k2)

    @cached_property
    def r(self) -> np.ndarray:
        out = np.zeros(self.shape)
        for xj in self.coords:
            out = out + xj ** 2
        return np.sqrt(out)

    @property
    def k2_min(self) -> float:
        return (math.pi / self.l) ** 2

    @property
    def k2_max(self) -> float:
        return float(self.k2.max())

    def kmax_axis(self) -> float:
        return math.pi * (self.n // 2) / self.l

    def integrate(self, density: np.ndarray) -> float:
        return float(np.sum(density)) * self.cell_volume

    def rescaled(self, factor: float) -> "Grid":
        """Grid with the same point count and half-width ``l / factor``."""
        return Grid(self.d, self.n, self.l / factor)

    def refined(self) -> "Grid":
        return Grid(self.d, 2 * self.n, self.l)


def fft_friendly(n: int) -> bool:
    """Even and free of prime factors above 5 (powers of two, 48, 96, ...)."""
    if n < 2 or n % 2:
        return False
    for f in (2, 3, 5):
        while n % f == 0:
            n //= f
    return n == 1


def make_grid(d: int, n: int, l: float) -> Grid:
    if int(d) != d or d not in (1, 2, 3):
        raise GridError(f"dimension must be 1, 2 or 3, got {d!r}")
    if int(n) != n or n < 16 or not fft_friendly(int(n)):
        raise GridError(f"points per axis must be an even 2-3-5 smooth integer >= 16, got {n!r}")
    if not (l > 0 and math.isfinite(l)):
        raise GridError(f"half side-length must be positive, got {l!r}")
    return Grid(int(d), int(n), float(l))


@dataclass(frozen=True)
class PhysParams:
    """Fractional order ``s``, power ``p`` and the sign of the nonlinearity."""

    s: float
    p: float
    sign: Sign = "focusing"

    def __post_init__(self):
        if not (0.0 < self.s <= 1.0):
            raise ValueError(f"s must lie in (0, 1], got {self.s}")
        if not self.p > 1.0:
            raise ValueError(f"p must exceed 1, got {self.p}")
        if self.sign not in ("focusing", "defocusing"):
            raise ValueError(f"unknown sign {self.sign!r}")

    @property
    def focusing(self) -> bool:
        return self.sign == "focusing"

    @property
    def c_s(self) -> float:
        return math.sin(math.pi * self.s) / math.pi

    def s_c(self, d: int) -> float:
        return d / 2.0 - 2.0 * self.s / (self.p - 1.0)

    def in_scattering_regime(self, d: int) -> bool:
        """Dimension/order/power window where sub-threshold data is known to scatter."""
        s, p = self.s, self.p
        if d < 3 or not (d / (d + 1.0) < s < 1.0):
            return False
        if d == 3:
            ok = 8.0 * s / 3.0 < p < 1.0 + 4.0 * s / (3.0 - 2.0 * s)
        else:
            ok = 2.0 <= p < 1.0 + 4.0 * s / (d - 2.0 * s)
        return ok and 0.0 < self.s_c(d) < s

    def intercritical(self, d: int) -> bool:
        return 0.0 < self.s_c(d) < self.s

    def with_sign(self, sign: Sign) -> "PhysParams":
        return PhysParams(self.s, self.p, sign)


def fftn(values: np.ndarray) -> np.ndarray:
    return sfft.fftn(values, workers=FFT_WORKERS)


def ifftn(values: np.ndarray) -> np.ndarray:
    return sfft.ifftn(values, workers=FFT_WORKERS)


@dataclass(frozen=True, eq=False)
class ComplexField:
    """Complex samples on a grid, in physical or spectral (unnormalised FFT) form."""

    grid: Grid
    values: np.ndarray
    space: Literal["physical", "spectral"] = "physical"
    _peer: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.complex128)
        if vals.flags.writeable:
            vals = vals.copy()
        if vals.shape != self.grid.shape:
            raise GridError(f"values shape {vals.shape} does not match grid {self.grid.shape}")
        if self.space not in ("physical", "spectral"):
            raise ValueError(f"unknown space tag {self.space!r}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_function(cls, grid: Grid, fn) -> "ComplexField":
        vals = np.broadcast_to(fn(*grid.coords), grid.shape)
        return cls(grid, np.array(vals, dtype=np.complex128))

    def physical(self) -> np.ndarray:
        if self.space == "physical":
            return self.values
        if "physical" not in self._peer:
            vals = ifftn(self.values)
            vals.setflags(write=False)
            self._peer["physical"] = vals
        return self._peer["physical"]

    def spectral(self) -> np.ndarray:
        if self.space == "spectral":
            return self.values
        if "spectral" not in self._peer:
            vals = fftn(self.values)
            vals.setflags(write=False)
            self._peer["spectral"] = vals
        return self._peer["spectral"]

    def to_physical(self) -> "ComplexField":
        return self if self.space == "physical" else ComplexField(self.grid, self.physical())

    def to_spectral(self) -> "ComplexField":
        return self if self.space == "spectral" else ComplexField(self.grid, self.spectral(), "spectral")

    def with_values(self, values: np.ndarray) -> "ComplexField":
        return ComplexField(self.grid, values)

    def __mul__(self, c) -> "ComplexField":
        return ComplexField(self.grid, self.values * c, self.space)

    __rmul__ = __mul__

    def __add__(self, other: "ComplexField") -> "ComplexField":
        return ComplexField(self.grid, self.physical() + other.physical())

    def __sub__(self, other: "ComplexField") -> "ComplexField":
        return ComplexField(self.grid, self.physical() - other.physical())
