"""Discrete transverse optical fields: grids, scalar and polarized fields.

All fields live on a square, axis-centred Cartesian grid. Quadrature is the
midpoint rule (sum times pixel area), which matches the FFT propagation grid
exactly. Polarized fields are stored in the linear (H, V) basis; circular
components use |L> = (1, i)/sqrt(2), |R> = (1, -i)/sqrt(2).

All objects are immutable after construction; operations are pure functions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import GridMismatchError

_SQRT2 = np.sqrt(2.0)


@dataclass(frozen=True)
class TransverseGrid:
    """Square sampling grid of n x n points over a physical side length (m).

    Samples are centred on the optical axis: x_j = (j - n/2) * spacing.
    n must be a power of two (>= 64) so FFT propagation stays fast.
    """

    n: int
    extent: float

    def __post_init__(self):
        if self.n < 64 or (self.n & (self.n - 1)) != 0:
            raise ValueError(f"grid n must be a power of two >= 64, got {self.n}")
        if not (self.extent > 0 and np.isfinite(self.extent)):
            raise ValueError(f"grid extent must be positive and finite, got {self.extent}")

    @property
    def spacing(self) -> float:
        """Sample pitch in metres."""
        return self.extent / self.n

    @property
    def pixel_area(self) -> float:
        return self.spacing ** 2

    @cached_property
    def axis(self) -> np.ndarray:
        """1-D sample coordinates (m), shared by both axes."""
        return (np.arange(self.n) - self.n // 2) * self.spacing

    @cached_property
    def xy(self) -> tuple[np.ndarray, np.ndarray]:
        x, y = np.meshgrid(self.axis, self.axis, indexing="xy")
        x.setflags(write=False)
        y.setflags(write=False)
        return x, y

    @cached_property
    def r(self) -> np.ndarray:
        x, y = self.xy
        r = np.hypot(x, y)
        r.setflags(write=False)
        return r

    @cached_property
    def phi(self) -> np.ndarray:
        x, y = self.xy
        p = np.arctan2(y, x)
        p.setflags(write=False)
        return p

    @cached_property
    def k_squared(self) -> np.ndarray:
        """|k_t|^2 on the FFT-ordered spatial-frequency grid (rad^2/m^2)."""
        k1 = 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.spacing)
        kx, ky = np.meshgrid(k1, k1, indexing="xy")
        k2 = kx ** 2 + ky ** 2
        k2.setflags(write=False)
        return k2


def _freeze(samples: np.ndarray, n: int) -> np.ndarray:
    arr = np.asarray(samples, dtype=np.complex128)
    if arr.shape != (n, n):
        raise ValueError(f"samples must have shape ({n}, {n}), got {arr.shape}")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ScalarField:
    """Complex scalar amplitude sampled on a TransverseGrid."""

    grid: TransverseGrid
    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "samples", _freeze(self.samples, self.grid.n))

    def power(self) -> float:
        return float(np.sum(np.abs(self.samples) ** 2) * self.grid.pixel_area)

    def normalized(self) -> "ScalarField":
        p = self.power()
        if p == 0.0:
            raise ValueError("cannot normalize a zero field")
        return ScalarField(self.grid, self.samples / np.sqrt(p))

    def intensity(self) -> np.ndarray:
        return np.abs(self.samples) ** 2


@dataclass(frozen=True)
class PolarizedField:
    """Two-component (H, V) transverse field with its wavelength (m)."""

    h: ScalarField
    v: ScalarField
    wavelength: float

    def __post_init__(self):
        if self.h.grid != self.v.grid:
            raise GridMismatchError("H and V components must share one grid")
        if not (self.wavelength > 0 and np.isfinite(self.wavelength)):
            raise ValueError(f"wavelength must be positive, got {self.wavelength}")

    @property
    def grid(self) -> TransverseGrid:
        return self.h.grid

    def power(self) -> float:
        return self.h.power() + self.v.power()

    def normalized(self) -> "PolarizedField":
        p = self.power()
        if p == 0.0:
            raise ValueError("cannot normalize a zero field")
        s = 1.0 / np.sqrt(p)
        return PolarizedField(
            ScalarField(self.grid, self.h.samples * s),
            ScalarField(self.grid, self.v.samples * s),
            self.wavelength,
        )

    def intensity(self) -> np.ndarray:
        return self.h.intensity() + self.v.intensity()


def polarized_from_arrays(grid: TransverseGrid, h: np.ndarray, v: np.ndarray,
                          wavelength: float) -> PolarizedField:
    return PolarizedField(ScalarField(grid, h), ScalarField(grid, v), wavelength)


def horizontally_polarized(scalar: ScalarField, wavelength: float) -> PolarizedField:
    """Put a scalar profile into the H component, V = 0."""
    zero = np.zeros_like(scalar.samples)
    return PolarizedField(scalar, ScalarField(scalar.grid, zero), wavelength)


def _require_same_grid(a, b):
    if a.grid != b.grid:
        raise GridMismatchError(
            f"fields on different grids: n={a.grid.n}, extent={a.grid.extent} vs "
            f"n={b.grid.n}, extent={b.grid.extent}"
        )


def scalar_inner_product(a: ScalarField, b: ScalarField) -> complex:
    """<a|b> = sum conj(a) * b * pixel_area (conjugate-linear in the first slot)."""
    _require_same_grid(a, b)
    return complex(np.sum(np.conj(a.samples) * b.samples) * a.grid.pixel_area)


def inner_product(a: PolarizedField, b: PolarizedField) -> complex:
    """Polarization-summed overlap <a|b>; rejects grid or wavelength mismatch."""
    _require_same_grid(a, b)
    if a.wavelength != b.wavelength:
        raise GridMismatchError(
            f"fields at different wavelengths: {a.wavelength} vs {b.wavelength}"
        )
    acc = np.sum(np.conj(a.h.samples) * b.h.samples)
    acc += np.sum(np.conj(a.v.samples) * b.v.samples)
    return complex(acc * a.grid.pixel_area)


@dataclass(frozen=True)
class CircularComponents:
    """A polarized field resolved into circular components L and R."""

    l: ScalarField
    r: ScalarField
    wavelength: float

    @property
    def grid(self) -> TransverseGrid:
        return self.l.grid

    def power(self) -> float:
        return self.l.power() + self.r.power()


def to_circular(f: PolarizedField) -> CircularComponents:
    """Resolve (H, V) into (L, R) with |L> = (1, i)/sqrt(2), |R> = (1, -i)/sqrt(2).

    Pointwise intensity |L|^2 + |R|^2 equals |H|^2 + |V|^2 (unitary change of
    basis), and to_linear(to_circular(f)) round-trips to f.
    """
    h, v = f.h.samples, f.v.samples
    # c_L = <L|psi>, c_R = <R|psi>
    l = (h - 1j * v) / _SQRT2
    r = (h + 1j * v) / _SQRT2
    grid = f.grid
    return CircularComponents(ScalarField(grid, l), ScalarField(grid, r), f.wavelength)


def to_linear(c: CircularComponents) -> PolarizedField:
    """Inverse of to_circular."""
    l, r = c.l.samples, c.r.samples
    h = (l + r) / _SQRT2
    v = 1j * (l - r) / _SQRT2
    grid = c.grid
    return PolarizedField(ScalarField(grid, h), ScalarField(grid, v), c.wavelength)
