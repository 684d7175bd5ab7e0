"""Scalar fields on the periodic torus [-pi, pi]^d sampled on a uniform grid."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np


@dataclass(frozen=True)
class TorusGrid:
    """Uniform collocation grid with ``points_per_dim`` points along each axis."""

    dim: int
    points_per_dim: int

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ValueError(f"dim must be 1, 2 or 3, got {self.dim}")
        if int(self.points_per_dim) != self.points_per_dim or self.points_per_dim < 2:
            raise ValueError(f"points_per_dim must be an integer >= 2, got {self.points_per_dim}")

    @classmethod
    def from_shape(cls, shape) -> "TorusGrid":
        shape = tuple(int(s) for s in shape)
        if len(set(shape)) != 1:
            raise ValueError(f"anisotropic grids are not supported: {shape}")
        return cls(len(shape), shape[0])

    @property
    def spacing(self) -> float:
        return 2 * math.pi / self.points_per_dim

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points_per_dim,) * self.dim

    @property
    def size(self) -> int:
        return self.points_per_dim**self.dim

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dim

    def coordinates(self) -> list[np.ndarray]:
        """Meshgrid of point coordinates, ``x_j = -pi + j*h``."""
        x = -math.pi + self.spacing * np.arange(self.points_per_dim)
        return np.meshgrid(*([x] * self.dim), indexing="ij")

    @cached_property
    def wavenumbers(self) -> list[np.ndarray]:
        """Integer wavevector components in FFT order, broadcastable to ``shape``."""
        k = np.fft.fftfreq(self.points_per_dim, d=1.0 / self.points_per_dim)
        out = []
        for axis in range(self.dim):
            sh = [1] * self.dim
            sh[axis] = self.points_per_dim
            out.append(k.reshape(sh))
        return out

    @cached_property
    def k_squared(self) -> np.ndarray:
        return sum(k**2 for k in self.wavenumbers) * np.ones(self.shape)


@dataclass(frozen=True, eq=False)
class Field:
    grid: TorusGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.size != self.grid.size:
            raise ValueError(f"expected {self.grid.size} values, got {values.size}")
        values = values.reshape(self.grid.shape).copy()
        if not np.all(np.isfinite(values)):
            raise ValueError("field values must be finite")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, grid: TorusGrid, func) -> "Field":
        return cls(grid, func(*grid.coordinates()))

    @classmethod
    def constant(cls, grid: TorusGrid, value: float) -> "Field":
        return cls(grid, np.full(grid.shape, float(value)))

    def with_values(self, values) -> "Field":
        return Field(self.grid, values)


@dataclass(frozen=True, eq=False)
class SpectralCoefficients:
    """Normalized DFT coefficients: ``u(x) = sum_k c_k exp(i k.x)`` on the grid.

    Stored in numpy FFT order; ``grid.wavenumbers`` gives the matching
    integer wavevector components in ``{-floor(N/2), ..., ceil(N/2)-1}``.
    """

    grid: TorusGrid
    coefficients: np.ndarray

    def at(self, *k: int) -> complex:
        N = self.grid.points_per_dim
        return complex(self.coefficients[tuple(int(ki) % N for ki in k)])


def _phase(grid: TorusGrid) -> np.ndarray:
    # grid starts at -pi rather than 0: exp(-i k pi) = (-1)^k per axis
    phase = np.ones(grid.shape)
    for k in grid.wavenumbers:
        phase = phase * np.where(k.astype(int) % 2 == 0, 1.0, -1.0)
    return phase


def transform(field: Field) -> SpectralCoefficients:
    grid = field.grid
    coeffs = np.fft.fftn(field.values) / grid.size
    return SpectralCoefficients(grid, coeffs * _phase(grid))


def inverse_transform(coeffs: SpectralCoefficients) -> Field:
    grid = coeffs.grid
    values = np.fft.ifftn(coeffs.coefficients * _phase(grid)) * grid.size
    return Field(grid, values.real)


def apply_multiplier(field: Field, multiplier: np.ndarray) -> Field:
    """Apply a real Fourier multiplier (given in FFT order) to ``field``."""
    values = np.fft.ifftn(np.fft.fftn(field.values) * multiplier).real
    return Field(field.grid, values)


def spectral_laplacian(field: Field) -> Field:
    return apply_multiplier(field, -field.grid.k_squared)


def dealias(field: Field) -> Field:
    """Zero every mode with some |k_i| > N/3 (2/3 rule)."""
    grid = field.grid
    mask = np.ones(grid.shape)
    for k in grid.wavenumbers:
        mask = mask * (np.abs(k) <= grid.points_per_dim / 3)
    return apply_multiplier(field, mask)


def norms_and_mean(field: Field) -> tuple[float, float, float]:
    """Return ``(linf, l2, mean)`` with the quadrature-weighted l2 norm."""
    v = field.values
    linf = float(np.max(np.abs(v)))
    l2 = math.sqrt(field.grid.cell_volume * float(np.sum(v * v)))
    mean = float(np.sum(v)) / field.grid.size
    return linf, l2, mean


def spectral_l2(coeffs: SpectralCoefficients) -> float:
    """L2 norm from coefficients (Parseval)."""
    c = coeffs.coefficients
    return math.sqrt((2 * math.pi) ** coeffs.grid.dim * float(np.sum(np.abs(c) ** 2)))
