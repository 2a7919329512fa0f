"""Discrete Fourier analysis matching the continuum conventions.

The forward transform is the quadrature of f^(xi) = int f(y) e^{-i<y,xi>} dy
on the grid, i.e. the plain FFT times the cell volume (2L/N)^d and the
boundary phase e^{-i x_0 xi} = (-1)^m per axis.  The inverse carries
(2pi)^{-d} and the frequency-cell measure (pi/L)^d, which makes the round
trip exact up to FFT roundoff and gives the discrete Plancherel identity

    ||f||_2^2 = (2pi)^{-d} ||f^||_2^2

with each side weighted by its own cell measure.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import GridAdequacyError
from .grid import FREQUENCY, PHYSICAL, Field, GridSpec

# a symbol maps stacked frequency coordinates, shape (dim, ...), to values
# of the trailing shape; every multiplier below follows this convention
SymbolFn = Callable[[np.ndarray], np.ndarray]


@lru_cache(maxsize=32)
def _parity(grid: GridSpec) -> np.ndarray:
    """(-1)^(m_1 + ... + m_d) on the wrapped lattice (exact +-1 values)."""
    m = np.rint(np.fft.fftfreq(grid.points) * grid.points).astype(np.int64)
    sign = np.where(m % 2 == 0, 1.0, -1.0)
    out = sign
    for _ in range(grid.dim - 1):
        out = np.multiply.outer(out, sign)
    out.setflags(write=False)
    return out


def dft_forward(field: Field) -> Field:
    """Quadrature of the continuum transform; physical -> frequency."""
    field.require(PHYSICAL)
    grid = field.grid
    spectrum = grid.cell_volume * _parity(grid) * np.fft.fftn(field.samples)
    return Field(grid, FREQUENCY, spectrum)


def dft_inverse(field: Field) -> Field:
    """Inverse quadrature with (2pi)^{-d} and lattice measure (pi/L)^d."""
    field.require(FREQUENCY)
    grid = field.grid
    samples = np.fft.ifftn(field.samples * _parity(grid)) / grid.cell_volume
    return Field(grid, PHYSICAL, samples)


def to_physical(field: Field) -> Field:
    return field if field.is_physical else dft_inverse(field)


def to_frequency(field: Field) -> Field:
    return field if field.is_frequency else dft_forward(field)


def apply_symbol(field: Field, symbol) -> Field:
    """Apply the Fourier multiplier ``symbol`` to a field.

    ``symbol`` receives the stacked frequency mesh, shape (dim, N, ..., N),
    and must return an array of shape (N, ..., N).  The output representation
    matches the input.
    """
    grid = field.grid
    values = np.asarray(symbol(grid.frequency_mesh()))
    finite = np.isfinite(values)
    if not finite.all():
        bad = tuple(np.argwhere(~finite)[0])
        xi = tuple(float(grid.frequency_mesh()[(a, *bad)]) for a in range(grid.dim))
        raise ValueError(f"symbol evaluated to a non-finite value at xi = {xi}")
    spectrum = to_frequency(field)
    out = spectrum.with_samples(spectrum.samples * values)
    return out if field.is_frequency else dft_inverse(out)


def radial(fn):
    """Lift a function of |xi| to a symbol over the stacked mesh."""

    def symbol(xi: np.ndarray) -> np.ndarray:
        return fn(np.sqrt((xi**2).sum(axis=0)))

    return symbol


def spectral_radius(field: Field, rel_tol: float = 1e-9) -> float:
    """Largest |xi_i| (per-axis) carrying relative spectral mass above rel_tol."""
    spectrum = to_frequency(field)
    mag = np.abs(spectrum.samples)
    peak = mag.max()
    if peak == 0.0:
        return 0.0
    active = mag > rel_tol * peak
    mesh = field.grid.frequency_mesh()
    return max(float(np.abs(mesh[a][active]).max()) for a in range(field.grid.dim))


def ensure_headroom(field: Field, factor: float = 4.0, rel_tol: float = 1e-9) -> float:
    """Require nyquist >= factor * (active spectral radius); returns the radius.

    The default factor 4 is the aliasing-control policy used by the
    automatic grid sizing; multiplier application itself only needs the
    spectrum to be representable (factor 1).
    """
    radius = spectral_radius(field, rel_tol)
    nyq = field.grid.nyquist
    if radius * factor > nyq * (1.0 + 1e-12):
        raise GridAdequacyError(
            f"grid nyquist {nyq:.4g} is below {factor:g} x active spectral radius "
            f"{radius:.4g}; enlarge points or shrink half_width"
        )
    return radius
