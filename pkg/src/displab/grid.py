"""Periodic grids and sampled complex fields.

The spatial box is [-L, L)^d sampled at N points per axis,
x_n = -L + n * (2L/N).  The dual lattice carries the frequencies
xi_m = (pi/L) * m for m = -N/2 .. N/2 - 1 per axis, so the largest
representable frequency magnitude per axis is the Nyquist value
pi*N/(2L).  Frequency-space samples are stored in FFT (wrapped) order;
``GridSpec.axis_frequencies`` exposes the signed values in that order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import RepresentationError

PHYSICAL = "physical"
FREQUENCY = "frequency"

_MAGIC = b"PSLF1\n"


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid on [-half_width, half_width)^dim."""

    dim: int
    points: int
    half_width: float

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ValueError(f"dim must be 1, 2 or 3, got {self.dim}")
        n = self.points
        if n < 8 or (n & (n - 1)) != 0:
            raise ValueError(f"points must be a power of two >= 8, got {n}")
        if not self.half_width > 0:
            raise ValueError(f"half_width must be positive, got {self.half_width}")

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points,) * self.dim

    @property
    def size(self) -> int:
        return self.points**self.dim

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / self.points

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dim

    @property
    def frequency_spacing(self) -> float:
        return np.pi / self.half_width

    @property
    def frequency_cell_volume(self) -> float:
        return self.frequency_spacing**self.dim

    @property
    def nyquist(self) -> float:
        return np.pi * self.points / (2.0 * self.half_width)

    def axis_points(self) -> np.ndarray:
        return -self.half_width + self.spacing * np.arange(self.points)

    def axis_frequencies(self) -> np.ndarray:
        """Signed frequencies of one axis, in wrapped (FFT) order."""
        return 2.0 * np.pi * np.fft.fftfreq(self.points, d=self.spacing)

    def point_mesh(self) -> np.ndarray:
        """Stacked physical coordinates, shape (dim, N, ..., N)."""
        return _point_mesh(self)

    def frequency_mesh(self) -> np.ndarray:
        """Stacked frequency coordinates in wrapped order, shape (dim, N, ..., N)."""
        return _frequency_mesh(self)

    def frequency_radii(self) -> np.ndarray:
        """|xi| on the wrapped lattice, shape (N, ..., N)."""
        return _frequency_radii(self)


@lru_cache(maxsize=32)
def _point_mesh(grid: GridSpec) -> np.ndarray:
    axes = [grid.axis_points()] * grid.dim
    mesh = np.meshgrid(*axes, indexing="ij")
    out = np.stack(mesh)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=32)
def _frequency_mesh(grid: GridSpec) -> np.ndarray:
    axes = [grid.axis_frequencies()] * grid.dim
    mesh = np.meshgrid(*axes, indexing="ij")
    out = np.stack(mesh)
    out.setflags(write=False)
    return out

@lru_cache(maxsize=32)
def _frequency_radii(grid: GridSpec) -> np.ndarray:
    out = np.sqrt((grid.frequency_mesh() ** 2).sum(axis=0))
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Field:
    """A sampled complex function, in either physical or frequency representation.

    ``samples`` has shape ``grid.shape`` (row-major axis order).  Frequency
    samples are indexed by the wrapped lattice of ``GridSpec``.
    """

    grid: GridSpec
    representation: str
    samples: np.ndarray

    def __post_init__(self):
        if self.representation not in (PHYSICAL, FREQUENCY):
            raise RepresentationError(
                f"representation must be {PHYSICAL!r} or {FREQUENCY!r}, "
                f"got {self.representation!r}"
            )
        arr = np.asarray(self.samples, dtype=np.complex128)
        if arr.shape != self.grid.shape:
            if arr.size == self.grid.size:
                arr = arr.reshape(self.grid.shape)
            else:
                raise ValueError(
                    f"samples shape {arr.shape} does not match grid shape {self.grid.shape}"
                )
        if arr.flags.writeable:
            arr = arr.copy()
            arr.setflags(write=False)  # fields are immutable once constructed
        object.__setattr__(self, "samples", arr)

    @property
    def is_physical(self) -> bool:
        return self.representation == PHYSICAL

    @property
    def is_frequency(self) -> bool:
        return self.representation == FREQUENCY

    def with_samples(self, samples: np.ndarray, representation: str | None = None) -> "Field":
        return Field(self.grid, representation or self.representation, samples)

    def require(self, representation: str) -> None:
        if self.representation != representation:
            raise RepresentationError(
                f"expected a {representation} field, got {self.representation}"
            )

    @classmethod
    def from_function(cls, grid: GridSpec, fn) -> "Field":
        """Physical field sampled from ``fn(x)`` with x stacked, shape (dim, ...)."""
        return cls(grid, PHYSICAL, np.asarray(fn(grid.point_mesh()), dtype=np.complex128))

    @classmethod
    def from_spectrum(cls, grid: GridSpec, fn) -> "Field":
        """Frequency field sampled from ``fn(xi)`` with xi stacked, shape (dim, ...)."""
        return cls(grid, FREQUENCY, np.asarray(fn(grid.frequency_mesh()), dtype=np.complex128))

    @classmethod
    def zeros(cls, grid: GridSpec, representation: str = PHYSICAL) -> "Field":
        return cls(grid, representation, np.zeros(grid.shape, dtype=np.complex128))


def save_field(field: Field, path) -> None:
    """Write a field dump: magic, one JSON header line, then raw samples.

    Samples are complex128 stored as interleaved little-endian float64
    (re, im) pairs in row-major axis order.
    """
    header = {
        "dim": field.grid.dim,
        "points": field.grid.points,
        "half_width": field.grid.half_width,
        "representation": field.representation,
    }
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write((json.dumps(header) + "\n").encode("ascii"))
        interleaved = np.empty((field.grid.size, 2), dtype="<f8")
        flat = field.samples.reshape(-1)
        interleaved[:, 0] = flat.real
        interleaved[:, 1] = flat.imag
        fh.write(interleaved.tobytes())


def load_field(path) -> Field:
    with open(path, "rb") as fh:
        magic = fh.read(len(_MAGIC))
        if magic != _MAGIC:
            raise ValueError(f"not a field dump: bad magic {magic!r}")
        header = json.loads(fh.readline().decode("ascii"))
        grid = GridSpec(header["dim"], header["points"], header["half_width"])
        raw = np.frombuffer(fh.read(grid.size * 16), dtype="<f8").reshape(-1, 2)
        samples = (raw[:, 0] + 1j * raw[:, 1]).reshape(grid.shape)
    return Field(grid, header["representation"], samples)
