"""Frequency decompositions: dyadic bands, cube projections, and the
near-diagonal bilinear split of products of elliptic-phase evolutions.

The bilinear pieces group frequency pairs (xi, eta) by their dyadic
separation 2^j lam^{-1/2}; summing the pieces reconstructs the product
exactly because the separation weights telescope to 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cutoffs import CutoffSpec, make_cutoffs
from .errors import GridAdequacyError, SeparationError, TractabilityError
from .grid import FREQUENCY, Field
from .norms import admissibility_threshold, lp_norm, mixed_spacetime_norm
from .propagator import DispersionParams, EllipticPhase, Trajectory, elliptic_evolve, evolve
from .spectral import apply_symbol, dft_inverse, to_frequency, to_physical


@dataclass(frozen=True)
class BandIndex:
    """Dyadic band 2^k; k = 0 is the low band."""

    k: int

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("band index must be >= 0")


@dataclass(frozen=True)
class CubeIndex:
    """Cube of side ~ 2^j lam^(-1/2) centered at 2^j lam^(-1/2) * n."""

    j: int
    n: tuple
    lam: float

    def __post_init__(self):
        if self.j < 0:
            raise ValueError("cube scale index must be >= 0")
        if not self.lam > 0:
            raise ValueError("lam must be positive")
        object.__setattr__(self, "n", tuple(int(v) for v in self.n))

    @property
    def side(self) -> float:
        return 2.0**self.j / np.sqrt(self.lam)

    @property
    def center(self) -> np.ndarray:
        return self.side * np.asarray(self.n, dtype=float)


def band_project(field: Field, k: int | BandIndex, cutoffs: CutoffSpec | None = None) -> Field:
    """Smooth dyadic band projection; bands sum to the identity on band-limited data."""
    k = k.k if isinstance(k, BandIndex) else int(k)
    cut = cutoffs or make_cutoffs(dim=field.grid.dim)
    if k >= 1 and 2.0 ** (k + 1) > field.grid.nyquist:
        raise GridAdequacyError(
            f"band {k} has support up to 2^{k + 1}, beyond nyquist {field.grid.nyquist:.4g}"
        )
    return apply_symbol(field, cut.band_symbol(k))


def evolve_band(field: Field, k: int | BandIndex, t: float, params: DispersionParams) -> Field:
    """The band-restricted propagator: evolve after the band projection."""
    return evolve(band_project(field, k), t, params, headroom=0.0)


def cube_project(field: Field, cube: CubeIndex, cutoffs: CutoffSpec | None = None) -> Field:
    """Projection onto the cube partition member indexed by ``cube``."""
    cut = cutoffs or make_cutoffs(dim=field.grid.dim)
    grid = field.grid
    if np.any(np.abs(cube.center) - 0.6 * cube.side > grid.nyquist):
        raise GridAdequacyError("cube lies outside the representable frequency range")
    inv_side = 1.0 / cube.side
    n = np.asarray(cube.n, dtype=float).reshape(grid.dim, *([1] * grid.dim))

    def symbol(xi):
        return cut.cell(np.asarray(xi) * inv_side - n)

    return apply_symbol(field, symbol)


def active_cubes(field: Field, j: int, lam: float, rel_tol: float = 1e-13) -> list[CubeIndex]:
    """Cube indices whose member can overlap the field's active spectrum."""
    spec = to_frequency(field)
    mag = np.abs(spec.samples)
    active = mag > rel_tol * max(mag.max(), 1e-300)
    if not active.any():
        return []
    mesh = field.grid.frequency_mesh()
    side = 2.0**j / np.sqrt(lam)
    grids = [mesh[a][active] / side for a in range(field.grid.dim)]
    lo = [int(np.floor(g.min() - 0.6)) for g in grids]
    hi = [int(np.ceil(g.max() + 0.6)) for g in grids]
    ranges = [range(a, b + 1) for a, b in zip(lo, hi)]
    out = []
    idx = np.stack([g for g in np.meshgrid(*ranges, indexing="ij")]).reshape(field.grid.dim, -1)
    for col in idx.T:
        out.append(CubeIndex(j=j, n=tuple(col), lam=lam))
    return out


def separation_weight(j: int, lam: float, xi, eta, cutoffs: CutoffSpec | None = None):
    """Near-diagonal weight for the pair (xi, eta) at dyadic separation 2^j lam^(-1/2).

    xi and eta are stacked coordinate arrays of matching shape (dim, ...).
    The weights telescope: summing j = 0..J gives 1 wherever
    |xi - eta| <= 8 sqrt(d) 2^J lam^(-1/2).
    """
    if j < 0:
        raise ValueError("j must be >= 0")
    if not lam > 0:
        raise ValueError("lam must be positive")
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    cut = cutoffs or make_cutoffs(dim=xi.shape[0] if xi.ndim > 0 else 1)
    gap = np.sqrt(((xi - eta) ** 2).sum(axis=0))
    root = np.sqrt(lam)
    if j == 0:
        return cut.diagonal_lowpass(root * gap)
    s = root * 2.0**-j
    return cut.diagonal_lowpass(s * gap) - cut.diagonal_lowpass(2.0 * s * gap)


# -- bilinear pieces -------------------------------------------------------------


_MAX_ACTIVE_MODES = 512


@dataclass(frozen=True)
class BilinearPiece:
    """One near-diagonal piece of a product of elliptic evolutions, space-time sampled."""

    j: int
    lam: float
    grid: object
    t_samples: tuple
    values: np.ndarray  # shape (len(t_samples), *grid.shape)


def _active_modes(field: Field, rel_tol: float = 1e-14):
    spec = to_frequency(field)
    flat = spec.samples.reshape(-1)
    mesh = field.grid.frequency_mesh().reshape(field.grid.dim, -1)
    keep = np.abs(flat) > rel_tol * max(np.abs(flat).max(), 1e-300)
    return mesh[:, keep], flat[keep] * field.grid.frequency_cell_volume


def bilinear_piece(
    f: Field,
    g: Field,
    j: int,
    lam: float,
    t_samples,
    ep: EllipticPhase,
    cutoffs: CutoffSpec | None = None,
) -> BilinearPiece:
    """Direct double-lattice-sum evaluation of one near-diagonal bilinear piece.

    Tractable for one-dimensional band-limited data with at most
    512 active modes per factor; exactness beats speed here since the
    separation weight is not a tensor product.
    """
    if f.grid != g.grid:
        raise ValueError("both factors must share a grid")
    grid = f.grid
    if grid.dim != 1:
        raise TractabilityError("bilinear pieces are implemented for dim = 1")
    cut = cutoffs or make_cutoffs(dim=grid.dim)
    xi, wf = _active_modes(f)
    eta, wg = _active_modes(g)
    if xi.shape[1] > _MAX_ACTIVE_MODES or eta.shape[1] > _MAX_ACTIVE_MODES:
        raise TractabilityError(
            f"{xi.shape[1]} x {eta.shape[1]} active modes exceeds the "
            f"{_MAX_ACTIVE_MODES} cap; band-limit the data or coarsen the grid"
        )
    ts = tuple(float(t) for t in t_samples)
    x = grid.axis_points()
    scale = 1.0 / (2.0 * np.pi) ** (2 * grid.dim)

    amp_f = np.asarray(ep.amplitude(xi)) * wf
    amp_g = np.asarray(ep.amplitude(eta)) * wg
    ph_f = np.asarray(ep.phase(xi))
    ph_g = np.asarray(ep.phase(eta))

    pair_w = separation_weight(j, lam, xi[:, :, None], eta[:, None, :], cut)
    pair_amp = (pair_w * np.outer(amp_f, amp_g)).reshape(-1)
    keep = np.abs(pair_amp) > 0.0
    if not keep.any():
        values = np.zeros((len(ts), *grid.shape), dtype=complex)
        return BilinearPiece(j=j, lam=lam, grid=grid, t_samples=ts, values=values)
    sum_xi = (xi[0][:, None] + eta[0][None, :]).reshape(-1)[keep]
    sum_ph = (ph_f[:, None] + ph_g[None, :]).reshape(-1)[keep]
    pair_amp = pair_amp[keep]

    space = np.exp(1j * np.outer(x, sum_xi))  # (N, pairs)
    values = np.empty((len(ts), *grid.shape), dtype=complex)
    for i, t in enumerate(ts):
        values[i] = scale * (space @ (pair_amp * np.exp(1j * t * sum_ph)))
    return BilinearPiece(j=j, lam=lam, grid=grid, t_samples=ts, values=values)


def relevant_piece_indices(f: Field, g: Field, lam: float) -> range:
    """Scale indices that can carry a nonzero piece for these data supports."""
    from .spectral import spectral_radius

    diam = spectral_radius(f) + spectral_radius(g)
    dim = f.grid.dim
    j_max = int(np.ceil(np.log2(max(np.sqrt(lam) * diam / (8.0 * np.sqrt(dim)), 1.0)))) + 1
    return range(0, j_max + 1)


def bilinear_reconstruction_residual(
    f: Field, g: Field, lam: float, t_samples, ep: EllipticPhase
) -> float:
    """max |Sf Sg - sum_j piece_j| / max |Sf Sg| over the sampled space-time points.

    The product side is computed through the FFT evolution path, the pieces
    by direct double summation, so the telescoping identity is checked
    across two independent evaluation routes.
    """
    ts = tuple(float(t) for t in t_samples)
    product = np.empty((len(ts), *f.grid.shape), dtype=complex)
    for i, t in enumerate(ts):
        sf = to_physical(elliptic_evolve(f, t, ep))
        sg = to_physical(elliptic_evolve(g, t, ep))
        product[i] = sf.samples * sg.samples
    total = np.zeros_like(product)
    for j in relevant_piece_indices(f, g, lam):
        total += bilinear_piece(f, g, j, lam, ts, ep).values
    denom = np.abs(product).max()
    if denom == 0.0:
        return 0.0
    return float(np.abs(product - total).max() / denom)


# -- bilinear adjoint-restriction diagnostic --------------------------------------


def extension_trajectory(h: Field, t_samples, ep: EllipticPhase) -> Trajectory:
    """The adjoint-restriction (extension) evolution of a frequency density h."""
    h.require(FREQUENCY)
    frames = []
    scale = (2.0 * np.pi) ** h.grid.dim

    def symbol_at(t):
        return lambda xi: np.exp(1j * t * np.asarray(ep.phase(xi)))

    for t in t_samples:
        frame = dft_inverse(apply_symbol(h, symbol_at(float(t))))
        frames.append(frame.with_samples(frame.samples * scale))
    return Trajectory(h.grid, tuple(float(t) for t in t_samples), tuple(frames))


def support_separation(h1: Field, h2: Field, rel_tol: float = 1e-12) -> float:
    """Minimum distance between the active supports of two frequency densities."""
    out = []
    for h in (h1, h2):
        h.require(FREQUENCY)
        mag = np.abs(h.samples)
        active = mag > rel_tol * max(mag.max(), 1e-300)
        if not active.any():
            return np.inf
        mesh = h.grid.frequency_mesh()
        out.append(np.stack([mesh[a][active] for a in range(h.grid.dim)], axis=1))
    a, b = out
    if a.shape[0] * b.shape[0] > 10**8:
        raise TractabilityError("supports too large for pairwise separation check")
    d2 = ((a[:, None, :] - b[None, :, :]) ** 2).sum(axis=2)
    return float(np.sqrt(d2.min()))


def bilinear_restriction_ratio(
    h1: Field,
    h2: Field,
    p: float,
    lam: float,
    ep: EllipticPhase,
    separation: float | None = None,
    t_count: int = 0,
) -> float:
    """|| Eh1 Eh2 ||_{p/2} over box x [-lam, lam], divided by ||h1||_2 ||h2||_2.

    The bilinear adjoint-restriction bound predicts this stays bounded as
    lam grows; the ratio is the diagnostic scalar.  Supports must be
    separated by ``separation`` (default: a quarter of the joint support
    diameter).
    """
    if h1.grid != h2.grid:
        raise ValueError("densities must share a grid")
    dim = h1.grid.dim
    if not p > admissibility_threshold(dim):
        raise ValueError(f"p must exceed 2 + 4/(d+1) = {admissibility_threshold(dim):.4g}")
    n1, n2 = lp_norm(h1, 2.0), lp_norm(h2, 2.0)
    if n1 == 0.0 or n2 == 0.0:
        return 0.0
    if separation is None:
        separation = 0.25 * _joint_support_diameter(h1, h2)
    gap = support_separation(h1, h2)
    if gap < separation:
        raise SeparationError(
            f"supports are {gap:.4g} apart, below the required {separation:.4g}"
        )
    t_count = t_count or max(64, int(8 * lam))
    ts = np.linspace(-lam, lam, t_count)
    e1 = extension_trajectory(h1, ts, ep)
    e2 = extension_trajectory(h2, ts, ep)
    frames = tuple(
        f1.with_samples(f1.samples * f2.samples) for f1, f2 in zip(e1.frames, e2.frames)
    )
    product = Trajectory(h1.grid, tuple(ts), frames)
    return float(mixed_spacetime_norm(product, p / 2.0) / (n1 * n2))


def _joint_support_diameter(h1: Field, h2: Field, rel_tol: float = 1e-12) -> float:
    pts = []
    for h in (h1, h2):
        mag = np.abs(h.samples)
        active = mag > rel_tol * max(mag.max(), 1e-300)
        mesh = h.grid.frequency_mesh()
        pts.append(np.stack([mesh[a][active] for a in range(h.grid.dim)], axis=1))
    allpts = np.concatenate(pts, axis=0)
    return float(np.sqrt(((allpts.max(axis=0) - allpts.min(axis=0)) ** 2).sum()))


def elliptic_operator_ratio(f: Field, p: float, lam: float, ep: EllipticPhase, t_count: int = 0) -> float:
    """|| Sf ||_{L^p(box x [0, lam])} / ( lam^{d(1/2-1/p)} ||f||_p ): boundedness diagnostic."""
    dim = f.grid.dim
    denom = lam ** (dim * (0.5 - 1.0 / p)) * lp_norm(to_physical(f), p)
    if denom == 0.0:
        return 0.0
    t_count = t_count or max(64, int(4 * lam))
    ts = np.linspace(0.0, lam, t_count)
    frames = tuple(to_physical(elliptic_evolve(f, float(t), ep)) for t in ts)
    traj = Trajectory(f.grid, tuple(ts), frames)
    return float(mixed_spacetime_norm(traj, p) / denom)
