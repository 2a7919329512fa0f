"""Scaling sweeps, log-log regression, and sharpness verdicts.

A sweep builds one datum per scale lam, evolves it over the unit time
interval with a focusing-refined time grid, and records the ratio of a
space-time (or maximal) solution norm to the lam^beta-weighted datum norm.
The fitted log-log slope of the ratio against lam detects the critical
regularity: at the critical beta the slope is ~0, and shifting beta by
delta shifts the slope by -delta.

Grid policy.  All sweep quantities are evaluated through the exact
unit-scale reductions of the extremizer families (see `extremizers`): the
solution norms come from the unit annulus profile W with
||U_t f_lam||_p = lam^{d(1-1/p)} ||W(., lam^alpha (t-1))||_p, and datum
norms from the dispersed-profile quadrature.  The time integral is
restricted to the window |t - 1| <= horizon * lam^{-alpha} on which the
evolved profile provably fits inside the box (`faithful_horizon`); for
small lam this covers all of [0, 1], for large lam the omitted early-time
portion is a fixed sub-percent fraction (the profile norm decays like a
power in lam^alpha (1-t)), and the per-record `coverage` field reports the
estimated captured fraction.  A direct lam-scale route
(`direct_smoothing_record`) exists for cross-validation at small lam.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from .errors import SizingError
from .extremizers import (
    ExtremizerSpec,
    SMOOTHING,
    datum_lp_norm,
    faithful_horizon,
    make_smoothing_extremizer,
    maximal_datum_norm,
    packet_grid,
    ridge_trace,
    smoothing_grid_requirements,
    unit_annulus_field,
    unit_profile_grid,
)
from .grid import GridSpec
from .norms import (
    admissibility_threshold,
    airy_exponent,
    lp_norm,
    maximal_exponent,
    maximal_necessary_exponent,
    mixed_spacetime_norm,
    smoothing_exponent,
    sobolev_norm,
)
from .propagator import DispersionParams, evolve
from .spectral import to_physical

FAMILIES = ("smoothing", "maximal", "airy")


def _env_int(name: str, default: int) -> int:
    try:
        return int(os.environ.get(name, default))
    except ValueError:
        return default


def max_workers() -> int:
    return max(1, _env_int("DISPLAB_MAX_WORKERS", 1))


def max_grid_points() -> int:
    return _env_int("DISPLAB_MAX_GRID_POINTS", 2**22)


@dataclass(frozen=True)
class TPolicy:
    """Time sampling: uniform coarse grid plus a refined focusing window.

    The refined window covers |t - 1| <= 4 lam^{-alpha}; when the coarse
    window is much longer, logarithmically spaced bridge samples connect
    the two scales so the rectangle rule resolves the focusing shoulder.
    """

    uniform_count: int = 64
    focusing_refinement: bool = True
    refined_count: int = 64
    bridge_count: int = 64


@dataclass(frozen=True)
class GridPolicy:
    """Unit-profile grid sizing for sweeps."""

    points: int = 2**15
    nyquist: float = 8.0
    quad_points: int = 8192


@dataclass(frozen=True)
class SweepConfig:
    family: str
    alpha: float
    dim: int
    p: float
    beta: float
    lambdas: tuple
    norm_kind: str = "mixed_spacetime"
    t_policy: TPolicy = field(default_factory=TPolicy)
    grid_policy: GridPolicy = field(default_factory=GridPolicy)
    use_sobolev_denominator: bool = False
    epsilon: float = 0.05
    datum_scale: float = 1.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"family must be one of {FAMILIES}, got {self.family!r}")
        if self.dim != 1:
            raise ValueError("sweeps are implemented for dim = 1")
        if self.norm_kind not in ("mixed_spacetime", "maximal"):
            raise ValueError(f"unknown norm kind {self.norm_kind!r}")
        lams = tuple(float(v) for v in self.lambdas)
        if len(lams) < 1:
            raise ValueError("lambdas must be non-empty")
        if any(b <= a for a, b in zip(lams, lams[1:])):
            raise ValueError("lambdas must be strictly increasing")
        if any(v < 8 for v in lams):
            raise ValueError("lambdas must be >= 8")
        if self.family == "airy" and self.alpha != 3.0:
            raise ValueError("the airy family runs the cubic flow; set alpha = 3")
        if (self.family == "maximal") != (self.norm_kind == "maximal"):
            raise ValueError("the maximal family pairs with norm_kind='maximal'")
        if not self.p >= 1:
            raise ValueError("p must be >= 1")
        object.__setattr__(self, "lambdas", lams)


@dataclass(frozen=True)
class SweepRecord:
    lam: float
    points: int
    half_width: float
    t_count: int
    numerator: float
    denominator: float
    ratio: float
    coverage: float = 1.0

    def __post_init__(self):
        for name in ("numerator", "denominator", "ratio"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ValueError(f"record field {name} must be positive and finite, got {v}")


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    max_residual: float


def fit_loglog(records) -> FitResult:
    """Ordinary least squares of ln(ratio) on ln(lam), by the normal equations."""
    if len(records) < 2:
        raise ValueError("need at least 2 records to fit a slope")
    lam = np.array([r.lam for r in records], dtype=float)
    ratio = np.array([r.ratio for r in records], dtype=float)
    if (ratio <= 0).any():
        raise ValueError("ratios must be positive for a log-log fit")
    x, y = np.log(lam), np.log(ratio)
    n = x.size
    sx, sy, sxx, sxy = x.sum(), y.sum(), (x * x).sum(), (x * y).sum()
    slope = (n * sxy - sx * sy) / (n * sxx - sx * sx)
    intercept = (sy - slope * sx) / n
    residual = np.abs(y - slope * x - intercept).max()
    return FitResult(slope=float(slope), intercept=float(intercept), max_residual=float(residual))


# -- time grids --------------------------------------------------------------------


def focusing_s_grid(lam: float, alpha: float, horizon: float, policy: TPolicy) -> np.ndarray:
    """Rescaled time samples s = lam^alpha (t - 1), increasing, in [-s_hor, 0]."""
    s_hor = min(lam**alpha, horizon)
    pieces = [np.linspace(-s_hor, 0.0, policy.uniform_count)]
    if policy.focusing_refinement:
        pieces.append(np.linspace(-min(4.0, s_hor), 0.0, policy.refined_count))
        if s_hor > 8.0:
            pieces.append(-np.logspace(np.log10(4.0), np.log10(s_hor), policy.bridge_count))
    s = np.concatenate(pieces)
    s = np.unique(np.round(s, 10))
    return s[s >= -s_hor * (1 + 1e-12)]


def _rectangle_weights(t: np.ndarray, interval: tuple[float, float]) -> np.ndarray:
    a, b = interval
    edges = np.empty(t.size + 1)
    edges[0], edges[-1] = a, b
    edges[1:-1] = 0.5 * (t[1:] + t[:-1])
    return np.clip(np.diff(edges), 0.0, None)


# -- sweep engines ------------------------------------------------------------------


@lru_cache(maxsize=128)
def _profile_time_integral(
    alpha: float,
    p: float,
    lam: float,
    one_sided: bool,
    policy: TPolicy,
    gridpol: GridPolicy,
    scale: float,
) -> tuple[float, float, int, int, float, float]:
    """(integral, s_horizon, points, t_count, half_width, coverage) for one scale.

    integral = sum of ||W(., s)||_p^p over the rescaled window with rectangle
    weights; coverage estimates the captured fraction of the full [0, 1]
    time integral when the horizon truncates it.
    """
    grid = unit_profile_grid(gridpol.points, gridpol.nyquist)
    profile = unit_annulus_field(grid, one_sided=one_sided, scale=scale)
    horizon = faithful_horizon(grid, alpha)
    params = DispersionParams(alpha, 1)
    s_grid = focusing_s_grid(lam, alpha, horizon, policy)
    weights = _rectangle_weights(s_grid, (float(s_grid[0]), 0.0))
    vals = np.empty(s_grid.size)
    edge = grid.points // 64
    for i, s in enumerate(s_grid):
        frame = to_physical(evolve(profile, float(s), params, headroom=0.0))
        vals[i] = lp_norm(frame, p) ** p
        if i == 0:
            # no-wrap honesty check at the farthest time, both box edges
            body = np.abs(frame.samples)
            if max(body[:edge].max(), body[-edge:].max()) > 1e-6 * body.max():
                raise SizingError(
                    "evolved profile reached the box edge; enlarge the unit grid"
                )
    integral = float(vals @ weights)
    s_hor = float(-s_grid[0])
    coverage = 1.0
    if s_hor < lam**alpha * (1 - 1e-9):
        # estimate the omitted early-time portion from the measured decay
        k = max(2, s_grid.size // 8)
        tail_x = np.log(-s_grid[:k])
        tail_y = np.log(np.maximum(vals[:k], 1e-300))
        gamma = -np.polyfit(tail_x, tail_y, 1)[0]
        if gamma > 1.05:
            omitted = vals[0] * s_hor / (gamma - 1.0) * (1.0 - (s_hor / lam**alpha) ** (gamma - 1.0))
        elif gamma > 0.5:
            omitted = vals[0] * s_hor * np.log(lam**alpha / s_hor)
        else:
            omitted = vals[0] * (lam**alpha - s_hor)
        coverage = integral / (integral + max(omitted, 0.0))
    return integral, s_hor, grid.points, s_grid.size, grid.half_width, coverage


def _smoothing_record(cfg: SweepConfig, lam: float) -> SweepRecord:
    one_sided = cfg.family == "airy"
    integral, s_hor, points, t_count, half_width, coverage = _profile_time_integral(
        cfg.alpha, cfg.p, lam, one_sided, cfg.t_policy, cfg.grid_policy, cfg.datum_scale
    )
    numerator = lam ** (1.0 - 1.0 / cfg.p) * (lam**-cfg.alpha * integral) ** (1.0 / cfg.p)
    if cfg.use_sobolev_denominator:
        datum = datum_lp_norm(
            lam, cfg.alpha, cfg.p, one_sided, bessel_beta=cfg.beta,
            u_points=cfg.grid_policy.quad_points, amplitude_scale=cfg.datum_scale,
        )
        denominator = datum
    else:
        datum = datum_lp_norm(
            lam, cfg.alpha, cfg.p, one_sided,
            u_points=cfg.grid_policy.quad_points, amplitude_scale=cfg.datum_scale,
        )
        denominator = lam**cfg.beta * datum
    return SweepRecord(
        lam=lam, points=points, half_width=half_width, t_count=t_count,
        numerator=numerator, denominator=denominator, ratio=numerator / denominator,
        coverage=coverage,
    )


def _maximal_record(cfg: SweepConfig, lam: float) -> SweepRecord:
    alpha, p = cfg.alpha, cfg.p
    t_grid = np.linspace(0.0, 1.0, 4 * cfg.t_policy.uniform_count)
    trace = np.abs(ridge_trace(lam, alpha, t_grid, cfg.epsilon)) * cfg.datum_scale
    w = _rectangle_weights(t_grid, (0.0, 1.0))
    ridge_speed = alpha * lam ** (alpha - 1.0)
    numerator = (
        lam ** ((2.0 - alpha) / 2.0) * (ridge_speed * float((trace**p) @ w)) ** (1.0 / p)
    )
    if cfg.use_sobolev_denominator:
        denominator = cfg.datum_scale * maximal_datum_norm(
            lam, alpha, p, cfg.epsilon, bessel_beta=cfg.beta
        )
    else:
        denominator = (
            lam**cfg.beta * cfg.datum_scale * maximal_datum_norm(lam, alpha, p, cfg.epsilon)
        )
    g = packet_grid()
    return SweepRecord(
        lam=lam, points=g.points, half_width=g.half_width, t_count=t_grid.size,
        numerator=numerator, denominator=denominator, ratio=numerator / denominator,
    )


def run_sweep(cfg: SweepConfig) -> list[SweepRecord]:
    """One record per scale: datum, evolution, numerator / denominator / ratio.

    Raises SizingError naming the smallest scale whose quadrature lattice
    would exceed the configured memory cap (DISPLAB_MAX_GRID_POINTS x 64,
    since quadrature nodes are streamed in bounded chunks).
    """
    if cfg.family != "maximal":
        from .extremizers import datum_quadrature_nodes

        budget = 64 * max_grid_points()
        for lam in cfg.lambdas:
            nodes = datum_quadrature_nodes(lam, cfg.alpha, cfg.family == "airy")
            if nodes > budget:
                raise SizingError(
                    f"sweep sizing exceeds the memory cap at lam = {lam:g} "
                    f"(the smallest failing scale needs ~{nodes:.2e} quadrature nodes, "
                    f"cap {budget:.2e}); raise DISPLAB_MAX_GRID_POINTS or drop large scales"
                )
    make = _maximal_record if cfg.family == "maximal" else _smoothing_record
    workers = max_workers()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda lam: make(cfg, lam), cfg.lambdas))
    return [make(cfg, lam) for lam in cfg.lambdas]


# -- direct (lam-scale) route for cross-validation -----------------------------------


def direct_smoothing_record(cfg: SweepConfig, lam: float, points_cap: int | None = None) -> SweepRecord:
    """Same record as the unit-scale engine, from an honest lam-scale grid.

    Sizing follows the datum requirements (nyquist >= 4 lam, half width >=
    8 C(alpha) lam^{alpha-1}); feasible only for small lam, which is the
    point: it cross-validates the rescaled engine.
    """
    cap = points_cap or max_grid_points()
    need_nyq, need_hw = smoothing_grid_requirements(lam, cfg.alpha)
    half_width = 1.1 * need_hw
    points = int(2 ** np.ceil(np.log2(2.0 * half_width * need_nyq * 1.05 / np.pi)))
    if points > cap:
        raise SizingError(
            f"direct route needs N={points} > cap {cap} at lam={lam:g}",
            required_points=points, required_half_width=half_width,
        )
    grid = GridSpec(1, points, half_width)
    params = DispersionParams(cfg.alpha, 1)
    spec = ExtremizerSpec(SMOOTHING, lam, params, grid)
    datum = make_smoothing_extremizer(spec)
    if cfg.datum_scale != 1.0:
        datum = datum.with_samples(datum.samples * cfg.datum_scale)
    s_grid = focusing_s_grid(lam, cfg.alpha, lam**cfg.alpha, cfg.t_policy)
    t_grid = 1.0 + s_grid / lam**cfg.alpha
    w = _rectangle_weights(t_grid, (0.0, 1.0))
    vals = np.empty(t_grid.size)
    for i, t in enumerate(t_grid):
        frame = to_physical(evolve(datum, float(t), params, headroom=0.0))
        vals[i] = lp_norm(frame, cfg.p) ** cfg.p
    numerator = float((vals @ w) ** (1.0 / cfg.p))
    if cfg.use_sobolev_denominator:
        denominator = sobolev_norm(datum, cfg.p, cfg.beta)
    else:
        denominator = lam**cfg.beta * lp_norm(datum, cfg.p)
    return SweepRecord(
        lam=lam, points=points, half_width=half_width, t_count=t_grid.size,
        numerator=numerator, denominator=float(denominator),
        ratio=numerator / float(denominator),
    )


# -- verdicts -------------------------------------------------------------------------


@dataclass(frozen=True)
class Verdict:
    slope: float
    expected_slope: float
    tolerance: float
    passed: bool
    fit: FitResult
    records: tuple


def _require_sweepable(cfg: SweepConfig) -> None:
    if len(cfg.lambdas) < 4:
        raise ValueError("verdicts need at least 4 scales in the sweep")


def verify_sharpness(cfg: SweepConfig, tolerance: float = 0.1) -> Verdict:
    """Sharpness of the space-time estimate: ratio slope ~ critical beta - beta."""
    _require_sweepable(cfg)
    if cfg.norm_kind != "mixed_spacetime" or not cfg.t_policy.focusing_refinement:
        raise ValueError("sharpness sweeps need the mixed norm with focusing refinement")
    if cfg.family == "smoothing" and not cfg.p > admissibility_threshold(cfg.dim):
        raise ValueError(f"p must exceed {admissibility_threshold(cfg.dim):.4g}")
    critical = (
        airy_exponent(cfg.p) if cfg.family == "airy" else smoothing_exponent(cfg.alpha, cfg.dim, cfg.p)
    )
    # algebraic identity tying the two endpoint formulas together
    assert abs(
        smoothing_exponent(cfg.alpha, cfg.dim, cfg.p) + cfg.alpha / cfg.p
        - maximal_exponent(cfg.alpha, cfg.dim, cfg.p)
    ) < 1e-12
    records = run_sweep(cfg)
    fit = fit_loglog(records)
    expected = critical - cfg.beta
    return Verdict(
        slope=fit.slope, expected_slope=expected, tolerance=tolerance,
        passed=bool(abs(fit.slope - expected) <= tolerance), fit=fit, records=tuple(records),
    )


def verify_maximal_necessary(cfg: SweepConfig, tolerance: float = 0.1) -> Verdict:
    """Necessary-condition check for the maximal estimate at beta = alpha/(2p).

    Runs the traveling-bump sweep at the boundary regularity and 0.2 below
    it; passes when the boundary slope is >= -tolerance and the shifted
    slope is > tolerance (the ratio grows when the weight is too weak).
    """
    _require_sweepable(cfg)
    if cfg.family != "maximal" or cfg.norm_kind != "maximal":
        raise ValueError("the necessary-condition sweep runs the maximal family")
    assert abs(
        smoothing_exponent(cfg.alpha, cfg.dim, cfg.p) + cfg.alpha / cfg.p
        - maximal_exponent(cfg.alpha, cfg.dim, cfg.p)
    ) < 1e-12
    boundary = maximal_necessary_exponent(cfg.alpha, cfg.p)
    boundary_records = run_sweep(replace(cfg, beta=boundary))
    at_boundary = fit_loglog(boundary_records)
    below = fit_loglog(run_sweep(replace(cfg, beta=boundary - 0.2)))
    passed = at_boundary.slope >= -tolerance and below.slope > tolerance
    return Verdict(
        slope=at_boundary.slope, expected_slope=0.0, tolerance=tolerance,
        passed=bool(passed), fit=below, records=tuple(boundary_records),
    )


def verify_airy(cfg: SweepConfig, tolerance: float = 0.1) -> Verdict:
    """Sharpness of the cubic-flow estimate with one-sided spectrum data."""
    if cfg.family != "airy":
        raise ValueError("verify_airy needs family='airy'")
    _require_sweepable(cfg)
    records = run_sweep(cfg)
    fit = fit_loglog(records)
    expected = airy_exponent(cfg.p) - cfg.beta
    return Verdict(
        slope=fit.slope, expected_slope=expected, tolerance=tolerance,
        passed=bool(abs(fit.slope - expected) <= tolerance), fit=fit, records=tuple(records),
    )


def random_band_upper_bound_check(
    alpha: float, p: float, bands=(3, 4, 5, 6), seed: int = 0, points: int = 2**12
) -> float:
    """Spot check of the per-band space-time bound on random band-limited data.

    Returns the largest measured constant
    ||T_k f||_{L^p(dx dt)} / (2^{k beta(p)} ||f||_p) over the requested
    bands; the bound predicts this stays O(1) in the band.  A diagnostic,
    not a certification.
    """
    from .decomposition import band_project
    from .propagator import Trajectory

    rng = np.random.default_rng(seed)
    beta_p = smoothing_exponent(alpha, 1, p)
    params = DispersionParams(alpha, 1)
    worst = 0.0
    for k in bands:
        grid = GridSpec(1, points, np.pi * points / (2 * 2.0 ** (k + 3)))
        from .grid import Field

        coef = rng.standard_normal(grid.points) + 1j * rng.standard_normal(grid.points)
        raw = Field(grid, "frequency", coef)
        f = to_physical(band_project(raw, k))
        ts = np.linspace(0.0, 1.0, 65)
        frames = tuple(to_physical(evolve(f, float(t), params, headroom=0.0)) for t in ts)
        traj = Trajectory(grid, tuple(ts), frames)
        num = mixed_spacetime_norm(traj, p, (0.0, 1.0))
        den = 2.0 ** (k * beta_p) * lp_norm(f, p)
        worst = max(worst, float(num / den))
    return worst
