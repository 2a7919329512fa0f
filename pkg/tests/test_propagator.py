import numpy as np
import pytest

from displab.cutoffs import make_cutoffs
from displab.errors import EllipticityError, GridAdequacyError
from displab.grid import FREQUENCY, Field, GridSpec
from displab.norms import lp_norm
from displab.propagator import (
    DispersionParams,
    Trajectory,
    airy_evolve,
    ball_constant,
    band_kernel,
    elliptic_evolve,
    elliptic_values,
    evolve,
    evolve_trajectory,
    kernel_tail_mass,
    make_elliptic_phase,
    power_phase,
    quadratic_phase,
)
from displab.spectral import apply_symbol, to_physical


def band_limited_field(grid, rng, radius_cells=0.2):
    mesh = grid.frequency_mesh()[0]
    coef = rng.standard_normal(grid.points) + 1j * rng.standard_normal(grid.points)
    coef[np.abs(mesh) > radius_cells * grid.nyquist] = 0.0
    return to_physical(Field(grid, FREQUENCY, coef))


def test_params_validation():
    DispersionParams(1.5, 1)
    with pytest.raises(ValueError):
        DispersionParams(1.0, 1)
    with pytest.raises(ValueError):
        DispersionParams(-2.0, 1)


def test_ball_constant():
    assert ball_constant(0.5) == 1.0
    assert ball_constant(2.0) == 4.0
    assert ball_constant(3.0) == 12.0
    with pytest.raises(ValueError):
        ball_constant(1.0)


def test_evolve_identity_at_zero(rng):
    g = GridSpec(1, 256, 10.0)
    f = band_limited_field(g, rng)
    out = evolve(f, 0.0, DispersionParams(1.5, 1))
    assert np.abs(out.samples - f.samples).max() < 1e-12 * np.abs(f.samples).max()


def test_evolve_plane_wave_eigenfunction():
    g = GridSpec(1, 128, 10.0)
    xi0 = 6 * g.frequency_spacing
    pw = Field.from_function(g, lambda x: np.exp(1j * xi0 * x[0]))
    for alpha in (1.5, 2.0, 3.0):
        out = evolve(pw, 0.9, DispersionParams(alpha, 1))
        expected = np.exp(1j * 0.9 * abs(xi0) ** alpha) * pw.samples
        assert np.abs(out.samples - expected).max() < 1e-11


def test_evolve_gaussian_against_quadrature_oracle():
    """Direct oscillatory quadrature of the inversion integral at probe points."""
    g = GridSpec(1, 1024, 25.0)
    f = Field.from_function(g, lambda x: np.exp(-x[0] ** 2 / 2.0))
    t = 0.7
    out = to_physical(evolve(f, t, DispersionParams(2.0, 1)))
    # fhat is the exact Gaussian transform; quadrature on a fine xi lattice
    xi = np.linspace(-14.0, 14.0, 300001)
    fhat = np.sqrt(2.0 * np.pi) * np.exp(-(xi**2) / 2.0)
    for probe in np.linspace(-4.0, 4.0, 10):
        idx = int(round((probe + g.half_width) / g.spacing))
        x = g.axis_points()[idx]
        oracle = np.trapezoid(np.exp(1j * t * xi**2) * fhat * np.exp(1j * x * xi), xi) / (2 * np.pi)
        assert abs(out.samples[idx] - oracle) / abs(oracle) < 1e-8


def test_evolve_gaussian_closed_form():
    # fractional chirp with the conjugate-time free kernel: the multiplier
    # e^{+i t xi^2} sends e^{-x^2/2} to (1-2it)^{-1/2} e^{-x^2/(2(1-2it))}
    g = GridSpec(1, 512, 20.0)
    f = Field.from_function(g, lambda x: np.exp(-x[0] ** 2 / 2.0))
    t = 0.4
    out = to_physical(evolve(f, t, DispersionParams(2.0, 1)))
    x = g.axis_points()
    sigma = 1.0 - 2.0j * t
    expected = sigma**-0.5 * np.exp(-(x**2) / (2.0 * sigma))
    assert np.abs(out.samples - expected).max() < 1e-10


def test_unitarity(rng):
    g = GridSpec(1, 512, 12.0)
    f = band_limited_field(g, rng)
    for alpha in (1.5, 2.0, 3.0):
        for t in (0.0, 0.3, 1.0):
            out = evolve(f, t, DispersionParams(alpha, 1))
            assert abs(lp_norm(out, 2.0) / lp_norm(f, 2.0) - 1.0) <= 1e-12


def test_group_law_and_translation_covariance(rng):
    g = GridSpec(1, 512, 12.0)
    f = band_limited_field(g, rng)
    params = DispersionParams(1.5, 1)
    s, t = 0.3, 0.55
    once = evolve(evolve(f, s, params), t, params)
    direct = evolve(f, s + t, params)
    scale = np.abs(f.samples).max()
    assert np.abs(once.samples - direct.samples).max() <= 1e-11 * scale

    shift = 37
    rolled = f.with_samples(np.roll(f.samples, shift))
    lhs = evolve(rolled, t, params).samples
    rhs = np.roll(evolve(f, t, params).samples, shift)
    assert np.abs(lhs - rhs).max() <= 1e-11 * scale


def test_evolve_headroom_error():
    g = GridSpec(1, 64, 8.0)
    xi0 = 31 * g.frequency_spacing  # just below nyquist
    pw = Field.from_function(g, lambda x: np.exp(1j * xi0 * x[0]))
    evolve(pw, 0.1, DispersionParams(2.0, 1), headroom=1.0)
    with pytest.raises(GridAdequacyError):
        evolve(pw, 0.1, DispersionParams(2.0, 1), headroom=4.0)


def test_evolve_two_dimensional(rng):
    g = GridSpec(2, 64, 6.0)
    mesh = g.frequency_mesh()
    coef = rng.standard_normal((64, 64)) + 1j * rng.standard_normal((64, 64))
    coef[np.sqrt((mesh**2).sum(axis=0)) > 0.2 * g.nyquist] = 0.0
    f = to_physical(Field(g, FREQUENCY, coef))
    params = DispersionParams(2.0, 2)
    out = evolve(f, 0.8, params)
    assert abs(lp_norm(out, 2.0) / lp_norm(f, 2.0) - 1.0) < 1e-12
    back = evolve(out, -0.8, params)
    assert np.abs(back.samples - f.samples).max() < 1e-11 * np.abs(f.samples).max()
    with pytest.raises(ValueError):
        evolve(f, 0.1, DispersionParams(2.0, 1))  # dim mismatch


def test_trajectory_basics(rng):
    g = GridSpec(1, 128, 6.0)
    f = band_limited_field(g, rng)
    params = DispersionParams(2.0, 1)
    traj = evolve_trajectory(f, [0.0], params)
    assert len(traj) == 1
    assert np.abs(traj.frames[0].samples - f.samples).max() < 1e-12 * np.abs(f.samples).max()
    with pytest.raises(ValueError):
        evolve_trajectory(f, [], params)
    traj = evolve_trajectory(f, np.linspace(0, 1, 9), params)
    base = lp_norm(f, 2.0)
    for frame in traj.frames:
        assert abs(lp_norm(frame, 2.0) - base) / base < 1e-12
    with pytest.raises(ValueError):
        Trajectory(g, (0.0, 0.0), (traj.frames[0], traj.frames[1]))


# -- elliptic phases ---------------------------------------------------------------


def test_elliptic_t0_reduces_to_amplitude(rng):
    g = GridSpec(1, 256, 10.0)
    f = band_limited_field(g, rng)
    ep = quadratic_phase()
    out = elliptic_evolve(f, 0.0, ep)
    masked = apply_symbol(f, ep.amplitude)
    assert np.abs(out.samples - masked.samples).max() < 1e-12 * np.abs(masked.samples).max()


def test_elliptic_power_phase_matches_evolve(rng):
    alpha = 1.5
    g = GridSpec(1, 512, 40.0)
    cut = make_cutoffs()
    mesh = g.frequency_mesh()[0]
    coef = cut.annulus(np.abs(mesh)) * (rng.standard_normal(512) + 1j * rng.standard_normal(512))
    f = to_physical(Field(g, FREQUENCY, coef))
    ep = power_phase(alpha)
    t = 0.8
    lhs = elliptic_evolve(f, t, ep)
    # the annulus amplitude is already 1 on the data support
    rhs = apply_symbol(evolve(f, t, DispersionParams(alpha, 1)), ep.amplitude)
    assert np.abs(lhs.samples - rhs.samples).max() < 1e-11 * np.abs(rhs.samples).max()


def test_elliptic_rejects_degenerate_phase():
    amp = lambda xi: np.exp(-np.asarray(xi)[0] ** 2)  # noqa: E731
    flat = make_elliptic_phase(lambda xi: 0.0 * np.asarray(xi)[0], amp, [(-1, 1)])
    g = GridSpec(1, 32, 4.0)
    with pytest.raises(EllipticityError):
        elliptic_evolve(Field.zeros(g), 0.5, flat)


def test_parabolic_rescaling_identity():
    """Both sides on independent grids agree at probe points."""
    xi0 = 0.5
    amp = lambda xi: np.ones_like(np.asarray(xi)[0])  # noqa: E731
    ep = make_elliptic_phase(lambda xi: 0.5 * (np.asarray(xi) ** 2).sum(axis=0), amp, [(-2, 2)])
    probes = np.array([[-1.3, 0.2, 0.9, 2.4]])
    for delta in (0.5, 0.25):
        g = GridSpec(1, 4096, 480.0)
        gs = GridSpec(1, 4096, 480.0 / delta)

        def fhat(xi):
            return np.exp(-(((xi - xi0) / (0.15 * delta)) ** 2)) * np.exp(1j * 3 * xi)

        f = Field(g, FREQUENCY, fhat(g.frequency_mesh()[0]))
        f_star = Field(gs, FREQUENCY, delta * fhat(xi0 + delta * gs.frequency_mesh()[0]))
        for t in (0.7, 1.9):
            lhs = elliptic_values(f, probes, t, ep)
            rhs = np.exp(1j * (probes[0] * xi0 + t * 0.5 * xi0**2)) * elliptic_values(
                f_star, delta * (probes + t * xi0), delta**2 * t, ep
            )
            assert np.abs(lhs - rhs).max() / np.abs(lhs).max() < 1e-6


# -- one-sided cubic flow --------------------------------------------------------------


def test_airy_identity_at_zero_mean_zero(rng):
    g = GridSpec(1, 256, 10.0)
    coef = rng.standard_normal(256) + 1j * rng.standard_normal(256)
    coef[0] = 0.0
    f = to_physical(Field(g, FREQUENCY, coef))
    out = airy_evolve(f, 0.0)
    assert np.abs(out.samples - f.samples).max() <= 1e-10 * np.abs(f.samples).max()


def test_airy_plane_wave():
    g = GridSpec(1, 256, 10.0)
    xi0 = 9 * g.frequency_spacing
    pw = Field.from_function(g, lambda x: np.exp(1j * xi0 * x[0]))
    out = airy_evolve(pw, 0.6)
    assert np.abs(out.samples - np.exp(1j * 0.6 * xi0**3) * pw.samples).max() < 1e-11


def test_airy_l2_conserved(rng):
    g = GridSpec(1, 512, 15.0)
    coef = rng.standard_normal(512) + 1j * rng.standard_normal(512)
    coef[0] = 0.0
    f = to_physical(Field(g, FREQUENCY, coef))
    base = lp_norm(f, 2.0)
    for t in np.linspace(0.0, 1.0, 5):
        assert abs(lp_norm(airy_evolve(f, float(t)), 2.0) - base) / base < 1e-11


def test_airy_requires_dim_one():
    g = GridSpec(2, 16, 4.0)
    with pytest.raises(ValueError):
        airy_evolve(Field.zeros(g), 0.5)


def test_airy_negative_frequency_branch():
    g = GridSpec(1, 256, 10.0)
    xi0 = -9 * g.frequency_spacing
    pw = Field.from_function(g, lambda x: np.exp(1j * xi0 * x[0]))
    out = airy_evolve(pw, 0.6)
    # u_t + u_xxx = 0 evolves every mode by e^{i t xi^3}
    assert np.abs(out.samples - np.exp(1j * 0.6 * xi0**3) * pw.samples).max() < 1e-11


# -- band kernels -----------------------------------------------------------------------


def test_band_kernel_t0_real_even():
    kappa = band_kernel(3, 0.0, DispersionParams(2.0, 1))
    assert np.abs(kappa.samples.imag).max() < 1e-12 * np.abs(kappa.samples.real).max()
    vals = kappa.samples.real
    assert abs(vals[1:][::-1] - vals[1:]).max() < 1e-12 * np.abs(vals).max()


def test_band_kernel_l1_mass_stable_under_refinement():
    params = DispersionParams(2.0, 1)
    masses = []
    for n in (2**12, 2**13):
        grid = GridSpec(1, n, 400.0)
        kappa = band_kernel(4, 0.7, params, grid=grid)
        masses.append(np.abs(kappa.samples).sum() * grid.spacing)
    assert abs(masses[1] - masses[0]) / masses[0] < 0.05


def test_kernel_tail_mass_basics():
    params = DispersionParams(2.0, 1)
    assert kernel_tail_mass(6, 1.0, params) < 0.01
    assert kernel_tail_mass(6, 0.0, params) < 0.01
    with pytest.raises(ValueError):
        kernel_tail_mass(6, 1.5, params)


def test_kernel_tail_mass_grid_vs_quadrature():
    from displab.propagator import _tail_mass_quadrature

    alpha, k, t = 2.0, 5, 1.0
    params = DispersionParams(alpha, 1)
    via_grid = kernel_tail_mass(k, t, params)
    scale = 2.0 ** (alpha * k) * t
    ball = 4.0 * ball_constant(alpha) * 2.0 ** (alpha * k)
    via_quad = _tail_mass_quadrature(alpha, scale, ball)
    # both are ~1e-12-level; they agree that the mass is far below threshold
    assert via_grid < 1e-6 and via_quad < 1e-6


def test_kernel_tail_mass_refinement_stability():
    params = DispersionParams(2.0, 1)
    vals = [kernel_tail_mass(4, 1.0, params, points_cap=cap) for cap in (2**18, 2**20, 2**22)]
    assert max(vals) < 0.01
