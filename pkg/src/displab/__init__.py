"""displab: a pseudospectral laboratory for fractional dispersive flows.

Propagators e^{i t |xi|^alpha} on periodic grids, dyadic and cube frequency
decompositions, bilinear near-diagonal splits, extremizer families, and a
sweep harness that verifies the critical smoothing/maximal exponents by
log-log regression.
"""

from .cutoffs import CutoffSpec, make_cutoffs
from .decomposition import (
    BandIndex,
    BilinearPiece,
    CubeIndex,
    band_project,
    bilinear_piece,
    bilinear_reconstruction_residual,
    bilinear_restriction_ratio,
    cube_project,
    evolve_band,
    separation_weight,
)
from .errors import (
    EllipticityError,
    GridAdequacyError,
    RepresentationError,
    SeparationError,
    SizingError,
    TractabilityError,
)
from .extremizers import (
    EnvelopeReport,
    ExtremizerSpec,
    FocusingReport,
    RidgeReport,
    envelope_check,
    focusing_check,
    make_maximal_extremizer,
    make_smoothing_extremizer,
    ridge_check,
)
from .grid import FREQUENCY, PHYSICAL, Field, GridSpec, load_field, save_field
from .harness import (
    FitResult,
    GridPolicy,
    SweepConfig,
    SweepRecord,
    TPolicy,
    Verdict,
    fit_loglog,
    run_sweep,
    verify_airy,
    verify_maximal_necessary,
    verify_sharpness,
)
from .norms import (
    ExponentQuery,
    NormSpec,
    admissibility_threshold,
    airy_exponent,
    besov_norm,
    lp_norm,
    maximal_exponent,
    maximal_necessary_exponent,
    maximal_norm,
    mixed_spacetime_norm,
    smoothing_exponent,
    sobolev_norm,
)
from .propagator import (
    DispersionParams,
    EllipticPhase,
    Trajectory,
    airy_evolve,
    band_kernel,
    elliptic_evolve,
    evolve,
    evolve_trajectory,
    kernel_tail_mass,
    make_elliptic_phase,
    quadratic_phase,
)
from .spectral import SymbolFn, apply_symbol, dft_forward, dft_inverse, ensure_headroom

__version__ = "0.1.0"
