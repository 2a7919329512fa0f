"""Exception types shared across the package."""


class RepresentationError(ValueError):
    """A field carries the wrong representation tag for the operation."""


class GridAdequacyError(ValueError):
    """A field's active spectrum sits too close to the grid's Nyquist frequency."""


class SizingError(ValueError):
    """A requested construction does not fit on the supplied grid."""

    def __init__(self, msg, required_points=None, required_half_width=None):
        super().__init__(msg)
        self.required_points = required_points
        self.required_half_width = required_half_width


class EllipticityError(ValueError):
    """The sampled Hessian of a phase fails to be positive definite."""


class TractabilityError(ValueError):
    """A computation exceeds the configured size caps."""


class SeparationError(ValueError):
    """Frequency supports violate a required separation."""
