"""Exception types shared across the toolkit."""


class PhysicalityError(ValueError):
    """Covariance matrix violates the uncertainty principle beyond tolerance."""


class DegenerateStateError(ValueError):
    """A reduced state is singular where a regular one is required."""


class SymmetryError(ValueError):
    """Input lacks a symmetry (quadrature-symmetric form) the operation needs."""


class DivergenceError(ValueError):
    """Post-selection filter weight is not integrable for the given state."""


class DecompositionError(ValueError):
    """State does not fit the source -> loss -> excess-noise channel model."""


class StarvationError(RuntimeError):
    """Too few accepted events survive post-selection for estimation."""


class InsufficientDataError(ValueError):
    """Not enough effective samples for the requested statistic."""


class QuadratureConvergenceError(RuntimeError):
    """Numerical integration failed to reach the requested tolerance."""
