"""Exception types shared across the package."""


class DimensionMismatchError(ValueError):
    """Operands have incompatible dimension, arity, or coefficient shape."""


class DegenerateStateError(ValueError):
    """Operation requires positive oscillator energy but H = 0."""


class BranchCutError(RuntimeError):
    """A finite-difference stencil straddles the half-angle branch cut."""


class DivergenceError(RuntimeError):
    """Integration produced a non-finite value."""


class ConfigError(ValueError):
    """Invalid run configuration (bad flag, field, or file)."""
