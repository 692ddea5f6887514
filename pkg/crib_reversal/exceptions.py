"""
CRIB Reversal Exceptions

Custom exceptions for field, protocol and simulation operations.
"""


class CribError(Exception):
    """Base exception for all toolkit errors."""

    def __init__(self, message: str, code: str = None):
        self.message = message
        self.code = code
        super().__init__(self.message)


class InvalidPresetError(CribError):
    """Raised when a material preset violates its invariants."""

    def __init__(self, message: str = "Invalid material preset"):
        super().__init__(message, code="INVALID_PRESET")


class FieldTypeMismatchError(CribError):
    """Raised when an electric field is applied to a magnetic preset or vice versa."""

    def __init__(self, message: str = "Field type does not match the preset"):
        super().__init__(message, code="FIELD_TYPE_MISMATCH")


class LayoutError(CribError):
    """Raised when an electrode or wire layout is inconsistent."""

    def __init__(self, message: str = "Invalid layout"):
        super().__init__(message, code="INVALID_LAYOUT")


class GridError(CribError):
    """Raised when a grid is too coarse or a band exceeds it."""

    def __init__(self, message: str = "Invalid grid specification"):
        super().__init__(message, code="INVALID_GRID")


class SolverConvergenceError(CribError):
    """Raised when the Laplace solve does not reach its tolerance."""

    def __init__(self, message: str = "Laplace solver did not converge"):
        super().__init__(message, code="SOLVER_NOT_CONVERGED")


class WireSingularityError(CribError):
    """Raised when a wire field is evaluated on a wire."""

    def __init__(self, message: str = "Field evaluated at a wire position"):
        super().__init__(message, code="WIRE_SINGULARITY")


class FitError(CribError):
    """Raised when a linear fit has too few or degenerate samples."""

    def __init__(self, message: str = "Degenerate linear fit"):
        super().__init__(message, code="DEGENERATE_FIT")


class ProtocolError(CribError):
    """Raised for non-physical protocol inputs."""

    def __init__(self, message: str = "Invalid protocol parameters"):
        super().__init__(message, code="INVALID_PROTOCOL")


class ProfileSpanError(CribError):
    """Raised when atoms lie outside the sampled shift profile."""

    def __init__(self, message: str = "Atom position outside the shift profile"):
        super().__init__(message, code="PROFILE_SPAN")


class CalibrationError(CribError):
    """Raised when coupling calibration misses its transmission target."""

    def __init__(self, message: str = "Coupling calibration failed"):
        super().__init__(message, code="CALIBRATION_FAILED")


class IntegratorStabilityError(CribError):
    """Raised when the time step violates the integrator stability limit."""

    def __init__(self, message: str = "Time step too large for stable integration"):
        super().__init__(message, code="UNSTABLE_STEP")


class OptimizationError(CribError):
    """Raised for malformed optimization problems."""

    def __init__(self, message: str = "Invalid optimization problem"):
        super().__init__(message, code="INVALID_PROBLEM")


class UsageError(CribError):
    """Raised for malformed command-line input or config files."""

    def __init__(self, message: str = "Invalid usage"):
        super().__init__(message, code="USAGE")
