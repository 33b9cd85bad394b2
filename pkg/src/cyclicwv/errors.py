"""Exception and warning classes used across the package."""


class CyclicWVError(Exception):
    """Base class for all package errors."""


class DomainError(CyclicWVError, ValueError):
    """An input lies outside the domain an operation accepts."""


class WeakValueSingular(CyclicWVError, ZeroDivisionError):
    """Pre- and post-selected states are (numerically) orthogonal."""

    def __init__(self, overlap):
        self.overlap = overlap
        super().__init__(f"post-selection overlap |<post|pre>| = {overlap:.3e} is below threshold")


class TruncationError(CyclicWVError):
    """The time grid does not cover enough of the pulse."""

    def __init__(self, captured_fraction, message=None):
        self.captured_fraction = captured_fraction
        super().__init__(message or f"grid captures only {captured_fraction:.6f} of the pulse energy")


class EmptyProfile(CyclicWVError):
    """A detection profile carries no photons."""


class DegenerateCavity(CyclicWVError):
    """Cavity round-trip gain reaches unity, so the recycling series diverges."""


class DegenerateSelection(CyclicWVError):
    """The post-selection angle makes a closed form singular (sin(phi) = 0)."""


class ConvergenceError(CyclicWVError):
    """A traversal sum did not converge within the allowed number of terms."""

    def __init__(self, n_used, last_ratio):
        self.n_used = n_used
        self.last_ratio = last_ratio
        super().__init__(f"traversal sum not converged after {n_used} terms (last term ratio {last_ratio:.3e})")


class RegimeWarning(UserWarning):
    """Parameters leave the weak-value regime 2*omega*tau << phi << 1."""
