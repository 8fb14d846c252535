"""Exceptions raised by the numerics.

The CLI turns any ``E6Error`` into exit status 1, the HTTP surface into a 422.
"""


class E6Error(Exception):
    """Base class for every failure reported by the library."""


class DomainError(E6Error, ValueError):
    """tau outside the upper half-plane, or below the series floor."""


class PrecisionUnreachableError(E6Error):
    """Series tail bound cannot meet the target within max_terms."""


class InvalidUseError(E6Error, ValueError):
    """An operation was called outside its precondition."""


class GroupMembershipError(E6Error, ValueError):
    """Matrix is not in the requested group."""


class BoundaryZeroError(E6Error):
    """The counted function (nearly) vanishes on the contour."""


class NonIntegralWindingError(E6Error):
    """Winding number did not settle on an integer."""


class NoConvergenceError(E6Error):
    pass


class RootCollisionError(E6Error):
    """Two roots that must be distinct came out (numerically) equal."""


class ContinuationStallError(E6Error):
    """Continuation step fell below the minimum."""


class BranchJumpError(E6Error):
    """Consecutive curve points landed on different halves of F0."""


class LatticePointError(E6Error, ValueError):
    """z is too close to a pole of the Weierstrass functions."""


class G2TooSmallError(E6Error, ValueError):
    """g2 vanishes (tau near e^{pi i/3}); singular points are undefined."""


class PathTooCloseError(E6Error):
    """No integration path keeps the required clearance."""


class OdeStiffnessError(E6Error):
    """The ODE integrator failed (step underflow)."""
