"""Exception types raised by the hodgedn library."""


class HodgeDnError(Exception):
    """Base class for all library errors."""


class ParseError(HodgeDnError):
    """Malformed mesh file or field specification."""


class NotManifold(HodgeDnError):
    """Complex is not a manifold (a ridge has more than two cofaces)."""


class NotOrientable(HodgeDnError):
    """No globally consistent orientation of the top simplices exists."""


class DegenerateSimplex(HodgeDnError):
    """A simplex has (numerically) zero volume."""


class ResolutionTooSmall(HodgeDnError):
    """Requested generator resolution below the documented minimum."""


class DegreeOutOfRange(HodgeDnError):
    """Cochain degree outside 0..dim."""


class BackendMismatch(HodgeDnError):
    """Operands built on different complexes or backends."""


class RankAmbiguous(HodgeDnError):
    """Singular value spectrum has no clear gap at the requested threshold."""


class Infeasible(HodgeDnError):
    """Boundary value problem data violates an integrability condition.

    The message names the violated condition.
    """


class SolverFailure(HodgeDnError):
    """A linear solve did not reach the required residual."""


class NotSolvable(HodgeDnError):
    """Source term obstructed by a Dirichlet harmonic field."""


class OutOfDomain(HodgeDnError):
    """Input lies outside the domain of the requested boundary operator."""


class ExactnessFailure(HodgeDnError):
    """A long-exact-sequence node failed its image/kernel comparison."""


class EmptyBoundarySubspace(HodgeDnError):
    """A boundary subspace needed for a check is zero-dimensional."""


class UnsupportedConfiguration(HodgeDnError):
    """Requested operation is not supported for this mesh/field combination."""


class CheckFailure(HodgeDnError):
    """A verification check failed (used by the CLI to set exit code 1)."""
