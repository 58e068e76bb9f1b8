"""Exception hierarchy shared by all gilab modules."""


class GilabError(Exception):
    """Base class for all gilab errors."""


class ChartDomain(GilabError):
    """Point lies outside the validity region of a chart or metric family."""


class ChartGap(GilabError):
    """Point is covered by no chart of a cocycle cover."""


class OverlapMismatch(GilabError):
    """Cocycle data violates the flat-section condition on an overlap."""


class NotPositive(GilabError):
    """A metric evaluation produced a non positive definite matrix."""


class DegenerateTriple(GilabError):
    """Input form pair fails the compatibility residuals beyond tolerance."""


class DivisionByZero(GilabError):
    """The holomorphic volume density vanishes at the evaluation point."""


class SeriesTail(GilabError):
    """Certified truncation tail of a series exceeds the requested bound."""


class Singular(GilabError):
    """Evaluation requested at a singular (monopole / lattice) point."""


class QuadratureFail(GilabError):
    """Estimated quadrature error exceeds the requested tolerance."""


class DegenerateFiber(GilabError):
    """Weierstrass discriminant vanishes at the requested base point."""


class RootFindFail(GilabError):
    """Polynomial root extraction did not converge."""


class Disconnected(GilabError):
    """Sampled neighbourhood graph is not connected at the chosen k."""


class InsufficientData(GilabError):
    """Too few data points for the requested fit or estimate."""


class CycleThroughSingular(GilabError):
    """Integration cycle passes through a forbidden singular region."""


class EmptyBall(GilabError):
    """Requested metric ball contains no sample points."""


class Unsatisfiable(GilabError):
    """No admissible constant satisfies the requested conditions."""


class StepTooLarge(GilabError):
    """Finite-difference step fails the Richardson self-consistency check."""


class LeftDomain(GilabError):
    """A trajectory left the chart; carries the exit time."""

    def __init__(self, message: str, exit_time: float | None = None):
        super().__init__(message)
        self.exit_time = exit_time


class SchemaMismatch(GilabError):
    """CSV input does not carry the expected column schema."""
