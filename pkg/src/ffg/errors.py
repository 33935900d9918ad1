"""Exception hierarchy shared by all modules."""


class FFGError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatch(FFGError, ValueError):
    pass


class OrderMismatch(FFGError, ValueError):
    pass


class NonzeroConstantTerm(FFGError, ValueError):
    pass


class NotInvertible(FFGError, ArithmeticError):
    pass


class DefectiveLinearPart(FFGError, ArithmeticError):
    """The matrix is numerically non-diagonalizable."""


class BranchCut(FFGError, ArithmeticError):
    """An eigenvalue lies on the closed negative real axis."""


class InconsistentWitness(FFGError, ValueError):
    """A claimed resonance does not hold at the requested tolerance."""


class ObstructionError(FFGError):
    """A homological equation is singular with a nonzero right-hand side.

    The structured description is available as ``.obstruction``.
    """

    def __init__(self, obstruction):
        self.obstruction = obstruction
        super().__init__(
            f"obstruction at degree {obstruction.degree}, component "
            f"{obstruction.component}, monomial {list(obstruction.monomial)}"
        )
