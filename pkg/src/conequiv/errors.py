"""Exception hierarchy shared by all modules."""


class ConeEquivError(Exception):
    """Base class for library errors."""


class LieAlgebraError(ConeEquivError, ValueError):
    pass


class AntisymmetryViolation(LieAlgebraError):
    def __init__(self, i, j, k):
        self.triple = (i, j, k)
        super().__init__(f"c[{i}][{j}][{k}] != -c[{j}][{i}][{k}]")


class JacobiViolation(LieAlgebraError):
    def __init__(self, i, j, k):
        self.triple = (i, j, k)
        super().__init__(f"Jacobi identity fails on basis triple ({i}, {j}, {k})")


class NotSolvable(LieAlgebraError):
    pass


class NotNilpotent(LieAlgebraError):
    pass


class NotAnIdeal(LieAlgebraError):
    pass


class NotTriangulable(LieAlgebraError):
    def __init__(self, message, quotient=None):
        self.quotient = quotient
        super().__init__(message)


class NonRationalSpectrum(LieAlgebraError):
    """Real but irrational eigenvalues where a rational flag or weight is required."""


class NonRealSpectrum(LieAlgebraError):
    pass


class RegularElementNotFound(LieAlgebraError):
    pass


class AlgebraParseError(LieAlgebraError):
    def __init__(self, message, line, column, source="<string>"):
        self.line = line
        self.column = column
        self.source = source
        super().__init__(f"{source}:{line}:{column}: {message}")


class BoundViolated(ConeEquivError):
    def __init__(self, message, offending=None):
        self.offending = offending
        super().__init__(message)


class NoConvergence(ConeEquivError):
    pass


class InsufficientData(ConeEquivError):
    def __init__(self, message, witness=None):
        self.witness = witness
        super().__init__(message)


class NetTooCoarse(ConeEquivError):
    pass


class HorizonTooSmall(ConeEquivError):
    pass
