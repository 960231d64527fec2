"""Exception hierarchy shared by all qclass modules."""


class QClassError(Exception):
    """Base class for every error raised by qclass."""


class NotSquare(QClassError):
    pass


class NonFinite(QClassError):
    pass


class NotHermitian(QClassError):
    def __init__(self, asymmetry):
        self.asymmetry = float(asymmetry)
        super().__init__(f"matrix is not Hermitian: max |M - M^dagger| = {self.asymmetry:.3e}")


class NegativeEigenvalue(QClassError):
    def __init__(self, min_eigenvalue):
        self.min_eigenvalue = float(min_eigenvalue)
        super().__init__(f"density operator has eigenvalue {self.min_eigenvalue:.6g} < 0")


class ZeroTrace(QClassError):
    def __init__(self, trace):
        self.trace = float(trace)
        super().__init__(f"density operator trace {self.trace!r} is not within tolerance of 1")


class ConvergenceFailure(QClassError):
    def __init__(self, iterations):
        self.iterations = int(iterations)
        super().__init__(f"Jacobi eigensolver did not converge after {self.iterations} sweeps")


class IndexOutOfRange(QClassError):
    pass


class DimensionMismatch(QClassError):
    pass


class UndefinedAt(QClassError):
    def __init__(self, point):
        self.point = float(point)
        super().__init__(f"function is undefined at spectral point {self.point!r}")


class DuplicateObservable(QClassError):
    pass


class InvalidAtom(QClassError):
    pass


class EmptySubset(QClassError):
    pass


class UnknownId(QClassError):
    pass


class InvalidPermutation(QClassError):
    pass


class ComplexResidue(QClassError):
    def __init__(self, magnitude):
        self.magnitude = float(magnitude)
        super().__init__(f"trace has imaginary residue {self.magnitude:.3e}")


class NonCommuting(QClassError):
    def __init__(self, pair):
        self.pair = tuple(pair)
        super().__init__(f"observables at positions {self.pair} do not commute")


class SpaceMismatch(QClassError):
    pass


class BadWeights(QClassError):
    pass


class AtomBudgetExceeded(QClassError):
    def __init__(self, atoms, budget):
        self.atoms = int(atoms)
        self.budget = int(budget)
        super().__init__(
            f"product space has {self.atoms} atoms, over the budget of {self.budget} "
            "(set QCLASS_ATOM_BUDGET to raise it)"
        )


class UnregisteredId(QClassError):
    pass


class NotDisjoint(QClassError):
    pass


class ConsistencyViolation(QClassError):
    """Two representations of the same cylinder set received different values."""


class ParseError(QClassError):
    def __init__(self, message, line=None):
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"{message}{where}")


class ValidationError(QClassError):
    def __init__(self, name, cause):
        self.name = name
        self.cause = cause
        super().__init__(f"{name}: {cause}")


class DanglingReference(QClassError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"reference to undefined name {name!r}")
