"""Exception hierarchy shared by all rscreg modules."""


class RscError(Exception):
    """Base class for every error raised by rscreg."""


class DataError(RscError):
    """Problems with input data (files, columns, sample sizes)."""


class MissingColumn(DataError):
    pass


class EmptyAfterFiltering(DataError):
    pass


class UnparseableFile(DataError):
    pass


class IndexOutOfRange(DataError, IndexError):
    pass


class TooFewObservations(DataError):
    pass


class NumericError(RscError):
    """Numerical failures: degenerate bandwidths, singular designs, ..."""


class DegenerateSample(NumericError):
    pass


class DegenerateBandwidth(NumericError):
    pass


class NoAnalyticForm(NumericError):
    def __init__(self, what="functional"):
        super().__init__(f"no analytic influence function for {what}")


class TooFewDistinctValues(NumericError):
    pass


class SingularDesign(NumericError):
    pass


class RankDeficientDesign(NumericError):
    pass


class SpecMismatch(RscError):
    pass
