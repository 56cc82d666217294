"""Exception hierarchy shared by all modules.

Every error raised on purpose by the package derives from :class:`GvarError`,
so the command-line front end can turn it into a machine-readable record.
"""


class GvarError(Exception):
    """Base class for all package errors."""


# ingest
class EmptyFile(GvarError):
    pass


class MissingColumn(GvarError):
    pass


class MalformedDate(GvarError):
    pass


class NegativeValue(GvarError):
    pass


class InteriorGap(GvarError):
    pass


class UnknownState(GvarError):
    pass


class WindowEmpty(GvarError):
    pass


class DuplicateEntry(GvarError):
    pass


class ConfigError(GvarError):
    pass


class InputMissing(GvarError):
    pass


# shocks
class EmptyFilter(GvarError):
    pass


class InconsistentMeta(GvarError):
    pass


# weights
class IsolatedUnit(GvarError):
    pass


class UnknownLabel(GvarError):
    pass


class IndexOutOfRange(GvarError, IndexError):
    pass


# estimation
class SingularDesign(GvarError):
    pass


class SampleTooShort(GvarError):
    pass


# gvar
class DimensionMismatch(GvarError):
    pass


class SingularG(GvarError):
    pass


class IllConditioned(GvarError):
    pass


# irf
class UnknownRegion(GvarError):
    pass


class EmptyRegion(GvarError):
    pass


class WeightMismatch(GvarError):
    pass


class MultiStateScenario(GvarError):
    pass


# bootstrap
class EmptyResiduals(GvarError):
    pass


class TooManyUnstableReplications(GvarError):
    pass


class UnstableSystem(GvarError):
    pass


# alternatives
class NonConcaveLikelihood(GvarError):
    pass


class NonConvergence(GvarError):
    pass


class TooFewStates(GvarError):
    pass


# synth
class UnstableSpec(GvarError):
    pass
