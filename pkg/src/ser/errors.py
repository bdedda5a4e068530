"""Exception hierarchy. CLI exit codes are keyed off the three base classes."""


class SerError(Exception):
    exit_code = 2


class UsageError(SerError):
    exit_code = 1


class DataError(SerError):
    exit_code = 2


class NumericalError(SerError):
    exit_code = 3


class UnsupportedCodec(DataError):
    pass


class MalformedHeader(DataError):
    pass


class EmptyAudio(DataError):
    pass


class UnrecognizedLabelCode(DataError):
    pass


class EmptyCorpus(DataError):
    pass


class LengthMismatch(DataError):
    pass


class LagTooLarge(DataError):
    pass


class TooFewSamples(DataError):
    pass


class LabelOutOfRange(DataError):
    pass


class EmptyMatrix(DataError):
    pass


class DegenerateClass(DataError):
    pass


class DegenerateBank(UsageError):
    pass


class NumericalBreakdown(NumericalError):
    pass


class NonFiniteGradient(NumericalError):
    pass


class NonFiniteFeature(NumericalError):
    pass
