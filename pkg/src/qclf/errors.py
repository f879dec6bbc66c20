"""Exception hierarchy shared across the package."""


class QCError(Exception):
    """Base class for all package errors."""


# taxonomy

class LabelError(QCError):
    pass


class UnknownCoarse(LabelError):
    pass


class UnknownFine(LabelError):
    pass


class FineCoarseMismatch(LabelError):
    pass


# corpus

class CorpusError(QCError):
    pass


class ParseError(CorpusError):
    def __init__(self, line, message):
        self.line = line
        super().__init__(f"line {line}: {message}")


class InvalidLabel(CorpusError):
    def __init__(self, record_id, message=""):
        self.record_id = record_id
        super().__init__(f"record {record_id!r}: invalid label {message}".rstrip())


class DuplicateId(CorpusError):
    def __init__(self, record_id):
        self.record_id = record_id
        super().__init__(f"duplicate record id {record_id!r}")


class MissingSplitTag(CorpusError):
    def __init__(self, record_id):
        self.record_id = record_id
        super().__init__(f"record {record_id!r} has no split tag")


class DegenerateMarginals(QCError):
    """Kappa is undefined: expected agreement is 1 but observed agreement is not."""


# features

class NoInterrogative(QCError):
    pass


class EmptyFeatureSpace(QCError):
    pass


class MissingCoarseHint(QCError):
    pass


# learners / ensembles

class EmptyDataset(QCError):
    pass


class IndexMismatch(QCError):
    pass


class DuplicateLearnerKind(QCError):
    pass


class NoUsableRound(UserWarning):
    """First boosting round already had error >= 0.5; the model falls back to the plain base learner."""


# eval

class LengthMismatch(QCError):
    pass


class EmptyInput(QCError):
    pass


class EmptyCoarsePartition(QCError):
    def __init__(self, coarse):
        self.coarse = coarse
        super().__init__(f"no records for coarse class {coarse}")
