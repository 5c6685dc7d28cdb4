"""Exception hierarchy shared by all modules."""


class LexAspectError(Exception):
    """Base class; the CLI turns these into one-line JSON errors."""

    @property
    def kind(self) -> str:
        return type(self).__name__


# corpus
class MalformedLine(LexAspectError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class DuplicateId(LexAspectError):
    def __init__(self, id_: str):
        super().__init__(f"duplicate id {id_!r}")
        self.id = id_


class UnknownLabel(LexAspectError):
    def __init__(self, value):
        super().__init__(f"unknown label {value!r}")
        self.value = value


class EmptyTokens(LexAspectError):
    def __init__(self, id_: str):
        super().__init__(f"utterance {id_!r} has no tokens")
        self.id = id_


# stats
class EmptyTable(LexAspectError):
    pass


class EmptyCorpus(LexAspectError):
    pass


class DegenerateTable(LexAspectError):
    pass


class LengthMismatch(LexAspectError):
    pass


class DegenerateAgreement(LexAspectError):
    pass


# embeddings
class BadHeader(LexAspectError):
    pass


class DimensionMismatch(LexAspectError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class UnparsableFloat(LexAspectError):
    def __init__(self, line: int, token: str):
        super().__init__(f"line {line}: cannot parse {token!r} as a float")
        self.line = line


class MissingUtteranceVector(LexAspectError):
    def __init__(self, id_: str):
        super().__init__(f"no sentence vector for utterance {id_!r}")
        self.id = id_


# classifier
class UnknownClassLabel(LexAspectError):
    pass


class EmptyData(LexAspectError):
    pass


class SingleClassData(UserWarning):
    """Training data has one label; the returned model is degenerate."""


# evaluation
class BadK(LexAspectError):
    pass


class StratificationInfeasible(UserWarning):
    """Some class has fewer instances than folds."""


class EmptyTrain(LexAspectError):
    pass


class TargetMissing(LexAspectError):
    pass


class MixedDimensions(LexAspectError):
    pass


class TooFewContributors(LexAspectError):
    pass


# cli
class IdSetMismatch(LexAspectError):
    pass


class ConfigError(LexAspectError):
    pass
