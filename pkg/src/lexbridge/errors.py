"""Exception hierarchy.

ValidationError subclasses map to CLI exit code 1 (bad input or config),
everything else raised by the toolkit maps to exit code 2 (runtime failure).
"""


class LexbridgeError(Exception):
    pass


class ValidationError(LexbridgeError):
    pass


class EmptyCorpus(ValidationError):
    pass


class EmptyVocabulary(ValidationError):
    pass


class NoAnchors(ValidationError):
    pass


class UnknownWord(ValidationError):
    pass


class MalformedRow(ValidationError):
    pass


class NotEnoughSentences(ValidationError):
    pass


class StageError(LexbridgeError):
    """Wraps a pipeline stage failure with the stage name."""

    def __init__(self, stage, cause):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
