"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class QuestError(Exception):
    exit_code = 1


class ImageIOError(QuestError):
    exit_code = 2


class DecodeError(ImageIOError):
    """Malformed image content; the message names the format."""


class UnsupportedFormatError(ImageIOError):
    """Content is not one of the supported formats (PGM P5, PNG)."""


class ImageSizeError(QuestError, ValueError):
    exit_code = 3


class SchemaError(QuestError, ValueError):
    exit_code = 4

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ConfigError(QuestError, ValueError):
    exit_code = 5


class ShapeError(QuestError, ValueError):
    exit_code = 5


class DegenerateTrainingError(ConfigError):
    """Binary training data contains only one class."""


class BoundsError(ImageSizeError):
    """A bounding box extends past an image edge."""

    def __init__(self, message, edge):
        super().__init__(message)
        self.edge = edge


class EmptyInputError(SchemaError):
    pass
