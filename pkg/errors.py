"""Exception hierarchy shared by the library modules and the CLI."""


class EntropyToolError(ValueError):
    """Base class for every error raised by the toolkit."""


class GroundSetError(EntropyToolError):
    """Bad labels, unknown elements, size caps or mismatched grounds."""


class FormatError(EntropyToolError):
    """Malformed input text, with file/line context when known."""

    def __init__(self, message, filename=None, line=None):
        self.filename = filename
        self.line = line
        self.message = message
        super().__init__(self.__str__())

    def __str__(self):
        where = self.filename or "<input>"
        if self.line is not None:
            return f"{where}:{self.line}: {self.message}"
        return f"{where}: {self.message}"


class NotAPolymatroid(EntropyToolError):
    """An operation that needs a polymatroid got something else."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class PreconditionFailed(EntropyToolError):
    """An explicit construction was requested outside its valid case."""


class FieldTooSmall(EntropyToolError):
    """Generic vectors could not be found within the retry budget."""


class ResourceCapExceeded(EntropyToolError):
    """A configured cap (rays, cells, deadline) was hit."""

    def __init__(self, cap, message):
        super().__init__(f"{cap} cap exceeded: {message}")
        self.cap = cap


class ConeNotPointed(EntropyToolError):
    """The cone contains a line; carries a basis of the lineality space."""

    def __init__(self, lineality):
        super().__init__(f"cone is not pointed, lineality dimension {len(lineality)}")
        self.lineality = lineality
