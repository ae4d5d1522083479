import typing


class KernelCFError(Exception):
    def __init__(self, message: str):
        super().__init__(message)
        self.message = message

    def __str__(self):
        return self.message


class IngestionError(KernelCFError):
    def __init__(self, path, reason: str):
        self.path = str(path)
        self.reason = reason
        super().__init__(f"Cannot ingest {self.path}: {reason}")


class MalformedLineError(KernelCFError):
    """
    A ratings line that could not be parsed. Collected by the loader, not raised.
    """

    def __init__(
        self,
        line: int,
        reason: str,
        text: typing.Optional[str] = None,
        column: typing.Optional[int] = None,
    ):
        self.line = line
        self.reason = reason
        self.text = text
        self.column = column
        message = f"Line {line}: {reason}\n"
        if text is not None:
            # show +-10 characters around the bad field and mark it with ^^^ under it
            if column is not None:
                start = max(0, column - 10)
                snippet = text[start : column + 10]
                message += f"{snippet}\n" + " " * (column - start) + "^^^\n"
            else:
                message += f"{text}\n"
        super().__init__(message)


class ArgumentError(KernelCFError, ValueError):
    pass


class ConfigError(KernelCFError):
    pass


class InsufficientDataError(KernelCFError, ValueError):
    def __init__(self, what: str, needed: int, got: int):
        self.needed = needed
        self.got = got
        super().__init__(f"{what} needs at least {needed} points, got {got}")


class UndefinedSimilarityError(KernelCFError, ValueError):
    pass


class NoDistanceError(KernelCFError, ValueError):
    def __init__(self, sim: float):
        self.sim = sim
        super().__init__(f"Similarity {sim!r} is not positive, no distance is defined")


class SurfaceFitError(KernelCFError):
    def __init__(self, direction: str, rank: int, needed: int):
        self.direction = direction
        self.rank = rank
        self.needed = needed
        super().__init__(
            f"Surface design matrix has rank {rank} < {needed}; "
            f"deficient direction: {direction}"
        )


class UnknownIdError(KernelCFError, KeyError):
    def __init__(self, kind: str, identifier):
        self.kind = kind
        self.identifier = identifier
        super().__init__(f"Unknown {kind} id: {identifier!r}")
