from typing import Optional


# pylint: disable=unnecessary-pass
class DotMatException(Exception):
    """Generic exception class for dotmat, from which all custom
    exceptions derive"""

    pass


class ConfigurationError(DotMatException):
    """Exception for invalid parameters, hyperparameters or empty inputs"""

    pass


class DimensionError(DotMatException):
    """Exception for factor vectors whose lengths don't match"""

    pass


class UnknownIdError(DotMatException, KeyError):
    """Exception for a user or item id that the model or dataset
    doesn't know about"""

    def __init__(self, kind: str, ident: int) -> None:
        super().__init__(f"Unknown {kind} id: {ident}")
        self.kind = kind
        self.ident = ident

    def __str__(self) -> str:
        return f"Unknown {self.kind} id: {self.ident}"


class ParseError(DotMatException):
    """Exception for malformed input records. 'line' is the 1-based line
    (or data row) where parsing failed"""

    def __init__(
        self, msg: str, line: Optional[int] = None, record: str = ""
    ) -> None:
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{msg}" + (f" ({record!r})" if record else ""))
        self.line = line
        self.record = record


class SchemaError(DotMatException):
    """Exception for CSV files that lack a requested column"""

    pass


class IntegrityError(DotMatException):
    """Exception for model files whose records contradict their header"""

    pass


class BoundsError(DotMatException):
    """Exception for sample sizes outside of the available range"""

    pass


class DegenerateInputError(DotMatException):
    """Exception for metric inputs that carry too little information
    to compute anything meaningful"""

    pass


class GridCellError(DotMatException):
    """Error while running a single cell of an experiment grid"""

    def __init__(
        self, algorithm: str, learning_rate: float, sample_size: int, cause: Exception
    ) -> None:
        super().__init__(
            f"Grid cell (algorithm={algorithm}, learning_rate={learning_rate}, "
            f"sample_size={sample_size}) failed: {cause}"
        )
        self.algorithm = algorithm
        self.learning_rate = learning_rate
        self.sample_size = sample_size
        self.cause = cause


class InitializationError(Exception):
    """Error while dotmat's command line initializes"""

    pass


class ArgumentParsingError(DotMatException):
    """Error parsing command line arguments with argparse"""

    def __init__(self, msg: str, help_str: str) -> None:
        super().__init__(msg)
        self.msg = msg
        self.help_str = help_str
