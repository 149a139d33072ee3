import hashlib
import os
from contextlib import contextmanager
from typing import IO, Any, Iterator, Tuple, Union

from .exceptions import ParseError

# A data source or destination: either a filesystem path or an already
# opened text stream
TextSource = Union[str, "os.PathLike[str]", IO[str]]


def derive_seed(*parts: Any) -> int:
    """Derive a stable 64-bit seed from an arbitrary tuple of values.
    The same parts always give the same seed, across processes and
    python versions, unlike the builtin hash()

    :param parts: values identifying the consumer of the seed, e.g
    (master seed, sample size, algorithm, learning rate)
    """
    k = hashlib.sha3_256()
    k.update("|".join(repr(p) for p in parts).encode("utf-8"))
    return int.from_bytes(k.digest()[:8], "big")


def format_float(x: float) -> str:
    """Shortest decimal representation of 'x' that parses back to the
    same float"""
    return repr(float(x))


def sign(x: float) -> float:
    """Sign of 'x' with sign(0) = 0"""
    if x > 0:
        return 1.0
    if x < 0:
        return -1.0
    return 0.0


@contextmanager
def open_text(source: TextSource, mode: str = "r") -> Iterator[IO[str]]:
    """Open 'source' as a text stream if it is a path, or yield it
    unchanged if it is already a stream. Streams passed in are not closed"""
    if isinstance(source, (str, os.PathLike)):
        with open(source, mode, encoding="utf-8", newline="") as f:
            yield f
    else:
        yield source


def count_lines(path: str) -> int:
    """Return the number of non-empty lines in a file, or 0 if
    the file doesn't exist"""
    if not os.path.exists(path) or not os.path.isfile(path):
        return 0
    with open(path, "r", encoding="utf-8", errors="replace") as f:
        return sum(1 for line in f if line.strip())


def numbered_lines(stream: IO[str], start: int = 1) -> Iterator[Tuple[int, str]]:
    """Enumerate the lines of 'stream', the first one numbered 'start'.
    Bytes that don't decode raise a ParseError at the line holding them"""
    lineno = start - 1
    lines = iter(stream)
    while True:
        try:
            line = next(lines)
        except StopIteration:
            return
        except UnicodeDecodeError as e:
            # e.object is the chunk being decoded. It continues the line
            # after the last one read
            bad = lineno + 1 + bytes(e.object[: e.start]).count(b"\n")
            raise ParseError(f"Invalid {e.encoding} bytes", line=bad) from None
        lineno += 1
        yield lineno, line
