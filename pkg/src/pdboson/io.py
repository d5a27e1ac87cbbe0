"""Plain-text complex matrices: a ``rows cols`` header, then row-major ``re im`` pairs."""
import numpy as np

from .errors import InvalidArgument


def parse_matrix(text: str) -> np.ndarray:
    tokens = text.split()
    if len(tokens) < 2:
        raise InvalidArgument("matrix text needs a 'rows cols' header")
    try:
        rows, cols = int(tokens[0]), int(tokens[1])
        values = np.array([float(t) for t in tokens[2:]])
    except ValueError as exc:
        raise InvalidArgument(f"malformed matrix text: {exc}") from None
    if rows < 0 or cols < 0:
        raise InvalidArgument("matrix dimensions must be nonnegative")
    if values.size != 2 * rows * cols:
        raise InvalidArgument(f"expected {2 * rows * cols} numbers for a {rows}x{cols} matrix, got {values.size}")
    if not np.all(np.isfinite(values)):
        raise InvalidArgument("matrix has non-finite entries")
    return (values[0::2] + 1j * values[1::2]).reshape(rows, cols)


def format_matrix(A) -> str:
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2:
        raise InvalidArgument("only 2-d matrices can be written")
    lines = [f"{A.shape[0]} {A.shape[1]}"]
    lines += [f"{float(z.real)!r} {float(z.imag)!r}" for z in A.ravel()]
    return "\n".join(lines) + "\n"


def read_matrix(path) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        return parse_matrix(fh.read())


def write_matrix(path, A) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_matrix(A))
