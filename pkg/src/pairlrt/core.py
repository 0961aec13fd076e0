"""Data containers and text ingestion for graphs and paired-comparison tables.

Node ids are 0-based everywhere.  Text inputs accept blank lines and '#'
comments; an optional first content line ``n=<count>`` declares the node
count, otherwise it is inferred as one plus the largest id seen.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator, Optional, Union

import numpy as np

MIN_NODES = 3

TextSource = Union[str, IO[str], Iterable[str]]


class DataFormatError(ValueError):
    """An input stream violates the documented text format."""


class NonexistentMLEError(RuntimeError):
    """A requested maximizer does not exist, so downstream quantities are undefined."""

    def __init__(self, message: str, *, exists_full: bool = True, exists_null: bool = True):
        super().__init__(message)
        self.exists_full = exists_full
        self.exists_null = exists_null


def _content_lines(source: TextSource) -> Iterator[tuple[int, str]]:
    """Yield (line_number, payload) pairs with comments and blanks stripped."""
    if isinstance(source, str):
        lines: Iterable[str] = io.StringIO(source)
    else:
        lines = source
    for lineno, raw in enumerate(lines, start=1):
        body = raw.split("#", 1)[0].strip()
        if body:
            yield lineno, body


def _parse_int(token: str, lineno: int, what: str) -> int:
    try:
        value = int(token)
    except ValueError:
        raise DataFormatError(f"line {lineno}: {what} {token!r} is not an integer") from None
    return value


def _parse_header(body: str, lineno: int) -> int:
    n = _parse_int(body[2:].strip(), lineno, "node count")
    if n < MIN_NODES:
        raise DataFormatError(f"line {lineno}: need at least {MIN_NODES} nodes, got {n}")
    return n


@dataclass(frozen=True, eq=False)
class UndirectedGraph:
    """Simple undirected graph held as a dense symmetric 0/1 matrix."""

    adj: np.ndarray
    degrees: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        a = np.asarray(self.adj)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("adjacency matrix must be square")
        if a.shape[0] < MIN_NODES:
            raise ValueError(f"need at least {MIN_NODES} nodes, got {a.shape[0]}")
        if not np.isin(a, (0, 1)).all():
            raise ValueError("adjacency entries must be 0 or 1")
        a = a.astype(np.int8)
        if np.any(np.diag(a) != 0):
            raise ValueError("self-loops are not allowed")
        if not np.array_equal(a, a.T):
            raise ValueError("adjacency matrix must be symmetric")
        a.setflags(write=False)
        object.__setattr__(self, "adj", a)
        object.__setattr__(self, "degrees", a.sum(axis=1, dtype=np.int64))

    @property
    def n(self) -> int:
        return self.adj.shape[0]

    @property
    def edge_count(self) -> int:
        return int(self.degrees.sum()) // 2

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "UndirectedGraph":
        adj = np.zeros((n, n), dtype=np.int8)
        for i, j in edges:
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"edge ({i},{j}) out of range for n={n}")
            if i == j:
                raise ValueError(f"self-loop at node {i}")
            adj[i, j] = adj[j, i] = 1
        return cls(adj)

    def edges(self) -> list[tuple[int, int]]:
        iu = np.triu_indices(self.n, k=1)
        mask = self.adj[iu] == 1
        return list(zip(iu[0][mask].tolist(), iu[1][mask].tolist()))

    def to_text(self) -> str:
        out = [f"n={self.n}"]
        out.extend(f"{i} {j}" for i, j in self.edges())
        return "\n".join(out) + "\n"


@dataclass(frozen=True, eq=False)
class ComparisonTable:
    """Directed win counts between subjects; ``wins[i, j]`` is how often i beat j."""

    wins: np.ndarray
    degrees: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        w = np.asarray(self.wins)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValueError("wins matrix must be square")
        if w.shape[0] < MIN_NODES:
            raise ValueError(f"need at least {MIN_NODES} subjects, got {w.shape[0]}")
        if not np.issubdtype(w.dtype, np.integer):
            if not np.array_equal(w, np.round(w)):
                raise ValueError("win counts must be integers")
        w = w.astype(np.int64)
        if np.any(w < 0):
            raise ValueError("win counts must be nonnegative")
        if np.any(np.diag(w) != 0):
            raise ValueError("self-comparisons are not allowed")
        w.setflags(write=False)
        object.__setattr__(self, "wins", w)
        object.__setattr__(self, "degrees", w.sum(axis=1))

    @property
    def n(self) -> int:
        return self.wins.shape[0]

    @property
    def totals(self) -> np.ndarray:
        """Symmetric matrix of comparison counts per pair."""
        return self.wins + self.wins.T

    def to_text(self) -> str:
        out = [f"n={self.n}"]
        nz = np.argwhere(self.wins > 0)
        out.extend(f"{i},{j},{self.wins[i, j]}" for i, j in nz)
        return "\n".join(out) + "\n"


@dataclass(frozen=True)
class ParameterVector:
    """A parameter vector tagged with the model it belongs to.

    For the paired-comparison model the first entry is the reference subject
    and must be exactly zero.
    """

    beta: np.ndarray
    model: str

    def __post_init__(self) -> None:
        if self.model not in ("beta", "bt"):
            raise ValueError(f"unknown model tag {self.model!r}")
        b = np.asarray(self.beta, dtype=float)
        if b.ndim != 1:
            raise ValueError("parameter vector must be one-dimensional")
        if not np.all(np.isfinite(b)):
            raise ValueError("parameters must be finite")
        if self.model == "bt" and b.size and b[0] != 0.0:
            raise ValueError("reference subject parameter must be 0")
        b.setflags(write=False)
        object.__setattr__(self, "beta", b)

    @property
    def n(self) -> int:
        return self.beta.size


def as_model_params(beta, model: str) -> np.ndarray:
    """Return a validated plain array for ``model`` from an array or ParameterVector."""
    if isinstance(beta, ParameterVector):
        if beta.model != model:
            raise ValueError(f"parameter vector is tagged {beta.model!r}, expected {model!r}")
        return beta.beta
    b = np.asarray(beta, dtype=float)
    if b.ndim != 1:
        raise ValueError("parameter vector must be one-dimensional")
    if not np.all(np.isfinite(b)):
        raise ValueError("parameters must be finite")
    if model == "bt" and b.size and b[0] != 0.0:
        raise ValueError("reference subject parameter must be 0")
    return b


@dataclass(frozen=True)
class NullHypothesis:
    """Constraint on the first r parameters.

    kind="specified" pins them to given values; kind="homogeneous" ties them
    to a common unknown value.  For the paired-comparison model the first
    subject is the zero reference, so a specified null carries values for
    subjects 2..r only (r-1 numbers, relative to the reference) and a
    homogeneous null ties subjects 2..r to one unknown level, which is r-2
    effective constraints.
    """

    kind: str
    r: int
    values: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        if self.kind not in ("specified", "homogeneous"):
            raise ValueError(f"unknown null kind {self.kind!r}")
        if self.r < 0:
            raise ValueError("r must be nonnegative")
        if self.kind == "specified":
            v = np.asarray(self.values if self.values is not None else [], dtype=float)
            if v.ndim != 1:
                raise ValueError("null values must be one-dimensional")
            if not np.all(np.isfinite(v)):
                raise ValueError("null values must be finite")
            v.setflags(write=False)
            object.__setattr__(self, "values", v)
        else:
            if self.values is not None:
                raise ValueError("homogeneous null carries no values")
            if self.r < 2:
                raise ValueError("homogeneous null needs r >= 2")

    @classmethod
    def specified(cls, r: int, values) -> "NullHypothesis":
        return cls(kind="specified", r=r, values=np.asarray(values, dtype=float))

    @classmethod
    def homogeneous(cls, r: int) -> "NullHypothesis":
        return cls(kind="homogeneous", r=r)

    def validate_for(self, model: str, n: int) -> None:
        if model not in ("beta", "bt"):
            raise ValueError(f"unknown model {model!r}")
        if self.r > n:
            raise ValueError(f"null touches {self.r} parameters but there are only {n}")
        if model == "bt" and self.r < 2:
            raise ValueError("paired-comparison nulls must include the reference subject (r >= 2)")
        if self.kind == "specified":
            expected = self.r if model == "beta" else self.r - 1
            if self.values.size != expected:
                raise ValueError(
                    f"specified null for model {model!r} with r={self.r} "
                    f"needs {expected} values, got {self.values.size}"
                )

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind, "r": self.r}
        if self.kind == "specified":
            out["values"] = [float(v) for v in self.values]
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "NullHypothesis":
        if d.get("kind") == "specified":
            return cls.specified(int(d["r"]), d.get("values", []))
        return cls.homogeneous(int(d["r"]))


def load_edge_list(source: TextSource) -> UndirectedGraph:
    """Parse an undirected edge list.

    Lines hold two ids separated by whitespace or a comma.  Duplicate edges
    collapse to one.  Rejects self-loops, ids outside a declared n, and empty
    input.
    """
    declared: Optional[int] = None
    edges: list[tuple[int, int]] = []
    max_id = -1
    saw_content = False
    for lineno, body in _content_lines(source):
        if body.startswith("n=") and not saw_content:
            declared = _parse_header(body, lineno)
            saw_content = True
            continue
        saw_content = True
        if body.startswith("n="):
            raise DataFormatError(f"line {lineno}: n= header must be the first content line")
        toks = body.replace(",", " ").split()
        if len(toks) != 2:
            raise DataFormatError(f"line {lineno}: expected two node ids, got {body!r}")
        i = _parse_int(toks[0], lineno, "node id")
        j = _parse_int(toks[1], lineno, "node id")
        if i < 0 or j < 0:
            raise DataFormatError(f"line {lineno}: node ids must be nonnegative")
        if i == j:
            raise DataFormatError(f"line {lineno}: self-loop at node {i}")
        if declared is not None and (i >= declared or j >= declared):
            raise DataFormatError(f"line {lineno}: node id exceeds declared n={declared}")
        edges.append((i, j))
        max_id = max(max_id, i, j)
    if not saw_content:
        raise DataFormatError("empty input")
    n = declared if declared is not None else max_id + 1
    if n < MIN_NODES:
        raise DataFormatError(f"need at least {MIN_NODES} nodes, inferred n={n}")
    return UndirectedGraph.from_edges(n, edges)


def load_comparisons(source: TextSource) -> ComparisonTable:
    """Parse comparison records ``i,j,w`` meaning subject i beat subject j w times.

    Repeated (i, j) records accumulate.
    """
    declared: Optional[int] = None
    records: list[tuple[int, int, int]] = []
    max_id = -1
    saw_content = False
    for lineno, body in _content_lines(source):
        if body.startswith("n=") and not saw_content:
            declared = _parse_header(body, lineno)
            saw_content = True
            continue
        saw_content = True
        if body.startswith("n="):
            raise DataFormatError(f"line {lineno}: n= header must be the first content line")
        toks = [t.strip() for t in body.replace(",", " ").split()]
        if len(toks) != 3:
            raise DataFormatError(f"line {lineno}: expected 'i,j,w', got {body!r}")
        i = _parse_int(toks[0], lineno, "subject id")
        j = _parse_int(toks[1], lineno, "subject id")
        w = _parse_int(toks[2], lineno, "win count")
        if i < 0 or j < 0:
            raise DataFormatError(f"line {lineno}: subject ids must be nonnegative")
        if i == j:
            raise DataFormatError(f"line {lineno}: subject {i} cannot play itself")
        if w < 0:
            raise DataFormatError(f"line {lineno}: win count must be nonnegative")
        if declared is not None and (i >= declared or j >= declared):
            raise DataFormatError(f"line {lineno}: subject id exceeds declared n={declared}")
        records.append((i, j, w))
        max_id = max(max_id, i, j)
    if not saw_content:
        raise DataFormatError("empty input")
    n = declared if declared is not None else max_id + 1
    if n < MIN_NODES:
        raise DataFormatError(f"need at least {MIN_NODES} subjects, inferred n={n}")
    wins = np.zeros((n, n), dtype=np.int64)
    for i, j, w in records:
        wins[i, j] += w
    return ComparisonTable(wins)


def load_vector(source: TextSource) -> np.ndarray:
    """Parse one float per line, with the usual comment and blank handling."""
    values: list[float] = []
    for lineno, body in _content_lines(source):
        try:
            values.append(float(body))
        except ValueError:
            raise DataFormatError(f"line {lineno}: {body!r} is not a number") from None
    if not values:
        raise DataFormatError("empty input")
    return np.asarray(values, dtype=float)


def degrees(data: Union[UndirectedGraph, ComparisonTable]) -> np.ndarray:
    """Degree sequence of a graph, or win totals of a comparison table."""
    return data.degrees
