"""Text file formats for matrices, models and vectors.

Matrix files are bit-exact: a header line ``N m d`` followed by N lines of
exactly d space-separated 0-based check-node indices (duplicates allowed).
Model files start with ``tree N D k``, ``group N M k`` or ``plain N k``;
tree files then carry N parent entries (-1 for the root) and group files M
lines ``size: i1 i2 ...``. Vectors are one value per line.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .expander import SparseBinaryMatrix
from .models import GroupModel, ModelSpec, PlainSparseModel, TreeModel


class FileFormatError(ValueError):
    """Raised for malformed matrix, model or vector files."""


def _read_lines(path: str | Path) -> list[str]:
    text = Path(path).read_text()
    return [line for line in text.splitlines() if line.strip()]


def save_matrix(matrix: SparseBinaryMatrix, path: str | Path) -> None:
    lines = [f"{matrix.n_left} {matrix.n_right} {matrix.degree}"]
    for col in matrix.columns:
        lines.append(" ".join(str(int(j)) for j in col))
    Path(path).write_text("\n".join(lines) + "\n")


def load_matrix(path: str | Path) -> SparseBinaryMatrix:
    lines = _read_lines(path)
    if not lines:
        raise FileFormatError(f"{path}: empty matrix file")
    header = lines[0].split()
    if len(header) != 3:
        raise FileFormatError(f"{path}: header must be 'N m d'")
    try:
        n, m, d = (int(tok) for tok in header)
    except ValueError as exc:
        raise FileFormatError(f"{path}: non-integer header field") from exc
    if len(lines) - 1 != n:
        raise FileFormatError(f"{path}: expected {n} column lines, found {len(lines) - 1}")
    columns = np.empty((n, d), dtype=np.int64)
    for i, line in enumerate(lines[1:]):
        toks = line.split()
        if len(toks) != d:
            raise FileFormatError(f"{path}: column {i} has {len(toks)} entries, expected {d}")
        try:
            columns[i] = [int(t) for t in toks]
        except ValueError as exc:
            raise FileFormatError(f"{path}: column {i} has a non-integer entry") from exc
    try:
        return SparseBinaryMatrix(n_left=n, n_right=m, degree=d, columns=columns)
    except ValueError as exc:
        raise FileFormatError(f"{path}: {exc}") from exc


def save_model(model: ModelSpec, path: str | Path) -> None:
    if isinstance(model, PlainSparseModel):
        text = f"plain {model.n} {model.budget}\n"
    elif isinstance(model, TreeModel):
        lines = [f"tree {model.n} {model.arity} {model.budget}"]
        lines.extend(str(p) for p in model.parent)
        text = "\n".join(lines) + "\n"
    elif isinstance(model, GroupModel):
        lines = [f"group {model.n} {model.n_groups} {model.budget}"]
        for g in model.groups:
            lines.append(f"{len(g)}: " + " ".join(str(i) for i in g))
        text = "\n".join(lines) + "\n"
    else:
        raise TypeError(f"unsupported model type: {type(model).__name__}")
    Path(path).write_text(text)


def load_model(path: str | Path) -> ModelSpec:
    lines = _read_lines(path)
    if not lines:
        raise FileFormatError(f"{path}: empty model file")
    header = lines[0].split()
    kind = header[0]
    try:
        if kind == "plain":
            if len(header) != 3:
                raise FileFormatError(f"{path}: plain header must be 'plain N k'")
            return PlainSparseModel(n=int(header[1]), budget=int(header[2]))
        if kind == "tree":
            if len(header) != 4:
                raise FileFormatError(f"{path}: tree header must be 'tree N D k'")
            n, arity, budget = int(header[1]), int(header[2]), int(header[3])
            toks = " ".join(lines[1:]).split()
            if len(toks) != n:
                raise FileFormatError(f"{path}: expected {n} parent entries, found {len(toks)}")
            return TreeModel(n=n, arity=arity, parent=tuple(int(t) for t in toks), budget=budget)
        if kind == "group":
            if len(header) != 4:
                raise FileFormatError(f"{path}: group header must be 'group N M k'")
            n, m, budget = int(header[1]), int(header[2]), int(header[3])
            if len(lines) - 1 != m:
                raise FileFormatError(f"{path}: expected {m} group lines, found {len(lines) - 1}")
            groups = []
            for line in lines[1:]:
                size_tok, sep, rest = line.partition(":")
                if not sep:
                    raise FileFormatError(f"{path}: group line missing 'size:' prefix")
                members = tuple(int(t) for t in rest.split())
                if int(size_tok) != len(members):
                    raise FileFormatError(
                        f"{path}: group declares size {size_tok} but lists {len(members)} indices"
                    )
                groups.append(members)
            return GroupModel(n=n, groups=tuple(groups), budget=budget)
    except FileFormatError:
        raise
    except ValueError as exc:
        raise FileFormatError(f"{path}: {exc}") from exc
    raise FileFormatError(f"{path}: unknown model kind {kind!r}")


def save_vector(x: np.ndarray, path: str | Path) -> None:
    Path(path).write_text("\n".join(repr(float(v)) for v in np.asarray(x)) + "\n")


def load_vector(path: str | Path, expected_length: int | None = None) -> np.ndarray:
    lines = _read_lines(path)
    try:
        x = np.array([float(line.strip()) for line in lines])
    except ValueError as exc:
        raise FileFormatError(f"{path}: non-numeric vector entry") from exc
    if expected_length is not None and x.size != expected_length:
        raise FileFormatError(
            f"{path}: expected {expected_length} values, found {x.size}"
        )
    return x
