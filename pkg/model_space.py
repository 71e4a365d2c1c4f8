"""
Model space for normal linear variable selection.

Holds the dataset and its centered design, the binary model indicators, and the
per-model least-squares statistics that drive every Bayes factor. Every model
is classified by its dimension against the sample size:

- regular:   k + k0 <  n
- saturated: k + k0 == n
- singular:  k + k0 >  n

Saturated and singular models fit the data exactly, so their SSE is set to zero
from the classification rather than read off floating-point residuals.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import linalg

from errors import (
    DatasetIOError,
    DatasetParseError,
    DatasetValidationError,
    DegenerateResponseError,
    RankDeficiencyError,
)

EPS = np.finfo(float).eps


class RankClass(str, Enum):
    REGULAR = "regular"
    SATURATED = "saturated"
    SINGULAR = "singular"


@dataclass
class Dataset:
    """Response y, candidate regressors X (n x p) and the intercept flag k0."""
    y: np.ndarray
    X: np.ndarray
    k0: int
    column_names: List[str] = field(default_factory=list)
    response_name: str = "y"

    @property
    def n(self) -> int:
        return int(self.X.shape[0])

    @property
    def p(self) -> int:
        return int(self.X.shape[1])

    @classmethod
    def from_arrays(
        cls,
        y: Sequence[float],
        X: Any,
        k0: int = 1,
        column_names: Optional[Sequence[str]] = None,
        response_name: str = "y",
    ) -> "Dataset":
        y_arr = np.asarray(y, dtype=float).reshape(-1)
        X_arr = np.asarray(X, dtype=float)
        if X_arr.ndim == 1:
            X_arr = X_arr.reshape(-1, 1)
        names = list(column_names) if column_names is not None else [
            f"x{j + 1}" for j in range(X_arr.shape[1])
        ]
        dataset = cls(y=y_arr, X=X_arr, k0=int(k0), column_names=names, response_name=response_name)
        validate_dataset(dataset)
        return dataset

    def head(self, rows: int) -> "Dataset":
        """Dataset restricted to the first `rows` observations."""
        return Dataset.from_arrays(
            self.y[:rows],
            self.X[:rows, :],
            k0=self.k0,
            column_names=self.column_names,
            response_name=self.response_name,
        )


def validate_dataset(d: Dataset) -> None:
    if d.k0 not in (0, 1):
        raise DatasetValidationError(f"k0 must be 0 or 1, got {d.k0}")
    if d.X.ndim != 2:
        raise DatasetValidationError("design matrix must be two-dimensional")
    if d.y.shape[0] != d.X.shape[0]:
        raise DatasetValidationError(
            f"response has {d.y.shape[0]} rows but design has {d.X.shape[0]}"
        )
    if d.n < 2:
        raise DatasetValidationError(f"need at least 2 observations, got {d.n}")
    if d.p < 1:
        raise DatasetValidationError("need at least one candidate regressor")
    if len(d.column_names) != d.p:
        raise DatasetValidationError(
            f"{len(d.column_names)} column names for {d.p} columns"
        )
    if not np.all(np.isfinite(d.y)) or not np.all(np.isfinite(d.X)):
        raise DatasetValidationError("dataset contains non-finite values")
    if d.k0 == 1:
        spans = np.ptp(d.X, axis=0)
        constant = np.flatnonzero(spans == 0.0)
        if constant.size:
            name = d.column_names[int(constant[0])]
            raise DatasetValidationError(
                f"column '{name}' is constant and collinear with the intercept",
                details={"column": name, "index": int(constant[0])},
            )


def _resolve_response_index(header: List[str], response_column: Union[str, int]) -> int:
    if isinstance(response_column, int):
        index = response_column
    else:
        text = str(response_column).strip()
        if text in header:
            index = header.index(text)
        elif text.isdigit():
            index = int(text)
        else:
            raise DatasetParseError(
                f"response column '{text}' not found in header",
                details={"column": text},
            )
    if index < 0 or index >= len(header):
        raise DatasetParseError(
            f"response column index {index} out of range for {len(header)} columns",
            details={"column": index},
        )
    return index


def load_dataset(
    path: Union[str, Path],
    response_column: Union[str, int] = 0,
    intercept: bool = True,
    *,
    max_rows: Optional[int] = None,
) -> Dataset:
    """
    Read a numeric CSV with a header row into a Dataset.

    The response column is chosen by header name or zero-based index; every other
    column is a candidate regressor, kept in file order. `max_rows` keeps only the
    first observations.
    """
    path_obj = Path(path)
    if not path_obj.is_file():
        raise DatasetIOError(f"dataset file not found: {path_obj}", details={"path": str(path_obj)})

    try:
        with path_obj.open("r", newline="") as f:
            reader = csv.reader(f)
            header = next(reader, None)
            if header is None:
                raise DatasetParseError("dataset file is empty", details={"path": str(path_obj)})
            header = [h.strip() for h in header]
            response_index = _resolve_response_index(header, response_column)

            rows: List[List[float]] = []
            for line_no, row in enumerate(reader, start=2):
                if not row or all(not cell.strip() for cell in row):
                    continue
                if len(row) != len(header):
                    raise DatasetParseError(
                        f"row {line_no} has {len(row)} cells, header has {len(header)}",
                        details={"row": line_no},
                    )
                values: List[float] = []
                for col_idx, cell in enumerate(row):
                    text = cell.strip()
                    try:
                        value = float(text)
                    except ValueError:
                        raise DatasetParseError(
                            f"non-numeric cell {text!r} at row {line_no}, column '{header[col_idx]}'",
                            details={"row": line_no, "column": header[col_idx]},
                        ) from None
                    if not math.isfinite(value):
                        raise DatasetParseError(
                            f"non-finite cell {text!r} at row {line_no}, column '{header[col_idx]}'",
                            details={"row": line_no, "column": header[col_idx]},
                        )
                    values.append(value)
                rows.append(values)
                if max_rows is not None and len(rows) >= max_rows:
                    break
    except OSError as exc:
        raise DatasetIOError(f"cannot read {path_obj}: {exc}", details={"path": str(path_obj)}) from exc

    if not rows:
        raise DatasetParseError("dataset has no data rows", details={"path": str(path_obj)})

    table = np.asarray(rows, dtype=float)
    y = table[:, response_index]
    X = np.delete(table, response_index, axis=1)
    names = [name for idx, name in enumerate(header) if idx != response_index]
    return Dataset.from_arrays(
        y,
        X,
        k0=1 if intercept else 0,
        column_names=names,
        response_name=header[response_index],
    )


@dataclass
class CenteredDesign:
    """Centered design V = (I - P_n) X (or X itself when k0 = 0) and the cached null fit."""
    V: np.ndarray
    column_means: np.ndarray
    column_scales: np.ndarray
    k0: int
    y_centered: np.ndarray
    sse_null: float
    y_max_abs: float = 0.0

    @property
    def n(self) -> int:
        return int(self.V.shape[0])

    @property
    def p(self) -> int:
        return int(self.V.shape[1])

    def columns(self, m: "ModelIndicator") -> np.ndarray:
        return self.V[:, m.indices]


def center_design(d: Dataset) -> CenteredDesign:
    X = d.X
    if d.k0 == 1:
        means = X.mean(axis=0)
        V = X - means
        y_centered = d.y - d.y.mean()
    else:
        means = np.zeros(d.p)
        V = X.copy()
        y_centered = d.y.copy()
    # Scales are kept for reports only; no rescaling is applied.
    scales = X.std(axis=0)
    return CenteredDesign(
        V=V,
        column_means=means,
        column_scales=scales,
        k0=d.k0,
        y_centered=y_centered,
        sse_null=float(y_centered @ y_centered),
        y_max_abs=float(np.max(np.abs(d.y))),
    )


@dataclass(frozen=True, eq=False)
class ModelIndicator:
    """Binary inclusion vector gamma with its dimension k."""
    gamma: np.ndarray
    k: int = field(init=False)

    def __post_init__(self) -> None:
        gamma = np.array(self.gamma, dtype=bool).reshape(-1)
        gamma.setflags(write=False)
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "k", int(np.count_nonzero(gamma)))
        object.__setattr__(self, "_key", np.packbits(gamma).tobytes())

    @classmethod
    def from_indices(cls, indices: Iterable[int], p: int) -> "ModelIndicator":
        gamma = np.zeros(p, dtype=bool)
        idx = list(indices)
        if idx:
            gamma[np.asarray(idx, dtype=int)] = True
        return cls(gamma)

    @classmethod
    def null(cls, p: int) -> "ModelIndicator":
        return cls(np.zeros(p, dtype=bool))

    @classmethod
    def full(cls, p: int) -> "ModelIndicator":
        return cls(np.ones(p, dtype=bool))

    @property
    def p(self) -> int:
        return int(self.gamma.shape[0])

    @property
    def key(self) -> bytes:
        return self._key  # type: ignore[attr-defined]

    @property
    def indices(self) -> np.ndarray:
        return np.flatnonzero(self.gamma)

    def flipped(self, j: int) -> "ModelIndicator":
        gamma = self.gamma.copy()
        gamma[j] = not gamma[j]
        return ModelIndicator(gamma)

    def hex(self) -> str:
        """gamma as a hex bitstring, covariate 1 in the most significant bit."""
        return self._key.hex()  # type: ignore[attr-defined]

    def sort_key(self) -> Tuple[int, Tuple[int, ...]]:
        return self.k, tuple(int(b) for b in self.gamma)

    def to_dict(self) -> Dict[str, Any]:
        return {"k": self.k, "indices": [int(i) for i in self.indices]}

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ModelIndicator):
            return NotImplemented
        return self.p == other.p and self.key == other.key

    def __hash__(self) -> int:
        return hash((self.p, self.key))

    def __repr__(self) -> str:
        return f"ModelIndicator(p={self.p}, indices={[int(i) for i in self.indices]})"


def classify(m: Union[ModelIndicator, int], n: int, k0: int) -> RankClass:
    k = m.k if isinstance(m, ModelIndicator) else int(m)
    total = k + k0
    if total < n:
        return RankClass.REGULAR
    if total == n:
        return RankClass.SATURATED
    return RankClass.SINGULAR


def expected_rank(k: int, n: int, k0: int) -> int:
    """Rank of V_gamma on a design satisfying the rank assumptions."""
    return min(k, n - k0)


def numerical_rank(A: np.ndarray) -> int:
    """Rank from a column-pivoted QR, tolerance max(n, k) * eps * largest column norm."""
    if A.size == 0:
        return 0
    R, _ = linalg.qr(A, mode="r", pivoting=True, check_finite=False)
    diag = np.abs(np.diag(R))
    if diag.size == 0 or diag[0] == 0.0:
        return 0
    tol = max(A.shape) * EPS * diag[0]
    return int(np.count_nonzero(diag > tol))


def rank_of_v(cd: CenteredDesign, m: ModelIndicator, k0: Optional[int] = None) -> int:
    k0 = cd.k0 if k0 is None else k0
    rank = numerical_rank(cd.columns(m))
    expected = expected_rank(m.k, cd.n, k0)
    if rank != expected:
        raise RankDeficiencyError(
            f"V_gamma has rank {rank}, expected {expected} for model {[int(i) for i in m.indices]}",
            details={"model": [int(i) for i in m.indices], "rank": rank, "expected": expected},
        )
    return rank


@dataclass
class ModelStats:
    model: ModelIndicator
    k: int
    sse: float
    q_ratio: float
    rank_class: RankClass
    rank_v: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            "model": self.model.to_dict(),
            "k": self.k,
            "sse": self.sse,
            "q_ratio": self.q_ratio,
            "rank_class": self.rank_class.value,
            "rank_v": self.rank_v,
        }


def check_response(cd: CenteredDesign) -> None:
    threshold = cd.n * (64.0 * EPS * cd.y_max_abs) ** 2
    if not cd.sse_null > threshold:
        raise DegenerateResponseError(
            "null-model SSE is zero: the response is constant"
            if cd.k0 == 1
            else "null-model SSE is zero: the response is identically zero",
            details={"sse_null": cd.sse_null},
        )


def model_stats(d: Dataset, cd: CenteredDesign, m: ModelIndicator) -> ModelStats:
    """SSE_gamma and Q_gamma = SSE_gamma / SSE_0 for one model."""
    check_response(cd)
    n, k0 = d.n, d.k0
    rank_class = classify(m, n, k0)
    if rank_class is not RankClass.REGULAR:
        return ModelStats(
            model=m,
            k=m.k,
            sse=0.0,
            q_ratio=0.0,
            rank_class=rank_class,
            rank_v=expected_rank(m.k, n, k0),
        )
    if m.k == 0:
        return ModelStats(model=m, k=0, sse=cd.sse_null, q_ratio=1.0, rank_class=rank_class, rank_v=0)

    Vg = cd.columns(m)
    Q, R, _ = linalg.qr(Vg, mode="economic", pivoting=True, check_finite=False)
    diag = np.abs(np.diag(R))
    tol = max(Vg.shape) * EPS * diag[0] if diag.size and diag[0] > 0 else 0.0
    rank = int(np.count_nonzero(diag > tol))
    if rank < m.k:
        raise RankDeficiencyError(
            f"regular model {[int(i) for i in m.indices]} has rank {rank} < k = {m.k}",
            details={"model": [int(i) for i in m.indices], "rank": rank, "expected": m.k},
        )
    resid = cd.y_centered - Q @ (Q.T @ cd.y_centered)
    sse = float(resid @ resid)
    return ModelStats(
        model=m,
        k=m.k,
        sse=sse,
        q_ratio=sse / cd.sse_null,
        rank_class=rank_class,
        rank_v=rank,
    )


@dataclass
class FullRankFactors:
    """V_gamma = L R with L of full column rank r and R of full row rank r."""
    L: np.ndarray
    R: np.ndarray

    @property
    def rank(self) -> int:
        return int(self.L.shape[1])

    def reconstruction_error(self, V: np.ndarray) -> float:
        if V.size == 0:
            return 0.0
        return float(np.max(np.abs(self.L @ self.R - V)))


def full_rank_factorize(cd: CenteredDesign, m: ModelIndicator) -> FullRankFactors:
    Vg = cd.columns(m)
    n, k = Vg.shape
    if k == 0:
        return FullRankFactors(L=np.zeros((n, 0)), R=np.zeros((0, 0)))
    rank = numerical_rank(Vg)
    if rank == k:
        Q, R = linalg.qr(Vg, mode="economic", check_finite=False)
        return FullRankFactors(L=Q, R=R)
    Q, R_piv, piv = linalg.qr(Vg, mode="economic", pivoting=True, check_finite=False)
    R = np.empty((rank, k))
    R[:, piv] = R_piv[:rank, :]
    return FullRankFactors(L=Q[:, :rank], R=R)


__all__ = [
    "RankClass",
    "Dataset",
    "validate_dataset",
    "load_dataset",
    "CenteredDesign",
    "center_design",
    "ModelIndicator",
    "classify",
    "expected_rank",
    "numerical_rank",
    "rank_of_v",
    "ModelStats",
    "check_response",
    "model_stats",
    "FullRankFactors",
    "full_rank_factorize",
]
