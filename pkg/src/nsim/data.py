"""Dataset container shared by the estimator, generators, and CLI."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError


def _as_float_array(values, ndim: int, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != ndim:
        raise DataError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise DataError(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise DataError(f"{name} contains non-finite values")
    return arr


@dataclass(frozen=True)
class Dataset:
    """N feature rows of dimension D paired with N scalar responses."""

    features: np.ndarray
    responses: np.ndarray

    def __post_init__(self):
        features = _as_float_array(self.features, 2, "features")
        responses = _as_float_array(self.responses, 1, "responses")
        if features.shape[0] != responses.shape[0]:
            raise DataError(
                f"feature rows ({features.shape[0]}) and responses "
                f"({responses.shape[0]}) differ in length"
            )
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "responses", responses)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    def subset(self, indices) -> "Dataset":
        indices = np.asarray(indices, dtype=np.intp)
        return Dataset(self.features[indices], self.responses[indices])
