"""scikit-learn style wrappers.

A batch of states is a 3-D array ``(n, d, d)``.  :class:`CoherenceTransformer`
maps it to an ``(n, n_measures)`` feature matrix, so coherence values can be
used inside a :class:`sklearn.pipeline.Pipeline`.  Nothing is learned; ``fit``
only validates the input and records its dimension.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .exceptions import DimensionMismatchError
from .measures import MeasureId, evaluate
from .states import validate_density
from .tracedist import SolverOptions


def check_density_batch(X) -> np.ndarray:
    """Validate a ``(n, d, d)`` batch (a single ``(d, d)`` state is promoted)."""
    A = np.asarray(X, dtype=complex)
    if A.ndim == 2:
        A = A[None]
    if A.ndim != 3 or A.shape[1] != A.shape[2] or A.shape[0] == 0:
        raise ValueError(f"expected a non-empty (n, d, d) array, got shape {A.shape}")
    return np.stack([validate_density(R) for R in A])


class CoherenceTransformer(TransformerMixin, BaseEstimator):
    """Coherence features of density matrices.

    Parameters
    ----------
    measures : sequence of str, default ("l1", "relent")
        Measure names accepted by :meth:`MeasureId.parse`.
    tol : float, default 1e-7
        Solver tolerance for the iterative measures.
    seed : int, default 0
        Seed for solver restarts.
    """

    def __init__(self, measures=("l1", "relent"), tol=1e-7, seed=0):
        self.measures = measures
        self.tol = tol
        self.seed = seed

    def fit(self, X, y=None):
        A = check_density_batch(X)
        self.measure_ids_ = [MeasureId.parse(m) for m in self.measures]
        self.n_dim_ = A.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "measure_ids_")
        A = check_density_batch(X)
        if A.shape[1] != self.n_dim_:
            raise DimensionMismatchError(f"fitted on d={self.n_dim_}, got d={A.shape[1]}")
        opts = SolverOptions(tol=self.tol, seed=self.seed)
        return np.array([[evaluate(m, R, opts) for m in self.measure_ids_] for R in A])

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "measure_ids_")
        return np.array([f"c_{m}" for m in self.measure_ids_], dtype=object)


class TraceDistanceCoherence(CoherenceTransformer):
    """Single-column transformer for C_tr."""

    def __init__(self, tol=1e-7, seed=0):
        super().__init__(measures=("trace",), tol=tol, seed=seed)

    def get_params(self, deep=True):
        return {"tol": self.tol, "seed": self.seed}
