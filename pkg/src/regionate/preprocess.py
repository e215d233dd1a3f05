"""Feature preprocessing: constant-column removal, z-scoring, PCA.

The pipeline mirrors common practice for multivariate regionalization
inputs: drop columns with (near) zero variance, standardize each
remaining column to zero mean and unit sample variance (ddof=1), then
project onto the leading principal components of the correlation matrix,
keeping the smallest prefix whose cumulative explained-variance ratio
reaches ``variance_target`` (default 0.85).

Because the input to the PCA is standardized, the covariance matrix of
the standardized data *is* the correlation matrix of the raw columns;
eigenvalues are clamped at zero to absorb tiny negative round-off and
ratios are normalized by the full eigenvalue sum so they end at exactly
1.0.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .data import STAGE_REDUCED, Dataset, FeatureMatrix
from ._validation import as_feature_array

_CONSTANT_STD_TOL = 1e-12


def _standardize(values):
    """Drop constant columns, z-score the rest. Returns (z, kept, mean, std)."""
    std = values.std(axis=0, ddof=1)
    kept = np.flatnonzero(std > _CONSTANT_STD_TOL)
    if kept.size == 0:
        raise ValueError("no informative features: every column is constant")
    mean = values[:, kept].mean(axis=0)
    std = std[kept]
    return (values[:, kept] - mean) / std, kept, mean, std


def _principal_axes(z):
    """Eigendecomposition of the correlation matrix, eigenvalues descending."""
    n = z.shape[0]
    corr = (z.T @ z) / (n - 1)
    vals, vecs = np.linalg.eigh(corr)
    order = np.argsort(vals)[::-1]
    vals = np.maximum(vals[order], 0.0)
    return vals, vecs[:, order]


def _n_keep(vals, variance_target):
    cum = np.cumsum(vals)
    ratios = cum / cum[-1]
    return int(np.searchsorted(ratios, variance_target - 1e-12) + 1)


class FeaturePreprocessor(BaseEstimator, TransformerMixin):
    """Standardize features and reduce them with correlation-matrix PCA.

    Parameters
    ----------
    variance_target : float, default=0.85
        Keep the smallest leading set of components whose cumulative
        explained-variance ratio is at least this value.

    Attributes
    ----------
    kept_columns_ : ndarray
        Indices of the non-constant input columns.
    mean_, scale_ : ndarray
        Per-kept-column mean and sample standard deviation (ddof=1).
    components_ : ndarray of shape (n_components, n_kept)
        Principal axes, rows ordered by decreasing eigenvalue.
    explained_variance_ratio_ : ndarray
        Ratio per retained component.
    n_components_ : int
    """

    def __init__(self, variance_target: float = 0.85):
        self.variance_target = variance_target

    def fit(self, X, y=None):
        if not 0.0 < self.variance_target <= 1.0:
            raise ValueError("variance_target must be in (0, 1]")
        values = as_feature_array(X)
        z, kept, mean, std = _standardize(values)
        vals, vecs = _principal_axes(z)
        n_keep = _n_keep(vals, self.variance_target)

        self.n_features_in_ = values.shape[1]
        self.kept_columns_ = kept
        self.mean_ = mean
        self.scale_ = std
        self.eigenvalues_ = vals
        self.components_ = vecs[:, :n_keep].T
        total = vals.sum()
        self.explained_variance_ratio_ = vals[:n_keep] / total
        self.n_components_ = n_keep
        return self

    def transform(self, X):
        values = as_feature_array(X)
        if values.shape[1] != self.n_features_in_:
            raise ValueError(
                f"expected {self.n_features_in_} features, got {values.shape[1]}"
            )
        z = (values[:, self.kept_columns_] - self.mean_) / self.scale_
        return z @ self.components_.T


def preprocess(dataset: Dataset, variance_target: float = 0.85) -> Dataset:
    """Standardize + reduce a dataset's features; stage becomes 'reduced'."""
    prep = FeaturePreprocessor(variance_target=variance_target)
    reduced = prep.fit_transform(dataset.features.values)
    names = tuple(f"pc{i + 1}" for i in range(reduced.shape[1]))
    return dataset.with_features(
        FeatureMatrix(reduced, stage=STAGE_REDUCED, names=names)
    )
