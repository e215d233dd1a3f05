"""Generalized spectral embedding from the constrained Laplacian.

Solves ``L r = lambda D r`` for the k smallest eigenpairs by the
standard symmetric reduction: with ``M = D^{-1/2} L D^{-1/2}`` solve
``M u = lambda u`` and map back ``r = D^{-1/2} u``. The returned columns
are ordered by ascending eigenvalue, are D-orthonormal (``r_i' D r_j =
delta_ij``), and each is sign-fixed so its largest-magnitude entry is
positive. Column 0 carries the trivial eigenvector (eigenvalue ~ 0 per
connected component of the affinity support).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .affinity import LaplacianPair
from .errors import NumericalError

_ZERO_DEGREE_TOL = 1e-12


@dataclass(frozen=True)
class SpectralEmbedding:
    """k smallest generalized eigenpairs; vectors is (n, k), column j
    pairs with eigenvalues[j]."""

    vectors: np.ndarray
    eigenvalues: np.ndarray


def fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip each column so its largest-magnitude entry is positive."""
    vectors = np.array(vectors, dtype=float)
    for j in range(vectors.shape[1]):
        col = vectors[:, j]
        if col[np.argmax(np.abs(col))] < 0:
            vectors[:, j] = -col
    return vectors


def spectral_embedding(lap: LaplacianPair, k: int) -> SpectralEmbedding:
    """k smallest eigenpairs of ``L r = lambda D r``.

    Raises NumericalError when a degree is nonpositive (an isolated
    vertex under the combined affinity) or the eigensolver fails.
    """
    lap_m = np.asarray(lap.matrix, dtype=float)
    degrees = np.asarray(lap.degrees, dtype=float)
    n = lap_m.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must satisfy 1 <= k <= {n}, got {k}")
    if degrees.min() <= _ZERO_DEGREE_TOL:
        bad = int(np.argmin(degrees))
        raise NumericalError(
            f"vertex {bad} has nonpositive degree {degrees[bad]:.3g} under the "
            "combined affinity; increase delta or sigma"
        )

    inv_sqrt = 1.0 / np.sqrt(degrees)
    sym = lap_m * inv_sqrt[:, None] * inv_sqrt[None, :]
    sym = (sym + sym.T) / 2.0
    try:
        vals, vecs = scipy.linalg.eigh(sym, subset_by_index=[0, k - 1])
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigendecomposition failed: {exc}") from exc
    if not (np.isfinite(vals).all() and np.isfinite(vecs).all()):
        raise NumericalError("eigendecomposition produced non-finite values")

    vectors = fix_signs(inv_sqrt[:, None] * vecs)
    return SpectralEmbedding(vectors, vals)


# the embedding is defined by the generalized eigenproblem it solves;
# both names refer to the same operation
generalized_eigs = spectral_embedding
