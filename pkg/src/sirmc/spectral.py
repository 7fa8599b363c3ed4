"""Generalized singular-value shrinkage.

Applies a penalty's scalar proximity operator to the spectrum of a dense
matrix. For nondecreasing proximity operators (all penalties in this
package) this solves the spectral proximal subproblem used by the solver's
estimate update.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonFiniteInput, SvdFailure
from .penalties import Penalty, prox_eval


@dataclass(frozen=True)
class SvdTriplet:
    """Thin SVD D = U @ diag(S) @ V.T with S sorted nonincreasing."""

    U: np.ndarray
    S: np.ndarray
    V: np.ndarray

    @classmethod
    def of(cls, D: np.ndarray) -> "SvdTriplet":
        try:
            U, s, Vh = np.linalg.svd(D, full_matrices=False)
        except np.linalg.LinAlgError as exc:
            raise SvdFailure(f"SVD did not converge: {exc}") from exc
        return cls(U, s, Vh.T)


def shrink_singular_values(D: np.ndarray, penalty: Penalty) -> np.ndarray:
    """Return U @ diag(P(sigma_i)) @ V.T where P is the penalty's prox.

    Output singular values are the prox of the input's; in particular any
    input with spectral norm <= lam maps to the zero matrix.
    """
    D = np.asarray(D, dtype=float)
    if D.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {D.shape}")
    if not np.isfinite(D).all():
        raise NonFiniteInput("matrix contains NaN or inf")
    svd = SvdTriplet.of(D)
    return (svd.U * prox_eval(penalty, svd.S)) @ svd.V.T
