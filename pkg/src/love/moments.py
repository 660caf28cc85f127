"""Moment estimators built on the signed pure partition.

Given the covariance and the signed partition, the factor covariance is
recovered by averaging sign-corrected covariance entries across pure groups,
and for every non-pure variable j the vector of sign-corrected averages
against each group estimates C A_j, the cross-covariance between the factors
and X_j.
"""

from __future__ import annotations

from typing import Optional, Union

import numpy as np

from .covariance import CovMatrix, cov_values
from .model import PurePartition
from .pure import pure_loading_matrix

__all__ = [
    "estimate_factor_covariance",
    "estimate_cross_covariance",
    "estimate_cross_covariance_matrix",
]


def estimate_factor_covariance(
    sigma: Union[CovMatrix, np.ndarray], partition: PurePartition
) -> np.ndarray:
    """Estimate Cov(Z) from the pure blocks of the covariance.

    Diagonal entries average |Sigma_ij| over ordered pairs i != j inside a
    group (denominator m (m - 1)); off-diagonal entries average the
    sign-corrected cross-group entries.  On a population covariance with the
    exact partition this recovers C up to the group sign alignment.
    """
    if partition.signs is None:
        raise ValueError("partition carries no signs; run estimate_pure_rows first")
    s = cov_values(sigma)
    k = partition.k
    c_hat = np.zeros((k, k))
    signed = [
        np.array([partition.signs[int(i)] for i in g], dtype=float)
        for g in partition.groups
    ]
    for a, g in enumerate(partition.groups):
        m = g.size
        if m < 2:
            raise ValueError(f"group {a} has fewer than two members")
        block = np.abs(s[np.ix_(g, g)])
        c_hat[a, a] = (block.sum() - np.trace(block)) / (m * (m - 1))
    for a in range(k):
        ga, sa = partition.groups[a], signed[a]
        for b in range(a + 1, k):
            gb, sb = partition.groups[b], signed[b]
            value = sa @ s[np.ix_(ga, gb)] @ sb / (ga.size * gb.size)
            c_hat[a, b] = c_hat[b, a] = value
    return c_hat


def estimate_cross_covariance(
    sigma: Union[CovMatrix, np.ndarray], partition: PurePartition, j: int
) -> np.ndarray:
    """Sign-corrected group averages of Sigma entries against variable j.

    Estimates C A_j for a non-pure j; requesting a pure index is an error.
    """
    if int(j) in set(int(i) for i in partition.pure_set):
        raise ValueError(f"variable {j} is pure; cross moments target non-pure rows")
    return estimate_cross_covariance_matrix(sigma, partition, np.array([j]))[:, 0]


def estimate_cross_covariance_matrix(
    sigma: Union[CovMatrix, np.ndarray],
    partition: PurePartition,
    cols: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Cross moments for many variables at once, one column per variable.

    ``cols`` defaults to every non-pure index, ascending.  Shape (k, len(cols)).
    """
    if partition.signs is None:
        raise ValueError("partition carries no signs; run estimate_pure_rows first")
    s = cov_values(sigma)
    if cols is None:
        cols = np.setdiff1d(np.arange(s.shape[0]), partition.pure_set)
    cols = np.asarray(cols, dtype=int)
    pure_idx, rows = pure_loading_matrix(partition)
    sizes = np.array([g.size for g in partition.groups], dtype=float)
    # theta_a = (1/m_a) sum_{i in group a} sign_i Sigma_ij
    return (rows.T @ s[np.ix_(pure_idx, cols)]) / sizes[:, None]
