"""Overlapping clusters read off the support of the loading columns.

Cluster a collects the variables with a nonzero loading on factor a; a
variable belongs to every cluster whose factor it loads on, so clusters
overlap.  Variables with an all-zero row form the noise cluster, and each
cluster splits into two direction sub-groups by loading sign (which of the
two is called positive is a labelling convention only).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .rows import LoadingEstimate

__all__ = ["ClusterSet", "clusters_from_loadings"]


@dataclass
class ClusterSet:
    """Overlapping groups, the noise group, and per-group direction splits."""

    groups: list[np.ndarray]
    noise: np.ndarray
    direction: list[tuple[np.ndarray, np.ndarray]]

    @property
    def k(self) -> int:
        return len(self.groups)

    @property
    def p(self) -> int:
        sizes = int(self.noise.size)
        members = set(int(i) for g in self.groups for i in g) | set(
            int(i) for i in self.noise
        )
        return sizes if not members else max(members) + 1

    def to_json(self) -> dict:
        """JSON form with 1-based indices."""
        return {
            "K": self.k,
            "groups": [[int(i) + 1 for i in g] for g in self.groups],
            "noise": [int(i) + 1 for i in self.noise],
            "direction": [
                {"pos": [int(i) + 1 for i in pos], "neg": [int(i) + 1 for i in neg]}
                for pos, neg in self.direction
            ],
        }


def clusters_from_loadings(
    loading: Union[LoadingEstimate, np.ndarray], zero_tol: float = 0.0
) -> ClusterSet:
    """Derive the cluster set from a loading matrix.

    Entries with absolute value at most ``zero_tol`` count as zero.  The
    default 0 uses the exact support, which is what the sparse row
    estimators produce.
    """
    if zero_tol < 0:
        raise ValueError("zero_tol must be nonnegative")
    a = loading.a_hat if isinstance(loading, LoadingEstimate) else np.asarray(loading, dtype=float)
    a = np.atleast_2d(a)
    groups = []
    direction = []
    for col in a.T:
        groups.append(np.nonzero(np.abs(col) > zero_tol)[0])
        direction.append(
            (np.nonzero(col > zero_tol)[0], np.nonzero(col < -zero_tol)[0])
        )
    noise = np.nonzero((np.abs(a) <= zero_tol).all(axis=1))[0]
    return ClusterSet(groups=groups, noise=noise, direction=direction)
