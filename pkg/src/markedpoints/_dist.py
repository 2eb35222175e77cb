"""Domain-aware pairwise distance helpers shared by the estimator modules."""

from __future__ import annotations

import numpy as np
from scipy.spatial.distance import cdist

from .errors import ValidationError
from .geometry import network_cross_distances
from .pattern import MarkedPointPattern


def pair_distances(p: MarkedPointPattern) -> np.ndarray:
    """(n, n) matrix of interpoint distances, Euclidean or shortest-path."""
    if p.is_network:
        if p.n == 0:
            return np.zeros((0, 0))
        d = network_cross_distances(p.domain, p.locations(), p.locations())
        np.fill_diagonal(d, 0.0)
        return d
    xy = p.coords()
    return cdist(xy, xy) if p.n else np.zeros((0, 0))


def cross_distances(pa: MarkedPointPattern, pb: MarkedPointPattern) -> np.ndarray:
    """(na, nb) distances between two patterns sharing one domain."""
    if pa.domain is not pb.domain and pa.is_network != pb.is_network:
        raise ValidationError("patterns live on different domain kinds")
    if pa.n == 0 or pb.n == 0:
        return np.zeros((pa.n, pb.n))
    if pa.is_network:
        return network_cross_distances(pa.domain, pa.locations(), pb.locations())
    return cdist(pa.coords(), pb.coords())
