"""ECH capacity sequences of toric domains.

Generators cover balls, ellipsoids, polydisks, concave regions (through their
weight expansion) and finite disjoint unions, which combine by max-plus
convolution.
"""
import logging
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from echcap.models import (
    Ball,
    Bidisk,
    CapacitySequence,
    Concave,
    ConcaveRegion,
    EchcapError,
    Ellipsoid,
    Polydisk,
    Union,
)
from echcap.services.geometry import sample_omega0
from echcap.services.weights import weight_sequence

logger = logging.getLogger(__name__)


class CapacityError(EchcapError, ValueError):
    """Raised for invalid capacity requests."""
    pass


def _check_positive(*params: float) -> None:
    if any(not p > 0 for p in params):
        raise CapacityError(f"scale parameters must be positive, got {params}")


def _check_K(K: int) -> None:
    if K < 0:
        raise CapacityError(f"K must be non-negative, got {K}")


def ellipsoid_caps(a: float, b: float, K: int) -> CapacitySequence:
    """c_k(E(a, b)): the (k+1)-th smallest of {m a + n b} counted with multiplicity."""
    _check_positive(a, b)
    _check_K(K)
    idx = np.arange(K + 1, dtype=float)
    lattice = np.add.outer(idx * a, idx * b).ravel()
    # m + n <= K already covers the first K + 1 values
    values = np.partition(lattice, K)[:K + 1] if lattice.size > K + 1 else lattice
    return CapacitySequence(np.sort(values))


def ball_caps(a: float, K: int) -> CapacitySequence:
    return ellipsoid_caps(a, a, K)


def polydisk_caps(a: float, b: float, K: int) -> CapacitySequence:
    """c_k(P(a, b)) = min{a m + b n : (m + 1)(n + 1) >= k + 1}."""
    _check_positive(a, b)
    _check_K(K)
    k = np.arange(K + 1)[:, None]
    m = np.arange(K + 1)[None, :]
    n = np.ceil((k + 1) / (m + 1)) - 1
    values = (a * m + b * n).min(axis=1)
    return CapacitySequence(values)


def max_plus(x: np.ndarray, y: np.ndarray, K: int) -> np.ndarray:
    """(x ⊕ y)_k = max_{i+j=k} x_i + y_j for k = 0..K."""
    out = np.empty(K + 1)
    for k in range(K + 1):
        out[k] = np.max(x[:k + 1] + y[k::-1])
    return out


def union_caps(parts: Sequence[CapacitySequence], K: int) -> CapacitySequence:
    """Capacities of a disjoint union, folding the parts left to right."""
    if not parts:
        raise CapacityError("a union needs at least one part")
    _check_K(K)
    for part in parts:
        if part.K < K:
            raise CapacityError(f"part has only {part.K + 1} capacities, need {K + 1}")
    acc = np.asarray(parts[0].values[:K + 1], dtype=float)
    for part in parts[1:]:
        acc = max_plus(acc, part.values[:K + 1], K)
    return CapacitySequence(acc)


def _ball_unit_caps(K: int) -> np.ndarray:
    """c_k(B(1)): the smallest d with d(d + 3)/2 >= k."""
    k = np.arange(K + 1)
    return np.ceil((np.sqrt(9.0 + 8.0 * k) - 3.0) / 2.0 - 1e-12)


def concave_caps(r: ConcaveRegion, K: int, w_min: float = 0.0,
                 k_weights: Optional[int] = None) -> CapacitySequence:
    """Capacities of a concave toric domain as the union of balls of its weights.

    Only the K largest weights matter for c_0..c_K. The result is shorter than
    K + 1 only when ``w_min`` cuts the expansion before K weights.
    """
    _check_K(K)
    count = max(1, k_weights if k_weights is not None else K)
    seq = weight_sequence(r, count, w_min=w_min)
    unit = _ball_unit_caps(K)
    acc = np.zeros(K + 1)
    for w in seq.weights:
        acc = max_plus(acc, w * unit, K)
    if seq.truncated:
        length = len(seq.weights) + 1
        logger.warning(f"Expansion truncated by w_min={w_min}; returning {length} capacities")
        acc = acc[:length]
    return CapacitySequence(acc)


@lru_cache(maxsize=64)
def _cached_caps(spec, K: int) -> CapacitySequence:
    return _compute_caps(spec, K)


def _compute_caps(spec, K: int) -> CapacitySequence:
    if isinstance(spec, Ball):
        return ball_caps(spec.a, K)
    if isinstance(spec, Ellipsoid):
        return ellipsoid_caps(spec.a, spec.b, K)
    if isinstance(spec, Polydisk):
        return polydisk_caps(spec.a, spec.b, K)
    if isinstance(spec, Bidisk):
        logger.info(f"Computing bidisk capacities from omega0:{spec.samples} up to k={K}")
        return concave_caps(sample_omega0(spec.samples), K)
    if isinstance(spec, Concave):
        return concave_caps(spec.region, K, k_weights=spec.k_weights)
    if isinstance(spec, Union):
        return union_caps([capacities_of(part, K) for part in spec.parts], K)
    raise CapacityError(f"unsupported domain spec: {spec!r}")


def capacities_of(spec, K: int) -> CapacitySequence:
    """Capacities c_0..c_K of any DomainSpec (memoized for hashable specs)."""
    try:
        hash(spec)
    except TypeError:
        return _compute_caps(spec, K)
    return _cached_caps(spec, K)


def dominates(target: CapacitySequence, source: CapacitySequence,
              slack: float = 0.0) -> tuple[bool, Optional[int]]:
    """Whether source c_k <= target c_k + slack for every k; else the first violating k."""
    if len(target) != len(source):
        raise CapacityError(f"sequence lengths differ: {len(target)} vs {len(source)}")
    bad = np.flatnonzero(source.values > target.values + slack)
    if bad.size:
        return False, int(bad[0])
    return True, None
