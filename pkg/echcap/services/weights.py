import heapq
import itertools
import logging
from typing import Optional

import numpy as np

from echcap.models import ConcaveRegion, EchcapError, WeightSequence
from echcap.services.geometry import (
    CONTACT_TOLERANCE,
    min_functional,
    region_area,
    validate_chain,
)

logger = logging.getLogger(__name__)

AREA_MIN = 1e-12


class ExpansionExhausted(EchcapError):
    """Raised when a region is too small to carry another weight."""
    pass


def largest_triangle(r: ConcaveRegion, area_min: float = AREA_MIN,
                     tol: float = CONTACT_TOLERANCE) -> tuple[float, int, int]:
    """Size a of the largest T(a) inside the region, with the contact index range.

    Returns:
        (a, contact_first, contact_last)

    Raises:
        ExpansionExhausted: if the region's area is below ``area_min``
    """
    if region_area(r) < area_min:
        raise ExpansionExhausted(f"region area below {area_min}")
    return min_functional(r, 1.0, 1.0, tol=tol)


def _clean_chain(points: np.ndarray) -> Optional[np.ndarray]:
    """Drop vertices that break strict monotonicity; None if fewer than two remain."""
    def monotone(p, q) -> bool:
        return q[0] > p[0] and q[1] < p[1]

    kept = [points[0]]
    last = len(points) - 1
    for i in range(1, last + 1):
        p = points[i]
        if monotone(kept[-1], p):
            kept.append(p)
        elif i == last:
            # the axis endpoint always survives; interior vertices give way
            while len(kept) > 1 and not monotone(kept[-1], p):
                kept.pop()
            if not monotone(kept[-1], p):
                return None
            kept.append(p)
    if len(kept) < 2:
        return None
    return np.array(kept)


def _child(points: np.ndarray, area_min: float) -> Optional[ConcaveRegion]:
    chain = _clean_chain(points)
    if chain is None or chain[0, 1] <= 0.0 or chain[-1, 0] <= 0.0:
        return None
    try:
        # shears preserve convexity, so only the monotone shape is rechecked
        validate_chain(chain, check_convex=False)
    except EchcapError:
        logger.debug("Discarding degenerate child chain")
        return None
    region = ConcaveRegion(chain)
    if region_area(region) < area_min:
        return None
    return region


def split_region(r: ConcaveRegion, a: float, contact_first: int, contact_last: int,
                 area_min: float = AREA_MIN) -> tuple[Optional[ConcaveRegion], Optional[ConcaveRegion]]:
    """Remove T(a) and normalize the two corner pieces onto the axes.

    The upper piece (y-axis end of the chain down to the first contact) is moved
    by (x, y) -> (x, x + y - a); the lower piece (last contact to the x-axis end)
    by (x, y) -> (x + y - a, y). Either piece is None when it vanishes.
    """
    pts = r.vertices
    upper = lower = None
    if contact_first > 0:
        head = pts[:contact_first + 1]
        mapped = np.column_stack((head[:, 0], head[:, 0] + head[:, 1] - a))
        mapped[-1, 1] = 0.0
        upper = _child(mapped, area_min)
    if contact_last < len(pts) - 1:
        tail = pts[contact_last:]
        mapped = np.column_stack((tail[:, 0] + tail[:, 1] - a, tail[:, 1]))
        mapped[0, 0] = 0.0
        lower = _child(mapped, area_min)
    return upper, lower


def weight_sequence(r: ConcaveRegion, k: int, w_min: float = 0.0,
                    area_min: float = AREA_MIN, tol: float = CONTACT_TOLERANCE) -> WeightSequence:
    """The k largest weights of the expansion, extracted through a max-priority queue.

    Ties pop in creation order. A branch stops when its weight falls below
    ``w_min`` or its area below ``area_min``.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if w_min < 0:
        raise ValueError("w_min must be non-negative")

    counter = itertools.count()
    heap = []
    dropped = False

    def push(region: Optional[ConcaveRegion]) -> None:
        nonlocal dropped
        if region is None:
            return
        try:
            a, first, last = largest_triangle(region, area_min=area_min, tol=tol)
        except ExpansionExhausted:
            return
        if a <= 0.0:
            return
        if a < w_min:
            dropped = True
            return
        heapq.heappush(heap, (-a, next(counter), region, first, last))

    push(r)
    weights = []
    while heap and len(weights) < k:
        neg_a, _, region, first, last = heapq.heappop(heap)
        a = -neg_a
        weights.append(a)
        upper, lower = split_region(region, a, first, last, area_min=area_min)
        push(upper)
        push(lower)

    area_covered = float(sum(w * w for w in weights) / 2.0)
    total = region_area(r)
    logger.info(f"Extracted {len(weights)} weights covering {area_covered:.6g} of area {total:.6g}")
    return WeightSequence(
        weights=tuple(weights),
        truncated=dropped and len(weights) < k,
        count_requested=k,
        area_covered=area_covered,
        region_area=total,
    )


def brute_force_weights(r: ConcaveRegion, depth: int, area_min: float = AREA_MIN) -> list[float]:
    """All weights down to ``depth`` levels of direct recursion, sorted descending."""
    try:
        a, first, last = largest_triangle(r, area_min=area_min)
    except ExpansionExhausted:
        return []
    found = [a]
    if depth > 1:
        for child in split_region(r, a, first, last, area_min=area_min):
            if child is not None:
                found.extend(brute_force_weights(child, depth - 1, area_min=area_min))
    return sorted(found, reverse=True)
