import json
import logging
import math
from itertools import combinations
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from echcap.models import IDENTITY, EchcapError, PlacedTriangle, TrianglePlacement

logger = logging.getLogger(__name__)

PACKING_MARGIN = 1e-6
OVERLAP_TOLERANCE = 1e-12
SEARCH_ATTEMPTS = 200
# spacing between neighbouring pieces proposed by the greedy search
SEARCH_GAP = 1e-4


class PlacementError(EchcapError, ValueError):
    """Raised for malformed placement records."""
    pass


class PackingSearchError(EchcapError):
    """Raised when the greedy search exhausts its attempts."""
    pass


def _determinant(matrix) -> int:
    return matrix[0][0] * matrix[1][1] - matrix[0][1] * matrix[1][0]


def validate_placement(p: TrianglePlacement) -> None:
    if not (p.c > 0 and p.d > 0):
        raise PlacementError("target legs must be positive")
    if p.margin < 0:
        raise PlacementError("margin must be non-negative")
    if not p.pieces:
        raise PlacementError("a placement needs at least one piece")
    if len(p.required) > len(p.pieces):
        raise PlacementError("more required dimensions than pieces")
    for i, piece in enumerate(p.pieces):
        if not (piece.a > 0 and piece.b > 0):
            raise PlacementError(f"piece {i} has non-positive legs")
        if not all(math.isfinite(v) for v in (piece.a, piece.b, piece.x0, piece.y0)):
            raise PlacementError(f"piece {i} has non-finite coordinates")
        if _determinant(piece.matrix) != 1:
            raise PlacementError(f"piece {i} matrix {piece.matrix} is not in SL(2, Z)")


def _label(piece: PlacedTriangle, index: int) -> str:
    return piece.label if piece.label is not None else f"#{index}"


def clearance(c: float, d: float, vertices: np.ndarray) -> float:
    """Smallest distance from the vertices to the boundary of the target T(c, d)."""
    x, y = vertices[:, 0], vertices[:, 1]
    hyp = (1.0 - x / c - y / d) * c * d / math.hypot(c, d)
    return float(np.min(np.concatenate((x, y, hyp))))


def contains_piece(c: float, d: float, piece: PlacedTriangle, margin: float = PACKING_MARGIN) -> bool:
    # the target is convex, so checking the three vertices suffices
    return clearance(c, d, piece.vertices()) >= margin


def _edge_normals(vertices: np.ndarray) -> np.ndarray:
    edges = np.roll(vertices, -1, axis=0) - vertices
    return np.column_stack((-edges[:, 1], edges[:, 0]))


def overlap_depth(first: np.ndarray, second: np.ndarray) -> float:
    """Smallest projected overlap over the separating-axis candidates (negative when apart)."""
    depth = math.inf
    for axis in np.vstack((_edge_normals(first), _edge_normals(second))):
        norm = math.hypot(axis[0], axis[1])
        if norm == 0.0:
            continue
        axis = axis / norm
        pa, pb = first @ axis, second @ axis
        depth = min(depth, min(pa.max(), pb.max()) - max(pa.min(), pb.min()))
    return depth


def pieces_overlap(first: PlacedTriangle, second: PlacedTriangle,
                   tol: float = OVERLAP_TOLERANCE) -> bool:
    return overlap_depth(first.vertices(), second.vertices()) > tol


def verify_placement(p: TrianglePlacement, margin: Optional[float] = None,
                     tol: float = OVERLAP_TOLERANCE) -> tuple[bool, list[dict]]:
    """Check containment, pairwise interior-disjointness and required leg lengths.

    Returns:
        (ok, failures) where each failure is a dict with a ``kind`` of
        "containment", "overlap" or "required" and the labels involved
    """
    validate_placement(p)
    margin = p.margin if margin is None else margin
    failures = []
    for i, piece in enumerate(p.pieces):
        gap = clearance(p.c, p.d, piece.vertices())
        if gap < margin:
            failures.append({"kind": "containment", "piece": _label(piece, i), "clearance": gap})
    for (i, first), (j, second) in combinations(enumerate(p.pieces), 2):
        depth = overlap_depth(first.vertices(), second.vertices())
        if depth > tol:
            failures.append({"kind": "overlap", "pair": [_label(first, i), _label(second, j)],
                             "depth": depth})
    for i, (ra, rb) in enumerate(p.required):
        piece = p.pieces[i]
        if piece.a < ra or piece.b < rb:
            failures.append({"kind": "required", "piece": _label(piece, i),
                             "required": [ra, rb], "actual": [piece.a, piece.b]})
    if failures:
        logger.warning(f"Placement failed {len(failures)} checks")
    else:
        logger.info(f"Placement of {len(p.pieces)} pieces verified with margin {margin}")
    return not failures, failures


def area_necessary(p: TrianglePlacement) -> bool:
    """Necessary condition: the pieces' total area does not exceed the target's."""
    total = sum(piece.area for piece in p.pieces)
    return total <= 0.5 * p.c * p.d


def _candidates(placed: list[PlacedTriangle], start: float) -> list[tuple[float, float]]:
    points = [(start, start)]
    for piece in placed:
        right = piece.x0 + piece.a + SEARCH_GAP
        top = piece.y0 + piece.b + SEARCH_GAP
        points.extend([(right, piece.y0), (piece.x0, top), (right, start), (start, top)])
    return points


def greedy_search(required: Sequence[tuple[float, float]], target: tuple[float, float],
                  attempts: int = SEARCH_ATTEMPTS, seed: int = 0,
                  margin: float = PACKING_MARGIN) -> TrianglePlacement:
    """Randomized bottom-left greedy placement of axis-aligned pieces.

    The first attempt places pieces by decreasing area; later attempts shuffle
    the order. Candidates are the corners next to already placed pieces, and
    the lowest then leftmost valid candidate wins.

    Raises:
        PackingSearchError: if no attempt places every piece
    """
    if attempts < 1:
        raise PlacementError("attempts must be at least 1")
    c, d = target
    if not required:
        raise PlacementError("nothing to place")
    rng = np.random.default_rng(seed)
    start = margin + SEARCH_GAP
    base = sorted(range(len(required)), key=lambda i: -required[i][0] * required[i][1])
    for attempt in range(attempts):
        order = base if attempt == 0 else [int(i) for i in rng.permutation(len(required))]
        placed: dict[int, PlacedTriangle] = {}
        for i in order:
            a, b = required[i]
            best = None
            for x0, y0 in _candidates(list(placed.values()), start):
                piece = PlacedTriangle(a=a, b=b, x0=x0, y0=y0, matrix=IDENTITY, label=f"#{i}")
                if not contains_piece(c, d, piece, margin):
                    continue
                if any(pieces_overlap(piece, other) for other in placed.values()):
                    continue
                if best is None or (y0, x0) < (best.y0, best.x0):
                    best = piece
            if best is None:
                break
            placed[i] = best
        if len(placed) == len(required):
            pieces = tuple(placed[i] for i in range(len(required)))
            placement = TrianglePlacement(c=c, d=d, margin=margin, pieces=pieces,
                                          required=tuple(tuple(r) for r in required))
            ok, _ = verify_placement(placement)
            if ok:
                logger.info(f"Greedy search succeeded on attempt {attempt + 1}")
                return placement
    raise PackingSearchError(f"no placement found in {attempts} attempts")


def placement_from_dict(payload: dict) -> TrianglePlacement:
    try:
        c, d, margin = (float(v) for v in payload["target"])
        pieces = tuple(
            PlacedTriangle(
                a=float(item["a"]), b=float(item["b"]),
                x0=float(item["x0"]), y0=float(item["y0"]),
                matrix=tuple(tuple(int(v) for v in row) for row in item.get("matrix", IDENTITY)),
                label=item.get("label"),
            )
            for item in payload["pieces"]
        )
        required = tuple((float(a), float(b)) for a, b in payload.get("required", []))
    except (KeyError, TypeError, ValueError) as e:
        raise PlacementError(f"malformed placement record: {e}")
    placement = TrianglePlacement(c=c, d=d, margin=margin, pieces=pieces, required=required)
    validate_placement(placement)
    return placement


def placement_to_dict(p: TrianglePlacement) -> dict:
    pieces = []
    for piece in p.pieces:
        item = {"a": piece.a, "b": piece.b, "x0": piece.x0, "y0": piece.y0}
        if piece.matrix != IDENTITY:
            item["matrix"] = [list(row) for row in piece.matrix]
        if piece.label is not None:
            item["label"] = piece.label
        pieces.append(item)
    return {"target": [p.c, p.d, p.margin], "pieces": pieces,
            "required": [list(r) for r in p.required]}


def load_placement(path) -> TrianglePlacement:
    path = Path(path)
    try:
        payload = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise PlacementError(f"cannot read placement {path}: {e}")
    logger.debug(f"Loaded placement from {path}")
    return placement_from_dict(payload)


def dump_placement(p: TrianglePlacement, path=None) -> dict:
    payload = placement_to_dict(p)
    if path is not None:
        Path(path).write_text(json.dumps(payload, indent=2) + "\n")
    return payload
