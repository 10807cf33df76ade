"""Plane geometry of moment images: polyline regions, unimodular maps and the Ω₀ curve."""
import json
import logging
import math
from typing import Iterable

import numpy as np

from echcap.models import ConcaveRegion, EchcapError, Omega0Curve, Point2, UnimodularAffine

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
CONTACT_TOLERANCE = 1e-9
# below this half-angle x(alpha) is summed as a series
SERIES_CUTOFF = 0.5
_SERIES_K = np.arange(1, 11)
_SERIES_COEFFS = np.array([(-1.0) ** (k + 1) * 4.0 * k / math.factorial(2 * k + 1) for k in _SERIES_K])


class RegionError(EchcapError, ValueError):
    """Raised when a chain or map violates the region invariants."""
    pass


def _lower_half_xy(alpha: np.ndarray) -> np.ndarray:
    """Ω₀ points for alpha in [0, π].

    x = 2 sin(t) - 2t cos(t) with t = alpha / 2 cancels near 0, so small t uses
    the series 4 * sum((-1)^(k+1) k t^(2k+1) / (2k+1)!).
    """
    alpha = np.asarray(alpha, dtype=float)
    t = alpha / 2.0
    s, c = np.sin(t), np.cos(t)
    x = 2.0 * s - alpha * c
    small = t < SERIES_CUTOFF
    if np.any(small):
        ts = t[small]
        x[small] = np.power.outer(ts, 2 * _SERIES_K + 1) @ _SERIES_COEFFS
    # y = x + 2π cos(t), written so the subtraction from 2π is the only rounding near t = 0
    y = TWO_PI - (2.0 * TWO_PI * np.sin(t / 2.0) ** 2 - x)
    return np.column_stack((x, y))


def _omega0_xy(alpha: np.ndarray) -> np.ndarray:
    # swap symmetry: the point at 2π - alpha is the point at alpha with x and y exchanged
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    upper = alpha > math.pi
    lower_alpha = np.where(upper, TWO_PI - alpha, alpha)
    pts = _lower_half_xy(lower_alpha)
    pts[upper] = pts[upper][:, ::-1]
    return pts


def omega0_point(alpha: float) -> Point2:
    """Return the point of the Ω₀ boundary curve at parameter ``alpha`` in [0, 2π]."""
    if not 0.0 <= alpha <= TWO_PI:
        raise RegionError(f"alpha must lie in [0, 2pi], got {alpha}")
    x, y = _omega0_xy(alpha)[0]
    return Point2(float(x), float(y))


def omega0_alpha_grid(n: int) -> np.ndarray:
    """Chebyshev-clustered grid of n + 1 parameters, dense near 0 and 2π.

    The upper half is 2π minus the reversed lower half. For even n the
    midpoint is exactly π, so the (2, 2) vertex is on the grid.
    """
    half = n // 2
    j = np.arange(half + 1)
    lower = math.pi * (1.0 - np.cos(math.pi * j / n))
    lower[0] = 0.0
    if n % 2 == 0:
        lower[half] = math.pi
    alpha = np.empty(n + 1)
    alpha[:half + 1] = lower
    alpha[n - half:] = TWO_PI - lower[::-1]
    return alpha


def omega0_curve(n: int) -> Omega0Curve:
    """Ω₀ sampled on the Chebyshev grid; vertex n - j is vertex j with coordinates swapped."""
    alpha = omega0_alpha_grid(n)
    half = n // 2
    lower = _lower_half_xy(alpha[:half + 1])
    if n % 2 == 0:
        lower[half] = (2.0, 2.0)
    pts = np.empty((n + 1, 2))
    pts[:half + 1] = lower
    pts[n - half:] = lower[::-1, ::-1]
    return Omega0Curve(alpha_samples=alpha, points=pts)


def sample_omega0(n: int) -> ConcaveRegion:
    """Polyline model of Ω₀ with n + 1 vertices on the curve, symmetric under (x, y) -> (y, x)."""
    if n < 2:
        raise RegionError(f"need at least 2 segments to sample omega0, got {n}")
    return make_region(omega0_curve(n).points)


def validate_chain(vertices: np.ndarray, check_convex: bool = True, tol: float = 1e-12) -> None:
    """Raise RegionError unless ``vertices`` is a valid concave-region chain."""
    if vertices.ndim != 2 or vertices.shape[1] != 2 or len(vertices) < 2:
        raise RegionError("a region chain needs at least two (x, y) vertices")
    if not np.all(np.isfinite(vertices)):
        raise RegionError("region vertices must be finite")
    xs, ys = vertices[:, 0], vertices[:, 1]
    if xs[0] != 0.0 or ys[-1] != 0.0:
        raise RegionError("chain must start on the y-axis and end on the x-axis")
    if ys[0] <= 0.0 or xs[-1] <= 0.0:
        raise RegionError("axis intercepts must be positive")
    if np.any(np.diff(xs) <= 0.0) or np.any(np.diff(ys) >= 0.0):
        raise RegionError("x must increase strictly and y decrease strictly along the chain")
    if check_convex and len(vertices) > 2:
        dx, dy = np.diff(xs), np.diff(ys)
        # consecutive edges turn counter-clockwise
        cross = dx[:-1] * dy[1:] - dy[:-1] * dx[1:]
        scale = np.hypot(dx[:-1], dy[:-1]) * np.hypot(dx[1:], dy[1:])
        if np.any(cross < -tol * scale):
            raise RegionError("chain is not convex")


def make_region(vertices: Iterable, check_convex: bool = True) -> ConcaveRegion:
    arr = np.asarray(vertices, dtype=float).reshape(-1, 2)
    validate_chain(arr, check_convex=check_convex)
    return ConcaveRegion(arr)


def triangle_region(a: float, b: float = None) -> ConcaveRegion:
    """Region of T(a, b): the triangle with vertices (0,0), (a,0), (0,b)."""
    b = a if b is None else b
    return make_region([[0.0, b], [a, 0.0]])


def region_area(r) -> float:
    """Area between the chain and the axes (shoelace over the closed polygon).

    Accepts a ConcaveRegion or a raw chain running from the y-axis to the x-axis.
    """
    pts = r.vertices if isinstance(r, ConcaveRegion) else np.asarray(r, dtype=float).reshape(-1, 2)
    xs, ys = pts[:, 0], pts[:, 1]
    # closing legs along the axes contribute nothing; only chain edges count
    return float(0.5 * np.sum(xs[1:] * ys[:-1] - xs[:-1] * ys[1:]))


def min_functional(r: ConcaveRegion, cx: float, cy: float,
                   tol: float = CONTACT_TOLERANCE) -> tuple[float, int, int]:
    """Minimum of cx*x + cy*y over the chain with the first and last attaining indices."""
    if cx < 0 or cy < 0 or (cx == 0 and cy == 0):
        raise RegionError("functional coefficients must be non-negative and not both zero")
    values = cx * r.xs + cy * r.ys
    value = float(values.min())
    hits = np.flatnonzero(values <= value + tol)
    return value, int(hits[0]), int(hits[-1])


def make_unimodular(matrix, translation=(0.0, 0.0)) -> UnimodularAffine:
    m = tuple(tuple(int(v) for v in row) for row in matrix)
    if len(m) != 2 or any(len(row) != 2 for row in m):
        raise RegionError("unimodular matrix must be 2x2")
    affine = UnimodularAffine(matrix=m, translation=Point2(float(translation[0]), float(translation[1])))
    if affine.determinant != 1:
        raise RegionError(f"matrix {m} has determinant {affine.determinant}, expected 1")
    return affine


def apply_unimodular(m: UnimodularAffine, r) -> np.ndarray:
    """Map every vertex of a region (or raw chain) by v -> matrix @ v + translation."""
    if m.determinant != 1:
        raise RegionError(f"matrix {m.matrix} is not unimodular")
    pts = r.vertices if isinstance(r, ConcaveRegion) else np.asarray(r, dtype=float).reshape(-1, 2)
    mat = np.array(m.matrix, dtype=float)
    return pts @ mat.T + np.array([m.translation.x, m.translation.y])


def polygon_area(points: np.ndarray) -> float:
    """Signed shoelace area of a closed polygon."""
    x, y = points[:, 0], points[:, 1]
    return float(0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def region_contains(r: ConcaveRegion, x: float, y: float, tol: float = 0.0) -> bool:
    """Whether (x, y) lies in the closed region (within ``tol`` of its boundary)."""
    if x < -tol or y < -tol or x > r.xs[-1] + tol:
        return False
    boundary = float(np.interp(x, r.xs, r.ys))
    return y <= boundary + tol


def region_to_json(r: ConcaveRegion) -> dict:
    return {"vertices": r.vertices.tolist()}


def region_from_json(payload) -> ConcaveRegion:
    if isinstance(payload, str):
        payload = json.loads(payload)
    if not isinstance(payload, dict) or "vertices" not in payload:
        raise RegionError("region JSON must be an object with a 'vertices' list")
    return make_region(payload["vertices"])


def omega0_region(literal: str) -> ConcaveRegion:
    """Parse the builtin literal ``omega0:n``."""
    name, _, count = literal.partition(":")
    if name != "omega0" or not count.isdigit():
        raise RegionError(f"unknown region literal: {literal!r}")
    n = int(count)
    logger.debug(f"Sampling omega0 with {n} segments")
    return sample_omega0(n)
