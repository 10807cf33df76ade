import logging
import math
from typing import Optional

import numpy as np

from echcap.models import (
    Ball,
    CapacitySequence,
    ConcaveRegion,
    EchcapError,
    Ellipsoid,
    EmbeddingVerdict,
    ExplicitMapReport,
    Polydisk,
)
from echcap.services.capacities import capacities_of, dominates
from echcap.services.geometry import CONTACT_TOLERANCE, min_functional

logger = logging.getLogger(__name__)

# thresholds of the closed-form criteria
BALL_THRESHOLD = 5.196152422706632  # 3 * sqrt(3)
FIRST_CAPACITY = 4.0

FD_STEP = 1e-5
SYMPLECTIC_TOLERANCE = 1e-6
MOMENT_BOUND = 4.0

# standard symplectic form on (p1, q1, p2, q2) and on (x1, y1, x2, y2)
OMEGA = np.array([
    [0.0, 1.0, 0.0, 0.0],
    [-1.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 1.0],
    [0.0, 0.0, -1.0, 0.0],
])


class EmbeddingError(EchcapError, ValueError):
    """Raised for unsupported verdict requests."""
    pass


def obstruct(source, target, K: int, slack: float = 0.0,
             source_caps: Optional[CapacitySequence] = None) -> EmbeddingVerdict:
    """Capacity obstruction: "no" with the first violating k, otherwise "obstruction-free"."""
    src = source_caps if source_caps is not None else capacities_of(source, K)
    tgt = capacities_of(target, K)
    n = min(len(src), len(tgt))
    ok, k = dominates(CapacitySequence(tgt.values[:n]), CapacitySequence(src.values[:n]), slack)
    if ok:
        return EmbeddingVerdict("obstruction-free", None, "capacities")
    logger.debug(f"Obstruction at k={k}: {src[k]:.12g} > {tgt[k]:.12g}")
    return EmbeddingVerdict("no", k, "capacities")


def verdict_bidisk_into(target) -> EmbeddingVerdict:
    """Closed-form criterion for embedding the open lagrangian bidisk into a ball, ellipsoid or polydisk."""
    criterion = "closed-form criterion"
    if isinstance(target, Ball):
        if target.a >= BALL_THRESHOLD:
            return EmbeddingVerdict("yes", None, criterion)
        return EmbeddingVerdict("no", 1 if target.a < FIRST_CAPACITY else 2, criterion)
    if isinstance(target, Ellipsoid):
        lo, hi = sorted((target.a, target.b))
        if lo < FIRST_CAPACITY:
            return EmbeddingVerdict("no", 1, criterion)
        if hi < BALL_THRESHOLD:
            return EmbeddingVerdict("no", 2, criterion)
        return EmbeddingVerdict("yes", None, criterion)
    if isinstance(target, Polydisk):
        if min(target.a, target.b) >= FIRST_CAPACITY:
            return EmbeddingVerdict("yes", None, criterion)
        return EmbeddingVerdict("no", 1, criterion)
    raise EmbeddingError(f"no closed-form criterion for target {target!r}")


def verdict_ellipsoid_into_bidisk(ratio: int, b: float) -> EmbeddingVerdict:
    """Closed form for int E(ratio * b, b) into the bidisk, ratio in {1, 2}."""
    if b <= 0:
        raise EmbeddingError("b must be positive")
    criterion = "closed-form criterion"
    if ratio == 1:
        return EmbeddingVerdict("yes", None, criterion) if b <= FIRST_CAPACITY \
            else EmbeddingVerdict("no", 1, criterion)
    if ratio == 2:
        return EmbeddingVerdict("yes", None, criterion) if 2.0 * b <= BALL_THRESHOLD \
            else EmbeddingVerdict("no", 2, criterion)
    raise EmbeddingError(f"ratio must be 1 or 2, got {ratio}")


def ellipsoid_clearance(r: ConcaveRegion, a: float, b: float) -> float:
    """min over the chain of x/a + y/b; T(a, b) fits under the chain iff this is >= 1."""
    if a <= 0 or b <= 0:
        raise EmbeddingError("ellipsoid parameters must be positive")
    value, _, _ = min_functional(r, 1.0 / a, 1.0 / b)
    return value


def contains_ellipsoid(r: ConcaveRegion, a: float, b: float,
                       tol: float = CONTACT_TOLERANCE) -> bool:
    return ellipsoid_clearance(r, a, b) >= 1.0 - tol


def explicit_map(point) -> np.ndarray:
    """(p1, q1, p2, q2) -> (x1, y1, x2, y2) with z_j = sqrt(2(p_j+1)/pi) e^{i pi (q_j+1)}."""
    p1, q1, p2, q2 = np.asarray(point, dtype=float)
    out = []
    for p, q in ((p1, q1), (p2, q2)):
        radius = math.sqrt(2.0 * (p + 1.0) / math.pi)
        angle = math.pi * (q + 1.0)
        out.extend((radius * math.cos(angle), radius * math.sin(angle)))
    return np.array(out)


def explicit_map_jacobian(point, step: float = FD_STEP) -> np.ndarray:
    """Central-difference Jacobian; p-steps scale with the distance (1 + p) to the singular edge."""
    x = np.asarray(point, dtype=float)
    jac = np.empty((4, 4))
    for i in range(4):
        h = step * (1.0 + x[i]) if i % 2 == 0 else step
        e = np.zeros(4)
        e[i] = h
        jac[:, i] = (explicit_map(x + e) - explicit_map(x - e)) / (2.0 * h)
    return jac


def symplectic_defect(point, step: float = FD_STEP) -> float:
    jac = explicit_map_jacobian(point, step)
    return float(np.max(np.abs(jac.T @ OMEGA @ jac - OMEGA)))


def sample_bidisk(samples: int, seed: int) -> np.ndarray:
    """Uniform samples of the open bidisk as rows (p1, q1, p2, q2)."""
    rng = np.random.default_rng(seed)

    def disk() -> np.ndarray:
        radius = np.sqrt(rng.uniform(0.0, 1.0, samples)) * (1.0 - 1e-12)
        theta = rng.uniform(0.0, 2.0 * math.pi, samples)
        return np.column_stack((radius * np.cos(theta), radius * np.sin(theta)))

    p, q = disk(), disk()
    return np.column_stack((p[:, 0], q[:, 0], p[:, 1], q[:, 1]))


def explicit_map_check(samples: int, seed: int = 0, step: float = FD_STEP,
                       tol: float = SYMPLECTIC_TOLERANCE) -> ExplicitMapReport:
    """Check image containment in P(4, 4) and symplecticity of the explicit map on random samples."""
    if samples < 1:
        raise EmbeddingError("samples must be at least 1")
    report = ExplicitMapReport(samples=samples)
    for point in sample_bidisk(samples, seed):
        image = explicit_map(point)
        moments = math.pi * np.array([image[0] ** 2 + image[1] ** 2, image[2] ** 2 + image[3] ** 2])
        defect = symplectic_defect(point, step)
        report.max_moment = max(report.max_moment, float(moments.max()))
        report.max_symplectic_defect = max(report.max_symplectic_defect, defect)
        if moments.max() > MOMENT_BOUND or defect > tol:
            report.failures.append(tuple(point))
    if report.failures:
        logger.error(f"Explicit map check failed at {len(report.failures)} of {samples} samples")
    else:
        logger.info(f"Explicit map check passed on {samples} samples "
                    f"(max defect {report.max_symplectic_defect:.3g})")
    return report
