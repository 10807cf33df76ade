from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Union as TypingUnion

import numpy as np


class EchcapError(Exception):
    """Base class for every error raised by the echcap services."""
    pass


IDENTITY = ((1, 0), (0, 1))


@dataclass(frozen=True)
class Point2:
    x: float
    y: float


@dataclass(frozen=True, eq=False)
class ConcaveRegion:
    """Region between the coordinate axes and a convex decreasing polyline.

    ``vertices`` is an (n, 2) array running from (0, y_int) to (x_int, 0).
    Construct through ``echcap.services.geometry.make_region`` to get the
    invariants checked.
    """
    vertices: np.ndarray

    def __post_init__(self):
        arr = np.array(self.vertices, dtype=float).reshape(-1, 2)
        arr.setflags(write=False)
        object.__setattr__(self, "vertices", arr)

    @property
    def xs(self) -> np.ndarray:
        return self.vertices[:, 0]

    @property
    def ys(self) -> np.ndarray:
        return self.vertices[:, 1]

    def __len__(self) -> int:
        return len(self.vertices)


@dataclass(frozen=True)
class UnimodularAffine:
    matrix: tuple[tuple[int, int], tuple[int, int]] = IDENTITY
    translation: Point2 = Point2(0.0, 0.0)

    @property
    def determinant(self) -> int:
        (m11, m12), (m21, m22) = self.matrix
        return m11 * m22 - m12 * m21


@dataclass(frozen=True, eq=False)
class Omega0Curve:
    alpha_samples: np.ndarray
    points: np.ndarray


@dataclass(frozen=True)
class WeightSequence:
    weights: tuple[float, ...]
    truncated: bool
    count_requested: int
    area_covered: float
    region_area: float

    def __len__(self) -> int:
        return len(self.weights)

    def to_dict(self) -> dict:
        return {
            "weights": list(self.weights),
            "truncated": self.truncated,
            "count_requested": self.count_requested,
            "area_covered": self.area_covered,
            "region_area": self.region_area,
        }


# Domain specs

@dataclass(frozen=True)
class Ball:
    a: float


@dataclass(frozen=True)
class Ellipsoid:
    a: float
    b: float


@dataclass(frozen=True)
class Polydisk:
    a: float
    b: float


@dataclass(frozen=True, eq=False)
class Concave:
    region: ConcaveRegion
    k_weights: Optional[int] = None


@dataclass(frozen=True)
class Bidisk:
    """The lagrangian bidisk, evaluated through its concave model X_0."""
    samples: int = 8192


@dataclass(frozen=True)
class Union:
    parts: tuple


DomainSpec = TypingUnion[Ball, Ellipsoid, Polydisk, Concave, Bidisk, Union]


@dataclass(frozen=True, eq=False)
class CapacitySequence:
    values: np.ndarray

    def __post_init__(self):
        arr = np.array(self.values, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def K(self) -> int:
        return len(self.values) - 1

    def __getitem__(self, k: int) -> float:
        return float(self.values[k])

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class EmbeddingVerdict:
    embeds: str  # "yes" | "no" | "obstruction-free"
    witness_k: Optional[int] = None
    criterion: Optional[str] = None

    def to_dict(self) -> dict:
        return {"embeds": self.embeds, "witness_k": self.witness_k, "criterion": self.criterion}


@dataclass
class ExplicitMapReport:
    samples: int
    failures: list = field(default_factory=list)
    max_moment: float = 0.0
    max_symplectic_defect: float = 0.0

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {
            "samples": self.samples,
            "passed": self.passed,
            "failures": [list(map(float, f)) for f in self.failures],
            "max_moment": self.max_moment,
            "max_symplectic_defect": self.max_symplectic_defect,
        }


@dataclass(frozen=True)
class BilliardModel:
    """Smoothed billiard on the unit disk with potential eps * U(|q|^2)."""
    epsilon: float
    potential: Any
    u_bar: float
    M: float

    def U(self, u):
        return self.potential.value(u)

    def F(self, u):
        return u * (1.0 - self.epsilon * self.potential.value(u))

    def F_prime(self, u):
        return 1.0 - self.epsilon * (self.potential.value(u) + u * self.potential.derivative(u))

    def K(self, u):
        return 0.5 * (1.0 - self.epsilon * self.potential.value(u)
                      + self.epsilon * self.potential.derivative(u) * u)


@dataclass(frozen=True, eq=False)
class MomentProfile:
    epsilon: float
    v: np.ndarray
    G: np.ndarray
    alpha: np.ndarray
    rho1: np.ndarray
    rho2: np.ndarray

    @property
    def samples(self) -> list[tuple[float, float, float, float, float]]:
        return list(zip(self.v.tolist(), self.G.tolist(), self.alpha.tolist(),
                        self.rho1.tolist(), self.rho2.tolist()))


@dataclass(frozen=True)
class PlacedTriangle:
    """A translated unimodular image of T(a, b).

    The right-angle vertex sits at (x0, y0); the legs run along
    ``matrix`` applied to (a, 0) and (0, b).
    """
    a: float
    b: float
    x0: float
    y0: float
    matrix: tuple[tuple[int, int], tuple[int, int]] = IDENTITY
    label: Optional[str] = None

    def vertices(self) -> np.ndarray:
        m = np.array(self.matrix, dtype=float)
        legs = np.array([[0.0, 0.0], [self.a, 0.0], [0.0, self.b]])
        return legs @ m.T + np.array([self.x0, self.y0])

    @property
    def area(self) -> float:
        return 0.5 * self.a * self.b


@dataclass(frozen=True)
class TrianglePlacement:
    c: float
    d: float
    margin: float
    pieces: tuple[PlacedTriangle, ...]
    required: tuple[tuple[float, float], ...] = ()


@dataclass
class CheckRecord:
    name: str
    expected: Any
    computed: Any
    tolerance: Optional[float]
    passed: bool

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "expected": self.expected,
            "computed": self.computed,
            "tolerance": self.tolerance,
            "pass": self.passed,
        }


@dataclass
class ScenarioReport:
    scenario: str
    records: list[CheckRecord] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    def add(self, name: str, expected, computed, tolerance: Optional[float] = None,
            check: Optional[Callable[[Any, Any], bool]] = None) -> CheckRecord:
        """Record a check; numeric checks compare |computed - expected| <= tolerance."""
        if check is not None:
            passed = bool(check(expected, computed))
        elif tolerance is None:
            passed = expected == computed
        else:
            passed = abs(float(computed) - float(expected)) <= tolerance
        record = CheckRecord(name, expected, computed, tolerance, passed)
        self.records.append(record)
        return record

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "pass": self.passed,
            "checks": [r.to_dict() for r in self.records],
        }
