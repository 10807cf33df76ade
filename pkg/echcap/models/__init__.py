# Model imports
from echcap.models.models import (
    EchcapError, Point2, ConcaveRegion, UnimodularAffine, Omega0Curve, WeightSequence,
    Ball, Ellipsoid, Polydisk, Concave, Bidisk, Union, DomainSpec, CapacitySequence,
    EmbeddingVerdict, ExplicitMapReport, BilliardModel, MomentProfile, PlacedTriangle,
    TrianglePlacement, CheckRecord, ScenarioReport, IDENTITY,
)
