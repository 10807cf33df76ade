import logging
import math
from dataclasses import replace
from typing import Callable

import numpy as np

from echcap.config import get_config
from echcap.models import (
    Ball,
    Bidisk,
    EchcapError,
    Ellipsoid,
    Polydisk,
    ScenarioReport,
    Union,
)
from echcap.services.billiard import (
    g_alpha,
    limit_curve_error,
    make_model,
    moment_profile,
    ode_oracle,
    sigma,
)
from echcap.services.capacities import (
    capacities_of,
    concave_caps,
    dominates,
    ellipsoid_caps,
)
from echcap.services.embedding import (
    BALL_THRESHOLD,
    FIRST_CAPACITY,
    contains_ellipsoid,
    ellipsoid_clearance,
    explicit_map_check,
    obstruct,
    verdict_bidisk_into,
)
from echcap.services.geometry import region_area, region_contains, sample_omega0, triangle_region
from echcap.services.packing import area_necessary, load_placement, verify_placement
from echcap.services.weights import weight_sequence

logger = logging.getLogger(__name__)

SQRT3 = math.sqrt(3.0)
W2 = 3.0 * SQRT3 - 4.0
W4 = 4.0 * math.sqrt(2.0) - 3.0 * SQRT3
GRID = np.arange(3.0, 7.0 + 1e-9, 0.25)
THRESHOLD_MARGIN = 1e-3
BILLIARD_EPSILONS = (0.4, 0.2, 0.1, 0.05)


class UnknownScenarioError(EchcapError, ValueError):
    """Raised for scenario names missing from the registry."""
    pass


def _omega0(config):
    return sample_omega0(config.OMEGA0_SAMPLES)


def scenario_weights(config) -> ScenarioReport:
    report = ScenarioReport("weights")
    w = weight_sequence(_omega0(config), 5).weights
    report.add("w1", 4.0, w[0], 1e-5)
    report.add("w2", W2, w[1], 1e-4)
    report.add("w3", W2, w[2], 1e-4)
    report.add("w4", W4, w[3], 1e-3)
    report.add("w5", W4, w[4], 1e-3)
    return report


def scenario_capacities(config) -> ScenarioReport:
    report = ScenarioReport("capacities")
    caps = concave_caps(_omega0(config), 2)
    report.add("c1(X0)", 4.0, caps[1], 1e-4)
    report.add("c2(X0)", BALL_THRESHOLD, caps[2], 1e-4)
    tri = concave_caps(triangle_region(2.0, 3.0), 50)
    ell = ellipsoid_caps(2.0, 3.0, 50)
    report.add("T(2,3) vs E(2,3), k <= 50", 0.0,
               float(np.max(np.abs(tri.values - ell.values))), 1e-9)
    return report


def _off_threshold(*values: float) -> bool:
    return all(abs(v - t) >= THRESHOLD_MARGIN for v in values for t in (FIRST_CAPACITY, BALL_THRESHOLD))


def scenario_bidisk_verdicts(config) -> ScenarioReport:
    """Closed-form verdicts against the capacity obstruction on a grid of targets."""
    report = ScenarioReport("theorem-1.1")
    K = 100
    source_caps = capacities_of(Bidisk(config.OMEGA0_SAMPLES), K)
    targets = [Ball(a) for a in GRID if _off_threshold(a)]
    for a in GRID:
        for b in GRID:
            if _off_threshold(a, b):
                targets.append(Ellipsoid(float(a), float(b)))
                targets.append(Polydisk(float(a), float(b)))
    mismatches = []
    for target in targets:
        closed = verdict_bidisk_into(target)
        found = obstruct(None, target, K, slack=1e-9, source_caps=source_caps)
        if closed.embeds == "no":
            agree = found.embeds == "no" and found.witness_k <= K
        else:
            agree = found.embeds == "obstruction-free"
        if not agree:
            mismatches.append(repr(target))
    logger.info(f"Checked {len(targets)} targets, {len(mismatches)} mismatches")
    report.add("targets checked", len(targets), len(targets))
    report.add("mismatches", [], mismatches)
    return report


def scenario_ellipsoid_dominance(config) -> ScenarioReport:
    report = ScenarioReport("prop-1.4")
    K = config.DEFAULT_KMAX
    inner = concave_caps(_omega0(config), K)
    outer = ellipsoid_caps(FIRST_CAPACITY, BALL_THRESHOLD, K)
    _, k = dominates(outer, inner, slack=1e-6)
    report.add(f"c_k(X0) <= c_k(E(4, 3sqrt3)) for k <= {K}", None, k)
    return report


def scenario_decomposition_identity(config) -> ScenarioReport:
    report = ScenarioReport("decomposition-identity")
    K = config.DEFAULT_KMAX
    parts = Union((Ball(4.0), Ball(W2), Ball(W2), Ellipsoid(12.0 - 6.0 * SQRT3, W2)))
    union = capacities_of(parts, K)
    target = ellipsoid_caps(FIRST_CAPACITY, BALL_THRESHOLD, K)
    report.add(f"max deviation for k <= {K}", 0.0,
               float(np.max(np.abs(union.values - target.values))), 1e-9)
    return report


def scenario_inclusion(config) -> ScenarioReport:
    report = ScenarioReport("inclusion")
    region = _omega0(config)
    report.add("E(4, 4) in X0", True, contains_ellipsoid(region, 4.0, 4.0))
    a, b = BALL_THRESHOLD, BALL_THRESHOLD / 2.0
    report.add("E(3sqrt3, 3sqrt3/2) in X0", True, contains_ellipsoid(region, a, b, tol=1e-5))
    report.add("tangency residual", 1.0, ellipsoid_clearance(region, a, b), 1e-5)
    return report


def scenario_explicit_map(config) -> ScenarioReport:
    report = ScenarioReport("explicit-map")
    result = explicit_map_check(1000, seed=0, step=config.FD_STEP, tol=config.SYMPLECTIC_TOLERANCE)
    report.add("failures", 0, len(result.failures))
    report.add("max symplectic defect", 0.0, result.max_symplectic_defect, config.SYMPLECTIC_TOLERANCE)
    return report


def scenario_area(config) -> ScenarioReport:
    report = ScenarioReport("area")
    region = _omega0(config)
    area = region_area(region)
    report.add("area(X0)", math.pi ** 2, area, 1e-4)
    weights = np.array(weight_sequence(region, 2000).weights)
    covered = np.cumsum(weights ** 2) / 2.0
    report.add("covered area monotone", True, bool(np.all(np.diff(covered) >= 0.0)))
    report.add("covered area <= area", True, bool(covered[-1] <= area + 1e-12))
    report.add("covered fraction after 2000 weights", 0.995, float(covered[-1] / area),
               check=lambda expected, computed: computed >= expected)
    return report


def scenario_billiard_convergence(config) -> ScenarioReport:
    report = ScenarioReport("billiard-convergence")
    models = [make_model(eps) for eps in BILLIARD_EPSILONS]
    for v in (0.0, 0.25, 0.5):
        values = [sigma(m, v) for m in models]
        report.add(f"sigma(v={v}) increases as epsilon decreases", True,
                   bool(np.all(np.diff(values) > 0.0)))
    errors = [limit_curve_error(m, 32) for m in models]
    report.add("limit curve error decreases", True, bool(np.all(np.diff(errors) < 0.0)))
    report.add("sigma_0.01(0)", 2.0, sigma(make_model(0.01), 0.0), 0.15)
    region = _omega0(config)
    outside = 0
    for m in models:
        profile = moment_profile(m, 33)
        outside += sum(not region_contains(region, x, y, 1e-9)
                       for x, y in zip(profile.rho1, profile.rho2))
    report.add("profile points outside omega0", 0, outside)
    return report


def scenario_billiard_oracle(config) -> ScenarioReport:
    report = ScenarioReport("billiard-oracle")
    worst = 0.0
    for eps in (0.4, 0.2, 0.1):
        m = make_model(eps)
        for fraction in (0.2, 0.4, 0.6, 0.8):
            v = fraction * m.M
            G, alpha = g_alpha(m, v)
            G_ode, alpha_ode = ode_oracle(m, v)
            worst = max(worst, abs(G_ode - G) / G, abs(alpha_ode - alpha) / alpha)
    report.add("max relative deviation", 0.0, worst, 1e-4)
    return report


def scenario_packing(config) -> ScenarioReport:
    report = ScenarioReport("packing")
    placement = load_placement(config.PACKING_CERTIFICATE)
    ok, failures = verify_placement(placement, margin=config.PACKING_MARGIN)
    report.add("certificate passes", True, ok)
    report.add("area condition", True, area_necessary(placement))
    labels = [piece.label for piece in placement.pieces]
    if "E" in labels:
        i = labels.index("E")
        pieces = list(placement.pieces)
        pieces[i] = replace(pieces[i], x0=pieces[i].x0 - 0.0106)
        bad, failures = verify_placement(replace(placement, pieces=tuple(pieces)))
        pairs = [sorted(f["pair"]) for f in failures if f["kind"] == "overlap"]
        report.add("shifted piece overlaps A2", [["A2", "E"]], pairs)
    return report


SCENARIOS: dict[str, Callable] = {
    "weights": scenario_weights,
    "capacities": scenario_capacities,
    "theorem-1.1": scenario_bidisk_verdicts,
    "prop-1.4": scenario_ellipsoid_dominance,
    "decomposition-identity": scenario_decomposition_identity,
    "inclusion": scenario_inclusion,
    "explicit-map": scenario_explicit_map,
    "area": scenario_area,
    "billiard-convergence": scenario_billiard_convergence,
    "billiard-oracle": scenario_billiard_oracle,
    "packing": scenario_packing,
}

ALIASES = {
    "bidisk-verdicts": "theorem-1.1",
    "ellipsoid-dominance": "prop-1.4",
}


def run_scenario(name: str, config=None) -> ScenarioReport:
    """Run one registered scenario (or an alias of one) and log its outcome."""
    name = ALIASES.get(name, name)
    if name not in SCENARIOS:
        raise UnknownScenarioError(f"unknown scenario {name!r}; choose from {', '.join(SCENARIOS)}")
    config = config or get_config()
    logger.info(f"Running scenario {name}")
    report = SCENARIOS[name](config)
    for record in report.records:
        if not record.passed:
            logger.error(f"[{name}] check failed: {record.name} "
                         f"(expected {record.expected}, computed {record.computed})")
    logger.info(f"Scenario {name}: {'pass' if report.passed else 'FAIL'}")
    return report


def run_all(config=None) -> list[ScenarioReport]:
    config = config or get_config()
    return [run_scenario(name, config) for name in SCENARIOS]
