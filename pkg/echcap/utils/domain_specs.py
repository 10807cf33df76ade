"""Parsing of domain specs and region arguments given on the command line.

A domain spec is JSON, one of::

    {"ball": a}
    {"ellipsoid": [a, b]}
    {"polydisk": [a, b]}
    {"concave": "omega0:n" | {"vertices": [[x, y], ...]}, "weights": k}
    {"union": [spec, ...]}
    "bidisk"
"""
import json
import logging
from pathlib import Path
from typing import Any, Optional

from echcap.models import Ball, Bidisk, Concave, EchcapError, Ellipsoid, Polydisk, Union
from echcap.services.geometry import omega0_region, region_from_json

logger = logging.getLogger(__name__)

SHAPES = ("ball", "ellipsoid", "polydisk", "concave", "union")


class DomainSpecError(EchcapError, ValueError):
    """Raised for malformed domain specs or region arguments."""
    pass


def _positive(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not value > 0:
        raise DomainSpecError(f"{where} must be a positive number, got {value!r}")
    return float(value)


def _pair(value: Any, where: str) -> tuple[float, float]:
    if not isinstance(value, list) or len(value) != 2:
        raise DomainSpecError(f"{where} must be a list [a, b]")
    return _positive(value[0], f"{where}[0]"), _positive(value[1], f"{where}[1]")


def parse_region(value: Any):
    """A region from an ``omega0:n`` literal, a JSON file path, or a vertices object."""
    try:
        if isinstance(value, str):
            if value.startswith("omega0:"):
                return omega0_region(value)
            path = Path(value)
            if not path.is_file():
                raise DomainSpecError(f"region {value!r} is neither a literal nor a file")
            return region_from_json(path.read_text())
        if isinstance(value, dict):
            return region_from_json(value)
    except DomainSpecError:
        raise
    except (EchcapError, json.JSONDecodeError) as e:
        raise DomainSpecError(f"invalid region: {e}")
    raise DomainSpecError(f"unsupported region value {value!r}")


def parse_domain_spec(payload: Any, bidisk_samples: Optional[int] = None):
    """Build a DomainSpec from parsed JSON (or a JSON string), recursing into unions."""
    if isinstance(payload, str) and payload.strip()[:1] in ("{", "["):
        try:
            payload = json.loads(payload)
        except json.JSONDecodeError as e:
            raise DomainSpecError(f"domain spec is not valid JSON: {e}")
    if payload == "bidisk":
        return Bidisk() if bidisk_samples is None else Bidisk(samples=bidisk_samples)
    if not isinstance(payload, dict):
        raise DomainSpecError("domain spec must be a JSON object or \"bidisk\"")

    kinds = [k for k in SHAPES if k in payload]
    if len(kinds) != 1:
        raise DomainSpecError(f"domain spec needs exactly one of: {', '.join(SHAPES)}")
    kind = kinds[0]
    value = payload[kind]

    if kind == "ball":
        return Ball(_positive(value, "ball"))
    if kind == "ellipsoid":
        return Ellipsoid(*_pair(value, "ellipsoid"))
    if kind == "polydisk":
        return Polydisk(*_pair(value, "polydisk"))
    if kind == "concave":
        weights = payload.get("weights")
        if weights is not None and (not isinstance(weights, int) or weights < 1):
            raise DomainSpecError("'weights' must be a positive integer")
        return Concave(parse_region(value), k_weights=weights)

    if not isinstance(value, list) or not value:
        raise DomainSpecError("'union' must be a non-empty list of specs")
    parts = []
    for i, part in enumerate(value):
        try:
            parts.append(parse_domain_spec(part, bidisk_samples))
        except DomainSpecError as e:
            raise DomainSpecError(f"invalid union part {i}: {e}")
    logger.debug(f"Parsed union of {len(parts)} parts")
    return Union(tuple(parts))
