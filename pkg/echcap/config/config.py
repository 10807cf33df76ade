import os
import logging
from pathlib import Path

logger = logging.getLogger(__name__)

DATA_DIR = Path(__file__).resolve().parents[2] / "data"


class Config:
    """Base configuration class"""
    LOG_LEVEL = os.environ.get("ECHCAP_LOG_LEVEL", "INFO")

    # Geometry settings
    OMEGA0_SAMPLES = int(os.environ.get("ECHCAP_OMEGA0_SAMPLES", "8192"))
    CONTACT_TOLERANCE = 1e-9
    AREA_MIN = 1e-12

    # Capacity settings
    DEFAULT_KMAX = int(os.environ.get("ECHCAP_KMAX", "200"))

    # Billiard numerics
    QUADRATURE_TOLERANCE = 1e-10
    QUADRATURE_MAX_NODES = 4096
    ODE_RTOL = 1e-12
    ODE_ATOL = 1e-12
    ORACLE_TOLERANCE = 1e-4

    # Explicit map check
    FD_STEP = 1e-5
    SYMPLECTIC_TOLERANCE = 1e-6

    # Packing settings
    PACKING_MARGIN = 1e-6
    PACKING_OVERLAP_TOLERANCE = 1e-12
    SEARCH_ATTEMPTS = 200
    PACKING_CERTIFICATE = os.environ.get(
        "ECHCAP_PACKING_CERTIFICATE", str(DATA_DIR / "packing_certificate.json")
    )

    # Output settings
    SIGNIFICANT_DIGITS = 12


class DevelopmentConfig(Config):
    """Development configuration"""
    LOG_LEVEL = os.environ.get("ECHCAP_LOG_LEVEL", "DEBUG")


class TestingConfig(Config):
    """Testing configuration"""
    OMEGA0_SAMPLES = 2048
    DEFAULT_KMAX = 50
    SEARCH_ATTEMPTS = 20


class ReproductionConfig(Config):
    """Desk-scale reproduction sizes"""
    OMEGA0_SAMPLES = 8192
    DEFAULT_KMAX = 200


def get_config():
    """Return the active configuration"""
    env = os.environ.get("ECHCAP_ENV", "development").lower()

    if env == "reproduction":
        logger.info("Loading reproduction configuration")
        return ReproductionConfig
    elif env == "testing":
        logger.info("Loading testing configuration")
        return TestingConfig
    else:
        logger.info("Loading development configuration")
        return DevelopmentConfig
