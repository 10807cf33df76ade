from echcap.config.config import get_config, Config, DevelopmentConfig, TestingConfig, ReproductionConfig
