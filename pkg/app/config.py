from pydantic_settings import BaseSettings, SettingsConfigDict
from typing import Optional


class Settings(BaseSettings):
    # Pipeline
    support_threshold: float = 0.6
    tree_height: int = 2
    min_pattern_nodes: int = 2
    learn_matching: str = "strict"
    detect_matching: str = "permissive"
    value_leaves: str = "constants"
    stack_floor: bool = True

    # Frontend
    register_count: int = 4

    # Límites
    max_tree_nodes: int = 10_000
    max_patterns: int = 100_000

    # Ejecución
    workers: int = 1
    log_level: str = "WARNING"

    # ✅ DATADOG CONFIGURATION
    datadog_api_key: Optional[str] = None
    datadog_service_name: str = "malsig"
    datadog_env: str = "development"
    datadog_version: str = "1.0.0"
    datadog_enabled: bool = False
    datadog_site: str = "datadoghq.com"

    # CLI
    app_title: str = "malsig"
    app_version: str = "1.0.0"
    app_description: str = "Firmas de comportamiento malicioso sobre árboles de dependencias de llamadas"

    model_config = SettingsConfigDict(env_file=".env", extra="ignore")


settings = Settings()
