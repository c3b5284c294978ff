import logging
import time
from enum import IntEnum
from functools import wraps
from typing import List, Optional

import requests

from app.config import settings

logger = logging.getLogger(__name__)

METRIC_PREFIX = "malsig"

# sitio de Datadog -> host del API de métricas
SITE_HOSTS = {
    "us5": "api.us5.datadoghq.com",
    "us3": "api.us3.datadoghq.com",
    "ap1": "api.ap1.datadoghq.com",
    "datadoghq.eu": "api.datadoghq.eu",
}
DEFAULT_HOST = "api.datadoghq.com"


class MetricType(IntEnum):
    """Tipos de series de Datadog API v2 que envía el pipeline"""
    COUNT = 1
    GAUGE = 3


class DatadogService:
    """Métricas del pipeline (extracción, aprendizaje, veredictos) vía API HTTP v2"""

    _initialized = False

    @staticmethod
    def api_url() -> str:
        site = settings.datadog_site
        host = next((host for key, host in SITE_HOSTS.items() if key in site), DEFAULT_HOST)
        return f"https://{host}/api/v2/series"

    @classmethod
    def initialize(cls):
        """Activar el envío; sin API key el servicio queda inerte"""
        if cls._initialized:
            return
        if not settings.datadog_enabled:
            logger.debug("⚠️ Datadog deshabilitado en configuración")
            return
        if not settings.datadog_api_key:
            logger.warning("⚠️ Datadog API key no configurada - Datadog deshabilitado")
            return
        logger.info("✅ Datadog inicializado: %s (%s)", settings.datadog_service_name, cls.api_url())
        cls._initialized = True

    @classmethod
    def reset(cls):
        cls._initialized = False

    @classmethod
    def _send_metric(cls, name: str, value: float, metric_type: MetricType, tags: Optional[List[str]] = None):
        """
        Enviar una serie con un único punto

        Args:
            name: Nombre sin prefijo (``detect.verdict``)
            value: Valor del punto
            metric_type: Tipo de la serie
            tags: Tags propios; se agregan service/env/version
        """
        if not settings.datadog_enabled or not cls._initialized:
            return

        metric = f"{METRIC_PREFIX}.{name}"
        series = {
            "metric": metric,
            "type": int(metric_type),
            "points": [{"timestamp": int(time.time()), "value": value}],
            "tags": [
                *(tags or []),
                f"service:{settings.datadog_service_name}",
                f"env:{settings.datadog_env}",
                f"version:{settings.datadog_version}",
            ],
        }
        headers = {"DD-API-KEY": settings.datadog_api_key, "Content-Type": "application/json"}

        try:
            response = requests.post(cls.api_url(), json={"series": [series]}, headers=headers, timeout=5)
        except requests.RequestException as e:
            # las métricas nunca interrumpen el análisis
            logger.warning("⚠️ Error al enviar métrica %s: %s", metric, e)
            return
        if response.status_code != 202:
            logger.warning("⚠️ Error al enviar métrica %s: HTTP %s", metric, response.status_code)
            return
        logger.debug("✅ Métrica enviada: %s = %s", metric, value)

    @classmethod
    def increment_counter(cls, name: str, value: int = 1, tags: Optional[List[str]] = None):
        cls._send_metric(name, float(value), MetricType.COUNT, tags)

    @classmethod
    def gauge(cls, name: str, value: float, tags: Optional[List[str]] = None):
        cls._send_metric(name, value, MetricType.GAUGE, tags)

    @classmethod
    def timing(cls, name: str, milliseconds: float, tags: Optional[List[str]] = None):
        """Recibe milisegundos, envía segundos"""
        cls._send_metric(name, milliseconds / 1000.0, MetricType.GAUGE, tags)


def track_execution_time(metric_name: str):
    """Decorador: duración de la llamada con tag ``status:success|error``"""
    def decorator(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            start = time.perf_counter()
            status = "success"
            try:
                return func(*args, **kwargs)
            except Exception:
                status = "error"
                raise
            finally:
                elapsed_ms = (time.perf_counter() - start) * 1000
                DatadogService.timing(metric_name, elapsed_ms, tags=[f"status:{status}"])
        return wrapper
    return decorator
