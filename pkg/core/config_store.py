"""
Configurações do sistema
Ordem de precedência: padrões < arquivo .env < variáveis de ambiente
"""
import logging
import os
from typing import Any, Dict

from dotenv import load_dotenv

from core.constants import SCHEMA_VERSION

logger = logging.getLogger(__name__)

# env var -> (chave de configuração, conversor)
_ENV_OVERRIDES = {
    "OBSLEARN_QUBIT_CAP": ("qubit_cap", int),
    "OBSLEARN_DENSE_DIM": ("dense_dim_cap", int),
    "OBSLEARN_SPARSE_DIM": ("sparse_dim_cap", int),
    "OBSLEARN_THREADS": ("threads", int),
    "OBSLEARN_LANCZOS_TOL": ("lanczos_tol", float),
}


def _defaults() -> Dict[str, Any]:
    return {
        "qubit_cap": 20,
        "dense_dim_cap": 2 ** 14,
        "sparse_dim_cap": 2 ** 20,
        "lanczos_tol": 1e-10,
        "krylov_dim": 30,
        "max_restarts": 200,
        "threads": os.cpu_count() or 1,
        "schema_version": SCHEMA_VERSION,
        "n_test_default": 2000,
    }


def get_config() -> Dict[str, Any]:
    """Retorna a configuração do sistema."""
    config = _defaults()

    # .env não sobrescreve variáveis já definidas no ambiente
    load_dotenv(override=False)

    for env_name, (key, convert) in _ENV_OVERRIDES.items():
        raw = os.getenv(env_name)
        if raw is None or raw.strip() == "":
            continue
        try:
            value = convert(raw.strip())
        except ValueError:
            logger.warning("Valor inválido em %s=%r, usando padrão %r", env_name, raw, config[key])
            continue
        if value <= 0:
            logger.warning("%s deve ser positivo (recebido %r), usando padrão %r", env_name, raw, config[key])
            continue
        config[key] = value

    return config


def qubit_cap() -> int:
    """Limite de qubits do guarda de recursos."""
    return int(get_config()["qubit_cap"])
