"""
Leitura e gravação de arquivos do ObsLearn
Configurações JSON/TOML, datasets, features, rótulos e sondas em JSONL.
Cada função devolve {"success": bool, "error": str, ...} em vez de levantar exceção.
"""
from __future__ import annotations

from pathlib import Path
from typing import Any, Dict, List, Optional
import json
import logging
import sys

if sys.version_info >= (3, 11):
    import tomllib
else:  # Python 3.10: backport com a mesma API
    import tomli as tomllib

import numpy as np

from core.concepts import Dataset
from core.errors import ObsLearnError, ValidationError

logger = logging.getLogger(__name__)


# ============================================================
# LEITURA
# ============================================================
def _read_text(path: str) -> Dict[str, Any]:
    p = Path(path)
    if not p.exists():
        return {"success": False, "error": f"Arquivo não encontrado: {p}", "text": None}
    try:
        return {"success": True, "error": None, "text": p.read_text(encoding="utf-8")}
    except OSError as e:
        return {"success": False, "error": f"Erro ao ler {p}: {e}", "text": None}


def load_config(path: str) -> Dict[str, Any]:
    """
    Lê configuração de experimento em JSON ou TOML (pela extensão)

    Returns:
        {"success", "error", "config"}
    """
    res = _read_text(path)
    if not res["success"]:
        return {"success": False, "error": res["error"], "config": None}
    try:
        if Path(path).suffix.lower() == ".toml":
            config = tomllib.loads(res["text"])
        else:
            config = json.loads(res["text"])
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as e:
        return {"success": False, "error": f"Configuração inválida em {path}: {e}", "config": None}
    if not isinstance(config, dict):
        return {"success": False, "error": f"Configuração em {path} não é um objeto", "config": None}
    return {"success": True, "error": None, "config": config}


def load_dataset(path: str) -> Dict[str, Any]:
    """
    Lê dataset JSONL (cabeçalho de metadados + uma amostra por linha)

    Returns:
        {"success", "error", "dataset"}
    """
    res = _read_text(path)
    if not res["success"]:
        return {"success": False, "error": res["error"], "dataset": None}
    try:
        return {"success": True, "error": None, "dataset": Dataset.from_jsonl(res["text"])}
    except ObsLearnError as e:
        return {"success": False, "error": f"{path}: {e}", "dataset": None}


def _jsonl_records(text: str, path: str) -> List[dict]:
    records = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            records.append(json.loads(line))
        except json.JSONDecodeError as e:
            raise ValidationError(f"{path}:{lineno}: JSON inválido ({e.msg})") from None
    return records


def load_features(path: str) -> Dict[str, Any]:
    """
    Lê matriz de features em JSONL: cabeçalho opcional {"basis": [...]} e
    linhas {"phi": [...]} (ou listas simples)

    Returns:
        {"success", "error", "features", "basis"}
    """
    res = _read_text(path)
    if not res["success"]:
        return {"success": False, "error": res["error"], "features": None, "basis": None}
    try:
        basis: Optional[List[str]] = None
        rows = []
        for record in _jsonl_records(res["text"], path):
            if isinstance(record, dict) and "basis" in record and "phi" not in record:
                basis = [str(b) for b in record["basis"]]
                continue
            row = record["phi"] if isinstance(record, dict) else record
            rows.append([float(v) for v in row])
        if not rows:
            raise ValidationError(f"{path}: nenhuma linha de features")
        if len({len(r) for r in rows}) != 1:
            raise ValidationError(f"{path}: linhas de features com tamanhos diferentes")
        return {"success": True, "error": None, "features": np.array(rows), "basis": basis}
    except (ValidationError, KeyError, TypeError, ValueError) as e:
        return {"success": False, "error": f"Features inválidas: {e}", "features": None, "basis": None}


def load_labels(path: str) -> Dict[str, Any]:
    """
    Lê rótulos em JSONL: linhas {"y": valor} ou números simples; linhas de
    metadados são ignoradas, de modo que um dataset também serve

    Returns:
        {"success", "error", "labels"}
    """
    res = _read_text(path)
    if not res["success"]:
        return {"success": False, "error": res["error"], "labels": None}
    try:
        labels = []
        for record in _jsonl_records(res["text"], path):
            if isinstance(record, dict):
                if "meta" in record:
                    continue
                labels.append(float(record["y"]))
            else:
                labels.append(float(record))
        return {"success": True, "error": None, "labels": np.array(labels)}
    except (ValidationError, KeyError, TypeError, ValueError) as e:
        return {"success": False, "error": f"Rótulos inválidos: {e}", "labels": None}


def load_probes(path: str) -> Dict[str, Any]:
    """
    Lê sondas em JSONL: {"labels": [0..5 por qubit], "v": valor}

    Returns:
        {"success", "error", "probes"}
    """
    res = _read_text(path)
    if not res["success"]:
        return {"success": False, "error": res["error"], "probes": None}
    try:
        probes = []
        for record in _jsonl_records(res["text"], path):
            labels = tuple(int(v) for v in record["labels"])
            if any(not 0 <= v < 6 for v in labels):
                raise ValidationError(f"Rótulo de estabilizador fora de 0..5: {labels}")
            probes.append((labels, float(record["v"])))
        return {"success": True, "error": None, "probes": probes}
    except (ValidationError, KeyError, TypeError, ValueError) as e:
        return {"success": False, "error": f"Sondas inválidas: {e}", "probes": None}


def load_text(path: str) -> Dict[str, Any]:
    """Texto bruto (circuitos, operadores)."""
    return _read_text(path)


# ============================================================
# ESCRITA
# ============================================================
def to_json(data: Any) -> str:
    """JSON determinístico: chaves ordenadas, floats por repr."""
    return json.dumps(data, sort_keys=True, indent=2, default=_json_default) + "\n"


def _json_default(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"Tipo não serializável: {type(value).__name__}")


def write_text(path: str, text: str) -> Dict[str, Any]:
    """
    Grava texto criando diretórios intermediários

    Returns:
        {"success", "error", "path"}
    """
    p = Path(path)
    try:
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(text, encoding="utf-8")
    except OSError as e:
        logger.error("Falha ao gravar %s: %s", p, e)
        return {"success": False, "error": f"Erro ao gravar {p}: {e}", "path": str(p)}
    logger.debug("Gravado %s", p)
    return {"success": True, "error": None, "path": str(p)}


def write_json(path: str, data: Any) -> Dict[str, Any]:
    return write_text(path, to_json(data))
