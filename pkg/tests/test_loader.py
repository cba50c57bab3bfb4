"""
Testes de leitura e gravação de arquivos (configurações, datasets, features,
rótulos, sondas)
"""

import sys
import os
import json

# Add parent directory to path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

import numpy as np

from core.loader import (
    load_config,
    load_dataset,
    load_features,
    load_labels,
    load_probes,
    load_text,
    to_json,
    write_json,
    write_text,
)


def test_missing_file_reports_error(tmp_path):
    missing = str(tmp_path / "nada.json")
    for loader in (load_config, load_dataset, load_features, load_labels, load_probes, load_text):
        res = loader(missing)
        assert not res["success"]
        assert "Arquivo não encontrado" in res["error"]


# ============================================================
# CONFIGURAÇÕES
# ============================================================
def test_load_config_json_and_toml(tmp_path):
    js = tmp_path / "c.json"
    js.write_text('{"epsilon": 0.1, "concept": {"variant": "flipped"}}', encoding="utf-8")
    assert load_config(str(js))["config"]["concept"]["variant"] == "flipped"

    tm = tmp_path / "c.toml"
    tm.write_text('epsilon = 0.1\n[learner]\nkind = "lasso"\n', encoding="utf-8")
    assert load_config(str(tm))["config"] == {"epsilon": 0.1, "learner": {"kind": "lasso"}}


def test_load_config_rejects_invalid_content(tmp_path):
    bad = tmp_path / "c.json"
    bad.write_text("{epsilon", encoding="utf-8")
    assert not load_config(str(bad))["success"]
    listing = tmp_path / "l.json"
    listing.write_text("[1, 2]", encoding="utf-8")
    res = load_config(str(listing))
    assert not res["success"]
    assert "não é um objeto" in res["error"]


# ============================================================
# DATASETS, FEATURES E RÓTULOS
# ============================================================
def test_load_dataset(tmp_path):
    path = tmp_path / "d.jsonl"
    path.write_text(
        json.dumps({"meta": {"concept": "abc"}, "schema_version": 1}) + "\n"
        + json.dumps({"x": "01", "y": 0.5}) + "\n\n"
        + json.dumps({"x": "11", "y": -1.0}) + "\n",
        encoding="utf-8",
    )
    res = load_dataset(str(path))
    assert res["success"]
    assert res["dataset"].xs == ["01", "11"]
    assert res["dataset"].meta == {"concept": "abc"}


def test_load_dataset_reports_bad_records(tmp_path):
    path = tmp_path / "d.jsonl"
    path.write_text(json.dumps({"x": "0a", "y": 0.5}) + "\n", encoding="utf-8")
    res = load_dataset(str(path))
    assert not res["success"]
    assert str(path) in res["error"]


def test_load_features_with_header(tmp_path):
    path = tmp_path / "f.jsonl"
    path.write_text('{"basis": ["I", "Z"]}\n{"phi": [1.0, -1.0]}\n[1.0, 1.0]\n', encoding="utf-8")
    res = load_features(str(path))
    assert res["basis"] == ["I", "Z"]
    np.testing.assert_array_equal(res["features"], [[1.0, -1.0], [1.0, 1.0]])


def test_load_features_rejects_ragged_or_empty(tmp_path):
    ragged = tmp_path / "r.jsonl"
    ragged.write_text('{"phi": [1.0]}\n{"phi": [1.0, 0.0]}\n', encoding="utf-8")
    assert "tamanhos diferentes" in load_features(str(ragged))["error"]
    empty = tmp_path / "e.jsonl"
    empty.write_text('{"basis": ["I"]}\n', encoding="utf-8")
    assert not load_features(str(empty))["success"]
    broken = tmp_path / "b.jsonl"
    broken.write_text('{"phi": [1.0]}\n{oops\n', encoding="utf-8")
    assert ":2:" in load_features(str(broken))["error"]


def test_load_labels_skips_metadata(tmp_path):
    path = tmp_path / "y.jsonl"
    path.write_text('{"meta": {}, "schema_version": 1}\n{"x": "0", "y": 0.25}\n-0.5\n', encoding="utf-8")
    res = load_labels(str(path))
    np.testing.assert_array_equal(res["labels"], [0.25, -0.5])
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"x": "0"}\n', encoding="utf-8")
    assert not load_labels(str(bad))["success"]


def test_load_probes(tmp_path):
    path = tmp_path / "p.jsonl"
    path.write_text('{"labels": [0, 5], "v": 0.5}\n', encoding="utf-8")
    assert load_probes(str(path))["probes"] == [((0, 5), 0.5)]
    path.write_text('{"labels": [6], "v": 0.5}\n', encoding="utf-8")
    res = load_probes(str(path))
    assert not res["success"]
    assert "0..5" in res["error"]


# ============================================================
# ESCRITA
# ============================================================
def test_to_json_is_sorted_and_handles_numpy():
    text = to_json({"b": np.float64(0.5), "a": np.arange(2)})
    assert json.loads(text) == {"a": [0, 1], "b": 0.5}
    assert text.index('"a"') < text.index('"b"')
    assert text.endswith("\n")


def test_write_creates_parent_directories(tmp_path):
    target = tmp_path / "x" / "y" / "out.json"
    res = write_json(str(target), {"k": 1})
    assert res["success"]
    assert json.loads(target.read_text(encoding="utf-8")) == {"k": 1}


def test_write_reports_os_errors(tmp_path):
    blocker = tmp_path / "arquivo"
    blocker.write_text("", encoding="utf-8")
    res = write_text(str(blocker / "filho.txt"), "conteúdo")
    assert not res["success"]
    assert "Erro ao gravar" in res["error"]
