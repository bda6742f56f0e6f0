import json

import pytest

from parityqht.config import (
    ConfigError,
    Settings,
    dense_cap,
    load_settings,
    load_settings_file,
    read_dotenv,
)


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    monkeypatch.delenv("PARITYQHT_DENSE_CAP", raising=False)
    monkeypatch.delenv("PARITYQHT_MAX_GRID_POINTS", raising=False)


# --- read_dotenv ---

def test_read_dotenv_basic(tmp_path):
    dotenv = tmp_path / ".env"
    dotenv.write_text("PARITYQHT_DENSE_CAP=8\nOTHER=x\n")
    assert read_dotenv(dotenv) == {"PARITYQHT_DENSE_CAP": "8", "OTHER": "x"}


def test_read_dotenv_missing_file(tmp_path):
    assert read_dotenv(tmp_path / ".env") == {}


def test_read_dotenv_ignores_comments_and_strips_quotes(tmp_path):
    dotenv = tmp_path / ".env"
    dotenv.write_text('# comment\n\nPARITYQHT_MAX_GRID_POINTS="500"\n')
    assert read_dotenv(dotenv) == {"PARITYQHT_MAX_GRID_POINTS": "500"}


# --- dense cap ---

def test_dense_cap_default():
    assert dense_cap() == 10


def test_dense_cap_from_environment(monkeypatch):
    monkeypatch.setenv("PARITYQHT_DENSE_CAP", "12")
    assert dense_cap() == 12


def test_dense_cap_rejects_garbage(monkeypatch):
    monkeypatch.setenv("PARITYQHT_DENSE_CAP", "many")
    with pytest.raises(ConfigError, match="integer"):
        dense_cap()


def test_dense_cap_rejects_above_hard_limit(monkeypatch):
    monkeypatch.setenv("PARITYQHT_DENSE_CAP", "20")
    with pytest.raises(ConfigError, match="supported maximum"):
        dense_cap()


# --- load_settings ---

def test_load_settings_defaults(tmp_path):
    settings = load_settings(tmp_path)
    assert settings == Settings()
    assert settings.tolerances() == {
        "classify": 1e-12,
        "duality": 1e-8,
        "eig_residual": 1e-10,
        "hermitian": 1e-12,
    }


def test_load_settings_from_json(tmp_path):
    path = tmp_path / "settings.json"
    path.write_text(json.dumps({"classify_tol": 1e-9, "max_grid_points": 50}))
    settings = load_settings(tmp_path, path)
    assert settings.classify_tol == 1e-9
    assert settings.max_grid_points == 50


def test_load_settings_env_beats_dotenv_beats_json(tmp_path, monkeypatch):
    path = tmp_path / "settings.json"
    path.write_text(json.dumps({"max_dense_qubits": 6, "max_grid_points": 10}))
    (tmp_path / ".env").write_text("PARITYQHT_DENSE_CAP=7\nPARITYQHT_MAX_GRID_POINTS=20\n")
    monkeypatch.setenv("PARITYQHT_DENSE_CAP", "8")
    settings = load_settings(tmp_path, path)
    assert settings.max_dense_qubits == 8
    assert settings.max_grid_points == 20


def test_load_settings_rejects_unknown_key(tmp_path):
    path = tmp_path / "settings.json"
    path.write_text(json.dumps({"classify_tol": 1e-9, "colour": "red"}))
    with pytest.raises(ConfigError, match="colour"):
        load_settings(tmp_path, path)


def test_load_settings_rejects_bad_values(tmp_path):
    path = tmp_path / "settings.json"
    path.write_text(json.dumps({"max_grid_points": -3}))
    with pytest.raises(ConfigError, match="positive integer"):
        load_settings(tmp_path, path)
    path.write_text(json.dumps({"duality_tol": "small"}))
    with pytest.raises(ConfigError, match="positive number"):
        load_settings(tmp_path, path)


def test_load_settings_rejects_dense_cap_above_limit(tmp_path):
    path = tmp_path / "settings.json"
    path.write_text(json.dumps({"max_dense_qubits": 30}))
    with pytest.raises(ConfigError, match="supported maximum"):
        load_settings(tmp_path, path)


def test_load_settings_file_errors(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_settings_file(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError, match="not valid JSON"):
        load_settings_file(bad)
    bad.write_text("[1, 2]")
    with pytest.raises(ConfigError, match="JSON object"):
        load_settings_file(bad)


def test_load_settings_rejects_fixed_tolerances(tmp_path):
    path = tmp_path / "settings.json"
    for key in ("hermitian_tol", "eig_residual_tol"):
        path.write_text(json.dumps({key: 1e-9}))
        with pytest.raises(ConfigError, match=key):
            load_settings(tmp_path, path)


def test_load_settings_reads_search_settings(tmp_path):
    path = tmp_path / "settings.json"
    path.write_text(json.dumps({"duality_tol": 1e-6, "max_search_iterations": 50}))
    settings = load_settings(tmp_path, path)
    assert settings.duality_tol == 1e-6
    assert settings.max_search_iterations == 50
