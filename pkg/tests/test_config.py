import json

import pytest

from qpc.config import (
    TOLERANCE_ENV_VAR,
    ConfigError,
    Tolerances,
    get_tolerances,
    load_tolerances,
    parse_tolerances,
    resolve,
)


def test_defaults():
    tol = Tolerances()
    assert tol.hermitian == 1e-10
    assert tol.psd == 1e-9
    assert tol.separable_dominant == 1e-12
    assert tol.membership == 1e-8
    assert set(tol.to_dict()) >= {"trace", "entropy_cutoff", "degeneracy"}


def test_parse_tolerances_overrides_only_given_keys():
    tol = parse_tolerances({"psd": 1e-7, "trace": 0})
    assert tol.psd == 1e-7
    assert tol.trace == 0.0
    assert tol.hermitian == Tolerances().hermitian


@pytest.mark.parametrize(
    "data",
    [
        {"unknown_key": 1e-3},
        {"psd": "small"},
        {"psd": True},
        {"psd": -1e-3},
        {"psd": float("inf")},
        [1e-3],
    ],
)
def test_parse_tolerances_rejects(data):
    with pytest.raises(ConfigError):
        parse_tolerances(data)


def test_load_tolerances(tmp_path):
    path = tmp_path / "tol.json"
    path.write_text(json.dumps({"degeneracy": 1e-6}), encoding="utf-8")
    assert load_tolerances(path).degeneracy == 1e-6


def test_load_tolerances_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_tolerances(tmp_path / "missing.json")

    broken = tmp_path / "broken.json"
    broken.write_text("{psd: ", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_tolerances(broken)


def test_get_tolerances_reads_env_override(tmp_path, monkeypatch):
    path = tmp_path / "tol.json"
    path.write_text(json.dumps({"membership": 1e-4}), encoding="utf-8")
    monkeypatch.setenv(TOLERANCE_ENV_VAR, str(path))
    get_tolerances.cache_clear()

    assert get_tolerances().membership == 1e-4
    assert resolve(None).membership == 1e-4


def test_resolve_prefers_explicit_record():
    explicit = Tolerances(trace=0.5)
    assert resolve(explicit) is explicit
    assert resolve(None) == Tolerances()
