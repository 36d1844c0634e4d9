"""Tests for the settings file and per-run parameter parsing."""

import json
from fractions import Fraction

import pytest

from haar_factor.core.errors import InputFormatError, PreconditionError
from haar_factor.utils.config import Config, RunConfig, parse_rational


@pytest.fixture
def config(tmp_path):
    return Config(str(tmp_path / "settings.json"))


def test_parse_rational():
    assert parse_rational("1/3") == Fraction(1, 3)
    assert parse_rational(" 0.25 ") == Fraction(1, 4)
    assert parse_rational(7) == 7
    assert parse_rational(Fraction(2, 5)) == Fraction(2, 5)
    for bad in ("one half", "1/0", True):
        with pytest.raises(InputFormatError):
            parse_rational(bad)


def test_defaults_validate(config):
    assert config.get("construction.depth_budget") == 16
    assert config.tolerance() == Fraction(1, 2 ** 40)
    assert config.validate_config() == (True, [])


def test_dot_notation(config):
    config.set("parallel.threads", 4)
    assert config.get("parallel.threads") == 4
    assert config.get("no.such.key", "fallback") == "fallback"
    config.update({"factorization.tol": "1/1024"})
    assert config.tolerance() == Fraction(1, 1024)
    config.reset_to_defaults()
    assert config.get("parallel.threads") is None


def test_saved_settings_are_merged(tmp_path):
    path = tmp_path / "settings.json"
    path.write_text(json.dumps({"factorization": {"random_witnesses": 4}}))
    config = Config(str(path))
    assert config.get("factorization.random_witnesses") == 4
    assert config.get("factorization.exhaustive_limit") == 12


def test_save_and_import(config, tmp_path):
    config.set("construction.ascent_iterations", 50)
    config.save_config()
    assert Config(config.config_file).get("construction.ascent_iterations") == 50

    extra = tmp_path / "extra.json"
    extra.write_text(json.dumps({"output": {"log_level": "debug"}}))
    config.import_config(str(extra))
    assert config.get("output.log_level") == "debug"
    assert config.get("output.verbose") is False


def test_unreadable_settings_fall_back_to_defaults(tmp_path):
    path = tmp_path / "settings.json"
    path.write_text("{broken")
    assert Config(str(path)).get("construction.depth_budget") == 16


@pytest.mark.parametrize(
    "key, value",
    [
        ("construction.depth_budget", -1),
        ("construction.ascent_iterations", 0),
        ("factorization.tol", "0"),
        ("factorization.tol", "tiny"),
        ("factorization.random_witnesses", "many"),
        ("factorization.neumann_precision_bits", 0),
        ("parallel.threads", 0),
        ("output.log_level", "loud"),
    ],
)
def test_invalid_settings_are_reported(config, key, value):
    config.set(key, value)
    valid, errors = config.validate_config()
    assert not valid
    assert any(key in error for error in errors)


def test_run_config_parses_exact_values(config):
    run = RunConfig.from_params(
        "factor",
        {"delta": "1/2", "eta": "1", "index_depth": 2, "operator": "op.json", "block_depth": 4},
        config,
    )
    assert run.delta == Fraction(1, 2)
    assert run.eta == 1
    assert run.tol == config.tolerance()
    assert run.operator_path == "op.json"
    assert run.extra == {"block_depth": 4}
    assert not run.emit_matrices


@pytest.mark.parametrize(
    "params",
    [
        {"delta": "-1"},
        {"eta": "0"},
        {"tol": "0"},
        {"index_depth": -1},
        {"depth": 2, "index_depth": 3},
    ],
)
def test_run_config_rejects_bad_parameters(config, params):
    with pytest.raises(PreconditionError):
        RunConfig.from_params("factor", params, config)


def test_run_config_rejects_unparsable_rationals(config):
    with pytest.raises(InputFormatError):
        RunConfig.from_params("factor", {"eta": "lots"}, config)
