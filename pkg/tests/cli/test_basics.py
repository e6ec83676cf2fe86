import logging
import os

from pathlib import Path

import numpy
import pytest

from click.testing import CliRunner

from soundfield.pinn import __version__
from soundfield.pinn.cli import (
    Info,
    cli,
    version,
)
from soundfield.pinn.config import get_seed
from soundfield.pinn.logging import get_logger
from soundfield.pinn.model import LogLevel


FILE_DIR = os.path.dirname(__file__) + "/files"
EMPTY_CONFIG = FILE_DIR + "/DOES_NOT_EXIST.yml"
SEED_CONFIG = FILE_DIR + "/config_seed.yml"


def run(*args: str):
    info = Info()
    result = CliRunner().invoke(cli, list(args), obj=info)
    return info, result


def version_fields(output: str):
    fields = {}
    for line in output.splitlines():
        key, _, value = line.partition(": ")
        fields[key.strip()] = value.strip()
    return fields


def test_version_lists_package_and_numpy():
    info = Info()
    info.settings_path = Path("./test.yml")

    result = CliRunner().invoke(version, obj=info)
    fields = version_fields(result.output)

    assert result.exit_code == 0
    assert fields["soundfield.pinn version"] == __version__
    assert fields["config path"] == str(info.settings_path.absolute())
    assert fields["numpy version"] == numpy.__version__


def test_missing_config_uses_defaults():
    info, result = run("-c", EMPTY_CONFIG, "version")
    handlers = get_logger().handlers

    assert result.exit_code == 0
    assert info.settings.scene.f == 1000.0
    assert info.settings.log.level == LogLevel.WARNING
    assert get_logger().level == LogLevel.WARNING
    assert [type(h) for h in handlers] == [logging.StreamHandler]


@pytest.mark.parametrize(
    "option, expected_level",
    [pytest.param(key, val, id=key) for key, val in LogLevel.__members__.items()],
)
def test_log_level_option(option, expected_level):
    info, result = run("--log-level", option, "-c", EMPTY_CONFIG, "version")

    assert result.exit_code == 0
    assert info.settings.log.level == expected_level
    assert get_logger().level == expected_level


@pytest.mark.parametrize(
    "args, expected_seed",
    [
        pytest.param(["-c", SEED_CONFIG], 4242, id="from-file"),
        pytest.param(["--seed", "1337", "-c", SEED_CONFIG], 1337, id="cli-wins"),
        pytest.param(["--seed", "0", "-c", EMPTY_CONFIG], 0, id="zero"),
    ],
)
def test_run_seed(args, expected_seed):
    info, result = run(*args, "version")

    assert result.exit_code == 0
    assert info.settings.seed == expected_seed
    assert info.seed == expected_seed
    assert get_seed() == expected_seed
    assert type(get_seed()) == int


def test_seed_is_generated_when_unset():
    info, result = run("-c", EMPTY_CONFIG, "version")

    assert result.exit_code == 0
    assert isinstance(info.seed, int)
    assert info.seed == get_seed()


def test_out_option_overrides_config(tmp_path):
    info, result = run("-c", EMPTY_CONFIG, "-o", str(tmp_path), "version")

    assert result.exit_code == 0
    assert info.settings.out == tmp_path


def test_seed_out_of_range():
    _, result = run("--seed", "-1", "-c", EMPTY_CONFIG, "version")

    assert result.exit_code == 2
