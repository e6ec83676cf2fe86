import json
import logging

import numpy as np
import pytest
import structlog

from soundfield.pinn.config import (
    FileLogHandler,
    LogFormat,
    LoggingConfig,
    LogHandler,
)
from soundfield.pinn.logging import (
    LOGGER_NAME,
    JsonLineRenderer,
    configure_logging,
    encoder,
    get_logger,
    unwrap_numpy,
)
from soundfield.pinn.model import LogLevel


def test_get_logger():
    configure_logging(LoggingConfig())

    assert get_logger().name == LOGGER_NAME


@pytest.mark.parametrize("level", LogLevel.__members__.values())
def test_log_level(level: LogLevel):
    cfg = LoggingConfig()
    cfg.level = level
    log = get_logger()

    configure_logging(cfg)

    assert log.name == LOGGER_NAME
    assert log.level == level


@pytest.mark.parametrize(
    "console_format, file_format, expected_fmt_file, handler_count",
    [
        pytest.param(
            LogFormat.PLAIN,
            LogFormat.PLAIN,
            structlog.dev.ConsoleRenderer,
            2,
            id="both-enabled-plain",
        ),
        pytest.param(
            LogFormat.COLORED,
            None,
            None,
            1,
            id="console-enabled-colored",
        ),
        pytest.param(
            None,
            LogFormat.JSON,
            JsonLineRenderer,
            1,
            id="file-enabled-json",
        ),
    ],
)
def test_handler_config(
    tmp_path, console_format, file_format, expected_fmt_file, handler_count
):
    def get_handler(name, handlers):
        for handler in handlers:
            if handler._name == name:
                return handler
        return None

    console = LogHandler(
        enabled=console_format is not None, format=console_format or LogFormat.PLAIN
    )
    file = FileLogHandler(
        enabled=file_format is not None,
        format=file_format or LogFormat.PLAIN,
        path=tmp_path / "soundfield.log",
    )
    log = get_logger()
    configure_logging(LoggingConfig(console=console, file=file))

    handlers = log.handlers

    assert len(handlers) == handler_count

    if console.enabled:
        handler = get_handler("console", handlers)
        assert handler is not None
        assert isinstance(handler.formatter.processor, structlog.dev.ConsoleRenderer)

    if file.enabled:
        handler = get_handler("file", handlers)
        assert handler is not None
        assert isinstance(handler.formatter.processor, expected_fmt_file)
        assert handler.baseFilename == str(file.path.absolute())


def test_json_file_log_encodes_numeric_fields(tmp_path):
    path = tmp_path / "soundfield.log"
    configure_logging(
        LoggingConfig(
            level=LogLevel.INFO,
            console=LogHandler(enabled=False),
            file=FileLogHandler(enabled=True, format=LogFormat.JSON, path=path),
        )
    )

    get_logger().info(
        "Training progress", epoch=np.int64(3), total=np.float64(0.5), weights=(1.0, 0.1)
    )
    for handler in logging.getLogger(LOGGER_NAME).handlers:
        handler.flush()

    record = json.loads(path.read_text().splitlines()[-1])
    assert record["message"] == "Training progress"
    assert record["epoch"] == 3
    assert record["total"] == 0.5
    assert record["level"] == "info"


def test_encoder_handles_numpy_and_complex():
    assert encoder(np.array([1.0, 2.0])) == [1.0, 2.0]
    assert encoder(1 - 2j) == [1.0, -2.0]
    assert encoder(np.float32(0.25)) == 0.25


def test_file_log_path_must_not_be_a_directory(tmp_path):
    with pytest.raises(ValueError):
        FileLogHandler(enabled=True, path=tmp_path)


def test_file_log_path_may_be_created(tmp_path):
    path = tmp_path / "run.log"

    assert FileLogHandler(enabled=True, path=path).path == path


def test_unwrap_numpy_scalars():
    event = unwrap_numpy(
        None, "info", {"event": "x", "epoch": np.int64(2), "loss": np.float64(0.25)}
    )

    assert event == {"event": "x", "epoch": 2, "loss": 0.25}
    assert type(event["epoch"]) is int


def test_json_line_renderer_message_key():
    line = JsonLineRenderer(message_key="msg")(
        None, "info", {"event": "Wrote sweep", "pressure": 1 + 2j}
    )

    assert json.loads(line) == {"msg": "Wrote sweep", "pressure": [1.0, 2.0]}
