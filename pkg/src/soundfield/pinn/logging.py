# -*- coding: utf-8 -*-
"""Structured logging setup for the soundfield PINN library and CLI."""
import json
import logging
import logging.config

from functools import partial
from typing import (
    Any,
    Callable,
    Dict,
    List,
    MutableMapping,
)

import numpy as np
import structlog

from pydantic.json import custom_pydantic_encoder

from .config import (
    LogFormat,
    LoggingConfig,
)


__all__ = [
    "LOGGER_NAME",
    "JSON_ENCODERS",
    "encoder",
    "unwrap_numpy",
    "JsonLineRenderer",
    "get_logger",
    "configure_logging",
]

EventDict = MutableMapping[str, Any]
Processor = Callable[[Any, str, EventDict], Any]

LOGGER_NAME = "soundfield.pinn"
"""The name of the soundfield PINN logger"""

JSON_ENCODERS = {
    complex: lambda z: [z.real, z.imag],
    np.ndarray: lambda a: a.tolist(),
    np.floating: float,
    np.integer: int,
}

encoder = partial(custom_pydantic_encoder, JSON_ENCODERS)
"""
JSON fallback encoder for log values.

Complex pressures are written as `[re, im]` pairs and numpy arrays as lists.
"""


def unwrap_numpy(logger: Any, method_name: str, event_dict: EventDict) -> EventDict:
    """Replaces numpy scalars by the equivalent Python numbers.

    Loss terms, radii and seeds usually come straight out of numpy arrays,
    the console renderer would otherwise print their `repr`.
    """
    for key, value in event_dict.items():
        if isinstance(value, np.generic):
            event_dict[key] = value.item()
    return event_dict


class JsonLineRenderer:
    """Renders one JSON object per event with the event text under `message`."""

    def __init__(self, message_key: str = "message"):
        self.message_key = message_key
        self._json = structlog.processors.JSONRenderer(
            serializer=json.dumps, sort_keys=True, default=encoder
        )

    def __call__(self, logger: Any, method_name: str, event_dict: EventDict) -> str:
        event_dict[self.message_key] = event_dict.pop("event", None)
        return self._json(logger, method_name, event_dict)


def get_logger() -> structlog.stdlib.BoundLogger:
    """Convenience function for getting the soundfield PINN logger."""
    return structlog.stdlib.get_logger(LOGGER_NAME)


def _shared_processors(logging_config: LoggingConfig) -> List[Processor]:
    timestamp = logging_config.timestamp
    return [
        structlog.stdlib.add_log_level,
        structlog.processors.TimeStamper(
            fmt=timestamp.format, utc=timestamp.utc, key=timestamp.key
        ),
        structlog.stdlib.PositionalArgumentsFormatter(),
        unwrap_numpy,
        structlog.processors.StackInfoRenderer(),
        structlog.processors.format_exc_info,
    ]


def _formatters(shared: List[Processor]) -> Dict[str, Dict[str, Any]]:
    renderers = {
        LogFormat.PLAIN: structlog.dev.ConsoleRenderer(colors=False),
        LogFormat.COLORED: structlog.dev.ConsoleRenderer(colors=True),
        LogFormat.JSON: JsonLineRenderer(),
    }
    return {
        fmt: {
            "()": structlog.stdlib.ProcessorFormatter,
            "processor": renderer,
            "foreign_pre_chain": shared,
        }
        for fmt, renderer in renderers.items()
    }


def _handlers(logging_config: LoggingConfig) -> Dict[str, Dict[str, Any]]:
    handlers = {}
    # stderr, so CSV rows and summaries echoed on stdout stay machine readable
    if logging_config.console.enabled:
        handlers["console"] = {
            "level": "DEBUG",
            "class": "logging.StreamHandler",
            "stream": "ext://sys.stderr",
            "formatter": logging_config.console.format,
        }
    if logging_config.file.enabled:
        handlers["file"] = {
            "level": "DEBUG",
            "class": "logging.handlers.WatchedFileHandler",
            "filename": str(logging_config.file.path.absolute()),
            "formatter": logging_config.file.format,
        }
    return handlers


def configure_logging(logging_config: LoggingConfig):
    """Configures structlog and the standard library logging from the
    [`LoggingConfig`][soundfield.pinn.config.LoggingConfig] settings.

    Calling it again replaces the previous configuration, the CLI
    does so once per invocation.

    Args:
        logging_config: The logging configuration object
    """
    structlog.reset_defaults()
    shared = _shared_processors(logging_config)
    handlers = _handlers(logging_config)

    logging.config.dictConfig(
        {
            "version": 1,
            "disable_existing_loggers": False,
            "formatters": _formatters(shared),
            "handlers": handlers,
            "loggers": {LOGGER_NAME: {"handlers": list(handlers), "propagate": True}},
        }
    )

    structlog.configure(
        processors=[
            structlog.stdlib.filter_by_level,
            *shared,
            # must stay last
            structlog.stdlib.ProcessorFormatter.wrap_for_formatter,
        ],
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=True,
    )

    logging.getLogger(LOGGER_NAME).setLevel(logging_config.level)
