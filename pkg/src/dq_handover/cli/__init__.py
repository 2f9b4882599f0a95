"""Modules of the `dq-handover` command-line interface."""

from dq_handover.cli.commands import (
    cmd_classify,
    cmd_eval,
    cmd_predict,
    cmd_synth,
    cmd_train,
)
from dq_handover.cli.config import (
    RunConfig,
    resolve_config,
)
from dq_handover.cli.main import main

__all__ = [
    "RunConfig",
    "cmd_classify",
    "cmd_eval",
    "cmd_predict",
    "cmd_synth",
    "cmd_train",
    "main",
    "resolve_config",
]
