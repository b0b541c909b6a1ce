"""Simplification systems as interchangeable line-to-line transformers.

A "system" maps a list of prepended source lines to a list of prediction
lines, one per input.  Three kinds are provided: the identity baseline
(strips the control prefix and echoes the sentence), the built-in rule
oracle, and any external command speaking the same stdin/stdout protocol,
so real neural models can be plugged in without this package knowing
about ML runtimes.
"""

from __future__ import annotations

import subprocess
from typing import Callable, Sequence

from .controls import split_control_prefix
from .errors import SystemRunError
from .oracle import OracleConfig, oracle_simplify

__all__ = [
    "SystemFn",
    "identity_system",
    "OracleSystem",
    "ExternalCommandSystem",
    "resolve_system",
]

SystemFn = Callable[[Sequence[str]], list[str]]


def identity_system(lines: Sequence[str]) -> list[str]:
    """Echo each sentence unchanged (control prefixes stripped)."""
    return [split_control_prefix(line)[1] for line in lines]


class OracleSystem:
    """The built-in rule-based simplifier as a system."""

    def __init__(self, config: OracleConfig):
        self.config = config

    def __call__(self, lines: Sequence[str]) -> list[str]:
        return [oracle_simplify(line, self.config) for line in lines]


class ExternalCommandSystem:
    """A shell command reading prepended sources on stdin, one prediction per line."""

    def __init__(self, command: str):
        self.command = command

    def __call__(self, lines: Sequence[str]) -> list[str]:
        payload = "\n".join(lines) + "\n" if lines else ""
        try:
            completed = subprocess.run(
                self.command,
                shell=True,
                input=payload,
                capture_output=True,
                text=True,
            )
        except OSError as exc:
            raise SystemRunError(f"could not run {self.command!r}: {exc}") from exc
        if completed.returncode != 0:
            stderr = completed.stderr.strip()
            raise SystemRunError(
                f"system command {self.command!r} exited with "
                f"{completed.returncode}: {stderr}"
            )
        predictions = completed.stdout.splitlines()
        if len(predictions) != len(lines):
            raise SystemRunError(
                f"system command {self.command!r} returned {len(predictions)} "
                f"lines for {len(lines)} inputs"
            )
        return predictions

    def __repr__(self) -> str:
        return f"ExternalCommandSystem({self.command!r})"


def resolve_system(spec: "str | SystemFn") -> SystemFn:
    """Turn a CLI/system spec into a callable.

    The literal string ``"identity"`` selects the built-in identity
    baseline; any other string is treated as an external shell command.
    Callables pass through unchanged.
    """
    if callable(spec):
        return spec
    if spec.strip() == "identity":
        return identity_system
    return ExternalCommandSystem(spec)
