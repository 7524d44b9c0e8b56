"""
Command registry and the outcome every command returns.
"""
from dataclasses import dataclass
from typing import Optional

from pydantic import BaseModel


@dataclass
class Outcome:
    """What a command produced: a report to write, its exit code and optional text for stdout."""
    exit_code: int
    report: Optional[BaseModel] = None
    text: Optional[str] = None


def registry() -> dict:
    """Command modules by name, in help order."""
    from grassgeo.commands import convexity, geodesic, replay, verify

    return {module.NAME: module for module in (verify, geodesic, convexity, replay)}
