"""Shared helpers for the test suite."""

from importlib import resources
from pathlib import Path

GOLDEN_DIR = Path(__file__).resolve().parent / "golden"


def fixture_scn(name: str) -> str:
    """Text of a shipped scenario fixture."""
    return (resources.files("pagersim") / "fixtures" / f"{name}.scn").read_text()


def golden(name: str) -> str:
    """Text of a hand-written golden trace."""
    return (GOLDEN_DIR / name).read_text()
