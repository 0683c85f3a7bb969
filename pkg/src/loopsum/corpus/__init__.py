"""Bundled example loops used by the differential and timing checks."""

from __future__ import annotations

from pathlib import Path

DIR = Path(__file__).resolve().parent


def files() -> list[Path]:
    """All bundled ``.wl`` programs, sorted by name."""
    return sorted(DIR.glob("*.wl"))


def path(name: str) -> Path:
    p = DIR / (name if name.endswith(".wl") else name + ".wl")
    if not p.is_file():
        raise FileNotFoundError(p)
    return p
