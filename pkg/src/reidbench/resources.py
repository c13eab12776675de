"""Access to packaged default data files (prompt templates, rule tables)."""
from __future__ import annotations

from functools import lru_cache
from importlib.resources import files
from pathlib import Path


def data_path(*parts: str) -> Path:
    """Filesystem path of a packaged data file."""
    path = Path(str(files("reidbench").joinpath("data", *parts)))
    if not path.exists():
        raise FileNotFoundError(f"packaged data file missing: {'/'.join(parts)}")
    return path


@lru_cache(maxsize=None)
def prompt_template(name: str) -> str:
    """Packaged prompt template text, loaded verbatim."""
    return data_path("prompts", f"{name}.txt").read_text(encoding="utf-8")
