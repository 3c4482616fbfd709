"""Bundled map assets."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .world import GridMap, load_map

MAP_NAMES = ("map_a", "map_b", "map_c", "map_d", "map_e")


def bundled_map_text(name: str) -> str:
    ref = resources.files(__package__).joinpath(f"maps/{name}.txt")
    if not ref.is_file():
        raise FileNotFoundError(f"no bundled map named {name!r}")
    return ref.read_text()


def load_bundled_map(name: str) -> GridMap:
    return load_map(bundled_map_text(name))


def resolve_map(name: str, maps_dir: str | Path | None = None) -> GridMap:
    """Load a map by name from ``maps_dir`` if given (falling back to the
    bundled assets), or directly from a path."""
    if maps_dir is not None:
        candidate = Path(maps_dir) / f"{name}.txt"
        if candidate.is_file():
            return load_map(candidate.read_text())
    p = Path(name)
    if p.suffix == ".txt" and p.is_file():
        return load_map(p.read_text())
    return load_bundled_map(name)
