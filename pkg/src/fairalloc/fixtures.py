"""Bundled example instances, loadable by name."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .instance import InstanceDocument, InstanceError, load_instance, loads_instance


def _fixture_dir():
    return resources.files(__package__) / "fixtures"


def fixture_names() -> list[str]:
    names = []
    for entry in _fixture_dir().iterdir():
        if entry.name.endswith(".json"):
            names.append(entry.name[: -len(".json")])
    return sorted(names)


def fixture_text(name: str) -> str:
    entry = _fixture_dir() / f"{name}.json"
    if not entry.is_file():
        raise InstanceError(f"no fixture named {name!r}")
    return entry.read_text()


def load_fixture(name: str) -> InstanceDocument:
    return loads_instance(fixture_text(name))


def resolve_instance(ref: str) -> InstanceDocument:
    """Load a document from a file path, or by fixture name."""
    if Path(ref).is_file():
        return load_instance(ref)
    if ref in fixture_names():
        return load_fixture(ref)
    raise InstanceError(f"{ref!r} is neither a readable file nor a fixture name")
