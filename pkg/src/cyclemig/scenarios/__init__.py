"""Bundled scenario configurations."""

from importlib import resources

_BUNDLED = {
    "benchmark": "benchmark.json",
    "applications": "applications.json",
}


def bundled_scenario_names() -> list[str]:
    return sorted(_BUNDLED)


def bundled_scenario(name: str) -> str:
    """JSON text of a bundled scenario config."""
    if name not in _BUNDLED:
        raise KeyError(f"unknown bundled scenario {name!r}; have {bundled_scenario_names()}")
    return (resources.files(__package__) / _BUNDLED[name]).read_text()
