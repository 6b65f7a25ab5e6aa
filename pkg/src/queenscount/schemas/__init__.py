"""JSON schemas for the command-line output."""
import json
from importlib import resources

NAMES = ("exact", "estimate", "probe", "bench")


def load(name: str) -> dict:
    if name not in NAMES:
        raise KeyError(name)
    return json.loads(resources.files(__name__).joinpath(f"{name}.json").read_text())
