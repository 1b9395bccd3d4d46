"""Access to the bundled example games."""

from __future__ import annotations

import json
from importlib import resources

from .model import GameSpec, drop_no_attack, load_spec

CASES = ("case1", "case2", "case3")


def bundled_path(name: str):
    return resources.files("attackaware.data").joinpath(f"{name}.json")


def bundled_raw(name: str) -> dict:
    return json.loads(bundled_path(name).read_text(encoding="utf-8"))


def bundled_spec(name: str, include_no_attack: bool = True) -> GameSpec:
    raw = bundled_raw(name)
    if not include_no_attack:
        raw = drop_no_attack(raw)
    return load_spec(raw, include_no_attack)
