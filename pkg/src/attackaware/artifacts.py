"""Run manifests and the strategy/certificate file format."""

from __future__ import annotations

import datetime as _dt
import hashlib
import os
from dataclasses import asdict, dataclass, field

from . import __version__
from .arena import Arena
from .model import GameSpec
from .oracle import Certificate
from .solve import Solution
from .strategy import StrategyTable, table_from_json, table_to_json

FORMAT = "attackaware-strategy/1"


class StrategyFileError(ValueError):
    """Malformed or incomplete strategy file."""


class SpecHashMismatch(ValueError):
    pass


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def timestamp() -> str:
    """UTC time, pinned by ``SOURCE_DATE_EPOCH`` when set (reproducible output)."""
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    when = (_dt.datetime.fromtimestamp(int(epoch), _dt.timezone.utc) if epoch
            else _dt.datetime.now(_dt.timezone.utc).replace(microsecond=0))
    return when.isoformat().replace("+00:00", "Z")


@dataclass
class RunManifest:
    spec_path: str
    spec_sha256: str
    mode: str
    initial_state: str
    initial_observation: list = field(default_factory=list)
    include_no_attack: bool = True
    seeds: dict = field(default_factory=dict)
    tool_version: str = __version__
    created: str = field(default_factory=timestamp)

    @classmethod
    def for_spec(cls, path, spec: GameSpec, mode: str = "belief", include_no_attack: bool = True, **kw):
        return cls(str(path), sha256_file(path), mode, spec.state_names[spec.initial_state],
                   spec.names(spec.initial_observation), include_no_attack, **kw)

    def as_dict(self) -> dict:
        return asdict(self)


def strategy_document(manifest: RunManifest, solution: Solution, table: StrategyTable) -> dict:
    arena = solution.arena
    return {
        "format": FORMAT,
        "metadata": manifest.as_dict(),
        "distribution": table.distribution,
        "beliefs": table_to_json(arena.spec, table),
        "certificate": {
            "arena_states": len(arena),
            "win": sorted(solution.win),
            "levels": solution.belief.layers(),
        },
    }


def parse_strategy_document(doc: dict, spec: GameSpec) -> tuple[dict, StrategyTable, dict]:
    """Return ``(metadata, table, raw certificate)``; raises
    :class:`StrategyFileError` when a required field is missing."""
    if not isinstance(doc, dict):
        raise StrategyFileError("strategy file must be a JSON object")
    for key in ("metadata", "beliefs"):
        if key not in doc:
            raise StrategyFileError(f"missing field {key!r}")
    meta = doc["metadata"]
    if not isinstance(meta, dict) or "spec_sha256" not in meta:
        raise StrategyFileError("metadata.spec_sha256 is required")
    try:
        table = table_from_json(spec, doc["beliefs"], doc.get("distribution", "uniform"))
    except ValueError as exc:
        raise StrategyFileError(str(exc)) from None
    return meta, table, doc.get("certificate")


def certificate_from_document(raw, table: StrategyTable, arena: Arena) -> Certificate:
    if not isinstance(raw, dict):
        raise StrategyFileError("missing field 'certificate'")
    for key in ("win", "levels"):
        if key not in raw:
            raise StrategyFileError(f"missing field 'certificate.{key}'")
    if raw.get("arena_states", len(arena)) != len(arena):
        raise StrategyFileError(
            f"certificate was made for {raw['arena_states']} positions, arena has {len(arena)}")
    try:
        win = frozenset(int(i) for i in raw["win"])
        levels, acc = [], set()
        for layer in raw["levels"]:
            acc |= {int(i) for i in layer}
            levels.append(frozenset(acc))
    except (TypeError, ValueError) as exc:
        raise StrategyFileError(f"certificate: {exc}") from None
    return Certificate(win, levels, table)
