"""Belief-indexed randomized strategies for P1."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Mapping

from .arena import P1, Arena
from .model import GameSpec, mask_of
from .solve import SolveResult, allow_class


class EmptyEntry(RuntimeError):
    """A winning belief with no allowed action; indicates a solver bug."""


class UnknownBelief(KeyError):
    pass


@dataclass(frozen=True)
class StrategyTable:
    """Map from belief mask to the sorted tuple of allowed ``(a, sigma)``.

    Every action of an entry is played with positive probability; the
    default distribution is uniform.
    """

    entries: Mapping[int, tuple[tuple[int, int], ...]]
    distribution: str = "uniform"
    metadata: dict = field(default_factory=dict, compare=False)

    def __contains__(self, belief: int) -> bool:
        return belief in self.entries

    def __getitem__(self, belief: int) -> tuple[tuple[int, int], ...]:
        try:
            return self.entries[belief]
        except KeyError:
            raise UnknownBelief(belief) from None

    def __len__(self) -> int:
        return len(self.entries)


def extract(arena: Arena, result: SolveResult) -> StrategyTable:
    """For each belief class meeting the win set, the actions allowed for
    every member of the class with respect to the win set."""
    win = result.win
    entries = {}
    for belief, cls in sorted(arena.belief_classes.items()):
        if not any(i in win for i in cls):
            continue
        acts = allow_class(arena, cls, win)
        if not acts:
            raise EmptyEntry(f"belief {arena.spec.names(belief)} has no allowed action")
        entries[belief] = tuple(sorted(acts))
    return StrategyTable(entries)


def act(table: StrategyTable, belief: int, rng: random.Random) -> tuple[int, int]:
    """Uniform draw over the entry for ``belief``."""
    entry = table[belief]
    return entry[rng.randrange(len(entry))]


def entry_for_state(table: StrategyTable, arena: Arena, i: int) -> tuple[tuple[int, int], ...]:
    q = arena.states[i]
    if not isinstance(q, P1):
        raise TypeError(f"position {i} is not a P1 position")
    return table[q.belief]


def table_to_json(spec: GameSpec, table: StrategyTable) -> list[dict]:
    """Beliefs as sorted state-name arrays, actions as names."""
    out = []
    for belief in sorted(table.entries, key=lambda b: (spec.names(b), b)):
        out.append({
            "states": sorted(spec.names(belief)),
            "actions": [
                {"control": spec.action_names[a], "query": spec.query_names[s]}
                for a, s in table.entries[belief]
            ],
        })
    return out


def table_from_json(spec: GameSpec, beliefs: list, distribution: str = "uniform") -> StrategyTable:
    """Inverse of :func:`table_to_json`; raises ``ValueError`` on unknown names."""
    state_idx = {n: i for i, n in enumerate(spec.state_names)}
    action_idx = {n: i for i, n in enumerate(spec.action_names)}
    query_idx = {n: i for i, n in enumerate(spec.query_names)}
    entries = {}
    for k, item in enumerate(beliefs):
        try:
            belief = mask_of(state_idx[n] for n in item["states"])
            acts = tuple(sorted((action_idx[x["control"]], query_idx[x["query"]]) for x in item["actions"]))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"beliefs[{k}]: malformed entry ({exc})") from None
        entries[belief] = acts
    return StrategyTable(entries, distribution)
