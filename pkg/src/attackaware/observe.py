"""Sensor readings and the deterministic observation function."""

from __future__ import annotations

import enum

from .model import GameSpec, members


class Reading(enum.Enum):
    TRUE = "T"
    FALSE = "F"
    JAMMED = "?"


def readings(spec: GameSpec, s: int, query: int, attack: int) -> dict[int, Reading]:
    """Reading of every queried sensor at true state ``s``.

    ``query`` and ``attack`` are sensor masks.  Attacked sensors return
    ``JAMMED``; the others report whether ``s`` lies in their coverage.
    """
    out = {}
    for i in members(query):
        if attack >> i & 1:
            out[i] = Reading.JAMMED
        elif spec.coverage[i] >> s & 1:
            out[i] = Reading.TRUE
        else:
            out[i] = Reading.FALSE
    return out


def observe(spec: GameSpec, s: int, query: int, attack: int) -> int:
    """States consistent with the unjammed readings at ``s`` (a state mask).

    With no effective sensor the observation is the whole state space.
    """
    obs = spec.all_states
    for i in members(query & ~attack):
        cov = spec.coverage[i]
        obs &= cov if cov >> s & 1 else ~cov
    return obs & spec.all_states
