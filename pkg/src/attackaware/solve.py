"""Nested fixed point for almost-sure reachability of ``Final``.

The outer loop shrinks a safety set ``Y``; the inner loop grows level sets
``R_0 = {Final} ⊆ R_1 ⊆ ...`` of positions from which P1 can reach the
previous level with positive probability while keeping the play in ``Y``.
P1 positions are constrained to act uniformly over their equivalence
class, which is either the singleton class (perfect observation) or all
reachable P1 positions sharing the same belief.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import AbstractSet, Iterable

from .arena import P1, P2, Arena, Nature

log = logging.getLogger(__name__)

StateSet = frozenset


class Mode(enum.Enum):
    PERFECT = "perfect"
    BELIEF = "belief"


@dataclass
class SolveResult:
    win: frozenset
    levels: list = field(default_factory=list)
    outer_iterations: int = 0
    inner_iterations: list = field(default_factory=list)
    mode: Mode = Mode.BELIEF

    def layers(self) -> list[list[int]]:
        """Positions first added at each level, ``R_k - R_(k-1)``."""
        out, prev = [], frozenset()
        for level in self.levels:
            out.append(sorted(level - prev))
            prev = level
        return out


def equivalence_class(arena: Arena, i: int, mode: Mode) -> list[int]:
    if mode is Mode.PERFECT:
        return [i]
    return arena.belief_classes[arena.states[i].belief]


def allow(arena: Arena, i: int, Y: AbstractSet[int]) -> set[tuple[int, int]]:
    """P1 actions at position ``i`` whose successor lies in ``Y``."""
    return {label for label, t, _ in arena.edges[i] if t in Y}


def allow_class(arena: Arena, members: Iterable[int], Y: AbstractSet[int]) -> set[tuple[int, int]]:
    result = None
    for i in members:
        here = allow(arena, i, Y)
        result = here if result is None else result & here
        if not result:
            break
    return result if result is not None else set()


def _class_allowed(arena: Arena, Y: AbstractSet[int], mode: Mode) -> dict[int, set]:
    """Allowed action sets keyed by class representative (belief or index)."""
    if mode is Mode.PERFECT:
        return {i: allow(arena, i, Y) for i in arena.p1_indices()}
    return {b: allow_class(arena, cls, Y) for b, cls in arena.belief_classes.items()}


def _class_key(arena: Arena, i: int, mode: Mode):
    return i if mode is Mode.PERFECT else arena.states[i].belief


def prog1(arena: Arena, R: AbstractSet[int], Y: AbstractSet[int], mode: Mode, _allowed=None) -> set[int]:
    allowed = _allowed if _allowed is not None else _class_allowed(arena, Y, mode)
    out = set()
    for i, q in enumerate(arena.states):
        if isinstance(q, P1):
            acts = allowed[_class_key(arena, i, mode)]
            if any(label in acts and t in R for label, t, _ in arena.edges[i]):
                out.add(i)
    return out


def prog2(arena: Arena, R: AbstractSet[int], Y: AbstractSet[int]) -> set[int]:
    return {
        i for i, q in enumerate(arena.states)
        if isinstance(q, P2) and all(t in R for _, t, _ in arena.edges[i])
    }


def progN(arena: Arena, R: AbstractSet[int], Y: AbstractSet[int]) -> set[int]:
    out = set()
    for i, q in enumerate(arena.states):
        if isinstance(q, Nature):
            succ = arena.successors(i)
            if all(t in Y for t in succ) and any(t in R for t in succ):
                out.add(i)
    return out


def _inner_naive(arena: Arena, Y: frozenset, mode: Mode) -> list[frozenset]:
    allowed = _class_allowed(arena, Y, mode)
    levels = [frozenset({arena.final})]
    while True:
        R = levels[-1]
        new = prog1(arena, R, Y, mode, allowed) | prog2(arena, R, Y) | progN(arena, R, Y)
        nxt = R | (new & Y)
        if nxt == R:
            return levels
        levels.append(frozenset(nxt))


def _inner_worklist(arena: Arena, Y: frozenset, mode: Mode, preds) -> list[frozenset]:
    """Same level sets as the naive sweep, visiting only predecessors of
    positions added in the previous round."""
    allowed = _class_allowed(arena, Y, mode)
    states, edges = arena.states, arena.edges
    R = {arena.final}
    levels = [frozenset(R)]
    frontier = [arena.final]
    while frontier:
        candidates = {p for t in frontier for p in preds[t] if p in Y and p not in R}
        added = []
        for p in candidates:
            q = states[p]
            out = edges[p]
            if isinstance(q, P1):
                acts = allowed[_class_key(arena, p, mode)]
                ok = any(label in acts and t in R for label, t, _ in out)
            elif isinstance(q, P2):
                ok = all(t in R for _, t, _ in out)
            elif isinstance(q, Nature):
                ok = all(t in Y for _, t, _ in out) and any(t in R for _, t, _ in out)
            else:
                ok = False
            if ok:
                added.append(p)
        if not added:
            break
        R.update(added)
        levels.append(frozenset(R))
        frontier = added
    return levels


def asw(arena: Arena, mode: Mode, Y0: Iterable[int], naive: bool = False) -> SolveResult:
    """Almost-sure winning positions of P1 inside ``Y0``.

    Both loops run until the set stops changing.  ``naive`` forces full
    sweeps instead of the predecessor worklist (for differential testing).
    """
    Y = frozenset(Y0)
    if arena.final not in Y:
        raise ValueError("Final must belong to the initial safety set")
    preds = None if naive else arena.predecessors()
    outer = 0
    inner_counts = []
    while True:
        outer += 1
        levels = _inner_naive(arena, Y, mode) if naive else _inner_worklist(arena, Y, mode, preds)
        inner_counts.append(len(levels))
        R = levels[-1]
        log.debug("outer %d: |Y|=%d |R|=%d levels=%d", outer, len(Y), len(R), len(levels))
        if R == Y:
            return SolveResult(R, levels, outer, inner_counts, mode)
        Y = R


@dataclass
class Solution:
    arena: Arena
    perfect: SolveResult
    win2_positive: frozenset
    belief: SolveResult

    @property
    def win(self) -> frozenset:
        return self.belief.win

    def initial_winning(self) -> bool:
        return self.arena.initial in self.belief.win


def solve_pipeline(arena: Arena, naive: bool = False) -> Solution:
    """Perfect-observation pass for P2's positive region, then the
    belief-constrained pass seeded with its complement."""
    everything = frozenset(range(len(arena)))
    perfect = asw(arena, Mode.PERFECT, everything, naive)
    win2 = everything - perfect.win
    belief = asw(arena, Mode.BELIEF, everything - win2, naive)
    return Solution(arena, perfect, win2, belief)
