"""Explicit construction of the augmented turn-based game.

Positions cycle P1 -> Nature -> P2 -> P1.  A P1 position carries the true
state and P1's belief; P1 picks a control action and a sensor query.  The
Nature position resolves the MDP transition.  The P2 position then picks a
jamming attack, which determines how much of the query result P1 sees.
Goal-reaching mass is redirected to a single absorbing ``Final`` position.
"""

from __future__ import annotations

import os
from collections import deque
from dataclasses import dataclass, field
from typing import NamedTuple, Union

from .model import GameSpec, post_belief
from .observe import observe

DEFAULT_MAX_STATES = 10**7


class P1(NamedTuple):
    s: int
    belief: int


class Nature(NamedTuple):
    s: int
    belief: int
    action: int
    query: int


class P2(NamedTuple):
    s: int
    belief: int
    query: int


class _Final(NamedTuple):
    pass


FINAL = _Final()

ArenaState = Union[P1, Nature, P2, _Final]


class ArenaTooLarge(RuntimeError):
    def __init__(self, limit: int):
        self.limit = limit
        super().__init__(f"arena exceeds {limit} states")


def p1_step(spec: GameSpec, q: P1, action: int, query: int) -> Nature:
    return Nature(q.s, post_belief(spec, q.belief, action), action, query)


def nature_step(spec: GameSpec, q: Nature) -> list[tuple[ArenaState, float]]:
    """Successor distribution of a Nature position.

    Mass on goal successors is collected on ``FINAL``; every other successor
    ``s'`` keeps ``P(s, a, s')`` and moves to ``P2(s', B', query)``.
    """
    to_final = 0.0
    out: list[tuple[ArenaState, float]] = []
    for t, p in spec.transitions[q.s][q.action]:
        if spec.goal >> t & 1:
            to_final += p
        else:
            out.append((P2(t, q.belief, q.query), p))
    if to_final > 0.0:
        out.insert(0, (FINAL, to_final))
    return out


def p2_step(spec: GameSpec, q: P2, attack: int) -> P1:
    """``attack`` is the index into ``spec.attacks``."""
    obs = observe(spec, q.s, spec.queries[q.query], spec.attacks[attack])
    return P1(q.s, q.belief & obs)


def kind(q: ArenaState) -> str:
    return type(q).__name__.lstrip("_")


@dataclass
class Arena:
    """Reachable part of the augmented game.

    ``edges[i]`` lists ``(label, target, probability)``.  Labels are
    ``(a, sigma)`` index pairs for P1 positions (ordered so that edge
    ``a * n_queries + sigma`` is that action), attack indices for P2
    positions, and ``None`` for Nature and Final positions.
    """

    spec: GameSpec
    states: list
    edges: list
    initial: int
    final: int
    index: dict = field(repr=False)
    belief_classes: dict = field(repr=False)

    def __len__(self) -> int:
        return len(self.states)

    @property
    def n_queries(self) -> int:
        return len(self.spec.queries)

    def p1_indices(self) -> list[int]:
        return [i for i, q in enumerate(self.states) if isinstance(q, P1)]

    def successors(self, i: int) -> list[int]:
        return [t for _, t, _ in self.edges[i]]

    def p1_successor(self, i: int, action: int, query: int) -> int:
        return self.edges[i][action * self.n_queries + query][1]

    def predecessors(self) -> list[list[int]]:
        preds: list[list[int]] = [[] for _ in self.states]
        for i, out in enumerate(self.edges):
            for _, t, _ in out:
                if not preds[t] or preds[t][-1] != i:
                    preds[t].append(i)
        return preds

    def describe(self, i: int) -> str:
        q = self.states[i]
        spec = self.spec
        names = spec.state_names
        if isinstance(q, P1):
            return f"P1({names[q.s]}, {{{','.join(spec.names(q.belief))}}})"
        if isinstance(q, Nature):
            return (f"N({names[q.s]}, {{{','.join(spec.names(q.belief))}}}, "
                    f"{spec.action_names[q.action]}, {spec.query_names[q.query]})")
        if isinstance(q, P2):
            return f"P2({names[q.s]}, {{{','.join(spec.names(q.belief))}}}, {spec.query_names[q.query]})"
        return "Final"


def max_states_from_env(default: int = DEFAULT_MAX_STATES) -> int:
    val = os.environ.get("BELIEF_ARENA_MAX_STATES")
    return int(val) if val else default


def build_arena(spec: GameSpec, max_states: int | None = None) -> Arena:
    """Breadth-first closure from ``P1(s0, o0)``.

    Numbering is deterministic: the initial position is 0, ``Final`` is 1,
    and the rest are numbered in discovery order with actions iterated in
    declaration order.  ``Final`` is always present, even when no goal state
    is reachable.
    """
    limit = max_states_from_env() if max_states is None else max_states
    states: list = []
    index: dict = {}
    edges: list = []

    def intern(q) -> int:
        i = index.get(q)
        if i is None:
            if len(states) >= limit:
                raise ArenaTooLarge(limit)
            i = len(states)
            index[q] = i
            states.append(q)
            edges.append(None)
            queue.append(i)
        return i

    queue: deque[int] = deque()
    initial = intern(P1(spec.initial_state, spec.initial_observation))
    final = intern(FINAL)
    n_actions = len(spec.action_names)
    n_queries = len(spec.queries)

    while queue:
        i = queue.popleft()
        q = states[i]
        if isinstance(q, P1):
            out = []
            for a in range(n_actions):
                belief = post_belief(spec, q.belief, a)
                for sigma in range(n_queries):
                    out.append(((a, sigma), intern(Nature(q.s, belief, a, sigma)), 1.0))
        elif isinstance(q, Nature):
            out = [(None, intern(t), p) for t, p in nature_step(spec, q)]
        elif isinstance(q, P2):
            out = [(b, intern(p2_step(spec, q, b)), 1.0) for b in range(len(spec.attacks))]
        else:
            out = [(None, i, 1.0)]
        edges[i] = out

    classes: dict[int, list[int]] = {}
    for i, q in enumerate(states):
        if isinstance(q, P1):
            classes.setdefault(q.belief, []).append(i)
    return Arena(spec, states, edges, initial, final, index, classes)


def _dot_quote(s: str) -> str:
    return '"{}"'.format(s.replace("\\", "\\\\").replace('"', r"\""))


_SHAPES = {"P1": "ellipse", "Nature": "diamond", "P2": "box", "Final": "doublecircle"}


def to_dot(arena: Arena, highlight=frozenset()) -> str:
    """Graphviz rendering with stable node ids ``q<N>``.

    States in ``highlight`` (e.g. a winning region) are filled.
    """
    spec = arena.spec
    lines = ["digraph arena {", "  rankdir=LR;"]
    for i, q in enumerate(arena.states):
        attrs = f"shape={_SHAPES[kind(q)]} label={_dot_quote(arena.describe(i))}"
        if i in highlight:
            attrs += " style=filled fillcolor=palegreen"
        lines.append(f"  q{i} [{attrs}];")
    for i, out in enumerate(arena.edges):
        q = arena.states[i]
        for label, t, p in out:
            if isinstance(q, P1):
                a, sigma = label
                text = f"({spec.action_names[a]},{spec.query_names[sigma]})"
            elif isinstance(q, P2):
                text = spec.attack_names[label]
            else:
                text = f"{p:.6g}"
            lines.append(f"  q{i} -> q{t} [label={_dot_quote(text)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def belief_violations(arena: Arena) -> list[int]:
    """Indices of P1/P2 positions whose true state lies outside the belief."""
    return [
        i for i, q in enumerate(arena.states)
        if isinstance(q, (P1, P2)) and not q.belief >> q.s & 1
    ]

