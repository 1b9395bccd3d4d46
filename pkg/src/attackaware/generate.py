"""Seeded random game generator and certificate mutation harness."""

from __future__ import annotations

import random
from dataclasses import dataclass

from .arena import P1, P2, Arena, Nature
from .model import GameSpec, load_spec
from .oracle import Certificate
from .strategy import StrategyTable


@dataclass(frozen=True)
class RandomSpecConfig:
    max_states: int = 6
    max_sensors: int = 3
    max_actions: int = 2
    max_attacks: int = 3
    max_queries: int = 3
    edge_density: float = 0.35
    goal_density: float = 0.2


def random_spec_dict(rng: random.Random, cfg: RandomSpecConfig = RandomSpecConfig()) -> dict:
    n = rng.randint(2, cfg.max_states)
    states = [f"x{i}" for i in range(n)]
    actions = [f"u{i}" for i in range(rng.randint(1, cfg.max_actions))]
    sensors = [f"S{i}" for i in range(rng.randint(1, cfg.max_sensors))]
    goal = [s for s in states if rng.random() < cfg.goal_density] or [states[-1]]

    transitions = []
    for s in states:
        for a in actions:
            support = [t for t in states if rng.random() < cfg.edge_density] or [rng.choice(states)]
            weights = [rng.randint(1, 4) for _ in support]
            total = sum(weights)
            transitions.append({
                "from": s, "action": a,
                "to": [{"state": t, "prob": w / total} for t, w in zip(support, weights)],
            })

    def subsets(k, allow_empty):
        pool = set()
        for _ in range(4 * k):
            sub = tuple(x for x in sensors if rng.random() < 0.5)
            if sub or allow_empty:
                pool.add(sub)
            if len(pool) >= k:
                break
        return [list(x) for x in sorted(pool)] or [[sensors[0]]]

    queries = subsets(rng.randint(1, cfg.max_queries), allow_empty=False)
    attacks = subsets(rng.randint(1, cfg.max_attacks), allow_empty=True)
    if [] not in attacks and len(attacks) >= cfg.max_attacks:
        attacks = attacks[: cfg.max_attacks - 1]
    s0 = rng.choice(states)
    return {
        "states": states,
        "actions": actions,
        "sensors": [{"name": x, "coverage": [s for s in states if rng.random() < 0.5]} for x in sensors],
        "queries": queries,
        "attacks": attacks,
        "transitions": transitions,
        "initial_state": s0,
        "goal": goal,
    }


def random_spec(seed: int, cfg: RandomSpecConfig = RandomSpecConfig()) -> GameSpec:
    return load_spec(random_spec_dict(random.Random(seed), cfg))


def perturb_probabilities(spec: GameSpec, rng: random.Random) -> GameSpec:
    """Fresh positive weights on every row, supports unchanged."""
    rows = []
    for per_state in spec.transitions:
        new_state = []
        for row in per_state:
            weights = [rng.uniform(0.05, 1.0) for _ in row]
            total = sum(weights)
            new_state.append(tuple((t, w / total) for (t, _), w in zip(row, weights)))
        rows.append(tuple(new_state))
    return spec.with_transitions(tuple(rows))


def add_one_state(arena: Arena, cert: Certificate, rng: random.Random) -> tuple[Certificate, int] | None:
    """Mutant certificate claiming one extra position as winning.

    The position is put on a new top level.  A P1 position whose belief has
    no entry gets the actions keeping it inside the enlarged set (or one
    arbitrary action if there are none).
    """
    outside = [i for i in range(len(arena)) if i not in cert.win]
    if not outside:
        return None
    q_idx = rng.choice(outside)
    win = frozenset(cert.win | {q_idx})
    entries = dict(cert.strategy.entries)
    q = arena.states[q_idx]
    if isinstance(q, P1) and q.belief not in entries:
        keep = tuple(sorted(lab for lab, t, _ in arena.edges[q_idx] if t in win))
        entries[q.belief] = keep or (arena.edges[q_idx][rng.randrange(len(arena.edges[q_idx]))][0],)
    levels = list(cert.levels) + [win]
    return Certificate(win, levels, StrategyTable(entries)), q_idx


def breaks_obligation(arena: Arena, cert: Certificate) -> bool:
    """Direct set-level restatement of the certificate obligations, used as
    ground truth for the mutation harness."""
    W = cert.win
    levels = cert.levels
    entry = lambda i: cert.strategy.entries.get(arena.states[i].belief, ())  # noqa: E731
    succ = lambda i: {t for _, t, _ in arena.edges[i]}  # noqa: E731

    if not levels or levels[0] != {arena.final} or levels[-1] != W:
        return True
    if any(not levels[k - 1] < levels[k] for k in range(1, len(levels))):
        return True
    for i in W:
        q = arena.states[i]
        if isinstance(q, P1):
            moves = {t for lab, t, _ in arena.edges[i] if lab in entry(i)}
            if not moves or not moves <= W:
                return True
        elif not succ(i) <= W:
            return True
    for k in range(1, len(levels)):
        for i in levels[k] - levels[k - 1]:
            q = arena.states[i]
            if isinstance(q, P1):
                if not {t for lab, t, _ in arena.edges[i] if lab in entry(i)} & levels[k - 1]:
                    return True
            elif isinstance(q, P2):
                if not succ(i) <= levels[k - 1]:
                    return True
            elif isinstance(q, Nature):
                if not succ(i) & levels[k - 1]:
                    return True
            else:
                return True
    return False
