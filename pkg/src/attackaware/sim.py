"""Monte Carlo play-out of the original game under a belief-based strategy.

P1 keeps its belief online exactly as the arena does: after choosing
``(a, sigma)`` the belief becomes ``post_belief(B, a)``; after the attacker
jams ``beta`` at the sampled successor it is intersected with the
observation.  The attacker sees the true state, the belief and the query.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field
from typing import Iterable

from .arena import P2, Arena
from .model import GameSpec, popcount, post_belief
from .observe import observe
from .strategy import StrategyTable, act

MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def episode_seed(master_seed: int, index: int) -> int:
    """Seed of episode ``index``: splitmix64 applied twice, so neighbouring
    indices and master seeds give unrelated streams."""
    return splitmix64(splitmix64(master_seed & MASK64) ^ (index & MASK64))


class AttackerPolicy(enum.Enum):
    NO_ATTACK = "no_attack"
    UNIFORM = "uniform"
    GREEDY_COARSEN = "greedy_coarsen"
    ARENA_ADVERSARY = "arena_adversary"


class BeliefInvariantViolation(AssertionError):
    """True state fell outside P1's belief; an observation/update bug."""


@dataclass
class Play:
    trace: list = field(default_factory=list)
    beliefs: list = field(default_factory=list)
    outcome: str = "timeout"
    steps: int = 0

    @property
    def reached(self) -> bool:
        return self.outcome == "reached_goal"


def _greedy(spec: GameSpec, s: int, belief: int, query: int) -> int:
    best, best_size = 0, -1
    for b, beta in enumerate(spec.attacks):
        size = popcount(belief & observe(spec, s, spec.queries[query], beta))
        if size > best_size:
            best, best_size = b, size
    return best


def choose_attack(policy: AttackerPolicy, spec: GameSpec, s: int, belief: int, query: int,
                  rng: random.Random, arena: Arena | None = None, win=None) -> int:
    """Index into ``spec.attacks`` chosen by ``policy`` at P2 position
    ``(s, belief, query)``."""
    if policy is AttackerPolicy.NO_ATTACK:
        return spec.attacks.index(0) if 0 in spec.attacks else 0
    if policy is AttackerPolicy.UNIFORM:
        return rng.randrange(len(spec.attacks))
    if policy is AttackerPolicy.ARENA_ADVERSARY:
        if arena is None or win is None:
            raise ValueError("ARENA_ADVERSARY needs the arena and the win set")
        i = arena.index.get(P2(s, belief, query))
        if i is not None:
            for b, t, _ in arena.edges[i]:
                if t not in win:
                    return b
    return _greedy(spec, s, belief, query)


def run_episode(spec: GameSpec, table: StrategyTable, policy: AttackerPolicy, seed: int,
                horizon: int, arena: Arena | None = None, win=None) -> Play:
    rng = random.Random(seed)
    s, belief = spec.initial_state, spec.initial_observation
    play = Play(trace=[s], beliefs=[belief])
    if spec.goal >> s & 1:
        play.outcome = "reached_goal"
        return play
    for step in range(horizon):
        if belief not in table:
            play.outcome, play.steps = "no_action", step
            return play
        a, sigma = act(table, belief, rng)
        belief = post_belief(spec, belief, a)
        row = spec.transitions[s][a]
        s = rng.choices([t for t, _ in row], weights=[p for _, p in row])[0]
        play.trace.append((a, sigma))
        play.trace.append(s)
        if spec.goal >> s & 1:
            play.outcome, play.steps = "reached_goal", step + 1
            play.beliefs.append(belief)
            return play
        b = choose_attack(policy, spec, s, belief, sigma, rng, arena, win)
        belief &= observe(spec, s, spec.queries[sigma], spec.attacks[b])
        play.trace.append(b)
        play.beliefs.append(belief)
        if not belief >> s & 1:
            raise BeliefInvariantViolation(f"step {step + 1}: state {spec.state_names[s]} not in "
                                  f"belief {spec.names(belief)}")
    play.outcome, play.steps = "timeout", horizon
    return play


@dataclass(frozen=True)
class EpisodeConfig:
    episodes: int
    horizon: int
    master_seed: int = 0

    def __post_init__(self):
        if self.episodes < 1:
            raise ValueError("episodes must be >= 1")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")

    @classmethod
    def default_horizon(cls, spec: GameSpec) -> int:
        return 20 * spec.n_states * len(spec.queries)


@dataclass
class ReachEstimate:
    successes: int
    episodes: int
    frequency: float
    mean_steps: float
    outcomes: dict
    records: list = field(default_factory=list, repr=False)

    def as_dict(self) -> dict:
        return {
            "successes": self.successes,
            "episodes": self.episodes,
            "frequency": self.frequency,
            "mean_steps": self.mean_steps,
            "outcomes": dict(sorted(self.outcomes.items())),
        }


def estimate_reach(spec: GameSpec, table: StrategyTable, policy: AttackerPolicy,
                   config: EpisodeConfig, arena: Arena | None = None, win=None,
                   indices: Iterable[int] | None = None) -> ReachEstimate:
    """Aggregate independent episodes; ``records`` holds
    ``(episode, seed, outcome, steps)`` rows."""
    successes = 0
    step_sum = 0
    outcomes: dict[str, int] = {}
    records = []
    for k in indices if indices is not None else range(config.episodes):
        seed = episode_seed(config.master_seed, k)
        play = run_episode(spec, table, policy, seed, config.horizon, arena, win)
        outcomes[play.outcome] = outcomes.get(play.outcome, 0) + 1
        if play.reached:
            successes += 1
            step_sum += play.steps
        records.append((k, seed, play.outcome, play.steps))
    n = len(records)
    return ReachEstimate(
        successes=successes,
        episodes=n,
        frequency=successes / n if n else 0.0,
        mean_steps=step_sum / successes if successes else 0.0,
        outcomes=outcomes,
        records=records,
    )
