"""Game model: MDP, sensors, query/attack alphabets, goal set.

State sets are represented as Python ints used as bit vectors: bit ``i`` is
set when state ``i`` is a member.  This keeps beliefs hashable and makes
union/intersection single machine operations for small state spaces.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Iterable, Iterator, Mapping, Sequence

PROB_TOLERANCE = 1e-9


def mask_of(indices: Iterable[int]) -> int:
    mask = 0
    for i in indices:
        mask |= 1 << i
    return mask


def members(mask: int) -> Iterator[int]:
    """Yield the set bit positions of ``mask`` in increasing order."""
    i = 0
    while mask:
        if mask & 1:
            yield i
        mask >>= 1
        i += 1


def popcount(mask: int) -> int:
    return bin(mask).count("1")


@dataclass(frozen=True)
class Diagnostic:
    code: str
    location: str
    message: str

    def __str__(self) -> str:
        return f"{self.code} at {self.location}: {self.message}"


class SpecValidationError(ValueError):
    """Raised when a raw spec violates one or more model constraints."""

    def __init__(self, diagnostics: Sequence[Diagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics))


class EmptyBeliefError(ValueError):
    pass


@dataclass(frozen=True)
class GameSpec:
    """A validated, immutable game.

    ``transitions[s][a]`` is a tuple of ``(successor, probability)`` pairs in
    increasing successor order.  ``coverage[i]``, ``queries[k]`` and
    ``attacks[k]`` are bit masks (over states for coverage, over sensors for
    queries and attacks).
    """

    state_names: tuple[str, ...]
    action_names: tuple[str, ...]
    sensor_names: tuple[str, ...]
    coverage: tuple[int, ...]
    query_names: tuple[str, ...]
    queries: tuple[int, ...]
    attack_names: tuple[str, ...]
    attacks: tuple[int, ...]
    transitions: tuple[tuple[tuple[tuple[int, float], ...], ...], ...]
    initial_state: int
    initial_observation: int
    goal: int

    @property
    def n_states(self) -> int:
        return len(self.state_names)

    @property
    def all_states(self) -> int:
        return (1 << self.n_states) - 1

    def state_index(self, name: str) -> int:
        return self.state_names.index(name)

    def names(self, mask: int) -> list[str]:
        return [self.state_names[i] for i in members(mask)]

    def with_initial(self, state: int, observation: int | None = None) -> "GameSpec":
        """Copy of this spec with a different initial state (and observation)."""
        obs = (1 << state) if observation is None else observation
        return replace(self, initial_state=state, initial_observation=obs)

    def with_attacks(self, attacks: Sequence[int], names: Sequence[str] | None = None) -> "GameSpec":
        if names is None:
            names = [attack_label(self, b) for b in attacks]
        return replace(self, attacks=tuple(attacks), attack_names=tuple(names))

    def with_transitions(self, transitions) -> "GameSpec":
        return replace(self, transitions=transitions)


def attack_label(spec: GameSpec, beta: int) -> str:
    if not beta:
        return "none"
    return "+".join(spec.sensor_names[i] for i in members(beta))


def post(spec: GameSpec, s: int, a: int) -> int:
    """Support of ``P(s, a, .)`` as a state mask."""
    return mask_of(t for t, _ in spec.transitions[s][a])


def post_belief(spec: GameSpec, belief: int, a: int) -> int:
    """Union of ``post(s, a)`` over every ``s`` in ``belief``."""
    if not belief:
        raise EmptyBeliefError("post_belief of an empty belief")
    out = 0
    for s in members(belief):
        out |= post(spec, s, a)
    return out


# --------------------------------------------------------------------------
# JSON front end


def _named_sets(raw, kind: str, sensor_idx: Mapping[str, int], diags: list[Diagnostic]):
    names, masks = [], []
    for k, entry in enumerate(raw):
        if isinstance(entry, Mapping):
            name = entry.get("name")
            sensors = entry.get("sensors", [])
        else:
            name, sensors = None, entry
        if not isinstance(sensors, list):
            diags.append(Diagnostic("Schema", f"{kind}[{k}]", "expected an array of sensor names"))
            continue
        mask = 0
        for sensor in sensors:
            if sensor not in sensor_idx:
                diags.append(Diagnostic("UnknownSensor", f"{kind}[{k}]", f"unknown sensor {sensor!r}"))
                continue
            mask |= 1 << sensor_idx[sensor]
        names.append(name)
        masks.append(mask)
    return names, masks


def load_spec(raw: Mapping, include_no_attack: bool = True) -> GameSpec:
    """Validate a decoded JSON spec document and build a :class:`GameSpec`.

    Every violated constraint is collected before raising
    :class:`SpecValidationError`.  Control actions missing from
    ``transitions`` are reported as ``NonTotalTransition``.  When
    ``include_no_attack`` is set, the empty attack is prepended to the
    attack alphabet if absent.
    """
    diags: list[Diagnostic] = []

    def need(key, typ=list):
        val = raw.get(key)
        if not isinstance(val, typ):
            diags.append(Diagnostic("Schema", key, f"missing or not a {typ.__name__}"))
            return None
        return val

    states = need("states") or []
    actions = need("actions") or []
    sensors = need("sensors") or []
    queries_raw = need("queries") or []
    attacks_raw = raw.get("attacks", [[]])
    transitions_raw = need("transitions") or []
    goal_raw = need("goal") or []
    initial = raw.get("initial_state")

    state_idx = {name: i for i, name in enumerate(states)}
    if len(state_idx) != len(states):
        diags.append(Diagnostic("DuplicateName", "states", "state names must be unique"))
    action_idx = {name: i for i, name in enumerate(actions)}
    if len(action_idx) != len(actions):
        diags.append(Diagnostic("DuplicateName", "actions", "action names must be unique"))

    sensor_names, coverage = [], []
    for i, sensor in enumerate(sensors):
        if not isinstance(sensor, Mapping) or "name" not in sensor:
            diags.append(Diagnostic("Schema", f"sensors[{i}]", "expected {name, coverage}"))
            continue
        sensor_names.append(sensor["name"])
        cov = 0
        for st in sensor.get("coverage", []):
            if st not in state_idx:
                diags.append(Diagnostic("UnknownState", f"sensors[{i}].coverage", f"unknown state {st!r}"))
            else:
                cov |= 1 << state_idx[st]
        coverage.append(cov)
    sensor_idx = {name: i for i, name in enumerate(sensor_names)}

    query_names, queries = _named_sets(queries_raw, "queries", sensor_idx, diags)
    query_names = [n if n is not None else f"sigma{k}" for k, n in enumerate(query_names)]
    if len(set(queries)) != len(queries):
        diags.append(Diagnostic("DuplicateAction", "queries", "each query may appear only once"))

    attack_names, attacks = _named_sets(attacks_raw, "attacks", sensor_idx, diags)
    if len(set(attacks)) != len(attacks):
        diags.append(Diagnostic("DuplicateAction", "attacks", "each attack may appear only once"))
    if include_no_attack and 0 not in attacks:
        attacks.insert(0, 0)
        attack_names.insert(0, None)
    if not attacks:
        diags.append(Diagnostic("Schema", "attacks", "attack alphabet is empty"))
    if not queries:
        diags.append(Diagnostic("Schema", "queries", "query alphabet is empty"))
    if not states or not actions:
        diags.append(Diagnostic("Schema", "states/actions", "need at least one state and one action"))

    rows: dict[tuple[int, int], list[tuple[int, float]]] = {}
    for k, tr in enumerate(transitions_raw):
        loc = f"transitions[{k}]"
        if not isinstance(tr, Mapping):
            diags.append(Diagnostic("Schema", loc, "expected {from, action, to}"))
            continue
        src, act = tr.get("from"), tr.get("action")
        if src not in state_idx:
            diags.append(Diagnostic("UnknownState", loc, f"unknown source state {src!r}"))
            continue
        if act not in action_idx:
            diags.append(Diagnostic("UnknownAction", loc, f"unknown action {act!r}"))
            continue
        key = (state_idx[src], action_idx[act])
        if key in rows:
            diags.append(Diagnostic("DuplicateTransition", loc, f"second row for ({src}, {act})"))
            continue
        entries: dict[int, float] = {}
        for dst in tr.get("to", []):
            name, prob = dst.get("state"), dst.get("prob")
            if name not in state_idx:
                diags.append(Diagnostic("UnknownState", loc, f"unknown successor {name!r}"))
                continue
            if not isinstance(prob, (int, float)) or not 0.0 < prob <= 1.0:
                diags.append(Diagnostic("BadDistribution", loc, f"probability {prob!r} outside (0, 1]"))
                continue
            if state_idx[name] in entries:
                diags.append(Diagnostic("BadDistribution", loc, f"successor {name!r} listed twice"))
                continue
            entries[state_idx[name]] = float(prob)
        total = sum(entries.values())
        if entries and abs(total - 1.0) > PROB_TOLERANCE:
            diags.append(Diagnostic("BadDistribution", f"({src}, {act})", f"probabilities sum to {total:g}"))
        elif not entries:
            diags.append(Diagnostic("BadDistribution", f"({src}, {act})", "empty distribution"))
        rows[key] = sorted(entries.items())

    transitions = []
    for s, sname in enumerate(states):
        row = []
        for a, aname in enumerate(actions):
            if (s, a) not in rows:
                diags.append(Diagnostic("NonTotalTransition", f"({sname}, {aname})", "no transition row"))
                row.append(())
            else:
                row.append(tuple(rows[(s, a)]))
        transitions.append(tuple(row))

    goal = 0
    for name in goal_raw:
        if name not in state_idx:
            diags.append(Diagnostic("GoalOutsideStateSpace", "goal", f"unknown state {name!r}"))
        else:
            goal |= 1 << state_idx[name]

    if initial not in state_idx:
        diags.append(Diagnostic("Schema", "initial_state", f"unknown state {initial!r}"))
        s0 = 0
    else:
        s0 = state_idx[initial]
    obs_raw = raw.get("initial_observation", [initial])
    o0 = 0
    for name in obs_raw:
        if name not in state_idx:
            diags.append(Diagnostic("UnknownState", "initial_observation", f"unknown state {name!r}"))
        else:
            o0 |= 1 << state_idx[name]
    if initial in state_idx and not o0 >> s0 & 1:
        diags.append(Diagnostic("InitialStateNotInObservation", "initial_observation",
                                f"{initial} is not in the initial observation"))

    if diags:
        raise SpecValidationError(diags)

    spec = GameSpec(
        state_names=tuple(states),
        action_names=tuple(actions),
        sensor_names=tuple(sensor_names),
        coverage=tuple(coverage),
        query_names=tuple(query_names),
        queries=tuple(queries),
        attack_names=(),
        attacks=tuple(attacks),
        transitions=tuple(transitions),
        initial_state=s0,
        initial_observation=o0,
        goal=goal,
    )
    names = tuple(n if n is not None else attack_label(spec, b) for n, b in zip(attack_names, attacks))
    return replace(spec, attack_names=names)


def drop_no_attack(raw: Mapping) -> dict:
    """Copy of ``raw`` with every empty attack removed from the alphabet."""
    def empty(b):
        return b == [] or (isinstance(b, Mapping) and not b.get("sensors"))
    out = dict(raw)
    if isinstance(raw.get("attacks"), list):
        out["attacks"] = [b for b in raw["attacks"] if not empty(b)]
    return out


def validate(raw: Mapping, include_no_attack: bool = True) -> list[Diagnostic]:
    """Return every violated constraint of ``raw`` (empty when valid)."""
    try:
        load_spec(raw, include_no_attack)
    except SpecValidationError as exc:
        return exc.diagnostics
    return []


def read_spec(path, include_no_attack: bool = True) -> GameSpec:
    with open(path, encoding="utf-8") as fh:
        return load_spec(json.load(fh), include_no_attack)


def spec_to_json(spec: GameSpec) -> dict:
    """Inverse of :func:`load_spec` (query/attack names are kept)."""
    sensor = lambda mask: [spec.sensor_names[i] for i in members(mask)]  # noqa: E731
    return {
        "states": list(spec.state_names),
        "actions": list(spec.action_names),
        "sensors": [{"name": n, "coverage": spec.names(c)} for n, c in zip(spec.sensor_names, spec.coverage)],
        "queries": [{"name": n, "sensors": sensor(q)} for n, q in zip(spec.query_names, spec.queries)],
        "attacks": [{"name": n, "sensors": sensor(b)} for n, b in zip(spec.attack_names, spec.attacks)],
        "transitions": [
            {
                "from": spec.state_names[s],
                "action": spec.action_names[a],
                "to": [{"state": spec.state_names[t], "prob": p} for t, p in spec.transitions[s][a]],
            }
            for s in range(spec.n_states)
            for a in range(len(spec.action_names))
        ],
        "initial_state": spec.state_names[spec.initial_state],
        "initial_observation": spec.names(spec.initial_observation),
        "goal": spec.names(spec.goal),
    }
