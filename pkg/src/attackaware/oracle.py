"""Certificate checking for claimed winning regions.

Nothing here calls into :mod:`attackaware.solve`; the checks read only the
arena graph and the certificate.  A certificate is valid when

* closure: every winning position stays inside the win set under every
  strategy action (P1), every attack (P2) and every Nature outcome;
* progress: each position first added at level ``k`` reaches level
  ``k - 1`` under some strategy action (P1), under all attacks (P2), or
  with positive probability (Nature);
* uniformity: P1 positions with equal beliefs share one action set.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .arena import P1, P2, Arena, Nature, kind
from .strategy import StrategyTable


@dataclass(frozen=True)
class Violation:
    state: int | None
    obligation: str
    witness: str

    def as_dict(self) -> dict:
        return {"state": self.state, "obligation": self.obligation, "witness": self.witness}


@dataclass
class Certificate:
    win: frozenset
    levels: list
    strategy: StrategyTable
    per_state: Mapping[int, tuple] | None = field(default=None)

    def actions_at(self, arena: Arena, i: int):
        if self.per_state is not None:
            return self.per_state.get(i)
        return self.strategy.entries.get(arena.states[i].belief)


def _label(arena: Arena, i: int, label) -> str:
    spec = arena.spec
    q = arena.states[i]
    if isinstance(q, P1):
        return f"({spec.action_names[label[0]]},{spec.query_names[label[1]]})"
    if isinstance(q, P2):
        return f"beta={spec.attack_names[label]}"
    return "nature"


def check_certificate(arena: Arena, cert: Certificate) -> list[Violation]:
    """All violated obligations (empty list means the certificate passes)."""
    out: list[Violation] = []
    n = len(arena)
    win = set(cert.win)
    levels = [set(level) for level in cert.levels]

    bad = sorted(i for i in win if not 0 <= i < n)
    if bad:
        return [Violation(bad[0], "shape", f"index outside arena of {n} positions")]
    if not levels or levels[0] != {arena.final}:
        out.append(Violation(arena.final, "levels", "R0 must be exactly {Final}"))
    for k in range(1, len(levels)):
        if not levels[k - 1] < levels[k]:
            out.append(Violation(None, "levels", f"R{k - 1} is not a strict subset of R{k}"))
    if levels and levels[-1] != win:
        for i in sorted(win - levels[-1]):
            out.append(Violation(i, "progress", f"{arena.describe(i)} belongs to no level"))
        for i in sorted(levels[-1] - win):
            out.append(Violation(i, "levels", f"{arena.describe(i)} in a level but not in win"))

    # closure
    for i in sorted(win):
        q = arena.states[i]
        edges = arena.edges[i]
        if isinstance(q, P1):
            acts = cert.actions_at(arena, i)
            if not acts:
                out.append(Violation(i, "closure", f"{arena.describe(i)} has no strategy entry"))
                continue
            for label, t, _ in edges:
                if label in acts and t not in win:
                    out.append(Violation(i, "closure",
                                         f"{_label(arena, i, label)} leads to {arena.describe(t)}"))
        elif isinstance(q, (P2, Nature)):
            for label, t, _ in edges:
                if t not in win:
                    out.append(Violation(i, "closure",
                                         f"{_label(arena, i, label)} leads to {arena.describe(t)}"))

    # progress, level by level
    first_level = {}
    for k, level in enumerate(levels):
        for i in level:
            first_level.setdefault(i, k)
    for i, k in sorted(first_level.items()):
        if k == 0 or i not in win:
            continue
        prev = levels[k - 1]
        q = arena.states[i]
        edges = arena.edges[i]
        if isinstance(q, P1):
            acts = cert.actions_at(arena, i) or ()
            ok = any(label in acts and t in prev for label, t, _ in edges)
        elif isinstance(q, P2):
            ok = all(t in prev for _, t, _ in edges)
        elif isinstance(q, Nature):
            ok = any(t in prev for _, t, _ in edges)
        else:
            ok = False
        if not ok:
            out.append(Violation(i, "progress",
                                 f"{kind(q)} {arena.describe(i)} at level {k} cannot reach level {k - 1}"))

    # uniformity and domain
    win_beliefs = {arena.states[i].belief for i in win if isinstance(arena.states[i], P1)}
    for belief, members in arena.belief_classes.items():
        in_win = [i for i in members if i in win]
        entries = {cert.actions_at(arena, i) for i in in_win}
        if len(entries) > 1:
            out.append(Violation(in_win[0], "uniformity",
                                 f"belief {arena.spec.names(belief)} has {len(entries)} different entries"))
    for belief in sorted(set(cert.strategy.entries) - win_beliefs):
        out.append(Violation(None, "domain", f"entry for belief {arena.spec.names(belief)} outside win"))
    return out


def spoiling_branches(arena: Arena, win, i: int) -> list[str]:
    """For a P1 position, one escaping path per action out of the win set."""
    win = set(win)
    out = []
    for label, n, _ in arena.edges[i]:
        path = [f"{_label(arena, i, label)} -> {arena.describe(n)}"]
        if n in win:
            continue
        for _, p2, _ in arena.edges[n]:
            if p2 not in win and isinstance(arena.states[p2], P2):
                esc = next(((b, t) for b, t, _ in arena.edges[p2] if t not in win), None)
                if esc is not None:
                    path.append(f"-> {arena.describe(p2)} -{_label(arena, p2, esc[0])}-> {arena.describe(esc[1])}")
                    break
        out.append(" ".join(path))
    return out


def check_unwinnable(arena: Arena, win, perfect: bool = False) -> list[Violation]:
    """Local maximality of ``win``: every position outside it is stuck.

    A P1 position outside has no action, uniform over its belief class (or
    over itself when ``perfect``), that keeps every member inside ``win``; a
    P2 position outside has an attack leaving ``win``; a Nature position
    outside has an outcome leaving ``win``.
    """
    win = set(win)
    out = []
    if arena.final not in win:
        out.append(Violation(arena.final, "trap", "Final must be winning"))
    for i, q in enumerate(arena.states):
        if i in win:
            continue
        edges = arena.edges[i]
        if isinstance(q, P1):
            members = [i] if perfect else arena.belief_classes[q.belief]
            common = None
            for m in members:
                here = {label for label, t, _ in arena.edges[m] if t in win}
                common = here if common is None else common & here
            if common:
                label = min(common)
                out.append(Violation(i, "trap", f"{_label(arena, i, label)} keeps the class inside win"))
        elif isinstance(q, P2):
            if all(t in win for _, t, _ in edges):
                out.append(Violation(i, "trap", "no attack leaves win"))
        elif isinstance(q, Nature):
            if all(t in win for _, t, _ in edges):
                out.append(Violation(i, "trap", "every outcome stays in win"))
    return out


def reference_win(arena: Arena, perfect: bool = False, Y0=None) -> frozenset:
    """Naive full-sweep re-solve, iterating positions in reverse order.

    Kept deliberately separate from the solver for differential testing.
    """
    n = len(arena)
    Y = set(range(n)) if Y0 is None else set(Y0)
    order = list(reversed(range(n)))
    while True:
        if perfect:
            groups = {i: [i] for i in order if isinstance(arena.states[i], P1)}
        else:
            groups = {}
            for i in order:
                if isinstance(arena.states[i], P1):
                    groups.setdefault(arena.states[i].belief, []).append(i)
        ok_actions = {}
        for key, group in groups.items():
            sets = [{lab for lab, t, _ in arena.edges[m] if t in Y} for m in group]
            ok_actions[key] = set.intersection(*sets)
        R = {arena.final}
        changed = True
        while changed:
            changed = False
            for i in order:
                if i in R or i not in Y:
                    continue
                q = arena.states[i]
                succ = arena.edges[i]
                if isinstance(q, P1):
                    acts = ok_actions[i if perfect else q.belief]
                    good = any(lab in acts and t in R for lab, t, _ in succ)
                elif isinstance(q, P2):
                    good = all(t in R for _, t, _ in succ)
                elif isinstance(q, Nature):
                    good = all(t in Y for _, t, _ in succ) and any(t in R for _, t, _ in succ)
                else:
                    good = False
                if good:
                    R.add(i)
                    changed = True
        if R == Y:
            return frozenset(Y)
        Y = R


def reference_pipeline(arena: Arena) -> frozenset:
    return reference_win(arena, perfect=False, Y0=reference_win(arena, perfect=True))
