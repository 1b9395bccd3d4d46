import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from attackaware.arena import FINAL, P1, P2, Nature, build_arena
from attackaware.generate import perturb_probabilities, random_spec
from attackaware.model import load_spec
from attackaware.oracle import reference_pipeline, reference_win
from attackaware.solve import (Mode, allow, allow_class, asw, prog1, prog2, progN, solve_pipeline)

from conftest import S, act, solved

B4 = 0b10000111  # {s0, s1, s2, s7}


def one_state_goal():
    return load_spec({
        "states": ["g"], "actions": ["u"], "sensors": [{"name": "A", "coverage": ["g"]}],
        "queries": [["A"]], "attacks": [[]],
        "transitions": [{"from": "g", "action": "u", "to": [{"state": "g", "prob": 1.0}]}],
        "initial_state": "g", "goal": ["g"],
    })


def test_allow_trivial_sets():
    spec, arena, sol, _ = solved("case1")
    everything = set(range(len(arena)))
    assert len(allow(arena, arena.initial, everything)) == 16
    assert allow(arena, arena.initial, set()) == set()


def test_allow_case1_at_s6():
    spec, arena, sol, _ = solved("case1")
    allowed = allow(arena, arena.initial, sol.win)
    for sigma in ("sigma0", "sigma1", "sigma3"):
        assert act(spec, "a0", sigma) in allowed
    assert act(spec, "a0", "sigma2") not in allowed


def test_allow_class_singleton_equals_allow():
    _, arena, sol, _ = solved("case2")
    for i in arena.p1_indices()[:50]:
        assert allow_class(arena, [i], sol.win) == allow(arena, i, sol.win)


@pytest.mark.parametrize("case,belief", [("case3", ("s1", "s7")), ("case1", ("s1", "s2"))])
def test_allow_class_no_common_winning_control(case, belief):
    spec, arena, sol, _ = solved(case)
    cls = arena.belief_classes[S(spec, *belief)]
    assert len(cls) == 2
    common = allow_class(arena, cls, sol.win)
    assert not any(a in (0, 1) for a, _ in common)
    assert all(i not in sol.win for i in cls)


def test_allow_class_goal_belief_full():
    spec, arena, sol, _ = solved("case1", initial="s4")
    cls = arena.belief_classes[S(spec, "s4")]
    assert len(allow_class(arena, cls, sol.win)) == 16


def test_prog1_examples():
    spec, arena, sol, _ = solved("case1")
    assert prog1(arena, {arena.final}, set(range(len(arena))), Mode.BELIEF) == set()

    g = build_arena(one_state_goal())
    Y = set(range(len(g)))
    R1 = {g.final} | progN(g, {g.final}, Y)
    assert g.initial in prog1(g, R1, Y, Mode.PERFECT)
    assert g.initial in prog1(g, R1, Y, Mode.BELIEF)

    # P1(s1,{s1}) needs Nature(s1,{s4},a0,.) in R
    Y = set(range(len(arena)))
    p1_s1 = arena.index[P1(1, S(spec, "s1"))]
    assert p1_s1 not in prog1(arena, {arena.final}, Y, Mode.BELIEF)
    R1 = {arena.final} | progN(arena, {arena.final}, Y)
    assert arena.index[Nature(1, S(spec, "s4"), 0, 0)] in R1
    assert p1_s1 in prog1(arena, R1, Y, Mode.BELIEF)


def test_prog2_examples():
    spec, arena, sol, _ = solved("case2")
    everything = set(range(len(arena)))
    p2s = {i for i, q in enumerate(arena.states) if isinstance(q, P2)}
    assert prog2(arena, everything, everything) == p2s
    q = arena.index[P2(2, B4, 3)]
    assert q not in prog2(arena, sol.win, sol.win)
    jam_e = spec.attacks.index(1 << spec.sensor_names.index("E"))
    assert arena.edges[q][jam_e][1] not in sol.win

    # a single attack makes prog2 plain one-step membership
    spec1, arena1, sol1, _ = solved("case1")
    R = set(sol1.belief.levels[3])
    expect = {i for i, q in enumerate(arena1.states) if isinstance(q, P2) and arena1.successors(i)[0] in R}
    assert prog2(arena1, R, sol1.win) == expect


def test_progN_examples():
    spec, arena, sol, _ = solved("case3")
    everything = set(range(len(arena)))
    direct = {i for i, q in enumerate(arena.states)
              if isinstance(q, Nature) and arena.successors(i) == [arena.final]}
    assert direct and direct <= progN(arena, {arena.final}, everything)
    # one successor outside Y excludes regardless of R
    n = arena.index[Nature(6, B4, 0, 0)]
    p2 = arena.index[P2(1, B4, 0)]
    assert p2 in arena.successors(n)
    Y = everything - {p2}
    assert n not in progN(arena, everything - {p2}, Y)
    assert p2 not in sol.win
    assert n not in progN(arena, sol.win, sol.win)


def test_asw_examples():
    spec, arena, sol, _ = solved("case3")
    assert arena.initial not in sol.win
    g = build_arena(one_state_goal())
    res = asw(g, Mode.BELIEF, range(len(g)))
    assert g.initial in res.win
    with pytest.raises(ValueError):
        asw(g, Mode.BELIEF, [g.initial])


def test_case1_win2_positive_contains_sink_positions():
    _, arena, sol, _ = solved("case1")
    sink = [i for i, q in enumerate(arena.states) if isinstance(q, (P1, P2)) and q.s == 5]
    assert sink and all(i in sol.win2_positive for i in sink)


def test_case3_spoiling_p2_position_outside_perfect_region_complement():
    spec, arena, sol, _ = solved("case3")
    q = arena.index[P2(1, B4, 0)]
    assert q not in sol.win
    assert arena.index[P1(1, S(spec, "s1", "s2"))] not in sol.win


def test_level_structure():
    _, arena, sol, _ = solved("case2")
    levels = sol.belief.levels
    assert levels[0] == {arena.final}
    assert levels[-1] == sol.win
    assert all(a < b for a, b in zip(levels, levels[1:]))
    layers = sol.belief.layers()
    assert sum(len(x) for x in layers) == len(sol.win)


def _assert_fixed_point(arena, W, mode):
    for i in W:
        q = arena.states[i]
        if isinstance(q, P1):
            cls = [i] if mode is Mode.PERFECT else arena.belief_classes[q.belief]
            assert allow_class(arena, cls, W)
        else:
            assert set(arena.successors(i)) <= W or isinstance(q, type(FINAL))


@pytest.mark.parametrize("seed", range(40))
def test_random_differential(seed):
    spec = random_spec(seed)
    arena = build_arena(spec)
    sol = solve_pipeline(arena)
    naive = solve_pipeline(arena, naive=True)
    assert sol.win == naive.win and sol.belief.levels == naive.belief.levels
    assert sol.perfect.win == reference_win(arena, perfect=True)
    assert sol.win == reference_pipeline(arena)
    assert sol.win <= sol.perfect.win
    assert asw(arena, Mode.BELIEF, range(len(arena))).win <= asw(arena, Mode.PERFECT, range(len(arena))).win
    _assert_fixed_point(arena, sol.win, Mode.BELIEF)
    _assert_fixed_point(arena, sol.perfect.win, Mode.PERFECT)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10**6), pseed=st.integers(0, 10**6))
def test_support_invariance_random(seed, pseed):
    spec = random_spec(seed)
    a = solve_pipeline(build_arena(spec))
    b = solve_pipeline(build_arena(perturb_probabilities(spec, random.Random(pseed))))
    assert a.win == b.win and a.perfect.win == b.perfect.win


def test_outer_loop_antitone_inner_monotone():
    _, arena, _, _ = solved("case2")
    Y = frozenset(range(len(arena)))
    while True:
        res = asw(arena, Mode.BELIEF, Y)
        assert res.win <= Y
        assert all(a <= b for a, b in zip(res.levels, res.levels[1:]))
        if res.win == Y:
            break
        Y = res.win
