"""Command-line front end.

Exit codes: 0 success / initial state winning, 1 invalid input,
2 certification failure, 3 no almost-sure strategy from the initial
state, 4 arena size cap exceeded, 5 spec hash mismatch.

Human-readable messages go to stderr, JSON to stdout or ``--out`` files.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time

from .arena import P1, ArenaTooLarge, build_arena, to_dot
from .artifacts import (RunManifest, SpecHashMismatch, StrategyFileError, certificate_from_document,
                        parse_strategy_document, sha256_file, strategy_document)
from .model import SpecValidationError, drop_no_attack, load_spec, mask_of
from .oracle import check_certificate, check_unwinnable
from .sim import AttackerPolicy, EpisodeConfig, BeliefInvariantViolation, estimate_reach
from .solve import solve_pipeline
from .strategy import extract

EXIT_OK, EXIT_INVALID, EXIT_CERT, EXIT_NO_STRATEGY, EXIT_TOO_LARGE, EXIT_HASH = 0, 1, 2, 3, 4, 5

log = logging.getLogger("attackaware")


class InputError(Exception):
    pass


def _err(msg: str) -> None:
    print(msg, file=sys.stderr)


def _dump(obj, path=None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=False) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _load_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: parse error at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    except UnicodeDecodeError as exc:
        raise InputError(f"{path}: not UTF-8 ({exc.reason})") from None


def _load_spec(args, initial=None, observation=None):
    raw = _load_json(args.spec)
    include = not getattr(args, "no_lambda", False)
    if not include:
        raw = drop_no_attack(raw)
    try:
        spec = load_spec(raw, include_no_attack=include)
    except SpecValidationError as exc:
        for d in exc.diagnostics:
            _err(f"error: {d}")
        raise InputError(f"{args.spec}: {len(exc.diagnostics)} validation error(s)") from None
    initial = initial if initial is not None else getattr(args, "initial_state", None)
    if initial is not None:
        if initial not in spec.state_names:
            raise InputError(f"unknown initial state {initial!r}")
        obs = None
        if observation:
            unknown = [n for n in observation if n not in spec.state_names]
            if unknown:
                raise InputError(f"unknown states in initial observation: {unknown}")
            obs = mask_of(spec.state_index(n) for n in observation)
        spec = spec.with_initial(spec.state_index(initial), obs)
    return spec


def cmd_validate(args) -> int:
    spec = _load_spec(args)
    _err(f"{args.spec}: valid ({spec.n_states} states, {len(spec.action_names)} actions, "
         f"{len(spec.sensor_names)} sensors, {len(spec.queries)} queries, {len(spec.attacks)} attacks)")
    return EXIT_OK


def _solve_report(manifest, spec, solution, seconds) -> dict:
    arena = solution.arena
    counts: dict[str, int] = {}
    for q in arena.states:
        name = type(q).__name__.lstrip("_")
        counts[name] = counts.get(name, 0) + 1
    singletons = {}
    for s in range(spec.n_states):
        i = arena.index.get(P1(s, 1 << s))
        if i is not None:
            singletons[spec.state_names[s]] = i in solution.win
    return {
        "metadata": manifest.as_dict(),
        "arena": {"states": len(arena), "by_kind": counts, "belief_classes": len(arena.belief_classes)},
        "win2_positive_size": len(solution.win2_positive),
        "perfect_win_size": len(solution.perfect.win),
        "win_size": len(solution.win),
        "initial_state": spec.state_names[spec.initial_state],
        "initial_observation": spec.names(spec.initial_observation),
        "initial_winning": solution.initial_winning(),
        "singleton_beliefs_winning": singletons,
        "iterations": {
            "perfect": {"outer": solution.perfect.outer_iterations, "inner": solution.perfect.inner_iterations},
            "belief": {"outer": solution.belief.outer_iterations, "inner": solution.belief.inner_iterations},
        },
        "levels": len(solution.belief.levels),
        "seconds": round(seconds, 6),
    }


def cmd_solve(args) -> int:
    spec = _load_spec(args)
    manifest = RunManifest.for_spec(args.spec, spec, "belief", not args.no_lambda)
    t0 = time.perf_counter()
    arena = build_arena(spec)
    solution = solve_pipeline(arena, naive=args.naive)
    table = extract(arena, solution.belief)
    elapsed = time.perf_counter() - t0
    report = _solve_report(manifest, spec, solution, elapsed)
    if args.deterministic:
        report.pop("seconds")
    if args.out:
        _dump(strategy_document(manifest, solution, table), args.out)
    if args.arena_dot:
        with open(args.arena_dot, "w", encoding="utf-8") as fh:
            fh.write(f"// {json.dumps(manifest.as_dict(), sort_keys=True)}\n")
            fh.write(to_dot(arena, solution.win))
    _dump(report, args.report)
    _err(f"arena: {len(arena)} positions; win: {len(solution.win)}; "
         f"initial {report['initial_state']} is {'winning' if report['initial_winning'] else 'NOT winning'}")
    if not solution.initial_winning():
        _err("no almost-sure strategy from the initial state")
        return EXIT_NO_STRATEGY
    return EXIT_OK


def _load_strategy(args, spec_hash):
    doc = _load_json(args.strategy)
    meta = doc.get("metadata") if isinstance(doc, dict) else None
    if isinstance(meta, dict) and meta.get("spec_sha256") not in (None, spec_hash):
        raise SpecHashMismatch(f"strategy was made for spec {meta['spec_sha256'][:12]}..., "
                               f"{args.spec} hashes to {spec_hash[:12]}...")
    return doc


def cmd_simulate(args) -> int:
    spec_hash = sha256_file(args.spec)
    doc = _load_strategy(args, spec_hash)
    include = (doc.get("metadata") or {}).get("include_no_attack", True)
    args.no_lambda = not include
    meta = doc.get("metadata") or {}
    spec = _load_spec(args, meta.get("initial_state"), meta.get("initial_observation"))
    try:
        meta, table, raw_cert = parse_strategy_document(doc, spec)
    except StrategyFileError as exc:
        raise InputError(f"{args.strategy}: {exc}") from None
    arena = win = None
    policies = [AttackerPolicy(p) for p in (args.policy or ["arena_adversary"])]
    if AttackerPolicy.ARENA_ADVERSARY in policies:
        arena = build_arena(spec)
        try:
            win = certificate_from_document(raw_cert, table, arena).win
        except StrategyFileError as exc:
            raise InputError(f"{args.strategy}: {exc}") from None
    horizon = args.horizon or EpisodeConfig.default_horizon(spec)
    config = EpisodeConfig(args.episodes, horizon, args.seed)
    initials = args.initial_state or [spec.state_names[spec.initial_state]]
    manifest = RunManifest.for_spec(args.spec, spec, meta.get("mode", "belief"), include,
                                    seeds={"master_seed": args.seed})
    rows = []
    for name in initials:
        if name not in spec.state_names:
            raise InputError(f"unknown initial state {name!r}")
        start = spec.with_initial(spec.state_index(name))
        for policy in policies:
            try:
                est = estimate_reach(start, table, policy, config, arena, win)
            except BeliefInvariantViolation as exc:
                _err(f"belief invariant violated: {exc}")
                return EXIT_INVALID
            result = {"initial_state": name, "policy": policy.value, "horizon": horizon,
                      **est.as_dict(), "metadata": manifest.as_dict()}
            print(json.dumps(result, sort_keys=True))
            rows.extend((name, policy.value, *r) for r in est.records)
    if args.csv:
        with open(args.csv, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["initial_state", "policy", "episode", "seed", "outcome", "steps"])
            w.writerows(rows)
    return EXIT_OK


def cmd_certify(args) -> int:
    spec_hash = sha256_file(args.spec)
    doc = _load_strategy(args, spec_hash)
    meta = doc.get("metadata") if isinstance(doc, dict) else None
    if isinstance(meta, dict):
        args.no_lambda = not meta.get("include_no_attack", True)
    meta = meta or {}
    spec = _load_spec(args, meta.get("initial_state"), meta.get("initial_observation"))
    try:
        meta, table, raw_cert = parse_strategy_document(doc, spec)
        arena = build_arena(spec)
        cert = certificate_from_document(raw_cert, table, arena)
    except StrategyFileError as exc:
        raise InputError(f"{args.strategy}: {exc}") from None
    violations = check_certificate(arena, cert)
    trap = check_unwinnable(arena, cert.win)
    report = {
        "verdict": "pass" if not violations and not trap else "fail",
        "certificate_violations": [v.as_dict() for v in violations],
        "maximality_violations": [v.as_dict() for v in trap],
    }
    _dump(report)
    if violations or trap:
        _err(f"certificate rejected: {len(violations)} obligation violation(s), "
             f"{len(trap)} maximality violation(s)")
        return EXIT_CERT
    _err("certificate accepted")
    return EXIT_OK


def cmd_export_dot(args) -> int:
    spec = _load_spec(args)
    arena = build_arena(spec)
    highlight = solve_pipeline(arena).win if args.highlight_win else frozenset()
    manifest = RunManifest.for_spec(args.spec, spec, "belief", not args.no_lambda)
    text = f"// {json.dumps(manifest.as_dict(), sort_keys=True)}\n" + to_dot(arena, highlight)
    if args.out and args.out != "-":
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="attackaware", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def with_spec(p):
        p.add_argument("spec", help="game spec JSON file")
        p.add_argument("--no-lambda", action="store_true",
                       help="do not add the empty (no-attack) action to the attack alphabet")
        return p

    p = with_spec(sub.add_parser("validate", help="check a spec file"))
    p.set_defaults(func=cmd_validate)

    p = with_spec(sub.add_parser("solve", help="synthesize the almost-sure winning strategy"))
    p.add_argument("--initial-state", help="override the spec's initial state (belief becomes {state})")
    p.add_argument("--out", help="write the strategy/certificate file here")
    p.add_argument("--arena-dot", help="write the arena in DOT format here")
    p.add_argument("--report", help="write the JSON report here instead of stdout")
    p.add_argument("--naive", action="store_true", help="full-sweep fixpoint instead of the worklist")
    p.add_argument("--deterministic", action="store_true", help="omit timing from the report")
    p.set_defaults(func=cmd_solve)

    p = with_spec(sub.add_parser("simulate", help="Monte Carlo play-out of a strategy"))
    p.add_argument("strategy", help="strategy file written by 'solve --out'")
    p.add_argument("--policy", action="append", choices=[x.value for x in AttackerPolicy])
    p.add_argument("--episodes", type=int, default=1000)
    p.add_argument("--horizon", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--initial-state", action="append", help="repeatable; defaults to the strategy's")
    p.add_argument("--csv", help="per-episode CSV output")
    p.set_defaults(func=cmd_simulate)

    p = with_spec(sub.add_parser("certify", help="check a strategy file's certificate"))
    p.add_argument("strategy")
    p.set_defaults(func=cmd_certify)

    p = with_spec(sub.add_parser("export-dot", help="write the arena as a DOT graph"))
    p.add_argument("--initial-state")
    p.add_argument("--out")
    p.add_argument("--highlight-win", action="store_true")
    p.set_defaults(func=cmd_export_dot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except InputError as exc:
        _err(f"error: {exc}")
        return EXIT_INVALID
    except SpecHashMismatch as exc:
        _err(f"error: {exc}")
        return EXIT_HASH
    except ArenaTooLarge as exc:
        _err(f"error: {exc}; raise BELIEF_ARENA_MAX_STATES to allow larger arenas")
        return EXIT_TOO_LARGE
    except ValueError as exc:
        _err(f"error: {exc}")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
