"""Command line entry point: ``tastamp <command> ...``.

Exit codes: 0 for a positive answer or success, 1 for a negative answer or a
failed check, 2 for any error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import decide, oracle, periodic, tsa
from .corpus import random_corpus
from .model import ModelError, dumps, load, model_to_dict
from .timestamp import compute_timestamp

EXIT_OK, EXIT_NO, EXIT_ERR = 0, 1, 2


def _json(data) -> str:
    return json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False)


def _config(args) -> periodic.AnalysisConfig:
    return periodic.AnalysisConfig(block_cap=getattr(args, "block_cap", None))


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        Path(path).write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")


def cmd_timestamp(args) -> int:
    ts = compute_timestamp(load(args.model), _config(args))
    _write(None, ts.pretty() if args.pretty else ts.to_json())
    return EXIT_OK


def cmd_period(args) -> int:
    res = periodic.analyze(load(args.model), _config(args))
    _write(None, _json(res.info.to_dict()))
    return EXIT_OK


def cmd_rper(args) -> int:
    res = periodic.analyze(load(args.model), _config(args))
    if args.dot:
        _write(args.dot, periodic.periodic_dot(res.per))
    else:
        _write(None, _json(periodic.periodic_to_dict(res.per)))
    return EXIT_OK


def cmd_tsa(args) -> int:
    from .timestamp import timestamp_from_dict

    data = json.loads(Path(args.model).read_text(encoding="utf-8"))
    if args.from_timestamp:
        ts = timestamp_from_dict(data)
    else:
        ts = compute_timestamp(load(args.model), _config(args))
    out = tsa.build(ts)
    _write(args.output, dumps(out.model))
    side = _json(out.sidecar())
    if args.output and args.output != "-":
        _write(str(Path(args.output).with_suffix(".flowers.json")), side)
    else:
        _write(None, side)
    return EXIT_OK


def _verdict(v: decide.Verdict) -> int:
    _write(None, _json(v.to_dict()))
    return EXIT_OK if v.answer else EXIT_NO


def cmd_include(args) -> int:
    a, b = load(args.a), load(args.b)
    cfg = _config(args)
    return _verdict(decide.include1(a, b, cfg) if args.first else decide.refute_inclusion(a, b, cfg))


def cmd_universal1(args) -> int:
    return _verdict(decide.universal1(load(args.model), _config(args), aggregate=args.aggregate))


def cmd_oracle(args) -> int:
    model = load(args.model)
    cfg = oracle.GridConfig(K=args.denominator, T=args.horizon, max_steps=args.max_steps)
    events = oracle.explore(model, cfg, keep_post=args.traces)
    out: dict = {"K": cfg.K, "T": cfg.T, "events": events.to_list(), "states": events.states}
    code = EXIT_OK
    if args.check or args.traces:
        res = periodic.analyze(model, _config(args))
    if args.check:
        from .timestamp import extract

        report = oracle.check(model, extract(res.per, model.actions), cfg, events)
        out["check"] = report.to_dict()
        if not report.ok:
            code = EXIT_NO
    if args.traces:
        suffix = oracle.suffix_shift_check(model, cfg, res.info.t_per, res.info.L, events)
        out["post"] = [
            {"time": f"{now}/{cfg.K}", "action": a, "states": [[loc, list(v)] for loc, v in sorted(states)]}
            for (now, a), states in sorted(events.post.items())
        ]
        out["suffix"] = {
            "t_per": res.info.t_per,
            "L": res.info.L,
            "checked": suffix.checked,
            "violations": [[str(t), a, [st[0], list(st[1])]] for t, a, st in suffix.violations],
        }
        if not suffix.ok:
            code = EXIT_NO
    _write(None, _json(out))
    return code


def cmd_corpus(args) -> int:
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    for m in random_corpus(args.count, args.seed):
        (out / f"{m.name}.json").write_text(_json(model_to_dict(m)) + "\n", encoding="utf-8")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tastamp", description="Timestamps of timed automata with silent transitions.")
    sub = p.add_subparsers(dest="command", required=True)

    def analysis(sp):
        sp.add_argument("--block-cap", type=int, default=None, help="maximal number of unfolded blocks")
        return sp

    sp = analysis(sub.add_parser("timestamp", help="compute the timestamp of a model"))
    sp.add_argument("model")
    fmt = sp.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true", help="JSON output (default)")
    fmt.add_argument("--pretty", action="store_true", help="one line per action")
    sp.set_defaults(func=cmd_timestamp)

    sp = analysis(sub.add_parser("period", help="report the period analysis"))
    sp.add_argument("model")
    sp.set_defaults(func=cmd_period)

    sp = analysis(sub.add_parser("rper", help="export the folded periodic region automaton"))
    sp.add_argument("model")
    sp.add_argument("--dot", metavar="PATH", help="write DOT to PATH ('-' for stdout) instead of JSON")
    sp.set_defaults(func=cmd_rper)

    sp = analysis(sub.add_parser("tsa", help="build a deterministic one-clock automaton with the same timestamp"))
    sp.add_argument("model")
    sp.add_argument("-o", "--output", help="model output path; flowers go next to it")
    sp.add_argument("--from-timestamp", action="store_true", help="input is timestamp JSON, not a model")
    sp.set_defaults(func=cmd_tsa)

    sp = analysis(sub.add_parser("include", help="compare two models"))
    sp.add_argument("a")
    sp.add_argument("b")
    sp.add_argument("--first", action="store_true", help="decide 1-bounded inclusion")
    sp.set_defaults(func=cmd_include)

    sp = analysis(sub.add_parser("universal1", help="decide 1-bounded universality"))
    sp.add_argument("model")
    sp.add_argument("--aggregate", action="store_true", help="any action counts")
    sp.set_defaults(func=cmd_universal1)

    sp = analysis(sub.add_parser("oracle", help="explore the grid semantics"))
    sp.add_argument("model")
    sp.add_argument("--denominator", "-K", type=int, default=2)
    sp.add_argument("--horizon", "-T", type=int, default=10)
    sp.add_argument("--max-steps", type=int, default=None)
    sp.add_argument("--check", action="store_true", help="compare with the computed timestamp")
    sp.add_argument("--traces", action="store_true", help="dump post-event states and run the suffix check")
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("corpus", help="write the seeded random model corpus")
    sp.add_argument("output")
    sp.add_argument("--seed", type=int, default=20240601)
    sp.add_argument("--count", type=int, default=25)
    sp.set_defaults(func=cmd_corpus)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_ERR
    try:
        return args.func(args)
    except (ModelError, ValueError, OSError, periodic.CycleExplosion, periodic.NoStabilization) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERR


if __name__ == "__main__":
    sys.exit(main())
