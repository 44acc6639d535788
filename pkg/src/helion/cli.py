"""Command-line pipeline orchestration.

Exit codes: 0 success, 1 domain error (bad data, unknown entity, ...),
2 usage error (argparse handles these).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import demo as packaged
from .errors import HelionError, MalformedCorpus
from .generation import Flavor, generate, read_scenario_tokens, write_scenario
from .model import ModelConfig, corpus_vocab_size, load as load_model, parse_history, train
from .scheduling import corpus_from_users, dump_corpus, load_corpus, load_user_routines
from .simulator import build_registry, execute_scenario, load_policies
from .tokens import Vocabulary, load_routines, load_vocabulary

DEFAULT_HOST = "127.0.0.1"
DEFAULT_PORT = 8765


def _vocab_from_args(args) -> Vocabulary:
    if getattr(args, "vocab", None):
        return load_vocabulary(Path(args.vocab).read_text(encoding="utf-8"))
    return packaged.default_vocabulary()


def cmd_schedule(args) -> int:
    vocab = _vocab_from_args(args)
    users = load_user_routines(Path(args.routines).read_text(encoding="utf-8"), vocab)
    corpus = corpus_from_users(users, days=args.days, base_seed=args.seed)
    Path(args.out).write_text(dump_corpus(corpus), encoding="utf-8")
    return 0


def cmd_train(args) -> int:
    corpus = load_corpus(Path(args.corpus).read_text(encoding="utf-8"))
    config = ModelConfig(order=args.order, discount=args.discount)
    model = train(corpus, config)
    with open(args.out, "w", encoding="utf-8") as sink:
        model.dump(sink)
    return 0


def cmd_generate(args) -> int:
    model = load_model(Path(args.model).read_text(encoding="utf-8"))
    history = parse_history([t for t in args.history.split(";") if t.strip()])
    flavor = Flavor(args.flavor)
    scenario = generate(model, history, args.k, flavor)
    out_dir = Path(args.out_dir)
    write_scenario(scenario, out_dir / f"{flavor.value}.tsv")
    return 0


def cmd_execute(args) -> int:
    vocab = _vocab_from_args(args)
    ps = build_registry(vocab)
    model = None
    if args.model:
        model = load_model(Path(args.model).read_text(encoding="utf-8"))
    if args.policies:
        ps.policies = load_policies(Path(args.policies).read_text(encoding="utf-8"), ps)
    automations = []
    if args.automations:
        automations = load_routines(
            Path(args.automations).read_text(encoding="utf-8"), vocab
        )
    tokens = read_scenario_tokens(Path(args.scenario).read_text(encoding="utf-8"))
    if model is not None:
        known = set(model.vocab_texts)
        for token in tokens:
            if token.text not in known:
                raise MalformedCorpus(
                    f"scenario event {token.text!r} is not in the model vocabulary"
                )
    report = execute_scenario(ps, tokens, automations, max_chain=args.max_chain)
    if args.json:
        print(json.dumps(report.to_dict(), sort_keys=True))
    else:
        print(f"applied: {len(report.applied)}")
        print(f"automation_firings: {len(report.automation_firings)}")
        print(f"chain_limit_hits: {report.chain_limit_hits}")
        print(f"violations: {len(report.violations)}")
        for v in report.violations:
            print(f"  seq {v.seq_no}: [{v.severity.value}] {v.rule_id}: {v.description}")
    return 0


def cmd_stats(args) -> int:
    corpus = load_corpus(Path(args.corpus).read_text(encoding="utf-8"))
    stats = {
        "sequences": len(corpus.sequences),
        "events": corpus.total_events(),
        "vocabulary": corpus_vocab_size(corpus),
    }
    if args.json:
        print(json.dumps(stats, sort_keys=True))
    else:
        print(f"sequences: {stats['sequences']}")
        print(f"events: {stats['events']}")
        print(f"vocabulary: {stats['vocabulary']}")
    return 0


def resolve_host_port(
    host_flag: str | None, port_flag: int | None, env=os.environ
) -> tuple[str, int]:
    """Flags win over HELION_HOST/HELION_PORT, which win over defaults."""
    host = host_flag or env.get("HELION_HOST") or DEFAULT_HOST
    if port_flag is not None:
        port = port_flag
    else:
        port = int(env.get("HELION_PORT") or DEFAULT_PORT)
    return host, port


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    host, port = resolve_host_port(args.host, args.port)
    vocab = _vocab_from_args(args)
    app = create_app(vocab=vocab, pretrain_demo=not args.no_demo_models)
    uvicorn.run(app, host=host, port=port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="helion",
        description="Model home-automation event sequences, generate scenarios, "
        "and execute them on a virtual smart-home platform.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    vocab_parent = argparse.ArgumentParser(add_help=False)
    vocab_parent.add_argument(
        "--vocab", help="vocabulary TSV (defaults to the packaged one)"
    )

    p = sub.add_parser("schedule", parents=[vocab_parent],
                       help="expand routines into a corpus TSV")
    p.add_argument("--routines", required=True, help="routine JSON file")
    p.add_argument("--days", type=int, default=30)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="corpus TSV output path")
    p.set_defaults(func=cmd_schedule)

    p = sub.add_parser("train", help="train an n-gram model from a corpus TSV")
    p.add_argument("--corpus", required=True)
    p.add_argument("--order", type=int, choices=[2, 3, 4, 5], default=3)
    p.add_argument("--discount", type=float, default=None,
                   help="fixed discount in (0,1); omit to auto-estimate")
    p.add_argument("--out", required=True, help="model file output path")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("generate", help="generate an up or down scenario")
    p.add_argument("--model", required=True)
    p.add_argument("--history", default="",
                   help="semicolon-separated token texts seeding the scenario")
    p.add_argument("--k", type=int, default=10, help="number of events")
    p.add_argument("--flavor", choices=["up", "down"], default="up")
    p.add_argument("--out-dir", default=".", help="directory for up.tsv/down.tsv")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("execute", parents=[vocab_parent],
                       help="run a scenario file on the virtual platform")
    p.add_argument("--model", help="model file; scenario events are cross-checked "
                   "against its vocabulary")
    p.add_argument("--scenario", required=True, help="scenario TSV (up.tsv/down.tsv)")
    p.add_argument("--policies", help="policy JSON file")
    p.add_argument("--automations", help="routine JSON file fired during execution")
    p.add_argument("--max-chain", type=int, default=8)
    p.add_argument("--json", action="store_true", help="machine-readable report")
    p.set_defaults(func=cmd_execute)

    p = sub.add_parser("stats", help="corpus statistics")
    p.add_argument("--corpus", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("serve", parents=[vocab_parent],
                       help="run the HTTP service")
    p.add_argument("--host", default=None,
                   help=f"bind address (env HELION_HOST, default {DEFAULT_HOST})")
    p.add_argument("--port", type=int, default=None,
                   help=f"port (env HELION_PORT, default {DEFAULT_PORT})")
    p.add_argument("--no-demo-models", action="store_true",
                   help="skip training the demo models at startup")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except HelionError as exc:
        print(f"helion: error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"helion: error: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
