"""Command-line interface covering every protocol headlessly.

Exit codes: 0 success, 1 protocol/engine error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import shutil
import sys
from pathlib import Path

from . import evaluation as ev
from .config import EngineConfig, load_config
from .errors import EngineError
from .runs import Engine
from .storage import dump_json, load_json, write_text


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ideamine",
        description="Idea mining, procedure design, and evaluation runs",
    )
    parser.add_argument(
        "--config",
        "--backend",
        dest="config",
        default=None,
        help="engine TOML (default: ./engine.toml when present)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="chunk and index the corpus directory")
    p.add_argument("source_dir", nargs="?", default=None)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("ideate", help="run idea mining")
    p.add_argument("prompt")
    p.add_argument("--n", type=int, required=True, help="target number of unique ideas")
    p.add_argument(
        "--select",
        nargs="?",
        const="ask",
        default=None,
        help="idea ids/ranks to refine (comma-separated), or no value to pick interactively",
    )
    p.add_argument("--max-batches", type=int, default=None)
    p.add_argument("--batch-count", type=int, default=None)
    p.add_argument("--dedup-threshold", type=float, default=None)
    p.add_argument("--no-corpus", action="store_true", help="skip retrieval grounding")
    p.set_defaults(func=cmd_ideate)

    p = sub.add_parser("design", help="run procedure design")
    p.add_argument("prompt")
    p.add_argument("--qa", type=int, default=None, help="number of grounding Q-A pairs")
    p.add_argument("--no-qa", action="store_true", help="ablation: skip Q-A grounding")
    p.add_argument(
        "--single-agent", action="store_true", help="ablation: skip the partner agent"
    )
    p.add_argument("--turns", type=int, default=None)
    p.add_argument("--no-corpus", action="store_true")
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("refine", help="select ideas from a finished mining run")
    p.add_argument("run_id")
    p.add_argument("--ids", required=True, help="comma-separated idea ids or novelty ranks")
    p.set_defaults(func=cmd_refine)

    p = sub.add_parser("evaluate", help="score items with a rubric and/or novelty search")
    p.add_argument("--run", dest="source_run", default=None, help="mining run to score")
    p.add_argument("--items", default=None, help="JSON file with [{id,text}] items")
    p.add_argument(
        "--rubric",
        choices=sorted(ev.RUBRICS),
        default="idea_rubric",
    )
    p.add_argument("--novelty", action="store_true", help="add literature novelty scores")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("categorize", help="assign category labels over a pool")
    p.add_argument("--run", dest="source_run", required=True)
    p.add_argument("--labels", default=None, help="comma-separated labels (else proposed)")
    p.set_defaults(func=cmd_categorize)

    p = sub.add_parser("compare", help="compare two scores.json files")
    p.add_argument("scores_a")
    p.add_argument("scores_b")
    p.add_argument("-o", "--out", default=None, help="output prefix (writes .json and .md)")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("followup", help="ask a question against a finished procedure")
    p.add_argument("run_id")
    p.add_argument("question")
    p.set_defaults(func=cmd_followup)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--ui", default="frontend/dist", help="directory with UI assets")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("export", help="zip a run directory")
    p.add_argument("run_id")
    p.add_argument("-o", "--out", default=None, help="output path (default <run_id>.zip)")
    p.set_defaults(func=cmd_export)

    return parser


def _load_engine(args) -> Engine:
    if args.config:
        return Engine(load_config(args.config))
    default = Path("engine.toml")
    if default.exists():
        return Engine(load_config(default))
    return Engine(EngineConfig())


def _resolve_ids(tokens: list[str], run_dir: Path) -> list[str]:
    """Map tokens to idea ids: literal ids pass through, integers are
    1-based ranks in the novelty list."""
    rankings = load_json(run_dir / "rankings.json")
    novelty = rankings["novelty"]
    known = {e["idea_id"] for e in novelty}
    ids = []
    for token in tokens:
        token = token.strip()
        if not token:
            continue
        if token in known:
            ids.append(token)
        elif token.isdigit() and 1 <= int(token) <= len(novelty):
            ids.append(novelty[int(token) - 1]["idea_id"])
        else:
            ids.append(token)  # let the engine report UnknownIdeaId
    return ids


def cmd_ingest(args, engine: Engine) -> int:
    store = engine.ingest_corpus(args.source_dir)
    docs = len({c.doc_id for c in store.chunks})
    print(f"indexed {store.size} chunks from {docs} documents")
    return 0


def cmd_ideate(args, engine: Engine) -> int:
    request = {
        "protocol": "idea_mining",
        "prompt": args.prompt,
        "target_n": args.n,
    }
    if args.max_batches is not None:
        request["max_batches"] = args.max_batches
    if args.batch_count is not None:
        request["batch_prompt_count"] = args.batch_count
    if args.dedup_threshold is not None:
        request["dedup_threshold"] = args.dedup_threshold
    if args.no_corpus:
        request["use_corpus"] = False

    record = engine.create_run(request)
    print(f"run {record.run_id} started")
    record = engine.wait(record.run_id, until=("awaiting_selection", "done", "failed"))
    if record.status == "failed":
        print(f"run failed: {record.error}", file=sys.stderr)
        return 1
    run_dir = engine.store.run_dir(record.run_id)
    print(f"pool written to {run_dir / 'ideas.json'}")
    print(f"rankings written to {run_dir / 'rankings.json'}")

    if args.select is None:
        print(f"status: {record.status} (use `ideamine refine {record.run_id} --ids ...`)")
        return 0

    if args.select == "ask":
        novelty = load_json(run_dir / "rankings.json")["novelty"]
        ideas = {i["id"]: i["text"] for i in load_json(run_dir / "ideas.json")["ideas"]}
        print("\nnovelty ranking:")
        for rank, entry in enumerate(novelty, 1):
            print(f"  {rank:>3}. [{entry['idea_id']}] score {entry['score']:g}: "
                  f"{ideas.get(entry['idea_id'], '')}")
        reply = input("select ids or ranks (comma-separated): ")
        tokens = reply.split(",")
    else:
        tokens = args.select.split(",")

    ids = _resolve_ids(tokens, run_dir)
    engine.select_ideas(record.run_id, ids, wait=True)
    record = engine.get_run(record.run_id)
    if record.status == "failed":
        print(f"refinement failed: {record.error}", file=sys.stderr)
        return 1
    print(f"refined {len(ids)} idea(s); status: {record.status}")
    return 0


def cmd_design(args, engine: Engine) -> int:
    request = {"protocol": "procedure_design", "prompt": args.prompt}
    if args.qa is not None:
        request["qa_count"] = args.qa
    if args.no_qa:
        request["no_qa"] = True
    if args.single_agent:
        request["single_agent"] = True
    if args.turns is not None:
        request["turn_count"] = args.turns
    if args.no_corpus:
        request["use_corpus"] = False

    record = engine.create_run(request)
    print(f"run {record.run_id} started")
    record = engine.wait(record.run_id)
    if record.status == "failed":
        print(f"run failed: {record.error}", file=sys.stderr)
        return 1
    print(f"procedure written to {engine.store.run_dir(record.run_id) / 'procedure.md'}")
    return 0


def cmd_refine(args, engine: Engine) -> int:
    run_dir = engine.store.run_dir(args.run_id)
    ids = _resolve_ids(args.ids.split(","), run_dir)
    engine.select_ideas(args.run_id, ids, wait=True)
    record = engine.get_run(args.run_id)
    if record.status == "failed":
        print(f"refinement failed: {record.error}", file=sys.stderr)
        return 1
    print(f"refined {len(ids)} idea(s); status: {record.status}")
    return 0


def cmd_evaluate(args, engine: Engine) -> int:
    request = {"protocol": "evaluate", "rubric": args.rubric, "novelty": args.novelty}
    if args.items:
        request["items"] = load_json(args.items)
    elif args.source_run:
        request["source_run"] = args.source_run
    record = engine.create_run(request)
    record = engine.wait(record.run_id, timeout=120)
    if record.status == "failed":
        print(f"evaluation failed: {record.error}", file=sys.stderr)
        return 1
    print(f"report written to {engine.store.run_dir(record.run_id) / 'report.md'}")
    return 0


def cmd_categorize(args, engine: Engine) -> int:
    request = {"protocol": "categorize", "source_run": args.source_run}
    if args.labels:
        request["labels"] = [x.strip() for x in args.labels.split(",") if x.strip()]
    record = engine.create_run(request)
    record = engine.wait(record.run_id)
    if record.status == "failed":
        print(f"categorization failed: {record.error}", file=sys.stderr)
        return 1
    print(f"categories written to {engine.store.run_dir(record.run_id) / 'categories.json'}")
    return 0


def cmd_compare(args, engine: Engine) -> int:
    def load_scores(path: str) -> list[ev.RubricScore]:
        return [
            ev.RubricScore(s["item_id"], s["metric"], s["value"], s.get("rationale", ""))
            for s in load_json(path)
        ]

    report = ev.compare_sets(load_scores(args.scores_a), load_scores(args.scores_b))
    markdown = ev.render_comparison_markdown(
        report, label_a=Path(args.scores_a).stem, label_b=Path(args.scores_b).stem
    )
    if args.out:
        dump_json(f"{args.out}.json", report.to_dict())
        write_text(f"{args.out}.md", markdown)
        print(f"wrote {args.out}.json and {args.out}.md")
    else:
        print(markdown)
    return 0


def cmd_followup(args, engine: Engine) -> int:
    result = engine.followup(args.run_id, args.question)
    print(result["answer"])
    if result["revised"] is not None:
        print("\n[a revised procedure was saved alongside the run artifacts]")
    return 0


def cmd_serve(args, engine: Engine) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(engine, ui_dir=args.ui)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def cmd_export(args, engine: Engine) -> int:
    run_dir = engine.store.run_dir(args.run_id)
    if not (run_dir / "record.json").exists():
        print(f"error: no run {args.run_id}", file=sys.stderr)
        return 1
    out = args.out or f"{args.run_id}.zip"
    base = out[:-4] if out.endswith(".zip") else out
    archive = shutil.make_archive(base, "zip", run_dir)
    print(f"exported {archive}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    engine = None
    try:
        engine = _load_engine(args)
        return args.func(args, engine)
    except EngineError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except json.JSONDecodeError as e:
        print(f"error: bad JSON input: {e}", file=sys.stderr)
        return 1
    finally:
        if engine is not None:
            engine.close()


if __name__ == "__main__":
    sys.exit(main())
