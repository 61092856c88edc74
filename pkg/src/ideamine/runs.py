"""Run lifecycle: persistent records, the status state machine, an
append-only event log per run, and the worker pool that executes protocols.

Every run lives in its own directory of flat files (JSON, NDJSON,
Markdown) so a human can read the artifacts directly and a crashed or
stopped service can resume from what is on disk.
"""

from __future__ import annotations

import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import dialog as dlg
from . import evaluation as ev
from . import prompts
from . import protocols as proto
from . import rag
from . import sampling as smp
from .config import EngineConfig
from .errors import (
    DialogAborted,
    EngineError,
    NotFound,
    PartialProcedure,
    PreconditionError,
    TargetUnreachable,
    UnknownIdeaId,
    ValidationError,
    WrongState,
)
from .scholar import ScholarClient
from .storage import append_ndjson, dump_json, load_json, new_ulid, now_iso, read_ndjson, write_text

PROTOCOLS = ("idea_mining", "procedure_design", "evaluate", "categorize")
TERMINAL_STATUSES = ("done", "failed")

# Allowed transitions per protocol; "failed" is reachable from any
# non-terminal status and is handled separately.
STATUS_FLOW: dict[str, dict[str, tuple[str, ...]]] = {
    "idea_mining": {
        "pending": ("divergent",),
        "divergent": ("convergent",),
        "convergent": ("awaiting_selection",),
        "awaiting_selection": ("refining",),
        "refining": ("done",),
    },
    "procedure_design": {
        "pending": ("qa", "dialog", "distilling"),
        "qa": ("dialog", "distilling"),
        "dialog": ("distilling",),
        "distilling": ("done",),
    },
    "evaluate": {"pending": ("done",)},
    "categorize": {"pending": ("done",)},
}


@dataclass
class RunRecord:
    run_id: str
    protocol: str
    status: str
    created: str
    updated: str
    config: dict = field(default_factory=dict)
    artifacts: list[str] = field(default_factory=list)
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "run_id": self.run_id,
            "protocol": self.protocol,
            "status": self.status,
            "created": self.created,
            "updated": self.updated,
            "config": self.config,
            "artifacts": list(self.artifacts),
            "error": self.error,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunRecord":
        return cls(
            run_id=d["run_id"],
            protocol=d["protocol"],
            status=d["status"],
            created=d["created"],
            updated=d["updated"],
            config=d.get("config", {}),
            artifacts=list(d.get("artifacts", [])),
            error=d.get("error"),
        )


class RunStore:
    """Flat-file persistence for run records, artifacts, and event logs."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()
        self._event_seq: dict[str, int] = {}

    def _lock(self, run_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(run_id, threading.Lock())

    def run_dir(self, run_id: str) -> Path:
        return self.root / run_id

    def create(self, protocol: str, request: dict, config_snapshot: dict) -> RunRecord:
        run_id = new_ulid()
        now = now_iso()
        record = RunRecord(
            run_id=run_id,
            protocol=protocol,
            status="pending",
            created=now,
            updated=now,
            config=config_snapshot,
        )
        run_dir = self.run_dir(run_id)
        run_dir.mkdir(parents=True)
        with self._lock(run_id):
            dump_json(run_dir / "request.json", request)
            self._save(record)
            self._append_event(record, {"type": "created", "status": "pending"})
        record.artifacts.append("request.json")
        self.save(record)
        return record

    def _save(self, record: RunRecord) -> None:
        record.updated = now_iso()
        dump_json(self.run_dir(record.run_id) / "record.json", record.to_dict())

    def save(self, record: RunRecord) -> None:
        with self._lock(record.run_id):
            self._save(record)

    def load(self, run_id: str) -> RunRecord:
        path = self.run_dir(run_id) / "record.json"
        if not path.exists():
            raise NotFound(f"no run {run_id!r}")
        return RunRecord.from_dict(load_json(path))

    def list(self) -> list[RunRecord]:
        records = []
        for entry in sorted(self.root.iterdir()):
            if (entry / "record.json").exists():
                records.append(RunRecord.from_dict(load_json(entry / "record.json")))
        return records

    def _append_event(self, record: RunRecord, payload: dict) -> None:
        run_id = record.run_id
        if run_id not in self._event_seq:
            self._event_seq[run_id] = len(read_ndjson(self.run_dir(run_id) / "events.ndjson"))
        event = {"seq": self._event_seq[run_id], "ts": now_iso(), **payload}
        append_ndjson(self.run_dir(run_id) / "events.ndjson", event)
        self._event_seq[run_id] += 1

    def append_event(self, record: RunRecord, type: str, **payload) -> None:
        with self._lock(record.run_id):
            self._append_event(record, {"type": type, **payload})

    def read_events(self, run_id: str, offset: int = 0) -> list[dict]:
        if not (self.run_dir(run_id) / "record.json").exists():
            raise NotFound(f"no run {run_id!r}")
        return read_ndjson(self.run_dir(run_id) / "events.ndjson", offset=offset)

    def transition(self, record: RunRecord, new_status: str, error: str | None = None) -> None:
        allowed = STATUS_FLOW[record.protocol].get(record.status, ())
        if new_status != "failed" and new_status not in allowed:
            raise WrongState(
                f"run {record.run_id} cannot go {record.status} -> {new_status}"
            )
        if new_status == "failed" and record.status in TERMINAL_STATUSES:
            raise WrongState(f"run {record.run_id} is already terminal")
        with self._lock(record.run_id):
            record.status = new_status
            record.error = error
            self._save(record)
            payload = {"type": "status", "status": new_status}
            if error:
                payload["error"] = error
            self._append_event(record, payload)

    def register_artifacts(self, record: RunRecord, paths: list[str]) -> None:
        with self._lock(record.run_id):
            for p in paths:
                if p not in record.artifacts:
                    record.artifacts.append(p)
            self._save(record)

    def artifact_path(self, run_id: str, rel: str) -> Path:
        base = self.run_dir(run_id).resolve()
        path = (base / rel).resolve()
        if base not in path.parents and path != base:
            raise NotFound(f"artifact {rel!r} escapes the run directory")
        if not path.is_file():
            raise NotFound(f"run {run_id} has no artifact {rel!r}")
        return path


class Engine:
    """Binds a configuration to a gateway, a run store, and a worker pool."""

    def __init__(self, config: EngineConfig):
        self.config = config
        self.gateway = config.build_gateway()
        self.store = RunStore(config.sessions_dir)
        self.scholar = ScholarClient(
            fixtures_dir=config.fixtures_dir,
            offline=config.scholar_offline,
        )
        self._pool = ThreadPoolExecutor(max_workers=config.parallel_runs)
        self._corpus: rag.VectorStore | None = None
        self._corpus_loaded = False

    # --- lifecycle --------------------------------------------------------

    def close(self) -> None:
        self._pool.shutdown(wait=True)

    def __enter__(self) -> "Engine":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    # --- corpus -----------------------------------------------------------

    def corpus(self) -> rag.VectorStore | None:
        if not self._corpus_loaded:
            self._corpus_loaded = True
            if self.config.corpus_dir and (self.config.corpus_dir / "index.json").exists():
                self._corpus = rag.load_index(self.config.corpus_dir, self.gateway.embedder)
        return self._corpus

    def ingest_corpus(self, source_dir: str | Path | None = None) -> rag.VectorStore:
        directory = Path(source_dir) if source_dir else self.config.corpus_dir
        if directory is None:
            raise PreconditionError("no corpus directory configured")
        store = rag.ingest_corpus(directory, self.config.rag, self.gateway.embedder)
        self._corpus = store
        self._corpus_loaded = True
        return store

    # --- run creation -----------------------------------------------------

    def create_run(self, request: dict) -> RunRecord:
        normalized = validate_request(request, self.config)
        record = self.store.create(
            normalized["protocol"], normalized, self.config.snapshot()
        )
        self._pool.submit(self._execute, record.run_id)
        return record

    def get_run(self, run_id: str) -> RunRecord:
        return self.store.load(run_id)

    def list_runs(self) -> list[RunRecord]:
        return self.store.list()

    def wait(self, run_id: str, until: tuple[str, ...] = TERMINAL_STATUSES, timeout: float = 30.0) -> RunRecord:
        deadline = time.monotonic() + timeout
        while True:
            record = self.store.load(run_id)
            if record.status in until:
                return record
            if time.monotonic() > deadline:
                raise TimeoutError(
                    f"run {run_id} still {record.status} after {timeout}s"
                )
            time.sleep(0.02)

    def stream_events(self, run_id: str, offset: int = 0, poll_interval: float = 0.05):
        """Yield events in append order; stops after a terminal status event."""
        self.store.load(run_id)
        cursor = offset
        while True:
            events = self.store.read_events(run_id, offset=cursor)
            for event in events:
                cursor += 1
                yield event
                if event.get("status") in TERMINAL_STATUSES:
                    return
            time.sleep(poll_interval)

    # --- execution --------------------------------------------------------

    def _execute(self, run_id: str) -> None:
        record = self.store.load(run_id)
        request = load_json(self.store.run_dir(run_id) / "request.json")
        try:
            if record.protocol == "idea_mining":
                self._run_idea_mining(record, request)
            elif record.protocol == "procedure_design":
                self._run_procedure_design(record, request)
            elif record.protocol == "evaluate":
                self._run_evaluate(record, request)
            elif record.protocol == "categorize":
                self._run_categorize(record, request)
        except EngineError as e:
            self.store.transition(record, "failed", error=str(e))
        except Exception as e:  # defensive: never leave a run hanging
            self.store.transition(record, "failed", error=f"{type(e).__name__}: {e}")

    def _request_corpus(self, request: dict) -> rag.VectorStore | None:
        use = request.get("use_corpus")
        if use is False:
            return None
        corpus = self.corpus()
        if use is True and corpus is None:
            raise PreconditionError("run requested the corpus but none is indexed")
        return corpus

    def _run_idea_mining(self, record: RunRecord, request: dict) -> None:
        run_dir = self.store.run_dir(record.run_id)
        cfg = self.config.mining_config(
            request["target_n"],
            **{
                k: request[k]
                for k in ("dedup_threshold", "max_batches", "batch_prompt_count")
                if request.get(k) is not None
            },
        )
        self.store.transition(record, "divergent")

        def divergent_progress(batches, unique, rejected):
            self.store.append_event(
                record,
                "divergent_progress",
                batches=batches,
                unique_ideas=unique,
                duplicates_rejected=rejected,
            )

        def judge_progress(criterion, scored, total):
            self.store.append_event(
                record, "judge_progress", criterion=criterion, scored=scored, total=total
            )

        corpus = self._request_corpus(request)
        try:
            context, _ = proto._context_for(request["prompt"], corpus)
            pool, stats = smp.divergent_phase(
                request["prompt"],
                cfg,
                self.gateway,
                context=context or None,
                progress=divergent_progress,
                parallelism=self.config.divergent_parallelism,
            )
        except TargetUnreachable as e:
            if e.pool is not None:
                partial = smp.pool_to_dict(e.pool, e.stats)
                partial["prompt"] = request["prompt"]
                dump_json(run_dir / "ideas.json", partial)
                self.store.register_artifacts(record, ["ideas.json"])
            raise

        self.store.transition(record, "convergent")
        novelty, effectiveness = smp.convergent_phase(
            pool, self.gateway, progress=judge_progress
        )
        result = proto.MiningResult(
            prompt=request["prompt"],
            pool=pool,
            stats=stats,
            novelty_list=novelty,
            effectiveness_list=effectiveness,
        )
        written = proto.save_mining_result(result, run_dir)
        self.store.register_artifacts(record, written)
        self.store.transition(record, "awaiting_selection")

    def select_ideas(self, run_id: str, idea_ids: list[str], wait: bool = False) -> RunRecord:
        """Human selection gate: kick off refinement of the chosen ideas."""
        record = self.store.load(run_id)
        if record.status != "awaiting_selection":
            raise WrongState(
                f"run {run_id} is {record.status}, not awaiting_selection"
            )
        if not idea_ids:
            raise PreconditionError("select at least one idea id")
        result = proto.load_mining_result(self.store.run_dir(run_id))
        known = set(result.pool.ids())
        for idea_id in idea_ids:
            if idea_id not in known:
                raise UnknownIdeaId(f"idea id {idea_id!r} is not in the pool")
        self.store.transition(record, "refining")
        self.store.append_event(record, "selection", idea_ids=list(idea_ids))
        future = self._pool.submit(self._run_refinement, record.run_id, list(idea_ids))
        if wait:
            future.result()
            return self.store.load(run_id)
        return record

    def _run_refinement(self, run_id: str, idea_ids: list[str]) -> None:
        record = self.store.load(run_id)
        run_dir = self.store.run_dir(run_id)
        try:
            result = proto.load_mining_result(run_dir)
            proto.refine_ideas(
                result, idea_ids, self.gateway, turn_count=self.config.dialog_turn_count
            )
            written = proto.save_mining_result(result, run_dir)
            self.store.register_artifacts(record, written)
            self.store.transition(record, "done")
        except EngineError as e:
            self.store.transition(record, "failed", error=str(e))
        except Exception as e:
            self.store.transition(record, "failed", error=f"{type(e).__name__}: {e}")

    def _run_procedure_design(self, record: RunRecord, request: dict) -> None:
        run_dir = self.store.run_dir(record.run_id)
        corpus = self._request_corpus(request)
        transcripts: list[dlg.Transcript] = []

        def on_phase(phase: str) -> None:
            if record.status != phase:
                self.store.transition(record, phase)

        no_qa = request.get("no_qa", False)
        single_agent = request.get("single_agent", False)
        qa_count = request.get("qa_count") or self.config.qa_count
        turn_count = request.get("turn_count") or self.config.dialog_turn_count

        if not no_qa:
            on_phase("qa")
            qa_pairs = proto.generate_qa(
                request["prompt"], qa_count, self.gateway, corpus=corpus
            )
            dump_json(run_dir / "qa.json", [p.to_dict() for p in qa_pairs])
            self.store.register_artifacts(record, ["qa.json"])
            opener = prompts.PROCEDURE_OPENER_WITH_QA.format(
                prompt=request["prompt"],
                qa_header=prompts.QA_BLOCK_HEADER,
                qa_block=proto.qa_block(qa_pairs),
            )
        else:
            qa_pairs = []
            opener = prompts.PROCEDURE_OPENER_NO_QA.format(prompt=request["prompt"])

        try:
            if single_agent:
                on_phase("distilling")
                raw = proto._single_agent_procedure(opener, self.gateway)
            else:
                on_phase("dialog")
                roles = dlg.default_roles(self.gateway)
                try:
                    transcript = dlg.run_dialog(roles, opener, turn_count)
                except DialogAborted as e:
                    if e.partial is not None:
                        transcripts.append(e.partial)
                    raise
                transcripts.append(transcript)
                on_phase("distilling")
                raw = dlg.distill(transcript, "procedure", roles[1])
            doc = proto.parse_procedure(raw, qa_pairs)
        except PartialProcedure as e:
            write_text(run_dir / "procedure.md", e.raw or "")
            self.store.register_artifacts(record, ["procedure.md"])
            raise
        finally:
            for k, transcript in enumerate(transcripts):
                dump_json(run_dir / f"transcript-{k}.json", transcript.to_dict())
                write_text(
                    run_dir / f"transcript-{k}.md",
                    dlg.render_transcript_markdown(transcript, title="Synthesis dialog"),
                )
                self.store.register_artifacts(
                    record, [f"transcript-{k}.json", f"transcript-{k}.md"]
                )

        dump_json(run_dir / "procedure.json", doc.to_dict())
        write_text(run_dir / "procedure.md", proto.render_procedure_markdown(doc))
        dump_json(
            run_dir / "ablations.json",
            {"no_qa": bool(no_qa), "single_agent": bool(single_agent)},
        )
        self.store.register_artifacts(
            record, ["procedure.json", "procedure.md", "ablations.json"]
        )
        self.store.transition(record, "done")

    def _load_items(self, request: dict) -> list[tuple[str, str]]:
        if request.get("items"):
            return [(i["id"], i["text"]) for i in request["items"]]
        source = request["source_run"]
        ideas = load_json(self.store.run_dir(source) / "ideas.json")
        return [(i["id"], i["text"]) for i in ideas["ideas"]]

    def _run_evaluate(self, record: RunRecord, request: dict) -> None:
        run_dir = self.store.run_dir(record.run_id)
        items = self._load_items(request)
        rubric = ev.RUBRICS[request.get("rubric", "idea_rubric")]
        artifacts = []

        report: dict = {"rubric": rubric.name, "items": len(items)}
        if request.get("skip_rubric"):
            scores = []
        else:
            scores = ev.rubric_score(items, rubric, self.gateway)
            dump_json(run_dir / "scores.json", [s.to_dict() for s in scores])
            artifacts.append("scores.json")
            report["scores"] = [s.to_dict() for s in scores]

        if request.get("novelty"):
            reports = [
                ev.novelty_score(item_id, text, self.gateway, self.scholar)
                for item_id, text in items
            ]
            dump_json(run_dir / "novelty.json", [r.to_dict() for r in reports])
            artifacts.append("novelty.json")
            report["novelty"] = [r.to_dict() for r in reports]

        dump_json(run_dir / "report.json", report)
        write_text(run_dir / "report.md", _render_report_markdown(report))
        artifacts += ["report.json", "report.md"]
        self.store.register_artifacts(record, artifacts)
        self.store.transition(record, "done")

    def _run_categorize(self, record: RunRecord, request: dict) -> None:
        run_dir = self.store.run_dir(record.run_id)
        source = request["source_run"]
        ideas = load_json(self.store.run_dir(source) / "ideas.json")
        pool, _ = smp.pool_from_dict(ideas)
        histogram = proto.categorize_ideas(
            pool, self.gateway, labels=request.get("labels")
        )
        dump_json(run_dir / "categories.json", histogram.to_dict())
        self.store.register_artifacts(record, ["categories.json"])
        self.store.transition(record, "done")

    # --- follow-up --------------------------------------------------------

    def followup(self, run_id: str, question: str) -> dict:
        """Answer a question against a finished procedure run; persist history."""
        record = self.store.load(run_id)
        if record.protocol != "procedure_design" or record.status != "done":
            raise WrongState("follow-up needs a finished procedure_design run")
        run_dir = self.store.run_dir(run_id)
        history_path = run_dir / "followups.json"
        history = load_json(history_path) if history_path.exists() else []

        current = self._current_procedure(run_id)
        answer, revised = proto.followup(current, question, self.gateway)
        entry = {"question": question, "answer": answer, "revision": None}
        if revised is not None:
            k = sum(1 for h in history if h.get("revision") is not None)
            rev_json = f"procedure-rev{k}.json"
            rev_md = f"procedure-rev{k}.md"
            dump_json(run_dir / rev_json, revised.to_dict())
            write_text(run_dir / rev_md, proto.render_procedure_markdown(revised))
            self.store.register_artifacts(record, [rev_json, rev_md])
            entry["revision"] = rev_json
        history.append(entry)
        dump_json(history_path, history)
        self.store.register_artifacts(record, ["followups.json"])
        self.store.append_event(
            record, "followup", question=question, revised=revised is not None
        )
        return {
            "answer": answer,
            "revised": revised.to_dict() if revised is not None else None,
        }

    def _current_procedure(self, run_id: str) -> proto.ProcedureDoc:
        run_dir = self.store.run_dir(run_id)
        history_path = run_dir / "followups.json"
        latest = run_dir / "procedure.json"
        if history_path.exists():
            for entry in reversed(load_json(history_path)):
                if entry.get("revision"):
                    latest = run_dir / entry["revision"]
                    break
        return proto.ProcedureDoc.from_dict(load_json(latest))


def _render_report_markdown(report: dict) -> str:
    lines = ["# Evaluation report", ""]
    lines.append(f"Rubric: {report.get('rubric')} | items: {report.get('items')}")
    lines.append("")
    if report.get("scores"):
        scores = [
            ev.RubricScore(s["item_id"], s["metric"], s["value"], s["rationale"])
            for s in report["scores"]
        ]
        lines.append("## Score distribution")
        lines.append("")
        lines.append(ev.render_score_summary_markdown(scores))
        lines.append("| item | metric | score | rationale |")
        lines.append("| --- | --- | --- | --- |")
        for s in report["scores"]:
            lines.append(
                f"| {s['item_id']} | {s['metric']} | {s['value']:g} "
                f"| {' '.join(s['rationale'].split())} |"
            )
        lines.append("")
    if report.get("novelty"):
        lines.append("| item | keywords | hits | novelty |")
        lines.append("| --- | --- | --- | --- |")
        for r in report["novelty"]:
            lines.append(
                f"| {r['item_id']} | {', '.join(r['keywords'])} "
                f"| {len(r['hits'])} | {r['score']:g} |"
            )
        lines.append("")
    return "\n".join(lines)


# --- request validation ------------------------------------------------------

_COMMON_KEYS = {"protocol"}
_REQUEST_KEYS = {
    "idea_mining": _COMMON_KEYS
    | {"prompt", "target_n", "dedup_threshold", "max_batches", "batch_prompt_count", "use_corpus"},
    "procedure_design": _COMMON_KEYS
    | {"prompt", "qa_count", "no_qa", "single_agent", "turn_count", "use_corpus"},
    "evaluate": _COMMON_KEYS | {"items", "source_run", "rubric", "novelty", "skip_rubric"},
    "categorize": _COMMON_KEYS | {"source_run", "labels"},
}


def validate_request(request: dict, config: EngineConfig) -> dict:
    """Field-level validation; returns the normalized request dict."""
    errors: list[tuple[str, str]] = []
    protocol = request.get("protocol")
    if protocol not in PROTOCOLS:
        raise ValidationError([("protocol", f"must be one of {', '.join(PROTOCOLS)}")])

    allowed = _REQUEST_KEYS[protocol]
    for key in request:
        if key not in allowed:
            errors.append((key, "unknown field"))

    def need_prompt():
        prompt = request.get("prompt")
        if not isinstance(prompt, str) or not prompt.strip():
            errors.append(("prompt", "required non-empty string"))

    if protocol == "idea_mining":
        need_prompt()
        target_n = request.get("target_n")
        if not isinstance(target_n, int) or isinstance(target_n, bool) or target_n < 1:
            errors.append(("target_n", "required integer >= 1"))
        for key in ("max_batches", "batch_prompt_count"):
            value = request.get(key)
            if value is not None and (not isinstance(value, int) or value < 1):
                errors.append((key, "must be an integer >= 1"))
        threshold = request.get("dedup_threshold")
        if threshold is not None and not (
            isinstance(threshold, (int, float)) and 0.0 < float(threshold) < 1.0
        ):
            errors.append(("dedup_threshold", "must be a number in (0, 1)"))
    elif protocol == "procedure_design":
        need_prompt()
        qa_count = request.get("qa_count")
        no_qa = bool(request.get("no_qa", False))
        if qa_count is not None and (not isinstance(qa_count, int) or qa_count < 1):
            if not (no_qa and qa_count == 0):
                errors.append(("qa_count", "must be an integer >= 1 (or use no_qa)"))
        turn_count = request.get("turn_count")
        if turn_count is not None and (
            not isinstance(turn_count, int) or not (1 <= turn_count <= dlg.MAX_TURN_COUNT)
        ):
            errors.append(("turn_count", f"must be in [1, {dlg.MAX_TURN_COUNT}]"))
    elif protocol == "evaluate":
        items = request.get("items")
        source = request.get("source_run")
        if items is None and not source:
            errors.append(("items", "provide items or source_run"))
        if items is not None:
            if not isinstance(items, list) or not items:
                errors.append(("items", "must be a non-empty list"))
            else:
                for i, item in enumerate(items):
                    if (
                        not isinstance(item, dict)
                        or not str(item.get("id", "")).strip()
                        or not str(item.get("text", "")).strip()
                    ):
                        errors.append((f"items[{i}]", "needs id and text"))
        rubric = request.get("rubric")
        if rubric is not None and rubric not in ev.RUBRICS:
            errors.append(("rubric", f"must be one of {', '.join(sorted(ev.RUBRICS))}"))
    elif protocol == "categorize":
        if not request.get("source_run"):
            errors.append(("source_run", "required run id with an idea pool"))
        labels = request.get("labels")
        if labels is not None and (
            not isinstance(labels, list) or not all(isinstance(x, str) and x.strip() for x in labels)
        ):
            errors.append(("labels", "must be a list of non-empty strings"))

    if errors:
        raise ValidationError(errors)
    return dict(request)
