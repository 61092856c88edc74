"""End-to-end protocols: idea mining, procedure design, categorisation,
and follow-up refinement of finished procedures.

Idea mining runs divergent sampling, then convergent ranking, then stops
for a human to select ideas; refinement of the selected ideas is a
separate operation so runs can pause indefinitely at the selection gate.
Procedure design grounds itself with Q-A pairs first, then hands them to
a two-agent synthesis dialog whose outcome is distilled and parsed.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from . import dialog as dlg
from . import gateway as gw
from . import prompts
from . import rag
from . import sampling as smp
from .errors import (
    LabelProposalFailure,
    PartialProcedure,
    PreconditionError,
    QAUnderflow,
    UnknownIdeaId,
)
from .storage import dump_json, load_json, write_text

# Character budget for retrieved context injected into generation prompts.
CONTEXT_CHAR_BUDGET = 4000

_LABEL_RE = re.compile(r"LABEL:\s*(.+)", re.IGNORECASE)
_TITLE_RE = re.compile(r"(?im)^\s*(?:#+\s*)?title\s*:\s*(.+)$")


@dataclass
class QAPair:
    question: str
    answer: str
    context_used: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not self.question.strip() or not self.answer.strip():
            raise PreconditionError("QA pairs need non-empty question and answer")

    def to_dict(self) -> dict:
        return {
            "question": self.question,
            "answer": self.answer,
            "context_used": list(self.context_used),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "QAPair":
        return cls(d["question"], d["answer"], list(d.get("context_used", [])))


@dataclass
class ProcedureDoc:
    title: str
    materials: list[str]
    steps: list[str]
    notes: list[str]
    qa_grounding: list[QAPair]
    raw: str

    def to_dict(self) -> dict:
        return {
            "title": self.title,
            "materials": list(self.materials),
            "steps": list(self.steps),
            "notes": list(self.notes),
            "qa_grounding": [q.to_dict() for q in self.qa_grounding],
            "raw": self.raw,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ProcedureDoc":
        return cls(
            title=d["title"],
            materials=list(d["materials"]),
            steps=list(d["steps"]),
            notes=list(d["notes"]),
            qa_grounding=[QAPair.from_dict(q) for q in d.get("qa_grounding", [])],
            raw=d["raw"],
        )


@dataclass
class Refinement:
    idea_id: str
    transcript: dlg.Transcript
    summary: str


@dataclass
class MiningResult:
    prompt: str
    pool: smp.IdeaPool
    stats: smp.DivergentStats
    novelty_list: smp.RankedList
    effectiveness_list: smp.RankedList
    selections: list[str] = field(default_factory=list)
    refinements: list[Refinement] = field(default_factory=list)


@dataclass
class CategoryHistogram:
    categories: list[tuple[str, int]]
    assignment: dict[str, str]

    def to_dict(self) -> dict:
        return {
            "categories": [[label, count] for label, count in self.categories],
            "assignment": dict(self.assignment),
        }


def _context_for(query: str, corpus: rag.VectorStore | None) -> tuple[str, list[str]]:
    """Retrieve and pack context for a query; ('', []) without a corpus."""
    if corpus is None:
        return "", []
    hits = rag.retrieve(query, corpus, corpus.cfg)
    context = rag.assemble_context(hits, CONTEXT_CHAR_BUDGET)
    refs = [f"{h.chunk.doc_id}#{h.chunk.chunk_index}" for h in hits]
    return context, refs


def idea_mining(
    prompt: str,
    cfg: smp.MiningConfig,
    gateway: gw.Gateway,
    corpus: rag.VectorStore | None = None,
    divergent_progress=None,
    judge_progress=None,
    parallelism: int = 1,
) -> MiningResult:
    """Divergent pool of exactly target_n ideas plus both ranked lists.

    Selections start empty; a human (or the CLI/service on their behalf)
    picks ideas later and hands them to refine_ideas.
    """
    if not prompt.strip():
        raise PreconditionError("prompt must be non-empty")
    context, _ = _context_for(prompt, corpus)
    pool, stats = smp.divergent_phase(
        prompt,
        cfg,
        gateway,
        context=context or None,
        progress=divergent_progress,
        parallelism=parallelism,
    )
    novelty, effectiveness = smp.convergent_phase(pool, gateway, progress=judge_progress)
    return MiningResult(
        prompt=prompt,
        pool=pool,
        stats=stats,
        novelty_list=novelty,
        effectiveness_list=effectiveness,
    )


def refine_ideas(
    result: MiningResult,
    selected: list[str],
    gateway: gw.Gateway,
    turn_count: int = 3,
) -> MiningResult:
    """One elaboration dialog plus summary per selected idea, in order."""
    if not selected:
        raise PreconditionError("select at least one idea")
    known = set(result.pool.ids())
    for idea_id in selected:
        if idea_id not in known:
            raise UnknownIdeaId(f"idea id {idea_id!r} is not in the pool")
    roles = dlg.default_roles(gateway)
    for idea_id in selected:
        idea = result.pool.get(idea_id)
        opener = prompts.REFINEMENT_OPENER.format(prompt=result.prompt, idea=idea.text)
        transcript = dlg.run_dialog(roles, opener, turn_count)
        summary = dlg.distill(transcript, "summary", roles[1])
        result.refinements.append(Refinement(idea_id, transcript, summary))
        if idea_id not in result.selections:
            result.selections.append(idea_id)
    return result


def single_shot_ideas(
    prompt: str,
    gateway: gw.Gateway,
    corpus: rag.VectorStore | None = None,
    params: gw.SamplingParams | None = None,
) -> list[str]:
    """One-prompt baseline the mining protocol is compared against."""
    context, _ = _context_for(prompt, corpus)
    context_block = prompts.CONTEXT_BLOCK.format(context=context) if context else ""
    completion = gateway.complete(
        "generator",
        [
            gw.system(prompts.DIVERGENT_SYSTEM),
            gw.user(prompts.SINGLE_SHOT_USER.format(context_block=context_block, prompt=prompt)),
        ],
        params or gw.SamplingParams(temperature=1.2),
    )
    return smp.parse_ideas(completion.text)


def generate_qa(
    prompt: str,
    count: int,
    gateway: gw.Gateway,
    corpus: rag.VectorStore | None = None,
) -> list[QAPair]:
    """Exactly `count` Q-A pairs with pairwise-distinct questions.

    Duplicate questions trigger up to two extra generation rounds before
    QAUnderflow.
    """
    if not prompt.strip():
        raise PreconditionError("prompt must be non-empty")
    if count < 1:
        raise PreconditionError("count must be >= 1")

    params = gw.SamplingParams(temperature=0.7)
    questions: list[str] = []
    seen: set[str] = set()
    for round_index in range(3):
        if round_index == 0:
            text = prompts.QA_QUESTIONS_USER.format(count=count, prompt=prompt)
        else:
            existing = "\n".join(f"- {q}" for q in questions)
            text = prompts.QA_MORE_QUESTIONS_USER.format(
                count=count - len(questions), existing=existing
            )
        completion = gateway.complete("generator", [gw.user(text)], params)
        for q in smp.parse_ideas(completion.text):
            key = smp.normalize_text(q)
            if key and key not in seen and len(questions) < count:
                seen.add(key)
                questions.append(q)
        if len(questions) >= count:
            break
    if len(questions) < count:
        raise QAUnderflow(
            f"only {len(questions)} distinct questions after 3 rounds (wanted {count})"
        )

    pairs = []
    for q in questions:
        context, refs = _context_for(q, corpus)
        context_block = prompts.CONTEXT_BLOCK.format(context=context) if context else ""
        completion = gateway.complete(
            "generator",
            [gw.user(prompts.QA_ANSWER_USER.format(context_block=context_block, question=q))],
            params,
        )
        pairs.append(QAPair(question=q, answer=completion.text.strip(), context_used=refs))
    return pairs


def qa_block(pairs: list[QAPair]) -> str:
    return "\n\n".join(f"Q: {p.question}\nA: {p.answer}" for p in pairs)


def parse_procedure(raw: str, qa_grounding: list[QAPair]) -> ProcedureDoc:
    """Split a Materials/Steps/Notes text into a structured document."""
    if not dlg.has_procedure_headers(raw):
        raise PartialProcedure("procedure text lacks Materials/Steps/Notes headers", raw=raw)

    spans = []
    for name, rx in dlg._HEADER_RES.items():
        m = rx.search(raw)
        spans.append((m.start(), m.end(), name))
    spans.sort()

    sections: dict[str, str] = {}
    for i, (start, end, name) in enumerate(spans):
        stop = spans[i + 1][0] if i + 1 < len(spans) else len(raw)
        # Drop the rest of the header line itself.
        line_end = raw.find("\n", end)
        body_start = line_end + 1 if line_end != -1 and line_end < stop else end
        sections[name] = raw[body_start:stop].strip()

    title = "Untitled procedure"
    m = _TITLE_RE.search(raw[: spans[0][0]])
    if m:
        title = m.group(1).strip()
    else:
        for line in raw[: spans[0][0]].splitlines():
            line = line.strip().lstrip("#").strip()
            if line:
                title = line
                break

    steps = smp.parse_list_items(sections.get("steps", ""))
    if not steps:
        raise PartialProcedure("procedure has no parseable steps", raw=raw)
    materials = smp.parse_list_items(sections.get("materials", ""))
    notes = smp.parse_list_items(sections.get("notes", ""))
    return ProcedureDoc(
        title=title,
        materials=materials,
        steps=steps,
        notes=notes,
        qa_grounding=qa_grounding,
        raw=raw,
    )


def procedure_design(
    prompt: str,
    qa_count: int,
    gateway: gw.Gateway,
    corpus: rag.VectorStore | None = None,
    no_qa: bool = False,
    single_agent: bool = False,
    turn_count: int = 3,
    on_transcript=None,
) -> ProcedureDoc:
    """Q-A grounding, multi-agent synthesis, and distillation into a document.

    The dialog opener embeds every Q-A pair verbatim. The --no-qa and
    --single-agent ablations skip the grounding or the partner agent.
    """
    if not prompt.strip():
        raise PreconditionError("prompt must be non-empty")
    if no_qa:
        qa_pairs: list[QAPair] = []
        opener = prompts.PROCEDURE_OPENER_NO_QA.format(prompt=prompt)
    else:
        if qa_count < 1:
            raise PreconditionError("qa_count must be >= 1 (pass no_qa for the ablation)")
        qa_pairs = generate_qa(prompt, qa_count, gateway, corpus=corpus)
        opener = prompts.PROCEDURE_OPENER_WITH_QA.format(
            prompt=prompt, qa_header=prompts.QA_BLOCK_HEADER, qa_block=qa_block(qa_pairs)
        )

    if single_agent:
        raw = _single_agent_procedure(opener, gateway)
    else:
        roles = dlg.default_roles(gateway)
        transcript = dlg.run_dialog(roles, opener, turn_count)
        raw = dlg.distill(transcript, "procedure", roles[1])
        if on_transcript is not None:
            on_transcript(transcript)
    return parse_procedure(raw, qa_pairs)


def _single_agent_procedure(opener: str, gateway: gw.Gateway, re_asks: int = 2) -> str:
    params = gw.SamplingParams(temperature=0.7)
    base = prompts.SINGLE_AGENT_PROCEDURE_USER.format(
        opener=opener, skeleton=prompts.PROCEDURE_SKELETON
    )
    last = ""
    for attempt in range(re_asks + 1):
        text = base if attempt == 0 else base + prompts.DISTILL_REASK_SUFFIX
        completion = gateway.complete(
            "generator", [gw.system(prompts.GENERATOR_ROLE_SYSTEM), gw.user(text)], params
        )
        last = completion.text
        if last.strip() and dlg.has_procedure_headers(last):
            return last
    raise PartialProcedure(
        f"single-agent draft lacked required sections after {re_asks + 1} attempts",
        raw=last,
    )


def categorize_ideas(
    pool: smp.IdeaPool,
    gateway: gw.Gateway,
    labels: list[str] | None = None,
) -> CategoryHistogram:
    """Assign every idea exactly one label; counts sum to the pool size.

    Without a label set, the judge proposes 5-10 labels first. A reply
    that names no known label files the idea under "other".
    """
    if not pool.ideas:
        raise PreconditionError("categorize_ideas needs a non-empty pool")
    params = gw.SamplingParams(temperature=0.7)

    if labels is None:
        ideas_block = "\n".join(f"- {i.text}" for i in pool.ideas)
        proposed: list[str] = []
        for _ in range(3):
            completion = gateway.complete(
                "judge",
                [gw.user(prompts.CATEGORY_LABELS_USER.format(ideas=ideas_block))],
                params,
            )
            raw_labels = smp.parse_ideas(completion.text)
            deduped: list[str] = []
            seen: set[str] = set()
            for lab in raw_labels:
                key = smp.normalize_text(lab)
                if key and key not in seen:
                    seen.add(key)
                    deduped.append(lab)
            if len(deduped) >= 5:
                proposed = deduped[:10]
                break
        if not proposed:
            raise LabelProposalFailure("judge never proposed 5-10 usable labels")
        labels = proposed
    else:
        if not labels:
            raise PreconditionError("labels list must be non-empty when given")
        labels = list(labels)

    lookup = {smp.normalize_text(lab): lab for lab in labels}
    assignment: dict[str, str] = {}
    for idea in pool.ideas:
        completion = gateway.complete(
            "judge",
            [
                gw.user(
                    prompts.CATEGORY_ASSIGN_USER.format(
                        labels=", ".join(labels), idea=idea.text
                    )
                )
            ],
            params,
        )
        label = "other"
        m = _LABEL_RE.search(completion.text or "")
        if m:
            label = lookup.get(smp.normalize_text(m.group(1)), "other")
        assignment[idea.id] = label

    counts = {lab: 0 for lab in labels}
    for lab in assignment.values():
        counts.setdefault(lab, 0)
        counts[lab] += 1
    ordered = [(lab, counts[lab]) for lab in labels]
    if "other" in counts and "other" not in (lab for lab in labels):
        ordered.append(("other", counts["other"]))
    return CategoryHistogram(categories=ordered, assignment=assignment)


def followup(
    doc: ProcedureDoc, question: str, gateway: gw.Gateway
) -> tuple[str, ProcedureDoc | None]:
    """Answer a question about a procedure; parse a revision if one is given."""
    if not question.strip():
        raise PreconditionError("question must be non-empty")
    completion = gateway.complete(
        "generator",
        [gw.user(prompts.FOLLOWUP_USER.format(raw=doc.raw, question=question))],
        gw.SamplingParams(temperature=0.7),
    )
    answer = completion.text
    revised = None
    if dlg.has_procedure_headers(answer):
        try:
            revised = parse_procedure(answer, doc.qa_grounding)
        except PartialProcedure:
            revised = None
    return answer, revised


# --- persistence -------------------------------------------------------------


def save_mining_result(result: MiningResult, run_dir: str | Path) -> list[str]:
    """Write the mining artifacts; returns the relative paths written."""
    run_dir = Path(run_dir)
    written = []

    ideas = smp.pool_to_dict(result.pool, result.stats)
    ideas["prompt"] = result.prompt
    dump_json(run_dir / "ideas.json", ideas)
    written.append("ideas.json")

    dump_json(
        run_dir / "rankings.json",
        smp.rankings_to_dict(result.novelty_list, result.effectiveness_list),
    )
    written.append("rankings.json")

    write_text(run_dir / "ideas.md", smp.render_pool_markdown(result.pool, result.stats))
    written.append("ideas.md")
    write_text(
        run_dir / "rankings.md",
        smp.render_rankings_markdown(
            result.novelty_list, result.effectiveness_list, result.pool
        ),
    )
    written.append("rankings.md")

    dump_json(run_dir / "selections.json", {"selections": list(result.selections)})
    written.append("selections.json")

    refinements = []
    for k, ref in enumerate(result.refinements):
        tpath = f"transcript-{k}.json"
        dump_json(
            run_dir / tpath,
            {"idea_id": ref.idea_id, **ref.transcript.to_dict()},
        )
        written.append(tpath)
        mdpath = f"transcript-{k}.md"
        write_text(
            run_dir / mdpath,
            dlg.render_transcript_markdown(
                ref.transcript, title=f"Refinement of {ref.idea_id}"
            ),
        )
        written.append(mdpath)
        refinements.append(
            {"idea_id": ref.idea_id, "transcript": tpath, "summary": ref.summary}
        )
    dump_json(run_dir / "refinements.json", refinements)
    written.append("refinements.json")
    return written


def load_mining_result(run_dir: str | Path) -> MiningResult:
    run_dir = Path(run_dir)
    ideas = load_json(run_dir / "ideas.json")
    pool, stats = smp.pool_from_dict(ideas)
    novelty, effectiveness = smp.rankings_from_dict(load_json(run_dir / "rankings.json"))
    selections = load_json(run_dir / "selections.json")["selections"]
    refinements = []
    refs_path = run_dir / "refinements.json"
    if refs_path.exists():
        for ref in load_json(refs_path):
            tdata = load_json(run_dir / ref["transcript"])
            refinements.append(
                Refinement(
                    idea_id=ref["idea_id"],
                    transcript=dlg.Transcript.from_dict(tdata),
                    summary=ref["summary"],
                )
            )
    return MiningResult(
        prompt=ideas.get("prompt", ""),
        pool=pool,
        stats=stats,
        novelty_list=novelty,
        effectiveness_list=effectiveness,
        selections=selections,
        refinements=refinements,
    )


def render_procedure_markdown(doc: ProcedureDoc) -> str:
    lines = [f"# {doc.title}", "", "## Materials", ""]
    lines += [f"- {m}" for m in doc.materials] or ["(none listed)"]
    lines += ["", "## Steps", ""]
    lines += [f"{i}. {s}" for i, s in enumerate(doc.steps, 1)]
    lines += ["", "## Notes", ""]
    lines += [f"- {n}" for n in doc.notes] or ["(none)"]
    if doc.qa_grounding:
        lines += ["", "## Grounding questions", ""]
        for p in doc.qa_grounding:
            lines += [f"**Q:** {p.question}", "", f"**A:** {p.answer}", ""]
    return "\n".join(lines) + "\n"
