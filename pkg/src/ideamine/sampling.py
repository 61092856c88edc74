"""Divergent accumulation of unique ideas and convergent judge ranking.

The divergent phase keeps sampling the generator at high temperature until
the pool holds the target number of pairwise-unique ideas; the convergent
phase has the judge score every idea on novelty and effectiveness and
emits two ranked lists over the same pool.
"""

from __future__ import annotations

import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import gateway as gw
from . import prompts
from .errors import MissingEmbedding, PreconditionError, TargetUnreachable

PARSE_FLAG = "[parse-failure]"

_LIST_ITEM_RE = re.compile(r"^\s*(?:\d{1,3}[.)]\s+|[-*•]\s+)(.*)$")
_SCORE_RE = re.compile(r"SCORE:\s*(-?[0-9]+(?:\.[0-9]+)?)", re.IGNORECASE)
_RATIONALE_RE = re.compile(r"RATIONALE:\s*(.+)", re.IGNORECASE | re.DOTALL)


@dataclass
class Idea:
    id: str
    text: str
    gen_index: int
    embedding: np.ndarray | None = None
    source_batch: int = 0

    def __post_init__(self):
        if not normalize_text(self.text):
            raise PreconditionError("idea text is empty after normalization")


@dataclass
class IdeaPool:
    ideas: list[Idea] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.ideas)

    def ids(self) -> list[str]:
        return [i.id for i in self.ideas]

    def get(self, idea_id: str) -> Idea | None:
        for i in self.ideas:
            if i.id == idea_id:
                return i
        return None


@dataclass(frozen=True)
class MiningConfig:
    target_n: int
    dedup_threshold: float = 0.90
    max_batches: int = 50
    batch_prompt_count: int = 10
    divergent_params: gw.SamplingParams = field(
        default_factory=lambda: gw.SamplingParams(temperature=1.2)
    )

    def __post_init__(self):
        if self.target_n < 1:
            raise PreconditionError("target_n must be >= 1")
        if not (0.0 < self.dedup_threshold < 1.0):
            raise PreconditionError("dedup_threshold must be in (0, 1)")
        if self.max_batches < 1 or self.batch_prompt_count < 1:
            raise PreconditionError("max_batches and batch_prompt_count must be >= 1")
        if self.max_batches * self.batch_prompt_count < self.target_n:
            raise PreconditionError(
                "max_batches * batch_prompt_count must be >= target_n"
            )

    def to_dict(self) -> dict:
        return {
            "target_n": self.target_n,
            "dedup_threshold": self.dedup_threshold,
            "max_batches": self.max_batches,
            "batch_prompt_count": self.batch_prompt_count,
            "divergent_params": self.divergent_params.to_dict(),
        }


@dataclass(frozen=True)
class RankedEntry:
    idea_id: str
    score: float
    rationale: str


@dataclass
class RankedList:
    criterion: str  # "novelty" | "effectiveness"
    entries: list[RankedEntry]

    def check_invariants(self, pool: IdeaPool) -> None:
        """Raise if this list is not a valid ranking of the pool."""
        if sorted(e.idea_id for e in self.entries) != sorted(pool.ids()):
            raise PreconditionError("entries are not a permutation of the pool")
        gen = {i.id: i.gen_index for i in pool.ideas}
        for a, b in zip(self.entries, self.entries[1:]):
            if a.score < b.score:
                raise PreconditionError("scores must be non-increasing")
            if a.score == b.score and gen[a.idea_id] > gen[b.idea_id]:
                raise PreconditionError("ties must preserve generation order")


@dataclass
class DivergentStats:
    batches_used: int = 0
    duplicates_rejected: int = 0
    total_parsed: int = 0

    def to_dict(self) -> dict:
        return {
            "batches_used": self.batches_used,
            "duplicates_rejected": self.duplicates_rejected,
            "total_parsed": self.total_parsed,
        }


def normalize_text(text: str) -> str:
    return " ".join(text.split()).casefold()


def parse_list_items(raw: str) -> list[str]:
    """Only the numbered/bulleted lines of a text, stripped of their markers."""
    items = []
    for line in (raw or "").splitlines():
        m = _LIST_ITEM_RE.match(line)
        if m:
            item = m.group(1).strip()
            if item:
                items.append(item)
    return items


def parse_ideas(raw: str) -> list[str]:
    """Extract items from a numbered or bulleted list.

    Lines that are not list items (preamble, blank lines) are dropped.
    Text with no list structure at all comes back as a single item.
    """
    if not raw or not raw.strip():
        return []
    items = parse_list_items(raw)
    if items:
        return items
    return [raw.strip()]


def is_duplicate(candidate: Idea, pool: list[Idea], threshold: float) -> bool:
    """Duplicate = normalized-text match or cosine >= threshold vs any member."""
    if candidate.embedding is None:
        raise MissingEmbedding(f"candidate {candidate.id} has no embedding")
    cand_norm = normalize_text(candidate.text)
    for member in pool:
        if member.embedding is None:
            raise MissingEmbedding(f"pool idea {member.id} has no embedding")
        if normalize_text(member.text) == cand_norm:
            return True
        if float(np.dot(candidate.embedding, member.embedding)) >= threshold:
            return True
    return False


def divergent_phase(
    prompt: str,
    cfg: MiningConfig,
    gateway: gw.Gateway,
    context: str | None = None,
    progress=None,
    parallelism: int = 1,
) -> tuple[IdeaPool, DivergentStats]:
    """Accumulate exactly target_n unique ideas, batch by batch.

    Batches are merged strictly in submission order, so running requests
    concurrently (parallelism > 1) cannot change the output pool. Raises
    TargetUnreachable (carrying the partial pool) when max_batches runs
    out first.
    """
    if not prompt.strip():
        raise PreconditionError("prompt must be non-empty")

    context_block = prompts.CONTEXT_BLOCK.format(context=context) if context else ""
    messages = [
        gw.system(prompts.DIVERGENT_SYSTEM),
        gw.user(
            prompts.DIVERGENT_USER.format(
                context_block=context_block, prompt=prompt, count=cfg.batch_prompt_count
            )
        ),
    ]

    pool: list[Idea] = []
    stats = DivergentStats()
    gen_counter = 0

    def merge(text: str, batch_index: int) -> None:
        # The whole batch is parsed even if the target is crossed partway:
        # every parsed candidate that is not accepted counts as rejected.
        nonlocal gen_counter
        candidates = parse_ideas(text)
        stats.batches_used += 1
        if candidates:
            vectors = gateway.embed(candidates)
            for cand_text, vec in zip(candidates, vectors):
                idea = Idea(
                    id=f"i{gen_counter:04d}",
                    text=cand_text,
                    gen_index=gen_counter,
                    embedding=vec,
                    source_batch=batch_index,
                )
                gen_counter += 1
                stats.total_parsed += 1
                if len(pool) < cfg.target_n and not is_duplicate(
                    idea, pool, cfg.dedup_threshold
                ):
                    pool.append(idea)
        stats.duplicates_rejected = stats.total_parsed - len(pool)
        if progress is not None:
            progress(stats.batches_used, len(pool), stats.duplicates_rejected)

    if parallelism <= 1:
        batch_index = 0
        while len(pool) < cfg.target_n and batch_index < cfg.max_batches:
            completion = gateway.complete("generator", messages, cfg.divergent_params)
            merge(completion.text, batch_index)
            batch_index += 1
    else:
        submitted = 0
        with ThreadPoolExecutor(max_workers=parallelism) as executor:
            while len(pool) < cfg.target_n and submitted < cfg.max_batches:
                wave = min(parallelism, cfg.max_batches - submitted)
                futures = [
                    executor.submit(
                        gateway.complete,
                        "generator",
                        messages,
                        cfg.divergent_params,
                        submitted + i,
                    )
                    for i in range(wave)
                ]
                for i, fut in enumerate(futures):
                    completion = fut.result()
                    # Prefetched batches past the target are discarded unmerged
                    # so the pool matches a sequential run.
                    if len(pool) < cfg.target_n:
                        merge(completion.text, submitted + i)
                submitted += wave

    if len(pool) < cfg.target_n:
        raise TargetUnreachable(
            f"collected {len(pool)} of {cfg.target_n} unique ideas "
            f"after {stats.batches_used} batches",
            pool=IdeaPool(pool),
            stats=stats,
        )
    return IdeaPool(pool), stats


def parse_scored_reply(text: str, lo: float, hi: float) -> tuple[float, str] | None:
    """Pull (score, rationale) out of a judge reply; None if unusable."""
    m = _SCORE_RE.search(text or "")
    if not m:
        return None
    try:
        value = float(m.group(1))
    except ValueError:
        return None
    if not (lo <= value <= hi):
        return None
    r = _RATIONALE_RE.search(text)
    rationale = r.group(1).strip() if r else ""
    return value, rationale


def ask_scored(
    gateway: gw.Gateway,
    user_text: str,
    lo: float,
    hi: float,
    re_asks: int = 2,
    params: gw.SamplingParams | None = None,
) -> tuple[float, str, bool]:
    """Ask the judge for SCORE/RATIONALE, re-asking on parse failure.

    Returns (score, rationale, parsed_ok). After the re-ask budget the
    score falls back to `lo` with a flagged rationale; callers that need
    a different fallback inspect parsed_ok.
    """
    params = params or gw.SamplingParams(temperature=0.7)
    last_raw = ""
    for attempt in range(re_asks + 1):
        text = user_text
        if attempt > 0:
            text += prompts.REASK_SUFFIX.format(lo=lo, hi=hi)
        completion = gateway.complete(
            "judge", [gw.system(prompts.JUDGE_SYSTEM), gw.user(text)], params
        )
        parsed = parse_scored_reply(completion.text, lo, hi)
        if parsed is not None:
            return parsed[0], parsed[1], True
        last_raw = completion.text
    return lo, f"{PARSE_FLAG} raw: {last_raw[:160]}", False


def convergent_phase(
    pool: IdeaPool,
    gateway: gw.Gateway,
    progress=None,
) -> tuple[RankedList, RankedList]:
    """Judge every idea on both criteria; ties keep generation order."""
    if not pool.ideas:
        raise PreconditionError("convergent_phase needs a non-empty pool")
    gen = {i.id: i.gen_index for i in pool.ideas}
    lists = {}
    for criterion in ("novelty", "effectiveness"):
        entries = []
        for idea in pool.ideas:
            user_text = prompts.SCORE_IDEA_USER.format(
                criterion=criterion,
                definition=prompts.CRITERION_DEFINITIONS[criterion],
                lo=1,
                hi=10,
                idea=idea.text,
            )
            score, rationale, _ = ask_scored(gateway, user_text, 1.0, 10.0)
            entries.append(RankedEntry(idea_id=idea.id, score=score, rationale=rationale))
            if progress is not None:
                progress(criterion, len(entries), len(pool.ideas))
        entries.sort(key=lambda e: (-e.score, gen[e.idea_id]))
        lists[criterion] = RankedList(criterion=criterion, entries=entries)
    return lists["novelty"], lists["effectiveness"]


# --- serialization -----------------------------------------------------------


def pool_to_dict(pool: IdeaPool, stats: DivergentStats | None = None) -> dict:
    data = {
        "ideas": [
            {
                "id": i.id,
                "text": i.text,
                "gen_index": i.gen_index,
                "source_batch": i.source_batch,
                "embedding": [float(x) for x in i.embedding]
                if i.embedding is not None
                else None,
            }
            for i in pool.ideas
        ]
    }
    if stats is not None:
        data["stats"] = stats.to_dict()
    return data


def pool_from_dict(data: dict) -> tuple[IdeaPool, DivergentStats]:
    ideas = [
        Idea(
            id=d["id"],
            text=d["text"],
            gen_index=d["gen_index"],
            source_batch=d.get("source_batch", 0),
            embedding=np.asarray(d["embedding"], dtype=np.float64)
            if d.get("embedding") is not None
            else None,
        )
        for d in data["ideas"]
    ]
    stats = DivergentStats(**data.get("stats", {}))
    return IdeaPool(ideas), stats


def rankings_to_dict(novelty: RankedList, effectiveness: RankedList) -> dict:
    def entries(lst: RankedList) -> list[dict]:
        return [
            {"idea_id": e.idea_id, "score": e.score, "rationale": e.rationale}
            for e in lst.entries
        ]

    return {"novelty": entries(novelty), "effectiveness": entries(effectiveness)}


def rankings_from_dict(data: dict) -> tuple[RankedList, RankedList]:
    def build(criterion: str) -> RankedList:
        return RankedList(
            criterion=criterion,
            entries=[
                RankedEntry(e["idea_id"], e["score"], e["rationale"])
                for e in data[criterion]
            ],
        )

    return build("novelty"), build("effectiveness")


def render_pool_markdown(pool: IdeaPool, stats: DivergentStats) -> str:
    lines = [
        "# Idea pool",
        "",
        f"{len(pool.ideas)} unique ideas | batches used: {stats.batches_used} "
        f"| duplicates rejected: {stats.duplicates_rejected}",
        "",
        "| id | batch | idea |",
        "| --- | --- | --- |",
    ]
    for i in pool.ideas:
        lines.append(f"| {i.id} | {i.source_batch} | {_md_cell(i.text)} |")
    return "\n".join(lines) + "\n"


def render_rankings_markdown(
    novelty: RankedList, effectiveness: RankedList, pool: IdeaPool
) -> str:
    text = {i.id: i.text for i in pool.ideas}
    out = ["# Ranked lists", ""]
    for lst in (novelty, effectiveness):
        out.append(f"## {lst.criterion}")
        out.append("")
        out.append("| rank | id | score | idea | rationale |")
        out.append("| --- | --- | --- | --- | --- |")
        for rank, e in enumerate(lst.entries, 1):
            out.append(
                f"| {rank} | {e.idea_id} | {e.score:g} | "
                f"{_md_cell(text.get(e.idea_id, ''))} | {_md_cell(e.rationale)} |"
            )
        out.append("")
    return "\n".join(out)


def _md_cell(text: str) -> str:
    return " ".join(text.split()).replace("|", "\\|")
