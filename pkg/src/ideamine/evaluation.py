"""Automated assessment: rubric judging, literature-aware novelty scoring,
and side-by-side comparison of two score sets.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from . import gateway as gw
from . import prompts
from .errors import KeywordParseFailure, MetricMismatch, PreconditionError, ScholarUnavailable
from .sampling import PARSE_FLAG, ask_scored
from .scholar import PaperHit, ScholarClient, scholar_search


@dataclass(frozen=True)
class Rubric:
    name: str
    metrics: tuple[tuple[str, str], ...]
    scale: tuple[int, int] = (1, 10)

    def metric_names(self) -> list[str]:
        return [m for m, _ in self.metrics]


IDEA_RUBRIC = Rubric(
    name="idea_rubric",
    metrics=(
        ("creativity", "how inventive the idea is compared with routine approaches"),
        (
            "uniqueness",
            "how varied the ideas in this list are from one another; repeats score low",
        ),
        ("specificity", "how much the idea commits to niche, concrete detail"),
    ),
)

PROCEDURE_RUBRIC = Rubric(
    name="procedure_rubric",
    metrics=(
        ("novelty", "how far the method departs from published practice"),
        ("specificity", "how much concrete technical detail the procedure gives"),
        ("tractability", "how realistically a lab could execute it, end to end"),
    ),
)

RUBRICS = {r.name: r for r in (IDEA_RUBRIC, PROCEDURE_RUBRIC)}


@dataclass
class RubricScore:
    item_id: str
    metric: str
    value: float
    rationale: str

    def to_dict(self) -> dict:
        return {
            "item_id": self.item_id,
            "metric": self.metric,
            "value": self.value,
            "rationale": self.rationale,
        }


@dataclass
class NoveltyReport:
    item_id: str
    keywords: list[str]
    hits: list[PaperHit]
    score: float
    rationale: str
    degraded: bool = False  # literature search failed; scored blind

    def to_dict(self) -> dict:
        return {
            "item_id": self.item_id,
            "keywords": list(self.keywords),
            "hits": [h.to_dict() for h in self.hits],
            "score": self.score,
            "rationale": self.rationale,
            "degraded": self.degraded,
        }


@dataclass(frozen=True)
class MetricSummary:
    min: float
    q1: float
    median: float
    q3: float
    max: float
    mean: float

    def to_dict(self) -> dict:
        return {
            "min": self.min,
            "q1": self.q1,
            "median": self.median,
            "q3": self.q3,
            "max": self.max,
            "mean": self.mean,
        }


@dataclass
class ComparisonReport:
    metrics: dict[str, tuple[MetricSummary, MetricSummary, str]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            metric: {"a": a.to_dict(), "b": b.to_dict(), "winner": winner}
            for metric, (a, b, winner) in self.metrics.items()
        }


def _parse_keywords(text: str) -> list[str] | None:
    if not text or not text.strip():
        return None
    m = re.search(r"KEYWORDS:\s*(.+)", text, re.IGNORECASE | re.DOTALL)
    payload = m.group(1) if m else text
    line = next((ln for ln in payload.strip().splitlines() if ln.strip()), "")
    parts = line.split(";")
    if len(parts) == 1 and "," in line:
        parts = line.split(",")
    keywords = []
    seen = set()
    for p in parts:
        p = p.strip().strip(".")
        key = p.casefold()
        if p and key not in seen:
            seen.add(key)
            keywords.append(p)
    if 3 <= len(keywords) <= 5:
        return keywords
    return None


def extract_keywords(item: str, gateway: gw.Gateway, re_asks: int = 2) -> list[str]:
    """3-5 distinct search keywords for one item, with re-asks."""
    if not item.strip():
        raise PreconditionError("item must be non-empty")
    params = gw.SamplingParams(temperature=0.7)
    base = prompts.KEYWORDS_USER.format(item=item)
    last = ""
    for attempt in range(re_asks + 1):
        text = base if attempt == 0 else base + prompts.KEYWORDS_REASK_SUFFIX
        completion = gateway.complete("judge", [gw.user(text)], params)
        keywords = _parse_keywords(completion.text)
        if keywords is not None:
            return keywords
        last = completion.text
    raise KeywordParseFailure(
        f"no 3-5 keyword reply after {re_asks + 1} attempts; last: {last[:120]!r}"
    )


def _hits_block(hits: list[PaperHit]) -> str:
    if not hits:
        return prompts.NO_HITS_MARKER
    lines = []
    for i, h in enumerate(hits, 1):
        year = f" ({h.year})" if h.year else ""
        abstract = f" - {h.abstract[:300]}" if h.abstract else ""
        lines.append(f"{i}. {h.title}{year}{abstract}")
    return "\n".join(lines)


def novelty_score(
    item_id: str,
    item: str,
    gateway: gw.Gateway,
    scholar: ScholarClient,
) -> NoveltyReport:
    """Keyword extraction, top-10 literature retrieval, then a judged score.

    If the literature backend is unavailable the item is scored blind and
    the report is flagged as degraded.
    """
    if not item.strip():
        raise PreconditionError("item must be non-empty")
    keywords = extract_keywords(item, gateway)
    degraded = False
    try:
        hits = scholar_search(keywords, 10, scholar)
    except ScholarUnavailable:
        hits = []
        degraded = True
    user_text = prompts.NOVELTY_JUDGE_USER.format(item=item, hits_block=_hits_block(hits))
    score, rationale, _ = ask_scored(gateway, user_text, 0.0, 10.0)
    if degraded:
        rationale = f"[literature-blind] {rationale}"
    return NoveltyReport(
        item_id=item_id,
        keywords=keywords,
        hits=hits,
        score=score,
        rationale=rationale,
        degraded=degraded,
    )


def _parse_list_scores(
    text: str, item_ids: list[str], lo: float, hi: float
) -> dict[str, tuple[float, str]]:
    """Per-item 'id: SCORE: x RATIONALE: ...' lines from a list-wide reply."""
    out: dict[str, tuple[float, str]] = {}
    for item_id in item_ids:
        rx = re.compile(
            re.escape(item_id)
            + r"\s*:?\s*SCORE:\s*(-?[0-9]+(?:\.[0-9]+)?)"
            + r"(?:\s*RATIONALE:\s*([^\n]*))?",
            re.IGNORECASE,
        )
        m = rx.search(text or "")
        if not m:
            continue
        try:
            value = float(m.group(1))
        except ValueError:
            continue
        if lo <= value <= hi:
            out[item_id] = (value, (m.group(2) or "").strip())
    return out


def rubric_score(
    items: list[tuple[str, str]],
    rubric: Rubric,
    gateway: gw.Gateway,
) -> list[RubricScore]:
    """|items| x |metrics| scores.

    The uniqueness metric is judged over the whole list in one prompt since
    it is a property of the list; every other metric is judged per item.
    Unparseable replies degrade to the bottom of the scale with a flagged
    rationale rather than failing the evaluation.
    """
    if not items:
        raise PreconditionError("rubric_score needs at least one item")
    lo, hi = float(rubric.scale[0]), float(rubric.scale[1])
    params = gw.SamplingParams(temperature=0.7)
    by_key: dict[tuple[str, str], RubricScore] = {}

    for metric, definition in rubric.metrics:
        if metric == "uniqueness":
            items_block = "\n\n".join(f"{item_id}: {text}" for item_id, text in items)
            completion = gateway.complete(
                "judge",
                [
                    gw.system(prompts.JUDGE_SYSTEM),
                    gw.user(
                        prompts.RUBRIC_LIST_USER.format(
                            metric=metric,
                            definition=definition,
                            lo=rubric.scale[0],
                            hi=rubric.scale[1],
                            items_block=items_block,
                        )
                    ),
                ],
                params,
            )
            parsed = _parse_list_scores(completion.text, [i for i, _ in items], lo, hi)
            for item_id, _ in items:
                if item_id in parsed:
                    value, rationale = parsed[item_id]
                    by_key[(item_id, metric)] = RubricScore(item_id, metric, value, rationale)
                else:
                    by_key[(item_id, metric)] = RubricScore(
                        item_id, metric, lo, f"{PARSE_FLAG} missing line for {item_id}"
                    )
        else:
            for item_id, text in items:
                user_text = prompts.RUBRIC_ITEM_USER.format(
                    metric=metric,
                    definition=definition,
                    lo=rubric.scale[0],
                    hi=rubric.scale[1],
                    item_id=item_id,
                    text=text,
                )
                value, rationale, _ = ask_scored(gateway, user_text, lo, hi)
                by_key[(item_id, metric)] = RubricScore(item_id, metric, value, rationale)

    return [
        by_key[(item_id, metric)]
        for item_id, _ in items
        for metric in rubric.metric_names()
    ]


def _summary(values: list[float]) -> MetricSummary:
    arr = np.asarray(values, dtype=np.float64)
    q = np.percentile(arr, [0, 25, 50, 75, 100], method="linear")
    return MetricSummary(
        min=float(q[0]),
        q1=float(q[1]),
        median=float(q[2]),
        q3=float(q[3]),
        max=float(q[4]),
        mean=float(arr.mean()),
    )


def _group(scores: list[RubricScore]) -> dict[str, list[float]]:
    grouped: dict[str, list[float]] = {}
    for s in scores:
        grouped.setdefault(s.metric, []).append(s.value)
    return grouped


def compare_sets(
    scores_a: list[RubricScore], scores_b: list[RubricScore]
) -> ComparisonReport:
    """Five-number summary + mean per metric for two score sets.

    Quartiles use linear interpolation. A metric's winner is decided by
    median, then by q3, else it is a tie.
    """
    if not scores_a or not scores_b:
        raise PreconditionError("both score sets must be non-empty")
    grouped_a, grouped_b = _group(scores_a), _group(scores_b)
    if set(grouped_a) != set(grouped_b):
        raise MetricMismatch(
            f"metric sets differ: {sorted(grouped_a)} vs {sorted(grouped_b)}"
        )
    report = ComparisonReport()
    for metric in sorted(grouped_a):
        a, b = _summary(grouped_a[metric]), _summary(grouped_b[metric])
        if a.median != b.median:
            winner = "a" if a.median > b.median else "b"
        elif a.q3 != b.q3:
            winner = "a" if a.q3 > b.q3 else "b"
        else:
            winner = "tie"
        report.metrics[metric] = (a, b, winner)
    return report


def _box_line(s: MetricSummary, lo: float, hi: float, width: int = 41) -> str:
    span = hi - lo
    if span <= 0:
        return "|" + "=" * (width - 2) + "|"

    def pos(v: float) -> int:
        return int(round((v - lo) / span * (width - 1)))

    cells = [" "] * width
    for i in range(pos(s.min), pos(s.max) + 1):
        cells[i] = "-"
    for i in range(pos(s.q1), pos(s.q3) + 1):
        cells[i] = "="
    cells[pos(s.min)] = "|"
    cells[pos(s.max)] = "|"
    cells[pos(s.q1)] = "["
    cells[pos(s.q3)] = "]"
    cells[pos(s.median)] = "#"
    return "".join(cells)


def summarize_scores(scores: list[RubricScore]) -> dict[str, MetricSummary]:
    """Five-number summary + mean per metric for one score set."""
    return {metric: _summary(values) for metric, values in sorted(_group(scores).items())}


def render_score_summary_markdown(scores: list[RubricScore]) -> str:
    """Per-metric distribution with a text-rendered box line."""
    lines = []
    for metric, s in summarize_scores(scores).items():
        lines.append(f"### {metric}")
        lines.append("")
        lines.append("```")
        lines.append(_box_line(s, s.min, s.max))
        lines.append("```")
        lines.append("")
        lines.append(
            f"min {s.min:g} | q1 {s.q1:g} | median {s.median:g} "
            f"| q3 {s.q3:g} | max {s.max:g} | mean {s.mean:.3f}"
        )
        lines.append("")
    return "\n".join(lines)


def render_comparison_markdown(
    report: ComparisonReport, label_a: str = "A", label_b: str = "B"
) -> str:
    lines = ["# Score comparison", ""]
    for metric, (a, b, winner) in report.metrics.items():
        lo = min(a.min, b.min)
        hi = max(a.max, b.max)
        lines.append(f"## {metric}")
        lines.append("")
        lines.append("```")
        lines.append(f"{label_a:>4} {_box_line(a, lo, hi)}")
        lines.append(f"{label_b:>4} {_box_line(b, lo, hi)}")
        lines.append("```")
        lines.append("")
        lines.append("| set | min | q1 | median | q3 | max | mean |")
        lines.append("| --- | --- | --- | --- | --- | --- | --- |")
        for label, s in ((label_a, a), (label_b, b)):
            lines.append(
                f"| {label} | {s.min:g} | {s.q1:g} | {s.median:g} "
                f"| {s.q3:g} | {s.max:g} | {s.mean:.3f} |"
            )
        lines.append("")
        lines.append(f"Winner: **{winner}**")
        lines.append("")
    return "\n".join(lines)
