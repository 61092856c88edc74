"""Two-agent conversations and distillation of their outcome.

The generator role opens every exchange; the assistant role replies and,
once the turns are done, is also the one that distills the conversation
into a summary or a final procedure.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from . import gateway as gw
from . import prompts
from .errors import DialogAborted, DistillParseFailure, EngineError, PreconditionError

MAX_TURN_COUNT = 8

_HEADER_RES = {
    "materials": re.compile(r"(?im)^\s*(?:#+\s*|\*\*\s*|\d+[.)]\s*)?materials\b"),
    "steps": re.compile(r"(?im)^\s*(?:#+\s*|\*\*\s*|\d+[.)]\s*)?steps\b"),
    "notes": re.compile(r"(?im)^\s*(?:#+\s*|\*\*\s*|\d+[.)]\s*)?notes\b"),
}


@dataclass
class AgentRole:
    name: str  # "generator" | "assistant"
    system_prompt: str
    backend: gw.Backend

    def __post_init__(self):
        if self.name not in ("generator", "assistant"):
            raise PreconditionError(f"unknown agent role {self.name!r}")


@dataclass
class Transcript:
    opener: str
    turns: list[tuple[str, str]] = field(default_factory=list)
    distilled: str | None = None

    def rendered(self) -> str:
        head = [f"user: {self.opener}"]
        return "\n\n".join(head + [f"{role}: {content}" for role, content in self.turns])

    def to_dict(self) -> dict:
        return {
            "opener": self.opener,
            "turns": [[r, c] for r, c in self.turns],
            "distilled": self.distilled,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Transcript":
        return cls(
            opener=data["opener"],
            turns=[(r, c) for r, c in data["turns"]],
            distilled=data.get("distilled"),
        )


def default_roles(gateway: gw.Gateway) -> tuple[AgentRole, AgentRole]:
    return (
        AgentRole("generator", prompts.GENERATOR_ROLE_SYSTEM, gateway.generator),
        AgentRole("assistant", prompts.ASSISTANT_ROLE_SYSTEM, gateway.assistant),
    )


def _agent_view(
    role: AgentRole,
    opener: str,
    turns: list[tuple[str, str]],
    context_char_budget: int | None,
) -> list[gw.ChatMessage]:
    """Build the message list one agent sees before speaking.

    The opener is always the first user message; the agent's own earlier
    turns appear assistant-authored, the peer's user-authored. When a
    character budget is set, the oldest non-opener turns are dropped in
    pairs until the view fits.
    """
    kept = list(turns)
    if context_char_budget is not None:
        def total(ts):
            return len(role.system_prompt) + len(opener) + sum(len(c) for _, c in ts)

        while len(kept) > 2 and total(kept) > context_char_budget:
            kept = kept[2:]

    messages = [gw.system(role.system_prompt), gw.user(opener)]
    for turn_role, content in kept:
        if turn_role == role.name:
            messages.append(gw.assistant(content))
        else:
            messages.append(gw.user(content))
    return messages


def run_dialog(
    roles: tuple[AgentRole, AgentRole],
    opener: str,
    turn_count: int,
    params: gw.SamplingParams | None = None,
    context_char_budget: int | None = None,
) -> Transcript:
    """Run turn_count generator/assistant exchanges; 2 x turn_count turns total."""
    if not opener.strip():
        raise PreconditionError("opener must be non-empty")
    if not (1 <= turn_count <= MAX_TURN_COUNT):
        raise PreconditionError(f"turn_count must be in [1, {MAX_TURN_COUNT}]")
    generator, assistant_role = roles
    if generator.name == assistant_role.name:
        raise PreconditionError("dialog roles must be distinct")
    if generator.name != "generator":
        generator, assistant_role = assistant_role, generator

    params = params or gw.SamplingParams(temperature=0.7)
    transcript = Transcript(opener=opener)
    for _ in range(turn_count):
        for role in (generator, assistant_role):
            view = _agent_view(role, opener, transcript.turns, context_char_budget)
            try:
                completion = gw.complete(view, params, role.backend)
            except EngineError as e:
                raise DialogAborted(
                    f"dialog failed on a {role.name} turn: {e}", partial=transcript
                ) from e
            if not completion.text.strip():
                raise DialogAborted(
                    f"{role.name} produced an empty turn", partial=transcript
                )
            transcript.turns.append((role.name, completion.text))
    return transcript


def has_procedure_headers(text: str) -> bool:
    return all(rx.search(text or "") for rx in _HEADER_RES.values())


def distill(
    transcript: Transcript,
    mode: str,
    assistant_role: AgentRole,
    params: gw.SamplingParams | None = None,
    re_asks: int = 2,
) -> str:
    """Compress a finished dialog into a summary or a final procedure.

    Procedure mode re-asks until the reply carries the Materials/Steps/Notes
    layout; the accepted text is stored on transcript.distilled.
    """
    if mode not in ("summary", "procedure"):
        raise PreconditionError(f"unknown distill mode {mode!r}")
    if not transcript.turns:
        raise PreconditionError("cannot distill an empty transcript")
    if len(transcript.turns) % 2 != 0:
        raise PreconditionError("transcript is incomplete (odd turn count)")

    params = params or gw.SamplingParams(temperature=0.7)
    conversation = transcript.rendered()
    if mode == "summary":
        base = prompts.SUMMARY_USER.format(conversation=conversation)
    else:
        base = prompts.PROCEDURE_DISTILL_USER.format(
            skeleton=prompts.PROCEDURE_SKELETON, conversation=conversation
        )

    last = ""
    for attempt in range(re_asks + 1):
        text = base if attempt == 0 else base + prompts.DISTILL_REASK_SUFFIX
        completion = gw.complete(
            [gw.system(assistant_role.system_prompt), gw.user(text)],
            params,
            assistant_role.backend,
        )
        last = completion.text
        ok = bool(last.strip())
        if mode == "procedure":
            ok = ok and has_procedure_headers(last)
        if ok:
            transcript.distilled = last
            return last
    raise DistillParseFailure(
        f"distillation ({mode}) failed after {re_asks + 1} attempts; "
        f"last reply starts: {last[:120]!r}"
    )


def render_transcript_markdown(transcript: Transcript, title: str = "Transcript") -> str:
    lines = [f"# {title}", "", "**Opener**", "", transcript.opener, ""]
    for role, content in transcript.turns:
        lines.append(f"**{role}**")
        lines.append("")
        lines.append(content)
        lines.append("")
    if transcript.distilled:
        lines.append("## Distilled output")
        lines.append("")
        lines.append(transcript.distilled)
        lines.append("")
    return "\n".join(lines)
