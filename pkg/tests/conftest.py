"""Shared fixtures: scripted backends, canned reply builders, and
matcher-routed scripts for full engine runs."""

from __future__ import annotations

import numpy as np
import pytest

from ideamine.config import EngineConfig
from ideamine.gateway import (
    BackendConfig,
    Gateway,
    ScriptedBackend,
    ScriptedBehavior,
)


def sb(responses, failures=(), model_id="scripted", embed_dim=384, max_retries=2):
    """Build a ScriptedBackend; responses entries are str or (matcher, str)."""
    normalized = []
    for entry in responses:
        if isinstance(entry, str):
            normalized.append((None, entry))
        else:
            matcher, reply = entry
            normalized.append((matcher, reply))
    return ScriptedBackend(
        BackendConfig(
            kind="scripted",
            model_id=model_id,
            max_retries=max_retries,
            embed_dim=embed_dim,
        ),
        ScriptedBehavior(responses=normalized, failures=set(failures)),
    )


def make_gateway(gen=(), asst=(), judge=None, embed_dim=384):
    """Gateway over scripted backends; judge gets its own backend when given."""
    generator = sb(gen, model_id="generator", embed_dim=embed_dim)
    assistant = sb(asst, model_id="assistant", embed_dim=embed_dim)
    judge_backend = sb(judge, model_id="judge", embed_dim=embed_dim) if judge is not None else None
    return Gateway(generator, assistant, judge=judge_backend)


def numbered(items) -> str:
    return "\n".join(f"{i}. {t}" for i, t in enumerate(items, 1))


def score_reply(score, rationale="because") -> str:
    return f"SCORE: {score}\nRATIONALE: {rationale}"


def procedure_text(
    title="Humidity-set pollen film",
    materials=("defatted pollen", "acetate buffer"),
    steps=("Disperse the pollen.", "Cast the film.", "Dry at 40 C."),
    notes=("Keep RH above 60% while casting.",),
) -> str:
    lines = [f"Title: {title}", "", "Materials"]
    lines += [f"- {m}" for m in materials]
    lines += ["", "Steps"]
    lines += [f"{i}. {s}" for i, s in enumerate(steps, 1)]
    lines += ["", "Notes"]
    lines += [f"- {n}" for n in notes]
    return "\n".join(lines)


def unit(vec) -> np.ndarray:
    arr = np.asarray(vec, dtype=np.float64)
    return arr / np.linalg.norm(arr)


@pytest.fixture
def tmp_cwd(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


# --- full-engine scripted scenarios ------------------------------------------
#
# Engine tests route every scripted reply by a substring matcher so that
# concurrent runs, or a restarted engine with a fresh script, always consume
# the entries meant for them.


def behavior(entries) -> ScriptedBehavior:
    normalized = []
    for entry in entries:
        if isinstance(entry, str):
            normalized.append((None, entry))
        else:
            normalized.append(tuple(entry))
    return ScriptedBehavior(responses=normalized)


def engine_config(tmp_path, gen=(), asst=(), judge=(), **overrides) -> EngineConfig:
    cfg = EngineConfig()
    cfg.sessions_dir = tmp_path / "runs"
    cfg.fixtures_dir = tmp_path / "fixtures" / "scholar"
    cfg.scholar_offline = True
    cfg.generator = BackendConfig(kind="scripted", model_id="generator")
    cfg.assistant = BackendConfig(kind="scripted", model_id="assistant")
    cfg.judge = BackendConfig(kind="scripted", model_id="judge")
    cfg.generator_script = behavior(gen)
    cfg.assistant_script = behavior(asst)
    cfg.judge_script = behavior(judge)
    for key, value in overrides.items():
        setattr(cfg, key, value)
    return cfg


def mining_scripts(tag, ideas, selected=(), turns=3, batch_size=None):
    """Matcher-routed scripts for one idea_mining run plus refinement.

    `tag` must be a substring unique to this run's prompt. Ideas arrive in
    two batches with a duplicate so the dedup path is exercised.
    """
    batch_size = batch_size or max(3, len(ideas) // 2 + 1)
    batches = []
    for start in range(0, len(ideas), batch_size):
        chunk = ideas[start : start + batch_size]
        filler = [ideas[0]] if start > 0 else []  # a duplicate to reject
        # "Task: <tag>" appears only in divergent generation prompts, so a
        # restarted engine's refinement calls can never consume batch entries.
        batches.append((f"Task: {tag}", numbered(chunk + filler)))

    gen = list(batches)
    judge = []
    for k, idea in enumerate(ideas):
        judge.append((idea, score_reply(((k * 3) % 9) + 1, f"novelty r{k}")))
        judge.append((idea, score_reply(((k * 5) % 9) + 1, f"effect r{k}")))

    asst = []
    for idea in selected:
        for t in range(turns):
            gen.append((idea, f"g::{idea}::{t}"))
            asst.append((idea, f"a::{idea}::{t}"))
        asst.append((idea, f"distilled summary of {idea}"))
    return gen, asst, judge


def procedure_scripts(tag, questions, turns=3, final=None, single_agent=False, no_qa=False):
    """Matcher-routed scripts for one procedure_design run."""
    gen = []
    asst = []
    if not no_qa:
        gen.append((tag, numbered(questions)))
        for q in questions:
            gen.append((q, f"answer for {q}"))
    final = final or procedure_text()
    if single_agent:
        gen.append((tag, final))
        return gen, asst
    for t in range(turns):
        gen.append((tag, f"g::{tag}::{t}"))
        asst.append((tag, f"a::{tag}::{t}"))
    asst.append((tag, final))
    return gen, asst
