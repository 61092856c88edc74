"""Engine configuration: TOML file, ENGINE_-prefixed env overrides.

Unknown keys are rejected at load so a typo cannot silently fall back to
a default. Relative paths resolve against the config file's directory.
"""

from __future__ import annotations

import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import prompts
from .errors import PreconditionError, ValidationError
from .gateway import BackendConfig, Gateway, SamplingParams, ScriptedBehavior, make_backend
from .rag import RagConfig
from .sampling import MiningConfig

ENV_PREFIX = "ENGINE_"
# ENGINE_API_KEY is the live-backend bearer token, not a config override.
ENV_EXCLUDED = {"ENGINE_API_KEY"}

_BACKEND_KEYS = {
    "kind",
    "model_id",
    "endpoint",
    "request_timeout",
    "max_retries",
    "embed_dim",
    "script",
}
_SCRIPT_KEYS = {"responses", "failures"}
_RAG_KEYS = {"node_length", "overlap", "top_k"}
_MINING_KEYS = {
    "dedup_threshold",
    "max_batches",
    "batch_prompt_count",
    "temperature",
    "top_p",
    "max_tokens",
    "seed",
}
_TOP_KEYS = {
    "sessions_dir",
    "corpus_dir",
    "fixtures_dir",
    "parallel_runs",
    "divergent_parallelism",
    "dialog_turn_count",
    "qa_count",
    "scholar_offline",
    "generator",
    "assistant",
    "judge",
    "embedder",
    "rag",
    "mining",
}


@dataclass
class MiningDefaults:
    dedup_threshold: float = 0.90
    max_batches: int = 50
    batch_prompt_count: int = 10
    temperature: float = 1.2  # divergent phase runs hot by design
    top_p: float = 1.0
    max_tokens: int = 1024
    seed: int | None = None


@dataclass
class EngineConfig:
    sessions_dir: Path = Path("runs")
    corpus_dir: Path | None = None
    fixtures_dir: Path = Path("fixtures/scholar")
    parallel_runs: int = 2
    divergent_parallelism: int = 1
    dialog_turn_count: int = 3
    qa_count: int = 5
    scholar_offline: bool = False
    generator: BackendConfig = field(
        default_factory=lambda: BackendConfig(kind="scripted", model_id="generator")
    )
    assistant: BackendConfig = field(
        default_factory=lambda: BackendConfig(kind="scripted", model_id="assistant")
    )
    judge: BackendConfig | None = None
    embedder: BackendConfig | None = None
    generator_script: ScriptedBehavior | None = None
    assistant_script: ScriptedBehavior | None = None
    judge_script: ScriptedBehavior | None = None
    embedder_script: ScriptedBehavior | None = None
    rag: RagConfig = field(default_factory=RagConfig)
    mining: MiningDefaults = field(default_factory=MiningDefaults)

    def build_gateway(self) -> Gateway:
        generator = make_backend(self.generator, self.generator_script)
        assistant_b = make_backend(self.assistant, self.assistant_script)
        judge = make_backend(self.judge, self.judge_script) if self.judge else None
        embedder = make_backend(self.embedder, self.embedder_script) if self.embedder else None
        return Gateway(generator, assistant_b, judge=judge, embedder=embedder)

    def divergent_params(self) -> SamplingParams:
        return SamplingParams(
            temperature=self.mining.temperature,
            top_p=self.mining.top_p,
            max_tokens=self.mining.max_tokens,
            seed=self.mining.seed,
        )

    def mining_config(self, target_n: int, **overrides) -> MiningConfig:
        return MiningConfig(
            target_n=target_n,
            dedup_threshold=overrides.get("dedup_threshold", self.mining.dedup_threshold),
            max_batches=overrides.get("max_batches", self.mining.max_batches),
            batch_prompt_count=overrides.get(
                "batch_prompt_count", self.mining.batch_prompt_count
            ),
            divergent_params=self.divergent_params(),
        )

    def snapshot(self) -> dict:
        """Config view persisted into every run record for provenance."""
        return {
            "generator": self.generator.to_dict(),
            "assistant": self.assistant.to_dict(),
            "judge": self.judge.to_dict() if self.judge else None,
            "embedder": self.embedder.to_dict() if self.embedder else None,
            "rag": self.rag.to_dict(),
            "mining": {
                "dedup_threshold": self.mining.dedup_threshold,
                "max_batches": self.mining.max_batches,
                "batch_prompt_count": self.mining.batch_prompt_count,
            },
            "sampling_defaults": {
                "divergent": self.divergent_params().to_dict(),
                "default": SamplingParams(temperature=0.7).to_dict(),
            },
            "dialog_turn_count": self.dialog_turn_count,
            "qa_count": self.qa_count,
            "system_prompts": {
                "divergent": prompts.DIVERGENT_SYSTEM,
                "generator_role": prompts.GENERATOR_ROLE_SYSTEM,
                "assistant_role": prompts.ASSISTANT_ROLE_SYSTEM,
                "judge": prompts.JUDGE_SYSTEM,
            },
        }


def _parse_env_value(raw: str):
    lowered = raw.strip().lower()
    if lowered in ("true", "false"):
        return lowered == "true"
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        pass
    return raw


def apply_env_overrides(data: dict, environ=None) -> dict:
    """Fold ENGINE_SECTION__KEY=value (scalars only) into the raw dict."""
    environ = os.environ if environ is None else environ
    for name, raw in environ.items():
        if not name.startswith(ENV_PREFIX) or name in ENV_EXCLUDED:
            continue
        path = name[len(ENV_PREFIX):].lower().split("__")
        node = data
        for part in path[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ValidationError([(name, "override path collides with a scalar")])
        node[path[-1]] = _parse_env_value(raw)
    return data


def _check_keys(section: str, data: dict, allowed: set, errors: list) -> None:
    for key in data:
        if key not in allowed:
            errors.append((f"{section}.{key}" if section else key, "unknown key"))


def _build_backend(name: str, data: dict, errors: list):
    _check_keys(name, data, _BACKEND_KEYS, errors)
    script = None
    script_data = data.get("script")
    if script_data is not None:
        _check_keys(f"{name}.script", script_data, _SCRIPT_KEYS, errors)
        responses = []
        for entry in script_data.get("responses", []):
            if not isinstance(entry, (list, tuple)) or len(entry) != 2:
                errors.append((f"{name}.script.responses", "entries must be [matcher, reply]"))
                continue
            matcher, reply = entry
            responses.append((matcher if matcher else None, reply))
        script = ScriptedBehavior(
            responses=responses, failures=set(script_data.get("failures", []))
        )
    kwargs = {k: v for k, v in data.items() if k != "script"}
    kwargs.setdefault("kind", "scripted")
    try:
        return BackendConfig(**kwargs), script
    except (PreconditionError, TypeError) as e:
        errors.append((name, str(e)))
        return None, None


def config_from_dict(data: dict, base_dir: Path | None = None) -> EngineConfig:
    base_dir = Path(base_dir) if base_dir else Path.cwd()
    errors: list[tuple[str, str]] = []
    _check_keys("", data, _TOP_KEYS, errors)

    cfg = EngineConfig()

    def resolve(p) -> Path:
        p = Path(p)
        return p if p.is_absolute() else base_dir / p

    if "sessions_dir" in data:
        cfg.sessions_dir = resolve(data["sessions_dir"])
    else:
        cfg.sessions_dir = base_dir / "runs"
    if data.get("corpus_dir"):
        cfg.corpus_dir = resolve(data["corpus_dir"])
    if "fixtures_dir" in data:
        cfg.fixtures_dir = resolve(data["fixtures_dir"])
    else:
        cfg.fixtures_dir = base_dir / "fixtures" / "scholar"

    for key, attr, kind in (
        ("parallel_runs", "parallel_runs", int),
        ("divergent_parallelism", "divergent_parallelism", int),
        ("dialog_turn_count", "dialog_turn_count", int),
        ("qa_count", "qa_count", int),
        ("scholar_offline", "scholar_offline", bool),
    ):
        if key in data:
            value = data[key]
            if not isinstance(value, kind) or isinstance(value, bool) != (kind is bool):
                errors.append((key, f"expected {kind.__name__}"))
            else:
                setattr(cfg, attr, value)

    if cfg.parallel_runs < 1:
        errors.append(("parallel_runs", "must be >= 1"))
    if cfg.divergent_parallelism < 1:
        errors.append(("divergent_parallelism", "must be >= 1"))

    for name in ("generator", "assistant", "judge", "embedder"):
        if name in data:
            backend, script = _build_backend(name, data[name], errors)
            if backend is not None:
                setattr(cfg, name, backend)
                setattr(cfg, f"{name}_script", script)

    if "rag" in data:
        _check_keys("rag", data["rag"], _RAG_KEYS, errors)
        try:
            cfg.rag = RagConfig(**{k: v for k, v in data["rag"].items() if k in _RAG_KEYS})
        except (PreconditionError, TypeError) as e:
            errors.append(("rag", str(e)))

    if "mining" in data:
        _check_keys("mining", data["mining"], _MINING_KEYS, errors)
        try:
            cfg.mining = MiningDefaults(
                **{k: v for k, v in data["mining"].items() if k in _MINING_KEYS}
            )
        except TypeError as e:
            errors.append(("mining", str(e)))

    if errors:
        raise ValidationError(errors)
    return cfg


def load_config(path: str | Path, environ=None) -> EngineConfig:
    path = Path(path)
    try:
        with open(path, "rb") as f:
            data = tomllib.load(f)
    except FileNotFoundError:
        raise ValidationError([(str(path), "config file not found")])
    except tomllib.TOMLDecodeError as e:
        raise ValidationError([(str(path), f"invalid TOML: {e}")])
    data = apply_env_overrides(data, environ=environ)
    return config_from_dict(data, base_dir=path.parent)
