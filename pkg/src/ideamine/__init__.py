"""ideamine: staged divergent/convergent idea generation, grounded
procedure design, and automated evaluation over pluggable LLM backends."""

__version__ = "0.1.0"

from .config import EngineConfig, load_config
from .gateway import (
    BackendConfig,
    ChatMessage,
    Gateway,
    SamplingParams,
    ScriptedBehavior,
    make_backend,
)
from .runs import Engine

__all__ = [
    "BackendConfig",
    "ChatMessage",
    "Engine",
    "EngineConfig",
    "Gateway",
    "SamplingParams",
    "ScriptedBehavior",
    "load_config",
    "make_backend",
    "__version__",
]
