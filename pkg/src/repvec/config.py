"""Engine configuration: one YAML file, strict keys, flag overrides at the CLI.

providers.mode selects "offline" (hash embedder, optional rule-table stub
chat) or "http" (remote embed + chat endpoints). Offline is the default and
what the test suite runs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .errors import ConfigError
from .index import Metric
from .ingest import ChunkingConfig
from .project import TsneConfig
from .providers import (
    DEFAULT_DIMENSION,
    DeterministicEmbeddingProvider,
    HttpChatProvider,
    HttpEmbeddingProvider,
    ProviderConfig,
    RuleChatProvider,
)
from .rag import DEFAULT_CONTEXT_TOKENS, DEFAULT_TOP_K
from .summarize import DEFAULT_CONTEXT_BUDGET

DEFAULT_BUDGET_TOKENS = 10000


@dataclass
class EngineConfig:
    seed: int = 0
    metric: Metric = Metric.COSINE
    budget_tokens: int = DEFAULT_BUDGET_TOKENS
    chunking: ChunkingConfig = field(default_factory=ChunkingConfig)
    provider_mode: str = "offline"
    dimension: int = DEFAULT_DIMENSION
    chat_rules: Path | None = None
    embed_http: ProviderConfig | None = None
    chat_http: ProviderConfig | None = None
    tsne: TsneConfig = field(default_factory=TsneConfig)
    top_k: int = DEFAULT_TOP_K
    context_budget: int = DEFAULT_CONTEXT_TOKENS
    reduce_budget: int = DEFAULT_CONTEXT_BUDGET

    def make_embed_provider(self):
        if self.provider_mode == "offline":
            return DeterministicEmbeddingProvider(self.dimension)
        return HttpEmbeddingProvider(self.embed_http)

    def make_chat_provider(self):
        if self.provider_mode == "offline":
            if self.chat_rules is not None:
                return RuleChatProvider.from_json(self.chat_rules)
            return None
        return HttpChatProvider(self.chat_http)


def _require_keys(section: dict, allowed: set[str], where: str) -> None:
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")


def _coerce(value, kind, where: str):
    try:
        if kind is float:
            return float(value)
        if kind is int:
            if isinstance(value, bool) or int(value) != value:
                raise ValueError(value)
            return int(value)
        return kind(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: bad value {value!r}") from exc


def _provider_config(section: dict, dimension: int, where: str) -> ProviderConfig:
    _require_keys(
        section,
        {"base_url", "model_name", "api_key_env", "timeout", "max_retries"},
        where,
    )
    defaults = ProviderConfig()
    try:
        return ProviderConfig(
            base_url=str(section.get("base_url", "")),
            model_name=str(section.get("model_name", "")),
            api_key_env=str(section.get("api_key_env", defaults.api_key_env)),
            timeout=_coerce(section.get("timeout", defaults.timeout), float, where),
            max_retries=_coerce(section.get("max_retries", defaults.max_retries), int, where),
            dimension=dimension,
        )
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def config_from_dict(data: dict, base_dir: Path | None = None) -> EngineConfig:
    if not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")
    _require_keys(
        data,
        {"seed", "metric", "budget_tokens", "chunking", "providers", "tsne", "qa"},
        "config",
    )
    cfg = EngineConfig()
    base_dir = base_dir or Path.cwd()

    if "seed" in data:
        cfg.seed = _coerce(data["seed"], int, "seed")
    if "metric" in data:
        try:
            cfg.metric = Metric(data["metric"])
        except ValueError as exc:
            raise ConfigError(f"metric: {data['metric']!r} not in (cosine, euclidean)") from exc
    if "budget_tokens" in data:
        cfg.budget_tokens = _coerce(data["budget_tokens"], int, "budget_tokens")

    chunking = data.get("chunking", {})
    _require_keys(chunking, {"chunk_size", "overlap", "separators"}, "chunking")
    try:
        cfg.chunking = ChunkingConfig(
            chunk_size=_coerce(chunking.get("chunk_size", cfg.chunking.chunk_size), int, "chunking"),
            overlap=_coerce(chunking.get("overlap", cfg.chunking.overlap), int, "chunking"),
            separators=tuple(chunking.get("separators", cfg.chunking.separators)),
        )
    except ValueError as exc:
        raise ConfigError(f"chunking: {exc}") from exc

    providers = data.get("providers", {})
    _require_keys(providers, {"mode", "dimension", "chat_rules", "embed", "chat"}, "providers")
    cfg.provider_mode = providers.get("mode", "offline")
    if cfg.provider_mode not in ("offline", "http"):
        raise ConfigError(f"providers.mode: {cfg.provider_mode!r} not in (offline, http)")
    if "dimension" in providers:
        cfg.dimension = _coerce(providers["dimension"], int, "providers.dimension")
        if cfg.dimension <= 0:
            raise ConfigError("providers.dimension must be positive")
    if "chat_rules" in providers and providers["chat_rules"] is not None:
        rules = Path(providers["chat_rules"])
        cfg.chat_rules = rules if rules.is_absolute() else base_dir / rules
    if cfg.provider_mode == "http":
        if "embed" not in providers or "chat" not in providers:
            raise ConfigError("providers.mode=http requires embed and chat sections")
        cfg.embed_http = _provider_config(providers["embed"], cfg.dimension, "providers.embed")
        cfg.chat_http = _provider_config(providers["chat"], cfg.dimension, "providers.chat")

    tsne = data.get("tsne", {})
    _require_keys(
        tsne,
        {"perplexity", "learning_rate", "iterations",
         "early_exaggeration_factor", "early_exaggeration_iters"},
        "tsne",
    )
    try:
        cfg.tsne = TsneConfig(
            perplexity=None if tsne.get("perplexity") is None else _coerce(tsne["perplexity"], float, "tsne"),
            learning_rate=_coerce(tsne.get("learning_rate", 200.0), float, "tsne"),
            iterations=_coerce(tsne.get("iterations", 1000), int, "tsne"),
            early_exaggeration_factor=_coerce(tsne.get("early_exaggeration_factor", 12.0), float, "tsne"),
            early_exaggeration_iters=_coerce(tsne.get("early_exaggeration_iters", 250), int, "tsne"),
            seed=cfg.seed,
        )
    except ValueError as exc:
        raise ConfigError(f"tsne: {exc}") from exc

    qa = data.get("qa", {})
    _require_keys(qa, {"top_k", "context_budget", "reduce_budget"}, "qa")
    cfg.top_k = _coerce(qa.get("top_k", cfg.top_k), int, "qa.top_k")
    cfg.context_budget = _coerce(qa.get("context_budget", cfg.context_budget), int, "qa.context_budget")
    cfg.reduce_budget = _coerce(qa.get("reduce_budget", cfg.reduce_budget), int, "qa.reduce_budget")
    return cfg


def load_config(path: str | Path | None) -> EngineConfig:
    """Load a YAML config file; None yields the offline defaults."""
    if path is None:
        return EngineConfig()
    p = Path(path)
    try:
        raw = yaml.safe_load(p.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {p}")
    except yaml.YAMLError as exc:
        raise ConfigError(f"{p}: invalid YAML: {exc}") from exc
    return config_from_dict(raw or {}, base_dir=p.parent)
