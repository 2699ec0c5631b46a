"""Run configuration: flat ``key = value`` files plus command-line overrides."""

from __future__ import annotations

import dataclasses
import typing
from dataclasses import dataclass, field
from pathlib import Path


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    corpus: str | None = None
    corpus_format: str = "jsonl"
    embeddings: str | None = None
    ngrams: str | None = None
    out: str = "out"
    seed: int = 0
    phi: float = 0.5  # edge similarity threshold (also called sigma)
    tau: int = 10
    theta_match: float = 0.1
    phi_inst: float = 0.2
    gamma: float = 0.1
    theta_cf: float = 0.1
    delta: float | None = None
    alpha: int = 3
    core_k: int = 2
    jobs: int = 1
    snapshot_years: int = 5
    snapshot_start: int | None = None
    snapshot_boundaries: list | None = None
    stopwords: str | None = None
    skip_malformed: bool = False
    resolution: float = 1.0
    unweighted: bool = False
    reduce_all: bool = False
    pmi_clusters: int = 10
    pmi_top_n: int = 10
    pmi_min_size: int = 2
    pmi_source: str = "reduced"
    ngram_year_min: int | None = None
    ngram_year_max: int | None = None
    extra: dict = field(default_factory=dict, repr=False)

    # keys describing how (not what) to compute; kept out of meta.json so
    # sequential and parallel runs write identical trees
    EXECUTION_KEYS = ("jobs", "out")

    def validate(self):
        if self.corpus_format not in ("jsonl", "csv"):
            raise ConfigError(f"corpus_format must be jsonl or csv, got {self.corpus_format!r}")
        if not 0.0 <= self.phi < 1.0:
            raise ConfigError(f"phi must lie in [0, 1), got {self.phi}")
        if self.tau < 1:
            raise ConfigError("tau must be >= 1")
        if not 0.0 <= self.theta_match <= 1.0:
            raise ConfigError("theta_match must lie in [0, 1]")
        if self.phi_inst <= 0:
            raise ConfigError("phi_inst must be > 0")
        for name in ("gamma", "theta_cf"):
            if not 0.0 <= getattr(self, name) <= 0.9:
                raise ConfigError(f"{name} must lie in [0, 0.9]")
        if self.delta is not None and not 0.0 <= self.delta <= 0.9:
            raise ConfigError("delta must lie in [0, 0.9]")
        if self.alpha < 0:
            raise ConfigError("alpha must be >= 0")
        if self.core_k < 1:
            raise ConfigError("core_k must be >= 1")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        if self.pmi_source not in ("reduced", "raw"):
            raise ConfigError("pmi_source must be 'reduced' or 'raw'")
        if self.pmi_top_n < 2:
            raise ConfigError("pmi_top_n must be >= 2")
        return self

    @property
    def parallel(self):
        return self.jobs > 1

    def analysis_params(self):
        """Every effective parameter except execution-only keys."""
        return {k: v for k, v in self.as_dict().items() if k not in self.EXECUTION_KEYS}

    def as_dict(self):
        return {f.name: getattr(self, f.name) for f in dataclasses.fields(self) if f.name != "extra"}


def _field_types():
    hints = typing.get_type_hints(RunConfig)
    return {f.name: hints[f.name] for f in dataclasses.fields(RunConfig) if f.name != "extra"}


def _base_type(tp):
    args = [a for a in typing.get_args(tp) if a is not type(None)]
    return args[0] if args else tp


def coerce(key, raw):
    """Convert a string (from a file or flag) to the type of ``RunConfig.key``."""
    types = _field_types()
    if key not in types:
        raise ConfigError(f"unknown config key {key!r}")
    if not isinstance(raw, str):
        return raw
    tp = _base_type(types[key])
    text = raw.strip()
    if text.lower() in ("none", "null", "") and type(None) in typing.get_args(types[key]):
        return None
    try:
        if tp is bool:
            if text.lower() in ("1", "true", "yes", "on"):
                return True
            if text.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        if tp is int:
            return int(text)
        if tp is float:
            return float(text)
        if tp is list or typing.get_origin(tp) is list:
            items = [x.strip() for x in text.split(",") if x.strip()]
            return [int(x) if x.lstrip("+-").isdigit() else x for x in items]
    except ValueError:
        raise ConfigError(f"bad value for {key}: {raw!r}") from None
    return text


def normalize_key(key):
    return key.strip().replace("-", "_").lower()


def read_config_file(path):
    """Parse ``key = value`` (or ``key: value``) lines; ``#`` starts a comment."""
    values = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        sep = "=" if "=" in line else ":" if ":" in line else None
        if sep is None:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, val = line.split(sep, 1)
        key = normalize_key(key)
        values[key] = coerce(key, val)
    return values


def make_config(file_values=None, overrides=None):
    """Defaults, then file values, then overrides (flags win)."""
    cfg = RunConfig()
    for source in (file_values or {}, overrides or {}):
        for key, val in source.items():
            key = normalize_key(key)
            setattr(cfg, key, coerce(key, val))
    return cfg.validate()
