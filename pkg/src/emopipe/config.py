"""Run configuration: flat ``key = value`` files, flag overrides, hashing."""
from __future__ import annotations

import dataclasses
import hashlib
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

from emopipe.encode import DEFAULT_BUDGET
from emopipe.errors import ConfigError
from emopipe.labelspace import NeutralPolicy
from emopipe.metrics import Averaging
from emopipe.trainer.loop import TrainConfig

CACHE_ENV = "EMOPIPE_CACHE_DIR"
BACKENDS = ("reference", "pretrained")

# Fields that do not change the trained model; they are hashed into the full
# config hash but not into the run key that names the run directory.
_NON_MODEL_FIELDS = frozenset({"test_path", "submission_text", "output_dir", "checkpoint_dir"})


@dataclass(frozen=True)
class RunConfig:
    learning_rate: float = 2e-5
    batch_size: int = 8
    epochs: int = 5
    warmup_steps: int = 500
    sequence_budget: int = DEFAULT_BUDGET
    mixed_precision: bool = True
    seed: int = 42
    weight_decay: float = 0.01
    max_grad_norm: float = 1.0

    train_path: str = "data/train.csv"
    val_path: str = "data/validation.csv"
    test_path: str = "data/test.csv"
    checkpoint_dir: str = ""
    output_dir: str = "runs"

    backend: str = "reference"
    model_name: str = "castorini/afriberta_small"
    vocab_size: int = 4096
    embed_dim: int = 32
    neutral_policy: str = NeutralPolicy.DROP.value
    averaging: str = Averaging.MACRO_ALL.value
    submission_text: bool = True

    def __post_init__(self) -> None:
        if self.backend not in BACKENDS:
            raise ConfigError(f"backend must be one of {BACKENDS}, got {self.backend!r}")
        try:
            NeutralPolicy(self.neutral_policy)
            Averaging(self.averaging)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        self.train_config()

    def train_config(self) -> TrainConfig:
        names = {f.name for f in dataclasses.fields(TrainConfig)} - {"num_labels"}
        return TrainConfig(**{n: getattr(self, n) for n in names})

    def as_record(self) -> dict[str, str]:
        return {f.name: _render(getattr(self, f.name)) for f in dataclasses.fields(self)}

    def serialize(self) -> str:
        return "".join(f"{k} = {v}\n" for k, v in self.as_record().items())

    def config_hash(self) -> str:
        return _digest(self.as_record())

    def run_key(self) -> str:
        rec = {k: v for k, v in self.as_record().items() if k not in _NON_MODEL_FIELDS}
        return _digest(rec)

    @property
    def run_dir(self) -> Path:
        return Path(self.output_dir) / f"run-{self.run_key()}"

    @property
    def checkpoint_path(self) -> Path:
        return Path(self.checkpoint_dir) if self.checkpoint_dir else self.run_dir / "checkpoint"

    @property
    def cache_dir(self) -> Path:
        root = os.environ.get(CACHE_ENV)
        base = Path(root) if root else Path(self.output_dir) / "cache"
        return base / self.run_key()


def _render(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _digest(record: Mapping[str, str]) -> str:
    text = "".join(f"{k}={v}\n" for k, v in sorted(record.items()))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


def _coerce(name: str, raw: str, kind: type) -> Any:
    raw = raw.strip()
    try:
        if kind is bool:
            low = raw.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        return kind(raw)
    except ValueError:
        raise ConfigError(f"config key {name!r}: cannot parse {raw!r} as {kind.__name__}") from None


_FIELD_TYPES = {f.name: type(f.default) for f in dataclasses.fields(RunConfig)}


def parse_config_text(text: str, source: str = "<config>") -> dict[str, Any]:
    """Parse ``key = value`` lines; ``#`` starts a comment line."""
    values: dict[str, Any] = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep:
            raise ConfigError(f"{source}:{line_no}: expected 'key = value', got {line!r}")
        if key not in _FIELD_TYPES:
            raise ConfigError(f"{source}:{line_no}: unknown config key {key!r}")
        values[key] = _coerce(key, value, _FIELD_TYPES[key])
    return values


def load_config(path: str | Path | None = None, overrides: Mapping[str, Any] | None = None) -> RunConfig:
    """Build a config with precedence ``overrides`` > file > defaults."""
    values: dict[str, Any] = {}
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        values.update(parse_config_text(path.read_text(encoding="utf-8"), str(path)))
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key not in _FIELD_TYPES:
            raise ConfigError(f"unknown config key {key!r}")
        if isinstance(value, str) and _FIELD_TYPES[key] is not str:
            value = _coerce(key, value, _FIELD_TYPES[key])
        values[key] = value
    return RunConfig(**values)
