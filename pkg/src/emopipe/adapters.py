"""Adapters wrapping a Hugging Face tokenizer and sequence classifier.

Both are optional: ``torch`` and ``transformers`` are imported lazily and
:func:`probe` reports whether the stack is usable before a run starts.
"""
from __future__ import annotations

import hashlib
import importlib
import logging

import numpy as np

from emopipe.corpus import EMOTION_NAMES, NUM_EMOTIONS
from emopipe.errors import CheckpointError, ConfigError
from emopipe.trainer.backends import Snapshot
from emopipe.trainer.optim import OptimizerSettings

logger = logging.getLogger(__name__)

DEFAULT_MODEL = "castorini/afriberta_small"


def probe() -> tuple[bool, str]:
    """Check that ``torch`` and ``transformers`` import; return (ok, detail)."""
    found = []
    for mod in ("torch", "transformers"):
        try:
            found.append(f"{mod}={importlib.import_module(mod).__version__}")
        except ImportError as exc:
            return False, f"{mod} is not importable ({exc}); install the 'pretrained' extra"
    return True, " ".join(found)


class TransformersTokenizer:
    """:class:`~emopipe.encode.TokenizerBackend` over a pretrained tokenizer."""

    def __init__(self, name_or_tokenizer=DEFAULT_MODEL):
        if isinstance(name_or_tokenizer, str):
            from transformers import AutoTokenizer

            self.name = name_or_tokenizer
            self.tokenizer = AutoTokenizer.from_pretrained(name_or_tokenizer)
        else:
            self.tokenizer = name_or_tokenizer
            self.name = getattr(name_or_tokenizer, "name_or_path", type(name_or_tokenizer).__name__)
        if self.tokenizer.pad_token_id is None:
            raise ConfigError(f"tokenizer {self.name!r} defines no pad token")
        self.pad_id = int(self.tokenizer.pad_token_id)
        self.vocab_size = len(self.tokenizer)

    def tokenize(self, text: str) -> list[int]:
        return list(self.tokenizer(text, add_special_tokens=True, truncation=False)["input_ids"])

    def fingerprint(self) -> str:
        return f"hf-tokenizer/1:{self.name}:vocab={self.vocab_size}"


class TransformersClassifier:
    """:class:`~emopipe.trainer.ClassifierBackend` around a sequence-classification model.

    The optimizer is ``torch.optim.AdamW`` with ``clip_grad_norm_``; biases
    and LayerNorm weights are excluded from weight decay. Mixed precision
    uses ``torch.autocast`` (fp16 on CUDA, bf16 on CPU).
    """

    kind = "pretrained"

    def __init__(self, name_or_model=DEFAULT_MODEL, device: str | None = None, seed: int = 42):
        import torch

        torch.manual_seed(seed)
        if isinstance(name_or_model, str):
            from transformers import AutoModelForSequenceClassification

            self.name = name_or_model
            self.model = AutoModelForSequenceClassification.from_pretrained(
                name_or_model,
                num_labels=NUM_EMOTIONS,
                id2label=dict(enumerate(EMOTION_NAMES)),
                label2id={n: i for i, n in enumerate(EMOTION_NAMES)},
            )
        else:
            self.model = name_or_model
            self.name = getattr(getattr(name_or_model, "config", None), "_name_or_path", "") or type(
                name_or_model
            ).__name__
        if self.model.config.num_labels != NUM_EMOTIONS:
            raise ConfigError(f"model head has {self.model.config.num_labels} labels, need {NUM_EMOTIONS}")
        self.num_labels = NUM_EMOTIONS
        self.device = torch.device(device or ("cuda" if torch.cuda.is_available() else "cpu"))
        self.model.to(self.device)
        self.seed = seed
        self.mixed_precision = False
        self._settings = OptimizerSettings()
        self._optimizer = None

    def _autocast(self):
        import torch

        if not self.mixed_precision:
            return torch.autocast(self.device.type, enabled=False)
        dtype = torch.float16 if self.device.type == "cuda" else torch.bfloat16
        return torch.autocast(self.device.type, dtype=dtype)

    def _tensors(self, token_ids, attention_mask):
        import torch

        ids = torch.as_tensor(np.asarray(token_ids, dtype=np.int64), device=self.device)
        mask = torch.as_tensor(np.asarray(attention_mask, dtype=np.int64), device=self.device)
        return ids, mask

    def set_mixed_precision(self, enabled: bool) -> None:
        self.mixed_precision = bool(enabled)

    def forward(self, token_ids: np.ndarray, attention_mask: np.ndarray) -> np.ndarray:
        import torch

        self.model.eval()
        ids, mask = self._tensors(token_ids, attention_mask)
        with torch.no_grad(), self._autocast():
            logits = self.model(input_ids=ids, attention_mask=mask).logits
        return logits.float().cpu().numpy().astype(np.float64)

    def compute_gradients(self, token_ids, attention_mask, labels) -> tuple[float, None]:
        import torch

        self.model.train()
        ids, mask = self._tensors(token_ids, attention_mask)
        y = torch.as_tensor(np.asarray(labels, dtype=np.int64), device=self.device)
        self._ensure_optimizer()
        self._optimizer.zero_grad(set_to_none=True)
        with self._autocast():
            logits = self.model(input_ids=ids, attention_mask=mask).logits
        loss = torch.nn.functional.cross_entropy(logits.float(), y)
        loss.backward()
        # gradients stay on the parameters' .grad
        return float(loss.detach().cpu()), None

    def _ensure_optimizer(self) -> None:
        import torch

        if self._optimizer is not None:
            return
        decay, no_decay = [], []
        for name, p in self.model.named_parameters():
            if not p.requires_grad:
                continue
            (no_decay if name.endswith("bias") or "LayerNorm" in name or "layer_norm" in name else decay).append(p)
        s = self._settings
        self._optimizer = torch.optim.AdamW(
            [
                {"params": decay, "weight_decay": s.weight_decay},
                {"params": no_decay, "weight_decay": 0.0},
            ],
            lr=0.0,
            betas=(s.beta1, s.beta2),
            eps=s.eps,
        )

    def configure_optimizer(self, settings: OptimizerSettings) -> None:
        self._settings = settings
        self._optimizer = None

    def apply_update(self, gradients, lr: float) -> None:
        import torch

        self._ensure_optimizer()
        torch.nn.utils.clip_grad_norm_(self.model.parameters(), self._settings.max_grad_norm)
        for group in self._optimizer.param_groups:
            group["lr"] = lr
        self._optimizer.step()

    def snapshot(self) -> Snapshot:
        return {k: v.detach().cpu().numpy().copy() for k, v in self.model.state_dict().items()}

    def restore(self, snapshot: Snapshot) -> None:
        import torch

        state = self.model.state_dict()
        missing = sorted(set(state) - set(snapshot))
        if missing:
            raise CheckpointError(f"snapshot lacks parameters: {missing[:5]}")
        self.model.load_state_dict({k: torch.from_numpy(np.array(snapshot[k])) for k in state})

    def fingerprint(self) -> str:
        shapes = ";".join(f"{k}:{tuple(v.shape)}" for k, v in self.model.state_dict().items())
        digest = hashlib.sha256(shapes.encode()).hexdigest()[:12]
        return f"hf-classifier/1:{type(self.model).__name__}:{digest}"

    def describe(self) -> dict[str, str]:
        return {"kind": self.kind, "model": self.name, "seed": str(self.seed)}
