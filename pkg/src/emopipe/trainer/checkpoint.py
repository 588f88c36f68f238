"""Checkpoint directories: parameter blob, key/value manifest, history CSV.

The blob is an ``.npz`` archive written with fixed zip timestamps so two
saves of the same snapshot are byte-identical.
"""
from __future__ import annotations

import hashlib
import io
import warnings
import zipfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from emopipe.errors import CheckpointError
from emopipe.trainer.backends import ClassifierBackend, Snapshot
from emopipe.trainer.loop import TrainingResult, history_to_csv

SNAPSHOT_FILE = "snapshot.npz"
MANIFEST_FILE = "manifest.txt"
HISTORY_FILE = "history.csv"
FORMAT = "emopipe-checkpoint/1"
_ZIP_EPOCH = (1980, 1, 1, 0, 0, 0)


class CheckpointWarning(UserWarning):
    pass


def write_kv(path: Path, record: dict[str, str]) -> None:
    path.write_text("".join(f"{k}={v}\n" for k, v in record.items()), encoding="utf-8")


def read_kv(path: Path) -> dict[str, str]:
    out = {}
    for line in path.read_text(encoding="utf-8").splitlines():
        if line.strip() and not line.startswith("#"):
            key, sep, value = line.partition("=")
            if not sep:
                raise CheckpointError(f"{path}: malformed manifest line {line!r}")
            out[key.strip()] = value.strip()
    return out


def save_snapshot(snapshot: Snapshot, path: Path) -> str:
    """Write ``snapshot`` deterministically; return the sha256 of the file."""
    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w", compression=zipfile.ZIP_STORED) as zf:
        for name in sorted(snapshot):
            arr = io.BytesIO()
            np.lib.format.write_array(arr, np.ascontiguousarray(snapshot[name]), allow_pickle=False)
            zf.writestr(zipfile.ZipInfo(f"{name}.npy", date_time=_ZIP_EPOCH), arr.getvalue())
    data = buf.getvalue()
    path.write_bytes(data)
    return hashlib.sha256(data).hexdigest()


def load_snapshot(path: Path) -> Snapshot:
    try:
        with np.load(path, allow_pickle=False) as npz:
            return {name: npz[name] for name in npz.files}
    except (OSError, ValueError, zipfile.BadZipFile, EOFError) as exc:
        raise CheckpointError(f"{path}: unreadable snapshot ({exc})") from exc


def save_checkpoint(
    result: TrainingResult,
    path: str | Path,
    backend: ClassifierBackend,
    extra: dict[str, str] | None = None,
) -> dict[str, str]:
    """Persist the best snapshot of ``result`` and return the manifest written."""
    if result.best_checkpoint is None:
        raise CheckpointError("training result carries no best checkpoint")
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    digest = save_snapshot(result.best_checkpoint, path / SNAPSHOT_FILE)
    (path / HISTORY_FILE).write_text(history_to_csv(result.history), encoding="utf-8")

    manifest = {"format": FORMAT}
    if result.config is not None:
        manifest["config_hash"] = result.config.config_hash()
        manifest.update({f"train.{k}": v for k, v in result.config.as_record().items()})
    manifest["best_epoch"] = str(result.best_epoch)
    manifest["best_val_accuracy"] = repr(result.best.val_accuracy)
    manifest["steps"] = str(result.steps)
    manifest["backend_fingerprint"] = backend.fingerprint()
    manifest.update({f"backend.{k}": v for k, v in backend.describe().items()})
    manifest["snapshot_sha256"] = digest
    manifest["snapshot_bytes"] = str((path / SNAPSHOT_FILE).stat().st_size)
    manifest.update(extra or {})
    write_kv(path / MANIFEST_FILE, manifest)
    return manifest


@dataclass(frozen=True)
class Checkpoint:
    path: Path
    manifest: dict[str, str]
    snapshot: Snapshot

    @property
    def sequence_budget(self) -> int | None:
        value = self.manifest.get("train.sequence_budget")
        return int(value) if value is not None else None

    def restore_into(self, backend: ClassifierBackend) -> None:
        expected = self.manifest.get("backend_fingerprint")
        if expected is not None and expected != backend.fingerprint():
            raise CheckpointError(
                f"{self.path}: checkpoint was saved from backend {expected!r}, "
                f"cannot load into {backend.fingerprint()!r}"
            )
        backend.restore(self.snapshot)


def load_checkpoint(path: str | Path, sequence_budget: int | None = None) -> Checkpoint:
    """Read a checkpoint directory and verify the blob against the manifest.

    Raises:
        CheckpointError: manifest or blob missing, or the blob's size/hash
            differ from what the manifest records.
    """
    path = Path(path)
    manifest_path = path / MANIFEST_FILE
    blob = path / SNAPSHOT_FILE
    if not manifest_path.is_file():
        raise CheckpointError(f"{path}: no {MANIFEST_FILE}")
    manifest = read_kv(manifest_path)
    if manifest.get("format") != FORMAT:
        raise CheckpointError(f"{path}: unsupported checkpoint format {manifest.get('format')!r}")
    if not blob.is_file():
        raise CheckpointError(f"{path}: no {SNAPSHOT_FILE}")

    data = blob.read_bytes()
    actual = {"snapshot_bytes": str(len(data)), "snapshot_sha256": hashlib.sha256(data).hexdigest()}
    diff = [
        f"{k}: manifest={manifest.get(k)} file={v}" for k, v in actual.items() if manifest.get(k) != v
    ]
    if diff:
        raise CheckpointError(f"{path}: snapshot does not match manifest; " + "; ".join(diff))

    ckpt = Checkpoint(path=path, manifest=manifest, snapshot=load_snapshot(blob))
    if sequence_budget is not None and ckpt.sequence_budget not in (None, sequence_budget):
        warnings.warn(
            f"{path}: checkpoint trained with sequence_budget={ckpt.sequence_budget}, "
            f"loading with {sequence_budget}",
            CheckpointWarning,
            stacklevel=2,
        )
    return ckpt
