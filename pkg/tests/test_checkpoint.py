from __future__ import annotations

import numpy as np
import pytest

from emopipe.errors import CheckpointError
from emopipe.trainer import CheckpointWarning, ReferenceBackend, load_checkpoint, save_checkpoint, train
from emopipe.trainer.checkpoint import HISTORY_FILE, MANIFEST_FILE, SNAPSHOT_FILE, read_kv
from tests.helpers import DESK_CONFIG, separable_features


@pytest.fixture(scope="module")
def trained():
    tr = separable_features(6, seed=0)
    va = separable_features(3, seed=1, split="validation")
    backend = ReferenceBackend(seed=3)
    result = train(DESK_CONFIG, tr, va, backend)
    return result, backend, va


def test_roundtrip_bit_identical_scores(trained, tmp_path):
    result, backend, probe = trained
    save_checkpoint(result, tmp_path, backend)
    before = backend.forward(probe.token_ids, probe.attention_mask)
    fresh = ReferenceBackend(seed=99)
    load_checkpoint(tmp_path).restore_into(fresh)
    after = fresh.forward(probe.token_ids, probe.attention_mask)
    assert before.tobytes() == after.tobytes()


def test_manifest_contents(trained, tmp_path):
    result, backend, _ = trained
    manifest = save_checkpoint(result, tmp_path, backend, extra={"note": "x"})
    assert read_kv(tmp_path / MANIFEST_FILE) == manifest
    assert manifest["config_hash"] == DESK_CONFIG.config_hash()
    assert manifest["best_epoch"] == str(result.best_epoch)
    assert manifest["backend.kind"] == "reference"
    assert (tmp_path / HISTORY_FILE).read_text().startswith("epoch,train_loss,val_loss")


def test_snapshot_bytes_are_deterministic(trained, tmp_path):
    result, backend, _ = trained
    save_checkpoint(result, tmp_path / "a", backend)
    save_checkpoint(result, tmp_path / "b", backend)
    for name in (SNAPSHOT_FILE, MANIFEST_FILE, HISTORY_FILE):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_truncated_blob_rejected_with_diff(trained, tmp_path):
    result, backend, _ = trained
    save_checkpoint(result, tmp_path, backend)
    blob = tmp_path / SNAPSHOT_FILE
    blob.write_bytes(blob.read_bytes()[:100])
    with pytest.raises(CheckpointError, match="snapshot_bytes: manifest=\\d+ file=100"):
        load_checkpoint(tmp_path)


def test_missing_files(tmp_path):
    with pytest.raises(CheckpointError, match="manifest"):
        load_checkpoint(tmp_path)


def test_budget_mismatch_warns(trained, tmp_path):
    result, backend, _ = trained
    save_checkpoint(result, tmp_path, backend)
    with pytest.warns(CheckpointWarning, match="sequence_budget=128"):
        load_checkpoint(tmp_path, sequence_budget=64)


def test_backend_mismatch_rejected(trained, tmp_path):
    result, backend, _ = trained
    save_checkpoint(result, tmp_path, backend)
    with pytest.raises(CheckpointError, match="cannot load"):
        load_checkpoint(tmp_path).restore_into(ReferenceBackend(dim=8))


def test_restore_rejects_wrong_shapes():
    with pytest.raises(CheckpointError):
        ReferenceBackend(dim=4).restore({"embedding": np.zeros((2, 2)), "weight": np.zeros((4, 6)), "bias": np.zeros(6)})
