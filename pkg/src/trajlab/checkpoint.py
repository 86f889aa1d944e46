"""Checkpoint serialization.

A checkpoint is a single JSON manifest: a format-version field, the model
config, one entry per parameter carrying its name, shape, and the raw
little-endian float64 bytes (base64), plus a sha256 content checksum over
the config and every blob.  Round-trips are bitwise exact.
"""

from __future__ import annotations

import base64
import hashlib
import json

import numpy as np

from .model import ModelConfig, ParameterStore

FORMAT_VERSION = 1


class CheckpointError(ValueError):
    pass


def _checksum(config_dict: dict, entries: list) -> str:
    h = hashlib.sha256()
    h.update(json.dumps(config_dict, sort_keys=True).encode("utf-8"))
    for entry in entries:
        h.update(entry["name"].encode("utf-8"))
        h.update(json.dumps(entry["shape"]).encode("utf-8"))
        h.update(base64.b64decode(entry["data"]))
    return h.hexdigest()


def save_checkpoint(path, params: ParameterStore, config: ModelConfig) -> str:
    """Write the manifest; returns the content checksum."""
    config_dict = config.to_dict()
    entries = []
    for name, tensor in params.items():
        blob = np.ascontiguousarray(tensor.data, dtype="<f8").tobytes()
        entries.append(
            {
                "name": name,
                "shape": list(tensor.data.shape),
                "data": base64.b64encode(blob).decode("ascii"),
            }
        )
    checksum = _checksum(config_dict, entries)
    manifest = {
        "format_version": FORMAT_VERSION,
        "model_config": config_dict,
        "parameters": entries,
        "checksum": checksum,
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(manifest, f)
    return checksum


def load_checkpoint(path):
    """Read a manifest back into (params, config, metadata).

    Raises CheckpointError on unknown versions or checksum mismatches.
    """
    try:
        with open(path, "r", encoding="utf-8") as f:
            manifest = json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from None
    version = manifest.get("format_version")
    if version != FORMAT_VERSION:
        raise CheckpointError(f"unsupported checkpoint format version {version!r}")
    entries = manifest["parameters"]
    expected = _checksum(manifest["model_config"], entries)
    if expected != manifest.get("checksum"):
        raise CheckpointError("checkpoint checksum mismatch")
    config = ModelConfig.from_dict(manifest["model_config"])
    arrays = {}
    for entry in entries:
        blob = base64.b64decode(entry["data"])
        arr = np.frombuffer(blob, dtype="<f8").astype(np.float64).reshape(entry["shape"])
        arrays[entry["name"]] = arr
    params = ParameterStore.from_arrays(arrays)
    meta = {"format_version": version, "checksum": manifest["checksum"]}
    return params, config, meta
