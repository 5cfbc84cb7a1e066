"""Versioned checkpoint container.

A checkpoint is one torch-serialized dict that fully describes how to
rebuild its model: format version, model kind, the training configuration
(plus a hash guarding against silent edits), the vocabulary when one
applies, and the network state dicts.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import torch

from .errors import CheckpointError

FORMAT_VERSION = 1
KINDS = ("tpn", "pcn")


def config_hash(config: dict[str, Any]) -> str:
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


@dataclass
class Checkpoint:
    kind: str
    config: dict[str, Any]
    state: dict[str, dict]
    vocab: list[str] | None


def save_checkpoint(
    path: str | Path,
    kind: str,
    config: dict[str, Any],
    state: dict[str, dict],
    vocab: list[str] | None = None,
) -> None:
    if kind not in KINDS:
        raise CheckpointError(f"unknown checkpoint kind {kind!r}")
    payload = {
        "format_version": FORMAT_VERSION,
        "kind": kind,
        "config": config,
        "config_hash": config_hash(config),
        "vocab": vocab,
        "state": state,
    }
    torch.save(payload, path)


def load_checkpoint(path: str | Path, expected_kind: str | None = None) -> Checkpoint:
    path = Path(path)
    if not path.is_file():
        raise CheckpointError(f"no checkpoint at {path}")
    try:
        payload = torch.load(path, map_location="cpu", weights_only=False)
    except Exception as exc:  # torch raises a zoo of unpickling errors
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc
    if not isinstance(payload, dict) or "format_version" not in payload:
        raise CheckpointError(f"{path} is not a model checkpoint")
    version = payload["format_version"]
    if version != FORMAT_VERSION:
        raise CheckpointError(f"unsupported checkpoint format {version}, expected {FORMAT_VERSION}")
    kind = payload.get("kind")
    if kind not in KINDS:
        raise CheckpointError(f"unknown checkpoint kind {kind!r}")
    if expected_kind is not None and kind != expected_kind:
        raise CheckpointError(f"expected a {expected_kind} checkpoint, found {kind}")
    config = payload.get("config")
    if config_hash(config) != payload.get("config_hash"):
        raise CheckpointError(f"config hash mismatch in {path}; file may be corrupt")
    return Checkpoint(kind=kind, config=config, state=payload["state"], vocab=payload.get("vocab"))
