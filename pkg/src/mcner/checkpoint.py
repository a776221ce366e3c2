"""Versioned binary checkpoint container.

Layout: 8-byte magic, 4-byte format version, 8-byte big-endian header
length, a canonical-JSON header, then the raw tensor bytes back to back.
The header records tensor names/dtypes/shapes/offsets plus arbitrary
metadata (config snapshot, seed, vocabulary, catalog).  Serialization is
fully deterministic: identical tensors and metadata give identical bytes.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path
from typing import Mapping

import numpy as np

MAGIC = b"MCNERCKP"
FORMAT_VERSION = 1


class CheckpointError(ValueError):
    pass


def save_checkpoint(path: str | Path, arrays: Mapping[str, np.ndarray], meta: dict) -> None:
    tensors = []
    payloads = []
    offset = 0
    for name, arr in arrays.items():
        arr = np.ascontiguousarray(arr)
        raw = arr.tobytes()
        tensors.append({
            "name": name,
            "dtype": str(arr.dtype),
            "shape": list(arr.shape),
            "offset": offset,
            "nbytes": len(raw),
        })
        payloads.append(raw)
        offset += len(raw)
    header = json.dumps(
        {"format_version": FORMAT_VERSION, "meta": meta, "tensors": tensors},
        sort_keys=True, separators=(",", ":"),
    ).encode("utf-8")
    with Path(path).open("wb") as f:
        f.write(MAGIC)
        f.write(struct.pack(">I", FORMAT_VERSION))
        f.write(struct.pack(">Q", len(header)))
        f.write(header)
        for raw in payloads:
            f.write(raw)


def load_checkpoint(path: str | Path) -> tuple[dict[str, np.ndarray], dict]:
    with Path(path).open("rb") as f:
        blob = f.read()
    if blob[:8] != MAGIC:
        raise CheckpointError(f"{path}: not a checkpoint file (bad magic)")
    version = struct.unpack(">I", blob[8:12])[0]
    if version != FORMAT_VERSION:
        raise CheckpointError(f"{path}: unsupported checkpoint version {version}")
    header_len = struct.unpack(">Q", blob[12:20])[0]
    header = json.loads(blob[20:20 + header_len].decode("utf-8"))
    base = 20 + header_len
    arrays: dict[str, np.ndarray] = {}
    for spec in header["tensors"]:
        start = base + spec["offset"]
        raw = blob[start:start + spec["nbytes"]]
        if len(raw) != spec["nbytes"]:
            raise CheckpointError(f"{path}: truncated tensor {spec['name']!r}")
        arrays[spec["name"]] = np.frombuffer(raw, dtype=np.dtype(spec["dtype"])).reshape(spec["shape"]).copy()
    return arrays, header["meta"]
