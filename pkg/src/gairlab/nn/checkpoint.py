"""Flat binary checkpoint format.

Layout: one JSON header line (format tag plus ordered ``[name, shape]``
pairs), a single ``\\n``, then the parameters' float64 little-endian bytes
concatenated in header order.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..errors import ShapeError
from .tensor import Array, Tensor

FORMAT_TAG = "gairlab-params-v1"


def save_params(path: str | Path, params: dict[str, Tensor | Array]) -> None:
    path = Path(path)
    names = list(params.keys())
    arrays = [
        np.ascontiguousarray(
            (params[n].data if isinstance(params[n], Tensor) else params[n]),
            dtype="<f8",
        )
        for n in names
    ]
    header = {
        "format": FORMAT_TAG,
        "params": [[n, list(a.shape)] for n, a in zip(names, arrays)],
    }
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode("utf-8"))
        fh.write(b"\n")
        for a in arrays:
            fh.write(a.tobytes())


def load_params(path: str | Path) -> dict[str, Array]:
    path = Path(path)
    with open(path, "rb") as fh:
        header_line = fh.readline()
        header = json.loads(header_line.decode("utf-8"))
        if header.get("format") != FORMAT_TAG:
            raise ShapeError(f"not a {FORMAT_TAG} checkpoint: {path}")
        out: dict[str, Array] = {}
        for name, shape in header["params"]:
            count = int(np.prod(shape)) if shape else 1
            buf = fh.read(count * 8)
            if len(buf) != count * 8:
                raise ShapeError(f"truncated checkpoint {path} at {name}")
            out[name] = np.frombuffer(buf, dtype="<f8").reshape(shape).astype(np.float64)
    return out


def load_params_into(path: str | Path, params: dict[str, Tensor]) -> None:
    """Load a checkpoint into existing tensors, verifying names and shapes."""
    loaded = load_params(path)
    missing = set(params) - set(loaded)
    extra = set(loaded) - set(params)
    if missing or extra:
        raise ShapeError(
            f"checkpoint mismatch: missing={sorted(missing)} extra={sorted(extra)}"
        )
    for name, p in params.items():
        if loaded[name].shape != p.data.shape:
            raise ShapeError(
                f"shape mismatch for {name}: {loaded[name].shape} vs {p.data.shape}"
            )
        p.data = loaded[name].copy()
