"""Deterministic JSON serialization with 12-significant-digit floats.

Reports are meant to be diffed byte-for-byte across runs, so keys are
sorted, separators are fixed and every float is rounded through the same
"%.12g" filter before encoding.
"""

from __future__ import annotations

import json

import numpy as np


def _normalize(obj):
    if isinstance(obj, dict):
        return {str(k): _normalize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_normalize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_normalize(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        if not np.isfinite(f):
            return None
        return float(f"{f:.12g}")
    return obj


def dumps(obj):
    """Canonical JSON text: sorted keys, fixed separators, trailing newline."""
    return json.dumps(_normalize(obj), sort_keys=True, separators=(",", ":")) + "\n"


def dump_path(obj, path):
    with open(path, "w") as fh:
        fh.write(dumps(obj))
