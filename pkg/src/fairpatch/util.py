"""Small shared helpers: seed derivation, atomic writes, JSON I/O."""

from __future__ import annotations

import json
import os
import tempfile

import numpy as np

__all__ = ["derive_seed", "atomic_write_text", "write_json", "read_json"]


def derive_seed(base_seed: int, *key: int) -> int:
    """Deterministic child seed for a keyed subsystem.

    Routing all randomness through keyed derivations of one root seed
    keeps independent cells independent and immune to reordering.
    """
    seq = np.random.SeedSequence([int(base_seed)] + [int(k) for k in key])
    return int(seq.generate_state(1)[0])


def atomic_write_text(path, text: str) -> None:
    """Write via a temp file in the same directory, then rename."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path, doc: dict) -> None:
    atomic_write_text(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")


def read_json(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)
