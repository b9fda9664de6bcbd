"""Order-invariant seeding and canonical example ordering.

Every randomized step in the library (weight initialization, validation
splits, resampling draws) takes its seed from a hash of the *sorted*
multiset of training examples, so permuting the training data can never
change a result.  Sorting also fixes the float summation order, which is
what makes full-batch training bit-identical under permutation.
"""

from __future__ import annotations

import hashlib

import numpy as np


def example_keys(X: np.ndarray, y: np.ndarray | None = None) -> list[bytes]:
    """Byte key per row; identical (features, label) pairs get identical keys."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    if y is None:
        return [X[i].tobytes() for i in range(X.shape[0])]
    y = np.asarray(y)
    return [X[i].tobytes() + bytes([int(y[i])]) for i in range(X.shape[0])]


def canonical_order(X: np.ndarray, y: np.ndarray | None = None) -> np.ndarray:
    """Indices that sort examples into a canonical (permutation-free) order."""
    keys = example_keys(X, y)
    return np.array(sorted(range(len(keys)), key=keys.__getitem__), dtype=np.intp)


def _material_bytes(seed_material) -> bytes:
    if isinstance(seed_material, bytes):
        return seed_material
    if isinstance(seed_material, str):
        return seed_material.encode("utf-8")
    if isinstance(seed_material, (int, np.integer)):
        return int(seed_material).to_bytes(16, "little", signed=True)
    raise TypeError(f"seed_material must be int, str or bytes, got {type(seed_material).__name__}")


def content_seed(X: np.ndarray, y: np.ndarray | None, seed_material, salt: bytes = b"") -> int:
    """64-bit seed from the sorted example multiset plus caller-supplied material."""
    h = hashlib.sha256()
    h.update(salt)
    h.update(_material_bytes(seed_material))
    for key in sorted(example_keys(X, y)):
        h.update(key)
    return int.from_bytes(h.digest()[:8], "little")
