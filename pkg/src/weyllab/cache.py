"""On-disk cache of eigendecompositions.

File layout (all little endian):

    b"WEYL"  uint32 version  uint32 meta_len  meta_json[meta_len]
    float64 eigenvalues[N]   float64 coefficients[N*N] (row major)

The file name is the sha256 of the canonical metadata JSON.  Writes go to a
temporary file in the same directory followed by an atomic rename.
"""
from __future__ import annotations

import hashlib
import json
import logging
import math
import os
import struct
import tempfile
import warnings
from pathlib import Path

import numpy as np

MAGIC = b"WEYL"
VERSION = 1
ENV_VAR = "WEYLLAB_CACHE_DIR"

log = logging.getLogger(__name__)


class CacheError(ValueError):
    pass


class CacheWarning(UserWarning):
    pass


def cache_dir(configured: str | os.PathLike | None = None) -> Path | None:
    path = configured or os.environ.get(ENV_VAR)
    return Path(path) if path else None


def cache_key(meta: dict) -> str:
    return hashlib.sha256(json.dumps(meta, sort_keys=True).encode()).hexdigest()


def write_eigendata(path, meta: dict, eigenvalues: np.ndarray, coefficients: np.ndarray) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    blob = json.dumps(meta, sort_keys=True).encode()
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=".weyl")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(MAGIC + struct.pack("<II", VERSION, len(blob)) + blob)
            fh.write(np.ascontiguousarray(eigenvalues, dtype="<f8").tobytes())
            fh.write(np.ascontiguousarray(coefficients, dtype="<f8").tobytes())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_eigendata(path) -> tuple[dict, np.ndarray, np.ndarray]:
    with open(path, "rb") as fh:
        head = fh.read(12)
        if len(head) < 12 or head[:4] != MAGIC:
            raise CacheError(f"{path}: bad magic")
        version, mlen = struct.unpack("<II", head[4:])
        if version != VERSION:
            raise CacheError(f"{path}: unsupported version {version}")
        blob = fh.read(mlen)
        payload = fh.read()
    if len(blob) != mlen:
        raise CacheError(f"{path}: truncated metadata")
    meta = json.loads(blob)
    # payload is N + N^2 doubles
    count = len(payload) // 8
    n = int(round((math.sqrt(1 + 4 * count) - 1) / 2))
    if len(payload) % 8 or n + n * n != count:
        raise CacheError(f"{path}: truncated payload")
    if "size" in meta and int(meta["size"]) != n:
        raise CacheError(f"{path}: payload size {n} does not match metadata")
    w = np.frombuffer(payload[: 8 * n], dtype="<f8")
    c = np.frombuffer(payload[8 * n :], dtype="<f8")
    return meta, w.astype(float), c.astype(float).reshape(n, n)


class EigenCache:
    def __init__(self, directory):
        self.directory = Path(directory)

    def path_for(self, meta: dict) -> Path:
        return self.directory / f"{cache_key(meta)}.weyl"

    def load(self, meta: dict):
        """(eigenvalues, coefficients, shift) or None; corrupt entries are ignored with a warning.

        ``meta`` describes the inputs; the stored header also carries the
        shift, which is a result and is not part of the key.
        """
        path = self.path_for(meta)
        if not path.exists():
            return None
        try:
            stored, w, c = read_eigendata(path)
        except (CacheError, ValueError, KeyError, struct.error) as exc:
            warnings.warn(f"ignoring unreadable cache entry: {exc}", CacheWarning, stacklevel=2)
            return None
        shift = stored.pop("shift", 0.0)
        if stored != meta:
            warnings.warn(f"ignoring cache entry {path.name}: metadata mismatch", CacheWarning, stacklevel=2)
            return None
        log.debug("cache hit %s", path.name)
        return w, c, float(shift)

    def store(self, meta: dict, eigenvalues, coefficients, shift: float = 0.0) -> Path:
        path = self.path_for(meta)
        write_eigendata(path, {**meta, "shift": shift}, eigenvalues, coefficients)
        return path
