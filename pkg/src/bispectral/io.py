"""File formats: binary weights, text datasets, signal files, logs and configs."""

import csv
import struct
from pathlib import Path

import numpy as np

from .data import OrbitDataset
from .exceptions import ConfigError, DomainError
from .groups import make_group, orbit

__all__ = [
    "WEIGHTS_MAGIC",
    "WEIGHTS_VERSION",
    "save_weights",
    "load_weights",
    "save_dataset",
    "load_dataset",
    "read_signals",
    "write_signals",
    "write_log",
    "read_log",
    "read_config",
    "write_config",
    "fmt",
]

WEIGHTS_MAGIC = b"BNNW"
WEIGHTS_VERSION = 1
_HEADER = struct.Struct("<4sHI")


def fmt(value) -> str:
    """Round-trip text form of a float (17 significant digits)."""
    return format(float(value), ".17g")


def save_weights(path, W):
    W = np.asarray(W, dtype=np.complex128)
    if W.ndim != 2 or W.shape[0] != W.shape[1]:
        raise DomainError(f"weights must be square, got shape {W.shape}")
    n = W.shape[0]
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(WEIGHTS_MAGIC, WEIGHTS_VERSION, n))
        fh.write(W.astype("<c16").tobytes(order="C"))


def load_weights(path) -> np.ndarray:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise ConfigError(f"{path}: truncated weight file")
    magic, version, n = _HEADER.unpack_from(data)
    if magic != WEIGHTS_MAGIC:
        raise ConfigError(f"{path}: not a weight file (magic {magic!r})")
    if version != WEIGHTS_VERSION:
        raise ConfigError(f"{path}: unsupported weight file version {version}")
    body = data[_HEADER.size :]
    if len(body) != 16 * n * n:
        raise ConfigError(f"{path}: expected {16 * n * n} payload bytes, found {len(body)}")
    return np.frombuffer(body, dtype="<c16").reshape(n, n).astype(np.complex128)


def save_dataset(path, ds: OrbitDataset):
    with open(path, "w", newline="\n") as fh:
        fh.write(
            f"BNND v1 group={ds.group.spec} classes={ds.n_classes} samples={len(ds)}\n"
        )
        for label, x in zip(ds.labels, ds.X):
            fh.write(str(int(label)) + "," + ",".join(fmt(v) for v in x) + "\n")


def _parse_header(line):
    parts = line.split()
    if len(parts) < 2 or parts[0] != "BNND" or parts[1] != "v1":
        raise ConfigError(f"not a BNND v1 dataset header: {line!r}")
    fields = dict(p.split("=", 1) for p in parts[2:] if "=" in p)
    for key in ("group", "classes", "samples"):
        if key not in fields:
            raise ConfigError(f"dataset header lacks {key}=")
    return fields


def load_dataset(path) -> OrbitDataset:
    """Read a dataset file.  The first sample of each class becomes its exemplar."""
    with open(path) as fh:
        header = _parse_header(fh.readline())
        rows = [line.rstrip("\n").split(",") for line in fh if line.strip()]
    group = make_group(header["group"])
    n_samples = int(header["samples"])
    n_classes = int(header["classes"])
    if len(rows) != n_samples:
        raise ConfigError(f"header announces {n_samples} samples, file has {len(rows)}")
    if n_samples == 0:
        raise ConfigError("dataset is empty")
    labels = np.array([int(r[0]) for r in rows])
    X = np.array([[float(v) for v in r[1:]] for r in rows])
    if X.shape[1] != group.order:
        raise DomainError(f"samples have length {X.shape[1]}, group order is {group.order}")
    if labels.min() < 0 or labels.max() >= n_classes:
        raise ConfigError(f"labels must lie in [0, {n_classes})")
    exemplars = np.zeros((n_classes, group.order))
    transforms = np.full(n_samples, -1)
    for c in range(n_classes):
        members = np.flatnonzero(labels == c)
        if members.size == 0:
            raise ConfigError(f"class {c} has no samples")
        exemplars[c] = X[members[0]]
        translates = orbit(exemplars[c], group)
        for s in members:
            hit = np.flatnonzero(np.all(translates == X[s], axis=1))
            if hit.size:
                transforms[s] = hit[0]
    return OrbitDataset(group, X, labels, exemplars, transforms)


def read_signals(path) -> np.ndarray:
    """One comma-separated signal per line; ``#`` starts a comment.

    Entries may be complex in Python syntax (``1+2j``).  The result is real
    when every imaginary part is zero.
    """
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            rows.append([complex(v.strip().replace(" ", "")) for v in line.split(",") if v.strip()])
    if not rows:
        raise ConfigError(f"{path}: no signals found")
    if len({len(r) for r in rows}) != 1:
        raise ConfigError(f"{path}: signals have different lengths")
    arr = np.array(rows)
    return arr.real.copy() if not np.any(arr.imag) else arr


def write_signals(path, X):
    X = np.atleast_2d(X)
    with open(path, "w") as fh:
        for x in X:
            fh.write(",".join(fmt(v) for v in np.real(x)) + "\n")


def write_log(path, log, columns):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in log:
            writer.writerow(
                [row[c] if isinstance(row[c], (int, np.integer, str)) else fmt(row[c]) for c in columns]
            )


def read_log(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _parse_value(text):
    text = text.strip()
    low = text.lower()
    if low in ("none", "null", ""):
        return None
    if low in ("true", "false"):
        return low == "true"
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    if len(text) >= 2 and text[0] == text[-1] and text[0] in "\"'":
        return text[1:-1]
    return text


def read_config(path) -> dict:
    """``key = value`` lines with ``#`` comments; values are int, float, bool, None or str."""
    values = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, value = line.split("=", 1)
            values[key.strip().replace("-", "_")] = _parse_value(value)
    return values


def write_config(path, values: dict):
    with open(path, "w") as fh:
        for key in sorted(values):
            value = values[key]
            if isinstance(value, float):
                value = fmt(value)
            fh.write(f"{key} = {value}\n")
