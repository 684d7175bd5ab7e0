"""File formats: CHF1 field snapshots, operator edge lists, energy-history CSV."""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"CHF1"

ENERGY_HEADER = "step,time,energy,linf,mean,increment_l2,grad_H_l2,dissipation_residual"


class FormatError(ValueError):
    pass


def encode_snapshot(values: np.ndarray) -> bytes:
    values = np.asarray(values, dtype="<f8")
    if values.ndim not in (1, 2, 3):
        raise FormatError(f"snapshot dimension must be 1..3, got {values.ndim}")
    header = MAGIC + struct.pack("<B", values.ndim) + struct.pack(f"<{values.ndim}Q", *values.shape)
    return header + np.ascontiguousarray(values).tobytes(order="C")


def decode_snapshot(data: bytes) -> np.ndarray:
    if data[:4] != MAGIC:
        raise FormatError("bad magic, expected CHF1")
    if len(data) < 5:
        raise FormatError("truncated header")
    dim = data[4]
    if dim not in (1, 2, 3):
        raise FormatError(f"unsupported dimension {dim}")
    head = 5 + 8 * dim
    if len(data) < head:
        raise FormatError("truncated extents")
    extents = struct.unpack(f"<{dim}Q", data[5:head])
    count = int(np.prod(extents))
    if len(data) != head + 8 * count:
        raise FormatError(f"expected {count} doubles, found {(len(data) - head) / 8:g}")
    return np.frombuffer(data, dtype="<f8", offset=head).reshape(extents).astype(np.float64)


def write_snapshot(path, values) -> None:
    Path(path).write_bytes(encode_snapshot(values))


def read_snapshot(path) -> np.ndarray:
    return decode_snapshot(Path(path).read_bytes())


def fmt(x: float) -> str:
    """Locale-independent shortest round-trip float text."""
    return repr(float(x))


def energy_row(step: int, time: float, report) -> str:
    cols = [report.energy, report.linf, report.mean, report.increment_l2,
            report.grad_H_l2, report.dissipation_residual]
    return ",".join([str(step), fmt(time)] + [fmt(c) for c in cols])
