"""CSID dataset reader.

The CSID layout (little-endian): magic ``CSID``, version u16 = 1, header
length u32, UTF-8 JSON header ``{n_ant, n_sub, n_pilot, n_records,
dtype: "f32"}``, then per record a label byte (0 genuine, 1 phase-spoofed,
2 contaminated, 3 forged) followed by float32 tensors ``y [n_ant][n_pilot][2]``,
``h_reported [n_ant][n_sub][2]`` and ``h_true [n_ant][n_sub][2]`` in
row-major order. This module implements the format independently of its
producer; files are the only interface between the two packages.
"""
from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np

MAGIC = b"CSID"
VERSION = 1

LABEL_GENUINE = 0
LABEL_PHASE_SPOOFED = 1
LABEL_CONTAMINATED = 2
LABEL_FORGED = 3


class CsidFormatError(ValueError):
    def __init__(self, message: str, offset: int = 0):
        self.offset = offset
        super().__init__(f"{message} (byte offset {offset})")


@dataclass(frozen=True)
class CsidDataset:
    """All records of one file as stacked arrays."""

    labels: np.ndarray      # [n] uint8
    y: np.ndarray           # [n, n_ant, n_pilot, 2] float32
    h_reported: np.ndarray  # [n, n_ant, n_sub, 2] float32
    h_true: np.ndarray      # [n, n_ant, n_sub, 2] float32

    def __len__(self) -> int:
        return self.labels.size

    @property
    def n_ant(self) -> int:
        return self.y.shape[1]

    @property
    def n_pilot(self) -> int:
        return self.y.shape[2]

    @property
    def n_sub(self) -> int:
        return self.h_reported.shape[2]

    def subset(self, mask) -> "CsidDataset":
        return CsidDataset(
            labels=self.labels[mask],
            y=self.y[mask],
            h_reported=self.h_reported[mask],
            h_true=self.h_true[mask],
        )


def load_csid(path) -> CsidDataset:
    with open(path, "rb") as f:
        data = f.read()
    if data[:4] != MAGIC:
        raise CsidFormatError(f"bad magic {data[:4]!r}", offset=0)
    if len(data) < 10:
        raise CsidFormatError("truncated before header", offset=len(data))
    (version,) = struct.unpack_from("<H", data, 4)
    if version != VERSION:
        raise CsidFormatError(f"unsupported version {version}", offset=4)
    (hlen,) = struct.unpack_from("<I", data, 6)
    if len(data) < 10 + hlen:
        raise CsidFormatError("truncated header", offset=len(data))
    header = json.loads(data[10:10 + hlen].decode("utf-8"))
    n_ant, n_sub = header["n_ant"], header["n_sub"]
    n_pilot, n = header["n_pilot"], header["n_records"]
    y_elems = n_ant * n_pilot * 2
    h_elems = n_ant * n_sub * 2
    rec_len = 1 + 4 * (y_elems + 2 * h_elems)
    if len(data) < 10 + hlen + n * rec_len:
        raise CsidFormatError("truncated records", offset=len(data))
    labels = np.empty(n, dtype=np.uint8)
    y = np.empty((n, n_ant, n_pilot, 2), dtype=np.float32)
    h_rep = np.empty((n, n_ant, n_sub, 2), dtype=np.float32)
    h_true = np.empty((n, n_ant, n_sub, 2), dtype=np.float32)
    offset = 10 + hlen
    for i in range(n):
        labels[i] = data[offset]
        o = offset + 1
        y[i] = np.frombuffer(data, "<f4", y_elems, o).reshape(n_ant, n_pilot, 2)
        o += 4 * y_elems
        h_rep[i] = np.frombuffer(data, "<f4", h_elems, o).reshape(n_ant, n_sub, 2)
        o += 4 * h_elems
        h_true[i] = np.frombuffer(data, "<f4", h_elems, o).reshape(n_ant, n_sub, 2)
        offset += rec_len
    return CsidDataset(labels=labels, y=y, h_reported=h_rep, h_true=h_true)


def to_channels_first(a: np.ndarray) -> np.ndarray:
    """[n, H, W, 2] -> [n, 2, H, W] for convolutional models."""
    return np.ascontiguousarray(np.moveaxis(a, -1, 1))
