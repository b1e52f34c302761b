"""File formats: CSID datasets, metrics tables, SVG charts, configs, manifests.

CSID binary layout (little-endian throughout):

    magic   4 bytes  b"CSID"
    version u16      1
    hlen    u32      byte length of the JSON header
    header  UTF-8 JSON: {"n_ant", "n_sub", "n_pilot", "n_records", "dtype": "f32"}
    records n_records times:
        label      u8   0=genuine 1=phase_spoofed 2=contaminated 3=forged
        y          f32[n_ant][n_pilot][2]   received pilots, re/im
        h_reported f32[n_ant][n_sub][2]     reported CSI, re/im
        h_true     f32[n_ant][n_sub][2]     ground-truth CSI, re/im

    All tensors are row-major. Round-trips are bit-exact.
"""
from __future__ import annotations

import io
import json
import struct
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from .errors import ConfigError, DatasetFormatError

MAGIC = b"CSID"
VERSION = 1

LABEL_GENUINE = 0
LABEL_PHASE_SPOOFED = 1
LABEL_CONTAMINATED = 2
LABEL_FORGED = 3


@dataclass(frozen=True)
class CsiDatasetRecord:
    """One labelled training example for the reconstruction-based detector."""

    label: int
    y: np.ndarray           # [n_ant, n_pilot, 2] float32
    h_reported: np.ndarray  # [n_ant, n_sub, 2] float32
    h_true: np.ndarray      # [n_ant, n_sub, 2] float32

    def __post_init__(self):
        if self.label not in (0, 1, 2, 3):
            raise ValueError(f"label must be 0..3, got {self.label}")
        for name in ("y", "h_reported", "h_true"):
            a = np.ascontiguousarray(getattr(self, name), dtype=np.float32)
            if a.ndim != 3 or a.shape[2] != 2:
                raise ValueError(f"{name} must have shape [*, *, 2], got {a.shape}")
            if not np.all(np.isfinite(a)):
                raise ValueError(f"{name} contains non-finite values")
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        if self.y.shape[0] != self.h_reported.shape[0] or \
                self.h_reported.shape != self.h_true.shape:
            raise ValueError("tensor dimensions are inconsistent")


def complex_to_planes(a: np.ndarray) -> np.ndarray:
    """Stack real and imaginary parts on a trailing axis, as float32."""
    a = np.asarray(a, dtype=np.complex128)
    return np.stack([a.real, a.imag], axis=-1).astype(np.float32)


def planes_to_complex(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a)
    return a[..., 0].astype(np.complex128) + 1j * a[..., 1].astype(np.complex128)


def write_dataset(records, path) -> int:
    """Serialize homogeneous records to a CSID file; returns the count."""
    records = list(records)
    if records:
        n_ant, n_pilot = records[0].y.shape[0], records[0].y.shape[1]
        n_sub = records[0].h_reported.shape[1]
        for r in records:
            if r.y.shape != (n_ant, n_pilot, 2) or \
                    r.h_reported.shape != (n_ant, n_sub, 2):
                raise ValueError("records have inhomogeneous dimensions")
    else:
        n_ant = n_sub = n_pilot = 0
    header = json.dumps(
        {"n_ant": n_ant, "n_sub": n_sub, "n_pilot": n_pilot,
         "n_records": len(records), "dtype": "f32"},
        sort_keys=True,
    ).encode("utf-8")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<H", VERSION))
        f.write(struct.pack("<I", len(header)))
        f.write(header)
        for r in records:
            f.write(struct.pack("<B", r.label))
            f.write(r.y.astype("<f4").tobytes())
            f.write(r.h_reported.astype("<f4").tobytes())
            f.write(r.h_true.astype("<f4").tobytes())
    return len(records)


def read_dataset(path) -> list[CsiDatasetRecord]:
    """Parse a CSID file; bit-exact inverse of :func:`write_dataset`."""
    with open(path, "rb") as f:
        data = f.read()
    if data[:4] != MAGIC:
        raise DatasetFormatError(f"bad magic {data[:4]!r}", offset=0)
    if len(data) < 10:
        raise DatasetFormatError("truncated before header length", offset=len(data))
    (version,) = struct.unpack_from("<H", data, 4)
    if version != VERSION:
        raise DatasetFormatError(f"unsupported version {version}", offset=4)
    (hlen,) = struct.unpack_from("<I", data, 6)
    if len(data) < 10 + hlen:
        raise DatasetFormatError("truncated header", offset=len(data))
    try:
        header = json.loads(data[10:10 + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise DatasetFormatError(f"unreadable header: {e}", offset=10) from e
    n_ant, n_sub = header["n_ant"], header["n_sub"]
    n_pilot, n_records = header["n_pilot"], header["n_records"]
    y_len = n_ant * n_pilot * 2 * 4
    h_len = n_ant * n_sub * 2 * 4
    rec_len = 1 + y_len + 2 * h_len
    offset = 10 + hlen
    records = []
    for _ in range(n_records):
        if len(data) < offset + rec_len:
            raise DatasetFormatError("truncated record", offset=len(data))
        label = data[offset]
        o = offset + 1
        y = np.frombuffer(data, dtype="<f4", count=n_ant * n_pilot * 2,
                          offset=o).reshape(n_ant, n_pilot, 2)
        o += y_len
        h_rep = np.frombuffer(data, dtype="<f4", count=n_ant * n_sub * 2,
                              offset=o).reshape(n_ant, n_sub, 2)
        o += h_len
        h_true = np.frombuffer(data, dtype="<f4", count=n_ant * n_sub * 2,
                               offset=o).reshape(n_ant, n_sub, 2)
        records.append(CsiDatasetRecord(label=label, y=y.copy(),
                                        h_reported=h_rep.copy(), h_true=h_true.copy()))
        offset += rec_len
    return records


METRICS_COLUMNS = (
    "slot", "vehicle_id", "snr_db", "rate", "queued", "delivered",
    "dropped", "latency", "attack_active", "alarm", "identifying",
)


def write_metrics(log, path) -> None:
    """Write a metrics log as delimiter-separated text, 6 significant digits."""
    lines = [",".join(METRICS_COLUMNS)]
    for r in log.rows:
        lines.append(",".join([
            str(r.slot), str(r.vehicle_id),
            _fmt(r.snr_db), _fmt(r.rate),
            str(r.queued_packets), str(r.delivered_packets),
            str(r.dropped_packets), _fmt(r.latency_slots),
            str(int(r.attack_active)), str(int(r.alarm_raised)),
            str(int(r.identifying)),
        ]))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def emit_plot(series: dict[str, np.ndarray], path, title: str = "",
              x_label: str = "slot", y_label: str = "") -> None:
    """Render named sequences as a deterministic standalone SVG line chart."""
    if not series:
        raise ValueError("series must be non-empty")
    lengths = {len(v) for v in series.values()}
    if len(lengths) != 1:
        raise ValueError(f"series lengths differ: {sorted(lengths)}")
    (n,) = lengths
    if n == 0:
        raise ValueError("series are empty")

    width, height, margin = 640, 400, 50
    palette = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
    all_vals = np.concatenate([np.asarray(v, dtype=float) for v in series.values()])
    finite = all_vals[np.isfinite(all_vals)]
    y_min = float(finite.min()) if finite.size else 0.0
    y_max = float(finite.max()) if finite.size else 1.0
    if y_max == y_min:
        y_max = y_min + 1.0
    x_max = max(n - 1, 1)

    def sx(i):
        return margin + (width - 2 * margin) * i / x_max

    def sy(v):
        return height - margin - (height - 2 * margin) * (v - y_min) / (y_max - y_min)

    buf = io.StringIO()
    buf.write(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">\n'
    )
    buf.write(f'<rect width="{width}" height="{height}" fill="white"/>\n')
    buf.write(
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" '
        f'y2="{height - margin}" stroke="black"/>\n'
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" '
        f'y2="{height - margin}" stroke="black"/>\n'
    )
    buf.write(
        f'<text x="{width // 2}" y="{height - 12}" text-anchor="middle" '
        f'font-size="12">{x_label}</text>\n'
        f'<text x="14" y="{height // 2}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 14 {height // 2})">{y_label}</text>\n'
    )
    if title:
        buf.write(
            f'<text x="{width // 2}" y="22" text-anchor="middle" '
            f'font-size="14">{title}</text>\n'
        )
    for tick in (y_min, 0.5 * (y_min + y_max), y_max):
        buf.write(
            f'<text x="{margin - 6}" y="{sy(tick):.2f}" text-anchor="end" '
            f'font-size="10">{tick:.4g}</text>\n'
        )
    for ci, (name, vals) in enumerate(series.items()):
        vals = np.asarray(vals, dtype=float)
        color = palette[ci % len(palette)]
        if n == 1:
            v = vals[0]
            if np.isfinite(v):
                buf.write(
                    f'<circle cx="{sx(0):.2f}" cy="{sy(v):.2f}" r="3" '
                    f'fill="{color}"/>\n'
                )
        else:
            pts = " ".join(
                f"{sx(i):.2f},{sy(v):.2f}" for i, v in enumerate(vals)
                if np.isfinite(v)
            )
            buf.write(
                f'<polyline points="{pts}" fill="none" stroke="{color}" '
                f'stroke-width="1.5"/>\n'
            )
        ly = margin + 16 * ci
        buf.write(
            f'<line x1="{width - margin - 110}" y1="{ly}" '
            f'x2="{width - margin - 90}" y2="{ly}" stroke="{color}" '
            f'stroke-width="2"/>\n'
            f'<text x="{width - margin - 84}" y="{ly + 4}" '
            f'font-size="11">{name}</text>\n'
        )
    buf.write("</svg>\n")
    Path(path).write_text(buf.getvalue(), encoding="utf-8", newline="\n")


@dataclass(frozen=True)
class ExperimentManifest:
    """Everything needed to bit-reproduce an emitted result file."""

    seed: int
    config: dict = field(default_factory=dict)
    attack_magnitudes: dict = field(default_factory=dict)
    detector_thresholds: dict = field(default_factory=dict)
    tool_version: str = "beamsec 0.1.0"

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2)

    @staticmethod
    def from_json(text: str) -> "ExperimentManifest":
        return ExperimentManifest(**json.loads(text))


def write_manifest(manifest: ExperimentManifest, path) -> None:
    Path(path).write_text(manifest.to_json() + "\n", encoding="utf-8", newline="\n")


def read_manifest(path) -> ExperimentManifest:
    return ExperimentManifest.from_json(Path(path).read_text(encoding="utf-8"))


def load_config(path, schema: dict, context: str = "config") -> dict:
    """Load a JSON config, rejecting unknown keys and missing required ones.

    `schema` maps key -> (required: bool, type or tuple of types). Nested
    dicts use nested schemas via a ("dict", subschema) entry.
    """
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"file not found: {p}", context)
    try:
        doc = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigError(f"invalid JSON: {e}", context) from e
    return validate_config(doc, schema, context)


def validate_config(doc: dict, schema: dict, context: str = "config") -> dict:
    if not isinstance(doc, dict):
        raise ConfigError("expected a JSON object", context)
    unknown = set(doc) - set(schema)
    if unknown:
        raise ConfigError(
            f"unknown keys: {sorted(unknown)}", context
        )
    for key, (required, typ) in schema.items():
        path_here = f"{context}.{key}"
        if key not in doc:
            if required:
                raise ConfigError("missing required key", path_here)
            continue
        val = doc[key]
        if isinstance(typ, tuple) and len(typ) == 2 and typ[0] == "dict":
            validate_config(val, typ[1], path_here)
        elif not isinstance(val, typ):
            raise ConfigError(
                f"expected {getattr(typ, '__name__', typ)}, got {type(val).__name__}",
                path_here,
            )
    return doc
