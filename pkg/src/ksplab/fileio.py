"""Bit-exact binary containers, 16-bit PGM previews, and CSV reports.

Container layout (all little-endian):

* 8-byte magic ``KSPLAB01``
* 4-byte unsigned header length
* UTF-8 JSON header: ``{"version", "dtype": "c64"|"c128", "shape",
  "mask": {...}|null, "meta": {...}}``
* raw interleaved (re, im) float samples in C order of ``shape``

``c128`` containers round-trip bit-exactly; ``c64`` quantizes to float32.
"""

from __future__ import annotations

import csv
import json
import struct
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .sampling import SamplingMask

__all__ = [
    "KspFormatError",
    "KspContainer",
    "write_ksp",
    "read_ksp",
    "write_pgm",
    "write_report",
    "REPORT_COLUMNS",
]

MAGIC = b"KSPLAB01"
_DTYPES = {"c64": np.dtype("<c8"), "c128": np.dtype("<c16")}
_VERSION = 1


class KspFormatError(Exception):
    """Malformed container file (bad magic, truncation, shape mismatch)."""


@dataclass
class KspContainer:
    """In-memory view of one container file."""

    data: np.ndarray
    mask: Optional[SamplingMask] = None
    meta: Optional[dict] = None
    dtype: str = "c128"


def _mask_to_header(mask: SamplingMask) -> dict:
    return {
        "kind": mask.kind,
        "R": mask.acceleration,
        "acs": mask.acs_lines,
        "seed": mask.seed,
        "phase_axis": mask.phase_axis,
        "height": mask.height,
        "width": mask.width,
        "pattern": "".join("1" if v else "0" for v in mask.pattern),
    }


def _mask_from_header(h: dict) -> SamplingMask:
    pattern = np.frombuffer(h["pattern"].encode("ascii"), dtype=np.uint8) - ord("0")
    return SamplingMask(
        height=int(h["height"]),
        width=int(h["width"]),
        kind=h["kind"],
        acceleration=int(h["R"]),
        acs_lines=int(h["acs"]),
        pattern=pattern,
        seed=h.get("seed"),
        phase_axis=h.get("phase_axis", "cols"),
    )


def write_ksp(
    path,
    data: np.ndarray,
    mask: Optional[SamplingMask] = None,
    meta: Optional[dict] = None,
    dtype: str = "c128",
) -> None:
    """Write a complex array (any shape) to a container file."""
    if dtype not in _DTYPES:
        raise ValueError(f"dtype must be one of {sorted(_DTYPES)}, got {dtype!r}")
    data = np.ascontiguousarray(np.asarray(data), dtype=_DTYPES[dtype])
    header = {
        "version": _VERSION,
        "dtype": dtype,
        "shape": list(data.shape),
        "mask": _mask_to_header(mask) if mask is not None else None,
        "meta": meta or {},
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", len(blob)))
        f.write(blob)
        f.write(data.tobytes(order="C"))


def read_ksp(path) -> KspContainer:
    """Read a container file; raises :class:`KspFormatError` on damage."""
    with open(path, "rb") as f:
        raw = f.read()

    if len(raw) < len(MAGIC) + 4:
        raise KspFormatError(f"file too short ({len(raw)} bytes) to hold magic and header length")
    if raw[: len(MAGIC)] != MAGIC:
        raise KspFormatError(f"bad magic at offset 0: {raw[:len(MAGIC)]!r}, expected {MAGIC!r}")
    (hlen,) = struct.unpack_from("<I", raw, len(MAGIC))
    hstart = len(MAGIC) + 4
    if len(raw) < hstart + hlen:
        raise KspFormatError(
            f"truncated header: need {hlen} bytes at offset {hstart}, have {len(raw) - hstart}"
        )
    try:
        header = json.loads(raw[hstart : hstart + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise KspFormatError(f"unparseable header at offset {hstart}: {e}") from e

    dtype = header.get("dtype")
    if dtype not in _DTYPES:
        raise KspFormatError(f"unknown dtype {dtype!r} in header")
    shape = header.get("shape")
    if not isinstance(shape, list) or not shape or any(
        not isinstance(s, int) or s < 1 for s in shape
    ):
        raise KspFormatError(f"invalid shape {shape!r} in header")

    body_start = hstart + hlen
    expected = int(np.prod(shape)) * _DTYPES[dtype].itemsize
    available = len(raw) - body_start
    if available != expected:
        raise KspFormatError(
            f"payload size mismatch at offset {body_start}: expected {expected} bytes "
            f"for shape {shape} ({dtype}), found {available}"
        )
    data = np.frombuffer(raw, dtype=_DTYPES[dtype], count=int(np.prod(shape)), offset=body_start)
    data = data.reshape(shape).copy()

    mask = None
    if header.get("mask") is not None:
        try:
            mask = _mask_from_header(header["mask"])
        except (KeyError, ValueError, TypeError) as e:
            raise KspFormatError(f"invalid mask block in header: {e}") from e
    return KspContainer(data=data, mask=mask, meta=header.get("meta") or {}, dtype=dtype)


def write_pgm(
    img: np.ndarray,
    path,
    normalization: str = "minmax",
    vrange: Optional[tuple[float, float]] = None,
) -> None:
    """Write a real image as a 16-bit binary PGM plus a sidecar note.

    ``normalization`` is "minmax" (a constant image maps to all zeros) or
    "fixed" with an explicit ``vrange=(lo, hi)``; values are clipped. The
    applied normalization is recorded in ``<path>.norm.txt``.
    """
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2:
        raise ValueError(f"expected a 2D image, got shape {img.shape}")
    if normalization == "minmax":
        lo, hi = float(img.min()), float(img.max())
    elif normalization == "fixed":
        if vrange is None:
            raise ValueError("fixed normalization requires vrange=(lo, hi)")
        lo, hi = float(vrange[0]), float(vrange[1])
        if hi <= lo:
            raise ValueError(f"vrange must be increasing, got {vrange}")
    else:
        raise ValueError(f"normalization must be 'minmax' or 'fixed', got {normalization!r}")

    if hi > lo:
        scaled = np.clip((img - lo) / (hi - lo), 0.0, 1.0)
    else:
        scaled = np.zeros_like(img)
    pixels = np.round(scaled * 65535.0).astype(">u2")

    h, w = img.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{w} {h}\n65535\n".encode("ascii"))
        f.write(pixels.tobytes(order="C"))
    with open(f"{path}.norm.txt", "w", encoding="ascii") as f:
        f.write(f"normalization={normalization}\nvmin={lo!r}\nvmax={hi!r}\n")


REPORT_COLUMNS = [
    "group",
    "acceleration",
    "slice",
    "ssim",
    "psnr",
    "nmse",
    "hf_nmse",
    "eagle",
    "fidelity",
    "reg",
    "total",
]

TOTALS_GROUP = "TOTAL"


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(float(value))  # plain-float repr even for numpy scalars
    return str(value)


def _row_key(row: dict):
    group = str(row.get("group", ""))
    return (
        group == TOTALS_GROUP,
        group,
        str(row.get("acceleration", "")),
        str(row.get("slice", "")),
    )


def write_report(rows: Sequence[dict], path) -> None:
    """Write metric/loss rows as CSV with a fixed header.

    Rows are ordered by (group, acceleration, slice); a ``TOTAL`` group
    row sorts last. Floats are written with full round-trip precision so
    identical inputs produce byte-identical files.
    """
    ordered = sorted(rows, key=_row_key)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(REPORT_COLUMNS)
        for row in ordered:
            writer.writerow([_cell(row.get(col)) for col in REPORT_COLUMNS])
