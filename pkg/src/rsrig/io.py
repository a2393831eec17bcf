"""File formats: correspondence CSV, bespoke flow binaries, binary
portable pixmaps, motion text files, and benchmark records.

Every reader rejects malformed input with a positioned error; every
format round-trips losslessly within its declared precision.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, fields

import numpy as np

from .core import Correspondence, ImagePoint, MotionEstimate, MotionModel
from .errors import (
    BadMagic,
    CorruptHeader,
    EmptyFile,
    ParseError,
    TruncatedData,
    UnsupportedFormat,
)
from .rectify import FlowField, Raster

__all__ = [
    "read_correspondences",
    "write_correspondences",
    "read_flow",
    "write_flow",
    "read_image",
    "write_image",
    "read_motion",
    "write_motion",
    "BenchmarkRecord",
    "write_benchmark_csv",
    "read_benchmark_csv",
]


# -------------------------------------------------------------- CSV matches

def write_correspondences(path, corrs) -> None:
    with open(path, "w") as fh:
        fh.write("u1,v1,u2,v2\n")
        for c in corrs:
            fh.write(
                f"{float(c.first.u)!r},{float(c.first.v)!r},"
                f"{float(c.second.u)!r},{float(c.second.v)!r}\n"
            )


def read_correspondences(path) -> list[Correspondence]:
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise EmptyFile(f"{path}: empty correspondence file")
    if lines[0].strip() != "u1,v1,u2,v2":
        raise ParseError(f"{path}:1: expected header 'u1,v1,u2,v2'")
    out = []
    for ln, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 4:
            raise ParseError(f"{path}:{ln}: expected 4 comma-separated values")
        try:
            vals = [float(p) for p in parts]
        except ValueError as exc:
            raise ParseError(f"{path}:{ln}: {exc}") from exc
        out.append(
            Correspondence(ImagePoint(vals[0], vals[1]), ImagePoint(vals[2], vals[3]))
        )
    if not out:
        raise EmptyFile(f"{path}: no correspondences")
    return out


# -------------------------------------------------------------------- flow

_FLOW_MAGIC = b"RSFLOW"


def write_flow(path, flow: FlowField) -> None:
    data = flow.flow.astype("<f4").copy()
    data[~flow.valid] = np.nan
    with open(path, "wb") as fh:
        fh.write(f"RSFLOW {flow.width} {flow.height}\n".encode())
        fh.write(data.tobytes())


def read_flow(path) -> FlowField:
    with open(path, "rb") as fh:
        blob = fh.read()
    if not blob.startswith(_FLOW_MAGIC + b" "):
        raise BadMagic(f"{path}: not an RSFLOW file")
    nl = blob.find(b"\n")
    if nl < 0:
        raise CorruptHeader(f"{path}: unterminated header")
    try:
        _, w_s, h_s = blob[:nl].split()
        w, h = int(w_s), int(h_s)
    except ValueError as exc:
        raise CorruptHeader(f"{path}: bad header {blob[:nl]!r}") from exc
    payload = blob[nl + 1 :]
    need = w * h * 2 * 4
    if len(payload) < need:
        raise TruncatedData(f"{path}: need {need} payload bytes, have {len(payload)}")
    arr = np.frombuffer(payload[:need], dtype="<f4").reshape(h, w, 2).astype(float)
    valid = ~np.isnan(arr).any(axis=2)
    arr = np.where(valid[..., None], arr, 0.0)
    return FlowField(arr, valid)


# ------------------------------------------------------------------ images

def _read_pnm_tokens(blob: bytes, count: int, path) -> tuple[list[int], int]:
    """Parse whitespace/comment-separated header integers; returns offset."""
    toks: list[int] = []
    i = 0
    while len(toks) < count:
        if i >= len(blob):
            raise CorruptHeader(f"{path}: header ended early")
        c = blob[i : i + 1]
        if c == b"#":
            while i < len(blob) and blob[i : i + 1] != b"\n":
                i += 1
        elif c.isspace():
            i += 1
        else:
            j = i
            while j < len(blob) and not blob[j : j + 1].isspace():
                j += 1
            try:
                toks.append(int(blob[i:j]))
            except ValueError as exc:
                raise CorruptHeader(f"{path}: bad header token {blob[i:j]!r}") from exc
            i = j
    return toks, i + 1  # single whitespace after maxval


def read_image(path) -> Raster:
    with open(path, "rb") as fh:
        blob = fh.read()
    magic = blob[:2]
    if magic in (b"P1", b"P2", b"P3"):
        raise UnsupportedFormat(f"{path}: ASCII PNM is not supported")
    if magic not in (b"P5", b"P6"):
        raise UnsupportedFormat(f"{path}: unknown magic {magic!r}")
    channels = 3 if magic == b"P6" else 1
    (w, h, maxval), off = _read_pnm_tokens(blob[2:], 3, path)
    off += 2
    if maxval not in (255, 65535):
        raise UnsupportedFormat(f"{path}: maxval {maxval} not supported")
    itemsize = 1 if maxval == 255 else 2
    need = w * h * channels * itemsize
    if len(blob) - off < need:
        raise TruncatedData(f"{path}: need {need} pixel bytes, have {len(blob) - off}")
    dt = np.uint8 if maxval == 255 else ">u2"
    arr = np.frombuffer(blob[off : off + need], dtype=dt).astype(float) / maxval
    arr = arr.reshape((h, w) if channels == 1 else (h, w, 3))
    return Raster(arr)


def write_image(path, img: Raster) -> None:
    magic = b"P6" if img.channels == 3 else b"P5"
    data = np.clip(np.round(img.samples * 255.0), 0, 255).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(magic + f"\n{img.width} {img.height}\n255\n".encode())
        fh.write(data.tobytes())


# ------------------------------------------------------------------ motion

def write_motion(path, motion: MotionEstimate) -> None:
    with open(path, "w") as fh:
        fh.write(f"model {motion.model.value}\n")
        fh.write("omega " + " ".join(f"{x:.17g}" for x in motion.omega) + "\n")
        fh.write("t " + " ".join(f"{x:.17g}" for x in motion.t) + "\n")
        fh.write(f"scale_known {int(motion.scale_known)}\n")


def read_motion(path) -> MotionEstimate:
    vals: dict = {}
    with open(path) as fh:
        for ln, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            key, rest = parts[0], parts[1:]
            if key == "model":
                try:
                    vals["model"] = MotionModel(rest[0])
                except (ValueError, IndexError) as exc:
                    raise ParseError(f"{path}:{ln}: unknown model tag") from exc
            elif key in ("omega", "t"):
                if len(rest) != 3:
                    raise ParseError(f"{path}:{ln}: {key} needs 3 components")
                try:
                    vals[key] = np.array([float(x) for x in rest])
                except ValueError as exc:
                    raise ParseError(f"{path}:{ln}: {exc}") from exc
            elif key == "scale_known":
                vals["scale_known"] = bool(int(rest[0]))
            else:
                raise ParseError(f"{path}:{ln}: unknown key {key!r}")
    missing = {"model", "omega", "t", "scale_known"} - set(vals)
    if missing:
        raise ParseError(f"{path}: missing keys {sorted(missing)}")
    return MotionEstimate(vals["omega"], vals["t"], vals["model"], vals["scale_known"])


# --------------------------------------------------------------- benchmark

@dataclass(frozen=True)
class BenchmarkRecord:
    """One benchmark measurement; one CSV row."""

    solver: str
    variant: str
    omega_deg_per_frame: float
    trans_frac_per_frame: float
    sigma_px: float
    baseline_ratio: float
    seed: int
    median_err_px: float
    mean_err_px: float
    p90_err_px: float
    runtime_us: float


_BENCH_FIELDS = [f.name for f in fields(BenchmarkRecord)]


def write_benchmark_csv(path, records, metadata: dict | None = None) -> None:
    with open(path, "w") as fh:
        for k, v in (metadata or {}).items():
            fh.write(f"# {k}={v}\n")
        fh.write(",".join(_BENCH_FIELDS) + "\n")
        for r in records:
            fh.write(
                ",".join(
                    str(getattr(r, name))
                    if name in ("solver", "variant", "seed")
                    else f"{getattr(r, name):.9g}"
                    for name in _BENCH_FIELDS
                )
                + "\n"
            )


def read_benchmark_csv(path) -> tuple[list[BenchmarkRecord], dict]:
    meta: dict = {}
    records: list[BenchmarkRecord] = []
    with open(path) as fh:
        lines = fh.read().splitlines()
    body = []
    for line in lines:
        if line.startswith("#"):
            k, _, v = line[1:].strip().partition("=")
            meta[k.strip()] = v.strip()
        elif line.strip():
            body.append(line)
    if not body:
        raise EmptyFile(f"{path}: no records")
    if body[0] != ",".join(_BENCH_FIELDS):
        raise ParseError(f"{path}: unexpected header {body[0]!r}")
    for ln, line in enumerate(body[1:], start=2):
        parts = line.split(",")
        if len(parts) != len(_BENCH_FIELDS):
            raise ParseError(f"{path}:{ln}: expected {len(_BENCH_FIELDS)} fields")
        records.append(
            BenchmarkRecord(
                solver=parts[0],
                variant=parts[1],
                omega_deg_per_frame=float(parts[2]),
                trans_frac_per_frame=float(parts[3]),
                sigma_px=float(parts[4]),
                baseline_ratio=float(parts[5]),
                seed=int(parts[6]),
                median_err_px=float(parts[7]),
                mean_err_px=float(parts[8]),
                p90_err_px=float(parts[9]),
                runtime_us=float(parts[10]),
            )
        )
    return records, meta
