"""Little-endian binary field snapshots.

Layout: ``b"FNLS"``, u32 version, u32 d, u32 n, f64 l, f64 s, f64 p,
u8 sign (0 focusing, 1 defocusing), f64 t, then ``n**d`` complex128
values (re, im interleaved) in row-major physical order.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass

import numpy as np

from .grid import ComplexField, PhysParams, make_grid

MAGIC = b"FNLS"
VERSION = 1
HEADER = struct.Struct("<4sIIIdddBd")
_SIGNS = ("focusing", "defocusing")


class CheckpointError(ValueError):
    """Malformed or unsupported checkpoint file."""

    def __init__(self, message: str, *, path: str | os.PathLike | None = None, reason: str = "invalid"):
        super().__init__(message if path is None else f"{path}: {message}")
        self.path = path
        self.reason = reason


@dataclass(frozen=True)
class Checkpoint:
    field: ComplexField
    params: PhysParams
    t: float
    version: int = VERSION


def encode_checkpoint(u: ComplexField, t: float, params: PhysParams) -> bytes:
    g = u.grid
    head = HEADER.pack(MAGIC, VERSION, g.d, g.n, g.l, params.s, params.p, _SIGNS.index(params.sign), float(t))
    body = np.ascontiguousarray(u.physical(), dtype="<c16").tobytes(order="C")
    return head + body


def decode_checkpoint(blob: bytes, path=None) -> Checkpoint:
    if len(blob) < HEADER.size:
        raise CheckpointError(f"truncated header ({len(blob)} bytes, need {HEADER.size})", path=path, reason="size")
    magic, version, d, n, l, s, p, sign, t = HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise CheckpointError(f"bad magic {magic!r}, expected {MAGIC!r}", path=path, reason="magic")
    if version != VERSION:
        raise CheckpointError(
            f"unsupported format version {version} (this reader handles version {VERSION})", path=path, reason="version"
        )
    if sign > 1:
        raise CheckpointError(f"bad sign byte {sign}", path=path)
    try:
        grid = make_grid(d, n, l)
        params = PhysParams(s, p, _SIGNS[sign])
    except ValueError as exc:
        raise CheckpointError(f"invalid header: {exc}", path=path) from exc
    expected = HEADER.size + 16 * grid.size
    if len(blob) != expected:
        raise CheckpointError(f"size {len(blob)} does not match header (expected {expected})", path=path, reason="size")
    vals = np.frombuffer(blob, dtype="<c16", offset=HEADER.size).reshape(grid.shape)
    return Checkpoint(ComplexField(grid, vals.astype(np.complex128)), params, t, version)


def write_checkpoint(u: ComplexField, path, t: float, params: PhysParams) -> None:
    with open(path, "wb") as fh:
        fh.write(encode_checkpoint(u, t, params))


def read_checkpoint(path) -> Checkpoint:
    with open(path, "rb") as fh:
        blob = fh.read()
    return decode_checkpoint(blob, path)
