"""File formats: EIKF v1 fields, CSV export, PGM images, key=value reports.

EIKF v1 is a single ASCII header line

    EIKF 1 <ndims> <dim0> [dim1] <origin...> <spacing...>\n

followed by the node values as little-endian IEEE float64, row-major.
Floats in headers, CSV, and key=value files are printed with %.17g so that
round-trips are bit exact.
"""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np

from .field import GridSpec, ScalarField

_F = "%.17g"


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return _F % float(x)
    if isinstance(x, (list, tuple)):
        return ",".join(_fmt(v) for v in x)
    return str(x)


def write_field(path, f: ScalarField) -> None:
    g = f.grid
    parts = ["EIKF", "1", str(g.ndim)]
    parts += [str(d) for d in g.dims]
    parts += [_F % o for o in g.origin]
    parts += [_F % s for s in g.spacing]
    header = " ".join(parts) + "\n"
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(np.ascontiguousarray(f.values, dtype="<f8").tobytes())


def read_field(path) -> ScalarField:
    with open(path, "rb") as fh:
        header = bytearray()
        while True:
            c = fh.read(1)
            if not c:
                raise ValueError(f"{path}: truncated EIKF header")
            if c == b"\n":
                break
            header.extend(c)
            if len(header) > 4096:
                raise ValueError(f"{path}: EIKF header too long")
        payload = fh.read()
    tok = header.decode("ascii").split()
    if len(tok) < 3 or tok[0] != "EIKF" or tok[1] != "1":
        raise ValueError(f"{path}: not an EIKF v1 file")
    nd = int(tok[2])
    if nd not in (1, 2):
        raise ValueError(f"{path}: unsupported ndims {nd}")
    want = 3 + 3 * nd
    if len(tok) != want:
        raise ValueError(f"{path}: malformed EIKF header ({len(tok)} tokens, want {want})")
    dims = tuple(int(t) for t in tok[3 : 3 + nd])
    origin = tuple(float(t) for t in tok[3 + nd : 3 + 2 * nd])
    spacing = tuple(float(t) for t in tok[3 + 2 * nd : 3 + 3 * nd])
    grid = GridSpec(dims, origin, spacing)
    n = grid.num_nodes
    if len(payload) != 8 * n:
        raise ValueError(f"{path}: expected {8 * n} payload bytes, got {len(payload)}")
    values = np.frombuffer(payload, dtype="<f8").astype(np.float64).reshape(dims)
    return ScalarField(grid, values)


def write_field_csv(path, f: ScalarField) -> None:
    vals = f.values if f.grid.ndim == 2 else f.values.reshape(1, -1)
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        for row in vals:
            fh.write(",".join(_F % v for v in row))
            fh.write("\n")


def write_pgm(path, pixels: np.ndarray, maxval: int = 255, binary: bool = True) -> None:
    px = np.asarray(pixels)
    if px.ndim != 2:
        raise ValueError("PGM pixels must be 2D")
    if np.issubdtype(px.dtype, np.floating):
        px = np.rint(np.clip(px, 0, maxval)).astype(np.uint16)
    if px.min() < 0 or px.max() > maxval:
        raise ValueError("pixel values outside [0, maxval]")
    h, w = px.shape
    if binary:
        if maxval > 255:
            raise ValueError("binary P5 writer supports maxval <= 255 only")
        with open(path, "wb") as fh:
            fh.write(f"P5\n{w} {h}\n{maxval}\n".encode("ascii"))
            fh.write(px.astype(np.uint8).tobytes())
    else:
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write(f"P2\n{w} {h}\n{maxval}\n")
            for row in px:
                fh.write(" ".join(str(int(v)) for v in row))
                fh.write("\n")


def read_pgm(path) -> tuple[np.ndarray, int]:
    """Returns (pixels as int array of shape (rows, cols), maxval).
    Supports P2 (ASCII) and P5 (binary), with # comments in the header."""
    data = Path(path).read_bytes()
    buf = io.BytesIO(data)

    def next_token():
        tok = bytearray()
        while True:
            c = buf.read(1)
            if not c:
                raise ValueError(f"{path}: truncated PGM header")
            if c == b"#":
                while c and c != b"\n":
                    c = buf.read(1)
                continue
            if c.isspace():
                if tok:
                    return bytes(tok)
                continue
            tok.extend(c)

    magic = next_token()
    if magic not in (b"P2", b"P5"):
        raise ValueError(f"{path}: not a PGM (P2/P5) file")
    w = int(next_token())
    h = int(next_token())
    maxval = int(next_token())
    if w <= 0 or h <= 0 or not (0 < maxval < 65536):
        raise ValueError(f"{path}: bad PGM dimensions/maxval")
    if magic == b"P5":
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        need = w * h * dtype.itemsize
        raw = buf.read(need)
        if len(raw) != need:
            raise ValueError(f"{path}: truncated PGM payload")
        px = np.frombuffer(raw, dtype=dtype).reshape(h, w).astype(np.int64)
    else:
        text = buf.read().decode("ascii")
        vals = [int(t) for t in text.split()]
        if len(vals) != w * h:
            raise ValueError(f"{path}: expected {w * h} pixels, got {len(vals)}")
        px = np.array(vals, dtype=np.int64).reshape(h, w)
    if px.min() < 0 or px.max() > maxval:
        raise ValueError(f"{path}: pixel values exceed maxval")
    return px, maxval


def write_kv(path, items: dict) -> None:
    """Flat `key = value` text file (one line per key, insertion order)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for k, v in items.items():
            fh.write(f"{k} = {_fmt(v)}\n")


def read_kv(path) -> dict[str, str]:
    out: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}: malformed line {line!r}")
            k, v = line.split("=", 1)
            out[k.strip()] = v.strip()
    return out
