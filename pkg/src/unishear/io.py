"""
File formats.

Raw image (``.raw``)
    Five ASCII header lines ``N=<int>``, ``J=<int>`` or ``j=<int>``,
    ``T=<float repr>``, ``rho=<float repr>``, ``h=<float repr>``, each ended by
    ``\\n``, followed by ``N*N`` little-endian float64 values in row-major
    order (``f[i1, i2]``, axis 1 fastest).

Graymap (``.pgm``)
    Binary PGM (``P5``), 8 bits, min-max scaled.  Export only; the scaling
    loses the dynamic range.

Coefficient dump (``.unsh``)
    Little-endian.  Bytes 0-3 ``b"UNSH"``, then uint32 version (1), uint32
    N, uint32 J, uint32 band count B.  Then B complex128 arrays of shape
    ``N x N`` in row-major order, one per band, in coefficient-band order
    (coarse, the shearlet bands, completion last).
"""

import struct

import numpy as np

MAGIC = b"UNSH"
VERSION = 1
RAW_KEYS = ("N", "J", "T", "rho", "h")


class FormatError(ValueError):
    pass


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_raw(path, image, header=None):
    """Write a square float64 image with its 5-line header.

    ``header`` may carry ``N``, ``J`` (or ``j``), ``T``, ``rho`` and ``h``;
    ``N`` defaults to the image size and the rest to ``0``.
    """
    img = np.ascontiguousarray(image, dtype="<f8")
    if img.ndim != 2 or img.shape[0] != img.shape[1]:
        raise FormatError(f"expected a square image, got shape {img.shape}")
    header = dict(header or {})
    N = int(header.get("N", img.shape[0]))
    if N != img.shape[0]:
        raise FormatError("header N does not match the image")
    scale_key = "j" if "j" in header else "J"
    lines = [
        f"N={N}",
        f"{scale_key}={int(header.get(scale_key, 0))}",
        f"T={_fmt(float(header.get('T', 0.0)))}",
        f"rho={_fmt(float(header.get('rho', 0.0)))}",
        f"h={_fmt(float(header.get('h', 0.0)))}",
    ]
    with open(path, "wb") as fh:
        fh.write(("\n".join(lines) + "\n").encode("ascii"))
        fh.write(img.tobytes())


def read_raw(path):
    """Inverse of ``write_raw``; returns ``(image, header)``."""
    with open(path, "rb") as fh:
        header = {}
        for expected in ("N", ("J", "j"), "T", "rho", "h"):
            line = fh.readline().decode("ascii", errors="replace").strip()
            key, sep, val = line.partition("=")
            ok = key in expected if isinstance(expected, tuple) else key == expected
            if not sep or not ok:
                raise FormatError(f"{path}: bad header line {line!r}")
            header[key] = int(val) if key in ("N", "J", "j") else float(val)
        N = header["N"]
        body = fh.read()
    if len(body) != 8 * N * N:
        raise FormatError(f"{path}: expected {8 * N * N} data bytes, found {len(body)}")
    return np.frombuffer(body, dtype="<f8").reshape(N, N).astype(float), header


def to_gray8(image):
    """Min-max scale to uint8; a constant image maps to 0."""
    img = np.asarray(image, dtype=float)
    lo, hi = float(img.min()), float(img.max())
    if hi <= lo:
        return np.zeros(img.shape, dtype=np.uint8)
    return np.round((img - lo) * (255.0 / (hi - lo))).astype(np.uint8)


def write_pgm(path, image, scale=True):
    """Binary 8-bit PGM.  ``scale=False`` expects a uint8 array already."""
    g = to_gray8(image) if scale else np.asarray(image, dtype=np.uint8)
    if g.ndim != 2:
        raise FormatError("PGM needs a 2-d array")
    with open(path, "wb") as fh:
        fh.write(f"P5\n{g.shape[1]} {g.shape[0]}\n255\n".encode("ascii"))
        fh.write(np.ascontiguousarray(g).tobytes())


def read_pgm(path):
    """Read a binary 8-bit PGM written by ``write_pgm``."""
    with open(path, "rb") as fh:
        data = fh.read()
    tokens, pos = [], 0
    while len(tokens) < 4:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            pos = data.index(b"\n", pos) + 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    if tokens[0] != b"P5" or int(tokens[3]) != 255:
        raise FormatError(f"{path}: not an 8-bit binary PGM")
    w, h = int(tokens[1]), int(tokens[2])
    pixels = data[pos + 1:pos + 1 + w * h]
    if len(pixels) != w * h:
        raise FormatError(f"{path}: truncated pixel data")
    return np.frombuffer(pixels, dtype=np.uint8).reshape(h, w).copy()


def write_coefficients(path, coeffs, N, J):
    """Dump a ``(B, N, N)`` complex coefficient stack."""
    c = np.ascontiguousarray(coeffs, dtype="<c16")
    if c.ndim != 3 or c.shape[1:] != (N, N):
        raise FormatError(f"expected shape (B, {N}, {N}), got {c.shape}")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<4I", VERSION, N, J, c.shape[0]))
        fh.write(c.tobytes())


def read_coefficients(path):
    """Returns ``(coeffs, N, J)``."""
    with open(path, "rb") as fh:
        head = fh.read(20)
        if len(head) != 20 or head[:4] != MAGIC:
            raise FormatError(f"{path}: missing UNSH header")
        version, N, J, B = struct.unpack("<4I", head[4:])
        if version != VERSION:
            raise FormatError(f"{path}: unsupported version {version}")
        body = fh.read()
    if len(body) != 16 * B * N * N:
        raise FormatError(f"{path}: expected {16 * B * N * N} data bytes, found {len(body)}")
    return np.frombuffer(body, dtype="<c16").reshape(B, N, N).astype(complex), N, J


def write_mask(path, mask, header=None):
    """Mask indicator stored as a raw image of zeros and ones."""
    write_raw(path, np.asarray(mask, dtype=float), header)


def read_mask(path):
    img, header = read_raw(path)
    if not np.all((img == 0) | (img == 1)):
        raise FormatError(f"{path}: mask values must be 0 or 1")
    return img.astype(bool), header
