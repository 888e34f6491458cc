"""Deterministic CSV, PGM and SVG writers with atomic replacement."""
from __future__ import annotations

import csv
import io
import os
import tempfile

import numpy as np


def fmt(v) -> str:
    """Shortest round-trip decimal for floats; plain text otherwise."""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def atomic_write(path, data: bytes):
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_bytes(header, rows) -> bytes:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue().encode()


def write_csv(path, header, rows):
    atomic_write(path, csv_bytes(header, rows))


def pgm_bytes(sign) -> bytes:
    """Binary PGM of a sign map; row 0 of ``sign`` is the bottom of the image.

    Encoding: -1 -> 0, 0 -> 128, +1 -> 255.
    """
    sign = np.asarray(sign)
    img = np.full(sign.shape, 128, dtype=np.uint8)
    img[sign < 0] = 0
    img[sign > 0] = 255
    img = img[::-1]  # top row first
    h, w = img.shape
    return f"P5\n{w} {h}\n255\n".encode() + img.tobytes()


def write_pgm(path, sign):
    atomic_write(path, pgm_bytes(sign))


def read_pgm(path):
    with open(path, "rb") as fh:
        data = fh.read()
    parts = data.split(b"\n", 3)
    if parts[0] != b"P5":
        raise ValueError("not a binary PGM")
    w, h = map(int, parts[1].split())
    return np.frombuffer(parts[3], dtype=np.uint8).reshape(h, w)


def svg_bytes(polylines, box, stroke_width=None) -> bytes:
    """Polylines in plane units; the y axis is flipped by a group transform."""
    x0, x1, y0, y1 = box
    sw = stroke_width or 0.002 * max(x1 - x0, y1 - y0)
    out = [
        '<svg xmlns="http://www.w3.org/2000/svg" '
        f'viewBox="{fmt(x0)} {fmt(-y1)} {fmt(x1 - x0)} {fmt(y1 - y0)}">',
        f'<g transform="scale(1,-1)" fill="none" stroke="black" stroke-width="{fmt(sw)}">',
    ]
    for ln in polylines:
        pts = " ".join(f"{fmt(float(x))},{fmt(float(y))}" for x, y in ln)
        out.append(f'<polyline points="{pts}"/>')
    out.append("</g>")
    out.append("</svg>")
    return ("\n".join(out) + "\n").encode()


def write_svg(path, polylines, box):
    atomic_write(path, svg_bytes(polylines, box))


def grid_rows(grid):
    X, Y = np.meshgrid(grid.xs, grid.ys)
    for x, y, ins, lam, u, s in zip(
        X.ravel(), Y.ravel(), grid.inside.ravel(), grid.lam.ravel(), grid.u.ravel(), grid.sign.ravel()
    ):
        yield (float(x), float(y), bool(ins), float(lam), float(u), int(s))


GRID_HEADER = ("x1", "x2", "inside", "lambda", "u", "sign")
