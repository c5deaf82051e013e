"""Raster regeneration of the one-dimensional volume maps and the 2-D Canberra balls.

Figures are written as SVG files holding inline PNG rasters (encoded here with
``zlib``) next to the raw CSV grids, so no plotting library is needed.
"""

from __future__ import annotations

import base64
import os
import struct
import zlib
from dataclasses import dataclass, field

import numpy as np

from . import ballgeom
from . import distances as dist
from .errors import InvalidParameter
from .io import atomic_write_bytes, atomic_write_text, csv_text

MIN_RESOLUTION = 64
FIG1_X = (0.0, 10.0)
FIG1_T = (0.0, 0.1)
FIG2_UPPER = [((10.0, 1.0), 1.0), ((10.0, 10.0), 1.0), ((5.0, 5.0), 1.0), ((50.0, 10.0), 1.0)]
FIG2_LOWER = [((10.0, 10.0), r) for r in (0.8, 0.6, 0.4, 0.2)]
# endpoints of the linear color ramp on log-volume (dark violet to yellow)
RAMP_LOW = np.array([68, 1, 84], dtype=float)
RAMP_HIGH = np.array([253, 231, 37], dtype=float)


@dataclass
class Panel:
    name: str
    params: dict
    x: np.ndarray
    y: np.ndarray
    values: np.ndarray  # shape (len(y), len(x)); row 0 is the smallest y


@dataclass
class Figure:
    name: str
    panels: list
    files: list = field(default_factory=list)


def cell_centers(lo, hi, n):
    return lo + (np.arange(n) + 0.5) * (hi - lo) / n


def _check_resolution(resolution):
    if int(resolution) < MIN_RESOLUTION:
        raise InvalidParameter(f"resolution must be at least {MIN_RESOLUTION}")
    return int(resolution)


def fig1(resolution=256):
    """Ball volumes ``Phi(x, t)`` in 1-D for Canberra and Euclidean distances."""
    n = _check_resolution(resolution)
    x = cell_centers(*FIG1_X, n)
    t = cell_centers(*FIG1_T, n)
    lo, hi = ballgeom.canberra_interval(x[None, :], t[:, None])
    canberra = hi - lo
    euclid = np.broadcast_to(ballgeom.unit_ball_volume(2, 1) * t[:, None], canberra.shape).copy()
    params = {"x_range": list(FIG1_X), "t_range": list(FIG1_T)}
    return Figure(
        "fig1",
        [
            Panel("canberra", dict(params, distance="canberra"), x, t, canberra),
            Panel("euclidean", dict(params, distance="l2"), x, t, euclid),
        ],
    )


def fig2(resolution=256):
    """Membership rasters of 2-D Canberra balls on the window ``[0, 3c1] x [0, 3c2]``."""
    n = _check_resolution(resolution)
    spec = dist.DistanceSpec.canberra(dim=2)
    panels = []
    for i, (center, radius) in enumerate(FIG2_UPPER + FIG2_LOWER):
        c = np.asarray(center)
        x = cell_centers(0.0, 3 * c[0], n)
        y = cell_centers(0.0, 3 * c[1], n)
        grid = np.stack(np.meshgrid(x, y, indexing="xy"), axis=-1)
        inside = dist._raw(spec, c, grid) < radius
        name = f"{'upper' if i < 4 else 'lower'}{i % 4 + 1}"
        panels.append(Panel(name, {"center": list(center), "t": radius}, x, y, inside))
    return Figure("fig2", panels)


BUILDERS = {"fig1": fig1, "fig2": fig2}


# encoding ------------------------------------------------------------------------


def png_bytes(rgb):
    """Minimal truecolor PNG for an ``(h, w, 3)`` uint8 array."""
    rgb = np.ascontiguousarray(rgb, dtype=np.uint8)
    h, w, _ = rgb.shape
    raw = b"".join(b"\x00" + rgb[row].tobytes() for row in range(h))

    def chunk(tag, data):
        body = tag + data
        return struct.pack(">I", len(data)) + body + struct.pack(">I", zlib.crc32(body) & 0xFFFFFFFF)

    header = struct.pack(">IIBBBBB", w, h, 8, 2, 0, 0, 0)
    return b"\x89PNG\r\n\x1a\n" + chunk(b"IHDR", header) + chunk(b"IDAT", zlib.compress(raw, 9)) + chunk(b"IEND", b"")


def log_ramp(values, vmin, vmax):
    """Map positive ``values`` linearly in ``log`` onto the color ramp."""
    lv = np.log(values)
    lo, hi = np.log(vmin), np.log(vmax)
    s = np.clip((lv - lo) / (hi - lo), 0.0, 1.0) if hi > lo else np.zeros_like(lv)
    return (RAMP_LOW + s[..., None] * (RAMP_HIGH - RAMP_LOW)).round().astype(np.uint8)


def _binary(values):
    return np.where(values[..., None], 20, 235).repeat(3, axis=-1).astype(np.uint8)


def svg_text(figure, images, cols):
    size, pad, title = 256, 12, 18
    rows = -(-len(images) // cols)
    width = cols * (size + pad) + pad
    height = rows * (size + pad + title) + pad
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f"<title>{figure.name}</title>",
    ]
    for i, (panel, png) in enumerate(zip(figure.panels, images)):
        x0 = pad + (i % cols) * (size + pad)
        y0 = pad + (i // cols) * (size + pad + title)
        label = panel.name + " " + ", ".join(f"{k}={v}" for k, v in sorted(panel.params.items()))
        href = "data:image/png;base64," + base64.b64encode(png).decode("ascii")
        parts.append(f'<text x="{x0}" y="{y0 + 12}" font-size="10" font-family="sans-serif">{label}</text>')
        parts.append(
            f'<image x="{x0}" y="{y0 + title}" width="{size}" height="{size}" '
            f'preserveAspectRatio="none" style="image-rendering:pixelated" href="{href}"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def grid_csv(panel, row_label):
    header = [f"{row_label}\\x"] + [repr(float(v)) for v in panel.x]
    values = panel.values.astype(int) if panel.values.dtype == bool else panel.values
    rows = [[float(yv), *row] for yv, row in zip(panel.y, values)]
    return csv_text(header, rows)


def write_figure(figure, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    # grids are stored with the smallest t / y first; images put it at the bottom
    if figure.name == "fig1":
        vals = np.concatenate([p.values.ravel() for p in figure.panels])
        vmin, vmax = float(vals.min()), float(vals.max())
        images = [png_bytes(log_ramp(p.values[::-1], vmin, vmax)) for p in figure.panels]
        cols, row_label = 2, "t"
    else:
        images = [png_bytes(_binary(p.values[::-1])) for p in figure.panels]
        cols, row_label = 4, "y"
    files = []
    for panel in figure.panels:
        path = os.path.join(out_dir, f"{figure.name}_{panel.name}.csv")
        atomic_write_text(path, grid_csv(panel, row_label))
        files.append(path)
    svg = os.path.join(out_dir, f"{figure.name}.svg")
    atomic_write_bytes(svg, svg_text(figure, images, cols).encode("utf-8"))
    files.append(svg)
    figure.files = files
    return files


def regenerate(which, resolution=256, out_dir="figures"):
    if which not in BUILDERS:
        raise InvalidParameter(f"unknown figure {which!r}")
    figure = BUILDERS[which](resolution)
    write_figure(figure, out_dir)
    return figure
