"""Draw segment sets over a base map raster with matplotlib.

The figure is sized so one figure pixel is one raster pixel (72 dpi, so a
line width in points is also in pixels) and the raster is placed with
``figimage``, which copies it without resampling. With no segments the PNG
output is the base map pixel for pixel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.colors import CSS4_COLORS  # noqa: E402
from matplotlib.lines import Line2D  # noqa: E402
from PIL import Image  # noqa: E402

from .pathmap import MplsFlag  # noqa: E402

DPI = 72


class RenderError(Exception):
    pass


class MissingMap(RenderError):
    pass


class OutOfBounds(RenderError):
    pass


class BadColor(RenderError):
    pass


def resolve_color(name: str) -> tuple[int, int, int]:
    text = name.strip()
    if not text.startswith("#"):
        text = CSS4_COLORS.get(text.lower(), "")
    if len(text) == 7 and text[0] == "#":
        try:
            return int(text[1:3], 16), int(text[3:5], 16), int(text[5:7], 16)
        except ValueError:
            pass
    raise BadColor(f"unknown color {name!r}")


@dataclass
class RenderConfig:
    base_map: Path
    line_color: str = "blue"
    mpls_explicit_color: str = "red"
    mpls_invisible_color: str = "orange"
    proportional: bool = False
    min_thickness_px: int = 1
    max_thickness_px: int = 12
    output_format: str = "png"

    def __post_init__(self):
        if not 0 < self.min_thickness_px <= self.max_thickness_px:
            raise ValueError("need 0 < min_thickness_px <= max_thickness_px")
        if self.output_format not in ("png", "svg"):
            raise ValueError(f"unsupported output format {self.output_format!r}")
        for c in (self.line_color, self.mpls_explicit_color, self.mpls_invisible_color):
            resolve_color(c)

    def color_for(self, flag: MplsFlag) -> tuple[int, int, int]:
        if flag is MplsFlag.EXPLICIT:
            return resolve_color(self.mpls_explicit_color)
        if flag is MplsFlag.INVISIBLE_CANDIDATE:
            return resolve_color(self.mpls_invisible_color)
        return resolve_color(self.line_color)


def thickness(occurrences: int, max_occurrences: int, cfg: RenderConfig) -> int:
    if not cfg.proportional or max_occurrences <= 0:
        return cfg.min_thickness_px
    span = cfg.max_thickness_px - cfg.min_thickness_px
    return cfg.min_thickness_px + math.floor(occurrences / max_occurrences * span + 0.5)


def load_base_map(path) -> np.ndarray:
    try:
        with Image.open(path) as im:
            return np.asarray(im.convert("RGBA"))
    except (FileNotFoundError, IsADirectoryError):
        raise MissingMap(f"map not found: {path}") from None
    except OSError as e:
        raise MissingMap(f"cannot read map {path}: {e}") from None


def draw_order(segments):
    return sorted(segments, key=lambda s: (s.occurrences, s.key))


def render_map(segments, cfg: RenderConfig, out) -> None:
    base = load_base_map(cfg.base_map)
    height, width = base.shape[:2]
    ordered = draw_order(segments)
    for s in ordered:
        for x, y in ((s.x1, s.y1), (s.x2, s.y2)):
            if not (0 <= x < width and 0 <= y < height):
                raise OutOfBounds(f"{s.country_a}-{s.country_b}: point ({x}, {y}) outside {width}x{height}")
    max_occ = max((s.occurrences for s in ordered), default=0)

    with plt.rc_context({"svg.hashsalt": "tracemap", "svg.fonttype": "none", "path.simplify": False}):
        fig = plt.figure(figsize=(width / DPI, height / DPI), dpi=DPI)
        try:
            fig.figimage(base, 0, 0, origin="upper", resize=False)
            for s in ordered:
                rgb = cfg.color_for(s.mpls)
                line = Line2D(
                    [s.x1, s.x2],
                    # figure pixels count from the bottom, raster rows from the top
                    [height - s.y1, height - s.y2],
                    transform=None,
                    linewidth=thickness(s.occurrences, max_occ, cfg),
                    color=tuple(c / 255 for c in rgb),
                    solid_capstyle="round",
                )
                line.set_gid(f"seg-{s.country_a}-{s.country_b}")
                fig.add_artist(line)
            metadata = {"Date": None} if cfg.output_format == "svg" else None
            fig.savefig(out, format=cfg.output_format, dpi=DPI, metadata=metadata)
        finally:
            plt.close(fig)
