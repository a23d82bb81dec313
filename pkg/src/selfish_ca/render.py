"""Binary PPM (P6) images of spacetime diagrams: time runs down, tape runs right."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import SpacetimeDiagram

PALETTE = np.array([[255, 255, 255], [128, 128, 128], [0, 0, 0]], dtype=np.uint8)


@dataclass(frozen=True)
class ImageSpec:
    """``window`` is a half-open tape range and ``rows`` a half-open time range.

    Either defaults to the diagram's light cone / all rows when ``None``.
    """

    scale: int = 1
    window: tuple[int, int] | None = None
    rows: tuple[int, int] | None = None

    def __post_init__(self):
        if self.scale < 1:
            raise ValueError(f"scale must be >= 1, got {self.scale}")
        if self.window is not None and self.window[1] <= self.window[0]:
            raise ValueError(f"empty window {self.window}")
        if self.rows is not None and (self.rows[0] < 0 or self.rows[1] <= self.rows[0]):
            raise ValueError(f"invalid row range {self.rows}")


@dataclass(frozen=True)
class Image:
    data: bytes
    width: int
    height: int
    window: tuple[int, int]
    clipped: bool  # live cells fall outside the window

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(self.data)


def render_ppm(diagram: SpacetimeDiagram, spec: ImageSpec = ImageSpec()) -> Image:
    t0, t1 = spec.rows if spec.rows is not None else (0, len(diagram.rows))
    if t1 > len(diagram.rows):
        raise ValueError(f"row range {spec.rows} exceeds the {len(diagram.rows)} rows of the diagram")
    rows = diagram.rows[t0:t1]
    if spec.window is not None:
        start, stop = spec.window
    else:
        start, stop = diagram.light_cone()
        if stop <= start:
            start, stop = 0, 1
    clipped = any(not row.is_blank and (row.start < start or row.stop > stop) for row in rows)
    cells = np.stack([row.window(start, stop) for row in rows])
    pixels = PALETTE[cells]
    s = spec.scale
    if s > 1:
        pixels = pixels.repeat(s, axis=0).repeat(s, axis=1)
    height, width = pixels.shape[:2]
    header = f"P6\n{width} {height}\n255\n".encode("ascii")
    return Image(header + pixels.tobytes(), width, height, (start, stop), clipped)
