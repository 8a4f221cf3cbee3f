"""Equirectangular panorama geometry for candidate markers and the rear mask.

Only coordinates are computed; rendering is left to external tools.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..core import InvalidArgument, normalize_heading


@dataclass(frozen=True)
class PanoramaLayout:
    width_px: int = 1200
    height_px: int = 600
    rear_mask_alpha: float = 0.5
    rear_mask_halfwidth: float = math.pi / 3

    def __post_init__(self) -> None:
        if self.width_px <= 0 or self.height_px <= 0:
            raise InvalidArgument("panorama dimensions must be positive")
        if not (0.0 <= self.rear_mask_alpha <= 1.0):
            raise InvalidArgument("rear_mask_alpha must lie in [0, 1]")


def project_to_panorama(bearing: float, elevation: float, layout: PanoramaLayout) -> tuple[float, float]:
    """Pixel position of a direction; column 0 / width is straight behind."""
    if not (abs(elevation) < math.pi / 2):
        raise InvalidArgument(f"elevation must satisfy |e| < pi/2, got {elevation}")
    w, h = layout.width_px, layout.height_px
    px = (w * (0.5 + normalize_heading(bearing) / (2 * math.pi))) % w
    py = h * (0.5 - elevation / math.pi)
    return px, py


def rear_mask_region(layout: PanoramaLayout) -> tuple[tuple[int, int], tuple[int, int]]:
    """Two half-open column intervals covering bearings within the rear sector."""
    half = layout.rear_mask_halfwidth
    if not (0.0 <= half <= math.pi):
        raise InvalidArgument("rear_mask_halfwidth must lie in [0, pi]")
    w = layout.width_px
    # bearing -pi + half on the left edge, pi - half on the right edge
    left_end = round(w * (0.5 + (-math.pi + half) / (2 * math.pi)))
    right_start = round(w * (0.5 + (math.pi - half) / (2 * math.pi)))
    return (0, left_end), (right_start, w)


def column_in_mask(px: float, layout: PanoramaLayout) -> bool:
    (a0, a1), (b0, b1) = rear_mask_region(layout)
    return a0 <= px < a1 or b0 <= px < b1


def candidate_markers(waypoints, layout: PanoramaLayout) -> list[dict]:
    """Marker coordinates for each waypoint, flagged when inside the rear mask."""
    out = []
    for wp in waypoints:
        px, py = project_to_panorama(wp.bearing, 0.0, layout)
        out.append({"id": wp.id, "px": px, "py": py, "masked": column_in_mask(px, layout)})
    return out
