from dataclasses import dataclass

import numpy as np

from .errors import InputError


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box, top-left corner plus extent, in pixels."""
    x: float
    y: float
    w: float
    h: float

    def __post_init__(self):
        vals = (self.x, self.y, self.w, self.h)
        if not all(np.isfinite(v) for v in vals):
            raise InputError(f"non-finite box {vals}")
        if self.w <= 0 or self.h <= 0:
            raise InputError(f"degenerate box {vals}: width and height must be positive")

    @classmethod
    def from_center(cls, cx, cy, w, h):
        return cls(cx - w / 2, cy - h / 2, w, h)

    @property
    def center(self):
        return (self.x + self.w / 2, self.y + self.h / 2)

    def as_tuple(self):
        return (self.x, self.y, self.w, self.h)

    def __iter__(self):
        return iter(self.as_tuple())
