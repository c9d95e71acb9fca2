"""Equirectangular to horizontal-cubemap-strip projection.

Only the four horizontal faces are produced, concatenated left, front,
right, back. Each face is a 90 degree gnomonic view at zero elevation;
within a face u grows to the viewer's right (decreasing azimuth) and v grows
downwards.
"""
import math
from dataclasses import dataclass

import numpy as np

from . import kernels

FACE_CENTERS = (90.0, 0.0, -90.0, 180.0)
FACE_NAMES = ("left", "front", "right", "back")
FACE_SIZE = 224


@dataclass(frozen=True)
class CubemapStrip:
    image: np.ndarray  # (face_size, 4 * face_size[, C])
    face_size: int = FACE_SIZE

    def face(self, k):
        s = self.face_size
        return self.image[:, k * s : (k + 1) * s]


def _wrap(a):
    return (a + 180.0) % 360.0 - 180.0


def dir_to_cubemap(az, el):
    """Return (face, u, v) for a direction, or None when it leaves through the top or bottom face."""
    az = _wrap(float(az))
    face = int(math.floor((135.0 - az) / 90.0)) % 4
    off = math.radians(_wrap(az - FACE_CENTERS[face]))
    a = -math.tan(off)
    b = math.tan(math.radians(el)) / math.cos(off)
    if abs(b) > 1.0:
        return None
    return face, (1.0 + a) / 2.0, (1.0 - b) / 2.0


def cubemap_to_dir(face, u, v):
    """Inverse of :func:`dir_to_cubemap`; works elementwise on arrays of u, v."""
    a = 2.0 * np.asarray(u, dtype=float) - 1.0
    b = 1.0 - 2.0 * np.asarray(v, dtype=float)
    az = FACE_CENTERS[face] - np.degrees(np.arctan(a))
    el = np.degrees(np.arctan(b / np.sqrt(1.0 + a * a)))
    az = _wrap(az)
    if np.ndim(az) == 0:
        return float(az), float(el)
    return az, el


def strip_directions(face_size=FACE_SIZE):
    """Azimuth/elevation of every pixel center of the strip, each (S, 4S)."""
    s = face_size
    centers = (np.arange(s) + 0.5) / s
    u, v = np.meshgrid(centers, centers)
    az = np.empty((s, 4 * s))
    el = np.empty((s, 4 * s))
    for k in range(4):
        az[:, k * s : (k + 1) * s], el[:, k * s : (k + 1) * s] = cubemap_to_dir(k, u, v)
    return az, el


def equirect_to_cubemap(image, face_size=FACE_SIZE, backend=None):
    """Resample a 2:1 equirectangular frame (RGB or single channel) onto the strip."""
    image = np.asarray(image)
    h, w = image.shape[:2]
    if w != 2 * h:
        raise ValueError(f"equirectangular frame must be 2:1, got {w}x{h}")
    az, el = strip_directions(face_size)
    # fractional pixel-center coordinates under the augment pixel convention
    cols = (180.0 - az) / 360.0 * w - 0.5
    rows = (90.0 - el) / 180.0 * h - 0.5
    src = image[..., None] if image.ndim == 2 else image
    out = kernels.remap_bilinear(src, rows, cols, backend)
    if image.ndim == 2:
        out = out[..., 0]
    if np.issubdtype(image.dtype, np.integer):
        info = np.iinfo(image.dtype)
        out = np.clip(np.rint(out), info.min, info.max).astype(image.dtype)
    return CubemapStrip(out, face_size)
