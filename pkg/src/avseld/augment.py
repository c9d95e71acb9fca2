"""Audio channel swap (ACS) and its audio-visual extension (AVCS).

Each of the eight transforms maps a direction (az, el) to
(az_sign * az + az_offset, el_sign * el), realized on FOA audio as a signed
permutation of X/Y/Z and on equirectangular frames as exact flips and
column rolls.

Pixel convention: column c covers azimuth 180 - 360 * (c + 0.5) / W at its
center (image center faces forward, left half is positive azimuth); row r
covers elevation 90 - 180 * (r + 0.5) / H.
"""
from dataclasses import dataclass, replace

import numpy as np

from .geometry import wrap_azimuth
from .io import FoaClip

_X, _Y, _Z = 0, 1, 2


@dataclass(frozen=True)
class AcsTransform:
    id: int
    az_sign: int
    az_offset: float  # degrees
    el_sign: int
    # (source channel, sign) producing X', Y', Z' from (X, Y, Z)
    channel_op: tuple

    def map_direction(self, az, el):
        return wrap_azimuth(self.az_sign * np.asarray(az, dtype=float) + self.az_offset), self.el_sign * np.asarray(el, dtype=float)

    def matrix(self):
        m = np.zeros((3, 3))
        for row, (src, sign) in enumerate(self.channel_op):
            m[row, src] = sign
        return m


_TABLE = (
    AcsTransform(0, +1, -90.0, -1, ((_Y, +1), (_X, -1), (_Z, -1))),
    AcsTransform(1, -1, -90.0, +1, ((_Y, -1), (_X, -1), (_Z, +1))),
    AcsTransform(2, +1, 0.0, +1, ((_X, +1), (_Y, +1), (_Z, +1))),
    AcsTransform(3, -1, 0.0, -1, ((_X, +1), (_Y, -1), (_Z, -1))),
    AcsTransform(4, +1, 90.0, -1, ((_Y, -1), (_X, +1), (_Z, -1))),
    AcsTransform(5, -1, 90.0, +1, ((_Y, +1), (_X, +1), (_Z, +1))),
    AcsTransform(6, +1, 180.0, +1, ((_X, -1), (_Y, -1), (_Z, +1))),
    AcsTransform(7, -1, 180.0, -1, ((_X, -1), (_Y, +1), (_Z, -1))),
)

IDENTITY = _TABLE[2]


def acs_table():
    return list(_TABLE)


def acs_audio(clip, t):
    """Apply the signed channel permutation; W is passed through untouched."""
    xyz = (clip.x, clip.y, clip.z)
    out = [xyz[src] if sign > 0 else -xyz[src] for src, sign in t.channel_op]
    return FoaClip.from_wxyz(clip.w, out[0], out[1], out[2], clip.sample_rate)


def acs_labels(events, t):
    out = []
    for e in events:
        az, el = t.map_direction(e.azimuth, e.elevation)
        out.append(replace(e, azimuth=float(az), elevation=float(el)))
    return out


def pixel_to_angle(row, col, width, height):
    az = 180.0 - 360.0 * (np.asarray(col) + 0.5) / width
    el = 90.0 - 180.0 * (np.asarray(row) + 0.5) / height
    return az, el


def angle_to_pixel(az, el, width, height):
    """Integer (row, col) of the pixel containing direction (az, el)."""
    col = np.floor((180.0 - np.asarray(az, dtype=float)) / 360.0 * width).astype(int) % width
    row = np.clip(np.floor((90.0 - np.asarray(el, dtype=float)) / 180.0 * height).astype(int), 0, height - 1)
    return row, col


def avcs_frame(image, t):
    """Transform an equirectangular frame (H, W[, C]) consistently with ``t``."""
    image = np.asarray(image)
    h, w = image.shape[:2]
    if w % 2:
        raise ValueError(f"frame width {w} is odd")
    if w % 4 or w != 2 * h:
        raise ValueError(f"frame must be 2:1 with width divisible by 4, got {w}x{h}")
    out = image
    if t.az_sign < 0:
        out = out[:, ::-1]
    shift = t.az_offset * w / 360.0
    out = np.roll(out, -int(round(shift)), axis=1)
    if t.el_sign < 0:
        out = out[::-1]
    return np.ascontiguousarray(out)
