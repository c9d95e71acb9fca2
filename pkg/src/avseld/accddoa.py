"""Multi-ACCDDOA label codec: 3 tracks x 13 classes x (x, y, z, distance) per frame."""
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .geometry import cart_to_sph, sph_to_cart, vector_angle
from .io import MAX_TRACKS, NUM_CLASSES, Event, FormatError

VECTOR_LEN = MAX_TRACKS * NUM_CLASSES * 4


@dataclass(frozen=True)
class DecodeConfig:
    activity_threshold: float = 0.5
    merge_angle: float = 15.0

    def __post_init__(self):
        if not 0.0 < self.activity_threshold < 1.0:
            raise ValueError("activity_threshold must lie in (0, 1)")
        if self.merge_angle <= 0:
            raise ValueError("merge_angle must be positive")


def encode(events, num_frames):
    """Ground-truth tensor of shape (num_frames, 3, 13, 4).

    Same-class events in a frame fill tracks in (source_id, azimuth) order.
    """
    slots = defaultdict(list)
    for e in events:
        if not 0 <= e.frame < num_frames:
            raise FormatError(f"event frame {e.frame} outside [0, {num_frames})")
        slots[(e.frame, e.class_id)].append(e)
    out = np.zeros((num_frames, MAX_TRACKS, NUM_CLASSES, 4))
    for (frame, cls), evs in slots.items():
        if len(evs) > MAX_TRACKS:
            raise FormatError(f"frame {frame}, class {cls}: {len(evs)} simultaneous events exceed {MAX_TRACKS} tracks")
        evs.sort(key=lambda e: (e.source_id, e.azimuth, e.elevation, e.distance))
        for track, e in enumerate(evs):
            out[frame, track, cls, :3] = sph_to_cart(e.azimuth, e.elevation)
            out[frame, track, cls, 3] = e.distance
    return out


def flatten(tensor):
    """(T, 3, 13, 4) -> (T, 156), track-major."""
    return tensor.reshape(tensor.shape[0], VECTOR_LEN)


def unflatten(vectors):
    vectors = np.asarray(vectors, dtype=float)
    if vectors.shape[-1] != VECTOR_LEN:
        raise ValueError(f"expected {VECTOR_LEN}-dim vectors, got {vectors.shape[-1]}")
    return vectors.reshape(vectors.shape[:-1] + (MAX_TRACKS, NUM_CLASSES, 4))


def decode(vec, cfg=DecodeConfig(), frame=0):
    """Events of one frame from a (3, 13, 4) or flat 156-dim output vector."""
    vec = np.asarray(vec, dtype=float)
    if vec.shape == (VECTOR_LEN,):
        vec = unflatten(vec)
    norms = np.linalg.norm(vec[..., :3], axis=-1)
    events = []
    for cls in range(NUM_CLASSES):
        groups = []  # [sum of unit vectors, sum of distances, count]
        for track in range(MAX_TRACKS):
            if norms[track, cls] <= cfg.activity_threshold:
                continue
            u = vec[track, cls, :3] / norms[track, cls]
            d = max(vec[track, cls, 3], 0.0)
            for g in groups:
                if vector_angle(g[0], u) <= cfg.merge_angle:
                    g[0] = g[0] + u
                    g[1] += d
                    g[2] += 1
                    break
            else:
                groups.append([u, d, 1])
        for src, (usum, dsum, count) in enumerate(groups):
            az, el = cart_to_sph(usum)
            events.append(Event(frame, cls, src, float(az), float(el), dsum / count))
    return events


def decode_frames(tensor, cfg=DecodeConfig()):
    """Decode (T, 3, 13, 4) or (T, 156) outputs into a flat event list."""
    tensor = np.asarray(tensor, dtype=float)
    if tensor.ndim == 2:
        tensor = unflatten(tensor)
    out = []
    for t in range(tensor.shape[0]):
        out.extend(decode(tensor[t], cfg, frame=t))
    return out


def to_file_layout(tensor):
    """(T, 3, 13, 4) -> (156, T, 1) for the feature tensor file format."""
    return flatten(tensor).T[:, :, None]


def from_file_layout(data):
    data = np.asarray(data)
    if data.shape[0] != VECTOR_LEN or data.shape[2] != 1:
        raise ValueError(f"label tensor files must be ({VECTOR_LEN}, T, 1), got {data.shape}")
    return unflatten(data[:, :, 0].T)
