"""Audio, metadata and frame ingest plus chunking."""
import csv
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from scipy.io import wavfile

from .geometry import wrap_azimuth

SAMPLE_RATE = 24000
LABEL_FPS = 10
NUM_CLASSES = 13
MAX_TRACKS = 3

# STARSS23 class table, index == class id
CLASS_NAMES = (
    "Female speech",
    "Male speech",
    "Clapping",
    "Telephone",
    "Laughter",
    "Domestic sounds",
    "Walk, footsteps",
    "Door, open or close",
    "Music",
    "Musical instrument",
    "Water tap",
    "Bell",
    "Knock",
)

# ACN ordering of the four FOA channels in files
ACN_ORDER = ("W", "Y", "Z", "X")


class FormatError(ValueError):
    """Malformed or out-of-contract input data."""


def class_id(name):
    """Look up a class by index or by a loose name ('watertap', 'Water tap', '10')."""
    name = str(name).strip()
    if name.isdigit():
        idx = int(name)
        if idx >= NUM_CLASSES:
            raise FormatError(f"class_id out of range: {idx}")
        return idx
    key = "".join(ch for ch in name.lower() if ch.isalnum())
    for i, full in enumerate(CLASS_NAMES):
        if key == "".join(ch for ch in full.lower() if ch.isalnum()) or key == full.split(",")[0].lower():
            return i
    raise FormatError(f"unknown class name {name!r}")


@dataclass(frozen=True)
class FoaClip:
    samples: np.ndarray  # (4, num_samples), ACN order W, Y, Z, X, SN3D
    sample_rate: int = SAMPLE_RATE
    channel_order: str = "ACN-SN3D"

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=np.float64)
        if s.ndim != 2 or s.shape[0] != 4:
            raise FormatError(f"expected 4 channels, got shape {s.shape}")
        if self.sample_rate != SAMPLE_RATE:
            raise FormatError(f"expected sample rate {SAMPLE_RATE}, got {self.sample_rate}")
        if not np.all(np.isfinite(s)):
            raise FormatError("non-finite samples")
        object.__setattr__(self, "samples", s)

    @property
    def num_samples(self):
        return self.samples.shape[1]

    @property
    def duration(self):
        return self.num_samples / self.sample_rate

    @property
    def w(self):
        return self.samples[0]

    @property
    def y(self):
        return self.samples[1]

    @property
    def z(self):
        return self.samples[2]

    @property
    def x(self):
        return self.samples[3]

    @classmethod
    def from_wxyz(cls, w, x, y, z, sample_rate=SAMPLE_RATE):
        return cls(np.stack([w, y, z, x]), sample_rate)


@dataclass(frozen=True, order=True)
class Event:
    frame: int
    class_id: int
    source_id: int
    azimuth: float
    elevation: float
    distance: float

    def validate(self):
        if self.frame < 0:
            raise FormatError(f"negative frame {self.frame}")
        if not 0 <= self.class_id < NUM_CLASSES:
            raise FormatError(f"class_id out of range: {self.class_id}")
        if not -180.0 <= self.azimuth <= 180.0:
            raise FormatError(f"azimuth out of range: {self.azimuth}")
        if not -90.0 <= self.elevation <= 90.0:
            raise FormatError(f"elevation out of range: {self.elevation}")
        if not (math.isfinite(self.distance) and self.distance >= 0.0):
            raise FormatError(f"invalid distance: {self.distance}")
        return self


def sort_events(events):
    return sorted(events, key=lambda e: (e.frame, e.class_id, e.source_id, e.azimuth, e.elevation, e.distance))


def group_by_frame(events, num_frames):
    """Split a flat event list into ``num_frames`` per-frame lists."""
    frames = [[] for _ in range(num_frames)]
    for ev in events:
        if ev.frame >= num_frames:
            raise FormatError(f"event at frame {ev.frame} beyond {num_frames} frames")
        frames[ev.frame].append(ev)
    return frames


def flatten_frames(frames):
    out = []
    for i, evs in enumerate(frames):
        out.extend(replace(e, frame=i) for e in evs)
    return sort_events(out)


# --------------------------------------------------------------------------
# WAV
# --------------------------------------------------------------------------

def _to_float(data):
    if data.dtype == np.uint8:
        return (data.astype(np.float64) - 128.0) / 128.0
    if data.dtype == np.int16:
        return data.astype(np.float64) / 32768.0
    if data.dtype == np.int32:
        # scipy left-aligns 24-bit PCM into int32
        return data.astype(np.float64) / 2147483648.0
    if data.dtype in (np.float32, np.float64):
        return data.astype(np.float64)
    raise FormatError(f"unsupported WAV sample type {data.dtype}")


def read_foa_wav(path):
    try:
        sr, data = wavfile.read(path)
    except (ValueError, OSError, EOFError) as exc:
        raise FormatError(f"{path}: malformed WAV ({exc})") from exc
    if data.ndim != 2 or data.shape[1] != 4:
        nch = 1 if data.ndim == 1 else data.shape[1]
        raise FormatError(f"{path}: expected 4 channels, got {nch}")
    if sr != SAMPLE_RATE:
        raise FormatError(f"{path}: expected sample rate {SAMPLE_RATE}, got {sr}")
    return FoaClip(_to_float(data).T, sr)


def write_foa_wav(path, clip, pcm_bits=None):
    """Write float32 by default; ``pcm_bits`` 16 or 32 writes integer PCM."""
    data = clip.samples.T
    if pcm_bits is None:
        out = data.astype(np.float32)
    elif pcm_bits == 16:
        out = np.clip(np.round(data * 32768.0), -32768, 32767).astype(np.int16)
    elif pcm_bits == 32:
        out = np.clip(np.round(data * 2147483648.0), -2147483648, 2147483647).astype(np.int32)
    else:
        raise ValueError("pcm_bits must be None, 16 or 32")
    wavfile.write(path, clip.sample_rate, out)


# --------------------------------------------------------------------------
# metadata / prediction CSV
# --------------------------------------------------------------------------

# divisor from file unit to meters
_UNIT_SCALE = {"cm": 100.0, "m": 1.0}


def _rows(path):
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), 1):
            row = [c.strip() for c in row]
            if not row or all(c == "" for c in row):
                continue
            yield lineno, row


def _num(path, lineno, value):
    try:
        return float(value)
    except ValueError:
        raise FormatError(f"{path}:{lineno}: non-numeric field {value!r}") from None


def _int(path, lineno, value):
    v = _num(path, lineno, value)
    if v != int(v):
        raise FormatError(f"{path}:{lineno}: expected integer, got {value!r}")
    return int(v)


def read_metadata_csv(path, distance_unit="cm"):
    """Read ``frame,class,source,azimuth,elevation,distance`` rows.

    Distances are converted to meters; an azimuth of exactly 180 is wrapped to -180.
    """
    if distance_unit not in _UNIT_SCALE:
        raise ValueError(f"distance_unit must be one of {sorted(_UNIT_SCALE)}")
    scale = _UNIT_SCALE[distance_unit]
    events = []
    for lineno, row in _rows(path):
        if len(row) != 6:
            raise FormatError(f"{path}:{lineno}: expected 6 fields, got {len(row)}")
        frame, cls, src = (_int(path, lineno, v) for v in row[:3])
        az, el, dist = (_num(path, lineno, v) for v in row[3:])
        ev = Event(frame, cls, src, az, el, dist / scale)
        try:
            ev.validate()
        except FormatError as exc:
            raise FormatError(f"{path}:{lineno}: {exc}") from None
        if az == 180.0:
            ev = replace(ev, azimuth=-180.0)
        events.append(ev)
    return sort_events(events)


def _fmt(v):
    return repr(float(v))


def write_metadata_csv(path, events, distance_unit="cm"):
    scale = _UNIT_SCALE[distance_unit]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for e in sort_events(events):
            w.writerow([e.frame, e.class_id, e.source_id, _fmt(e.azimuth), _fmt(e.elevation), _fmt(e.distance * scale)])


def write_prediction_csv(path, events):
    """One row per event: ``frame,class,az_deg,el_deg,dist_m``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for e in sort_events(events):
            w.writerow([e.frame, e.class_id, _fmt(e.azimuth), _fmt(e.elevation), _fmt(e.distance)])


def read_events_csv(path, distance_unit="cm"):
    """Read either a 6-column metadata file or a 5-column prediction file.

    Prediction rows carry no source id; events get sequential ids per
    (frame, class) and distances are already in meters.
    """
    rows = list(_rows(path))
    if not rows:
        return []
    if len(rows[0][1]) == 6:
        return read_metadata_csv(path, distance_unit)
    events = []
    counts = {}
    for lineno, row in rows:
        if len(row) != 5:
            raise FormatError(f"{path}:{lineno}: expected 5 fields, got {len(row)}")
        frame, cls = _int(path, lineno, row[0]), _int(path, lineno, row[1])
        az, el, dist = (_num(path, lineno, v) for v in row[2:])
        src = counts.get((frame, cls), 0)
        counts[(frame, cls)] = src + 1
        ev = Event(frame, cls, src, float(wrap_azimuth(az)), el, dist)
        try:
            ev.validate()
        except FormatError as exc:
            raise FormatError(f"{path}:{lineno}: {exc}") from None
        events.append(ev)
    return sort_events(events)


# --------------------------------------------------------------------------
# chunking
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ChunkSpec:
    length_s: float = 3.0
    hop_s: float = 3.0
    label_fps: int = LABEL_FPS

    def __post_init__(self):
        if self.length_s <= 0 or self.hop_s <= 0:
            raise ValueError("chunk length and hop must be positive")
        if not math.isclose(self.length_s * self.label_fps, round(self.length_s * self.label_fps)):
            raise ValueError("chunk length must span an integer number of label frames")

    @property
    def num_frames(self):
        return int(round(self.length_s * self.label_fps))


def chunk_indices(total_s, spec):
    """(start_s, end_s) pairs of full chunks; a partial trailing chunk is dropped."""
    if total_s + 1e-9 < spec.length_s:
        raise ValueError(f"signal of {total_s} s is shorter than one {spec.length_s} s chunk")
    count = int(math.floor((total_s - spec.length_s) / spec.hop_s + 1e-9)) + 1
    return [(k * spec.hop_s, k * spec.hop_s + spec.length_s) for k in range(count)]


def slice_events(events, start_s, end_s, label_fps=LABEL_FPS):
    lo = int(round(start_s * label_fps))
    hi = int(round(end_s * label_fps))
    if hi <= lo:
        raise ValueError("empty slice")
    return [replace(e, frame=e.frame - lo) for e in events if lo <= e.frame < hi]


def slice_clip(clip, start_s, end_s):
    a = int(round(start_s * clip.sample_rate))
    b = int(round(end_s * clip.sample_rate))
    return FoaClip(clip.samples[:, a:b], clip.sample_rate)


# --------------------------------------------------------------------------
# frame images
# --------------------------------------------------------------------------

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg", ".bmp")


def read_image(path):
    """Load an 8-bit image as uint8 (H, W, 3) or (H, W) for single-channel depth maps."""
    from PIL import Image

    with Image.open(path) as im:
        if im.mode in ("L", "I;16", "I", "F"):
            return np.asarray(im.convert("L"))
        return np.asarray(im.convert("RGB"))


def write_image(path, image):
    from PIL import Image

    Image.fromarray(np.asarray(image, dtype=np.uint8)).save(path)


def list_frames(directory):
    return sorted(p for p in Path(directory).iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)
