"""Synthetic fixtures: FOA plane waves, exponential reverb tails, marker frames."""
from dataclasses import dataclass, field

import numpy as np

from .augment import angle_to_pixel
from .io import SAMPLE_RATE, FoaClip


@dataclass(frozen=True)
class Reverb:
    t60: float = 0.5
    drr_db: float = 0.0
    seed: int = 1
    predelay: float = 0.0  # seconds between the direct path and the tail onset

    def __post_init__(self):
        if self.t60 <= 0:
            raise ValueError("t60 must be positive")


@dataclass(frozen=True)
class SourceSpec:
    azimuth: float = 0.0
    elevation: float = 0.0
    distance: float = 1.0
    signal: str = "white_noise"  # white_noise | noise_bursts | tone | impulse
    seed: int = 0
    freq: float = 1000.0
    amplitude: float = 0.25
    reverb: Reverb = field(default=None)

    def __post_init__(self):
        if self.distance <= 0:
            raise ValueError("distance must be positive")
        if self.signal not in ("white_noise", "noise_bursts", "tone", "impulse"):
            raise ValueError(f"unknown signal {self.signal!r}")


def foa_gains(az, el):
    """SN3D first-order gains (W, X, Y, Z) of a plane wave."""
    a, e = np.radians(az), np.radians(el)
    return np.array([1.0, np.cos(a) * np.cos(e), np.sin(a) * np.cos(e), np.sin(e)])


def source_signal(spec, n, sample_rate=SAMPLE_RATE):
    t = np.arange(n) / sample_rate
    if spec.signal == "tone":
        s = np.sin(2.0 * np.pi * spec.freq * t)
    elif spec.signal == "impulse":
        s = np.zeros(n)
        s[n // 2] = 1.0
    else:
        rng = np.random.default_rng(spec.seed)
        s = rng.standard_normal(n)
        if spec.signal == "noise_bursts":
            # syllable-rate on/off envelope, 50-250 ms segments with raised-cosine ramps
            env = np.zeros(n)
            pos, on = 0, True
            while pos < n:
                seg = int(rng.uniform(0.05, 0.25) * sample_rate)
                if on:
                    ramp = np.sin(np.linspace(0, np.pi, seg)) ** 0.5
                    env[pos : pos + seg] = ramp[: max(0, min(seg, n - pos))]
                pos += seg
                on = not on
            s = s * env
        s = s / max(np.max(np.abs(s)), 1e-12)
    return spec.amplitude * s


def exp_tail(t60, n, rng, sample_rate=SAMPLE_RATE):
    t = np.arange(n) / sample_rate
    return rng.standard_normal(n) * np.exp(-3.0 * np.log(10.0) * t / t60)


def plane_wave_components(spec, duration_s, sample_rate=SAMPLE_RATE):
    """Direct and reverberant parts (each (4, N) in W, X, Y, Z order) of a source."""
    n = int(round(duration_s * sample_rate))
    s = source_signal(spec, n, sample_rate)
    direct = foa_gains(spec.azimuth, spec.elevation)[:, None] * s[None, :]
    reverb = np.zeros_like(direct)
    rv = spec.reverb
    if rv is not None:
        rng = np.random.default_rng(rv.seed)
        length = int(round(1.5 * rv.t60 * sample_rate))
        pre = int(round(rv.predelay * sample_rate))
        for ch in range(4):
            h = np.concatenate([np.zeros(pre + 1), exp_tail(rv.t60, length, rng, sample_rate)])
            reverb[ch] = np.convolve(s, h)[:n]
        # diffuse field: each dipole carries a third of the omni energy
        reverb[1:] /= np.sqrt(3.0)
        e_dir = np.sum(direct[0] ** 2)
        e_rev = np.sum(reverb[0] ** 2)
        if e_rev > 0:
            reverb *= np.sqrt(e_dir / e_rev * 10.0 ** (-rv.drr_db / 10.0))
    return direct, reverb


def _quantize(x, bits):
    if bits is None:
        return x
    q = 2.0 ** (bits - 1)
    return np.clip(np.round(x * q), -q, q - 1) / q


def plane_wave_foa(spec, duration_s, sample_rate=SAMPLE_RATE, pcm_bits=None):
    """FoaClip of a single source; ``pcm_bits`` rounds samples onto a PCM grid."""
    direct, reverb = plane_wave_components(spec, duration_s, sample_rate)
    w, x, y, z = _quantize(direct + reverb, pcm_bits)
    return FoaClip.from_wxyz(w, x, y, z, sample_rate)


def marker_image(width, height, az, el, channels=3):
    """Black equirectangular frame with one white pixel at direction (az, el)."""
    if width != 2 * height:
        raise ValueError("equirectangular frames must be 2:1")
    img = np.zeros((height, width, channels) if channels > 1 else (height, width), dtype=np.uint8)
    r, c = angle_to_pixel(az, el, width, height)
    img[r, c] = 255
    return img
