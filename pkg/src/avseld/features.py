"""FOA input features: STFT, log-mel, mel-space intensity vectors, WPE split."""
import math
import struct
from dataclasses import dataclass

import numpy as np

from . import kernels
from .io import FoaClip

WIN_LEN = 512
HOP = 150
N_MELS = 128
LOG_FLOOR = 1e-10
IV_EPS = 1e-8


@dataclass(frozen=True)
class StftTensor:
    bins: np.ndarray  # (channels, T, win_len // 2 + 1) complex
    win_len: int = WIN_LEN
    hop: int = HOP
    sample_rate: int = 24000

    @property
    def num_frames(self):
        return self.bins.shape[1]


def hann(n):
    """Periodic Hann window."""
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(n) / n)


def num_frames(num_samples, hop=HOP):
    return num_samples // hop


def stft(clip, win_len=WIN_LEN, hop=HOP, sample_rate=None):
    """Center-padded (reflect) STFT with ``num_samples // hop`` frames.

    ``clip`` is a FoaClip or an array of shape (num_samples,) / (channels, num_samples).
    Frame ``t`` is centered on sample ``t * hop``.
    """
    if isinstance(clip, FoaClip):
        x, sr = clip.samples, clip.sample_rate
    else:
        x = np.atleast_2d(np.asarray(clip, dtype=np.float64))
        sr = sample_rate or 24000
    n = x.shape[-1]
    if n < win_len:
        raise ValueError(f"signal of {n} samples is shorter than the {win_len}-sample window")
    T = num_frames(n, hop)
    half = win_len // 2
    padded = np.pad(x, ((0, 0), (half, half)), mode="reflect")
    frames = np.lib.stride_tricks.sliding_window_view(padded, win_len, axis=-1)[:, : T * hop : hop]
    bins = np.fft.rfft(frames * hann(win_len), axis=-1)
    return StftTensor(bins, win_len, hop, sr)


def istft(spec, num_samples):
    """Weighted overlap-add inverse of :func:`stft` for one channel.

    ``spec`` is a StftTensor with a single channel or a (T, F) complex array
    (analysis parameters are then the module defaults). Samples not covered
    by any window (only possible for lengths that are not hop multiples) are 0.
    """
    if isinstance(spec, StftTensor):
        if spec.bins.shape[0] != 1:
            raise ValueError("istft expects a single-channel StftTensor")
        bins, win_len, hop = spec.bins[0], spec.win_len, spec.hop
    else:
        bins, win_len, hop = np.asarray(spec), WIN_LEN, HOP
    T = bins.shape[0]
    if num_frames(num_samples, hop) != T:
        raise ValueError(f"{T} frames cannot reconstruct {num_samples} samples at hop {hop}")
    win = hann(win_len)
    frames = np.fft.irfft(bins, n=win_len, axis=-1) * win
    half = win_len // 2
    total = (T - 1) * hop + win_len
    out = np.zeros(total)
    norm = np.zeros(total)
    w2 = win * win
    for t in range(T):
        out[t * hop : t * hop + win_len] += frames[t]
        norm[t * hop : t * hop + win_len] += w2
    nz = norm > 1e-12
    out[nz] /= norm[nz]
    out[~nz] = 0.0
    y = np.zeros(num_samples)
    seg = out[half : half + num_samples]
    y[: seg.shape[0]] = seg
    return y


# --------------------------------------------------------------------------
# mel
# --------------------------------------------------------------------------

def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=float) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=float) / 2595.0) - 1.0)


@dataclass(frozen=True)
class MelFilterbank:
    weights: np.ndarray  # (n_mels, n_fft_bins)
    f_min: float
    f_max: float
    centers: np.ndarray  # Hz


def _tri_cumulative(f, lo, mid, hi):
    """Integral of the unit-peak triangle (lo, mid, hi) from -inf to ``f``."""
    f = np.clip(f, lo, hi)
    rise = (f - lo) ** 2 / (2.0 * (mid - lo))
    fall = (mid - lo) / 2.0 + (hi - mid) / 2.0 - (hi - f) ** 2 / (2.0 * (hi - mid))
    return np.where(f <= mid, rise, fall)


def mel_filterbank(f_min=0.0, f_max=12000.0, n_mels=N_MELS, win_len=WIN_LEN, sample_rate=24000):
    """Triangular mel filters, each weight the mean of its triangle over one FFT bin.

    Averaging over the bin width instead of point-sampling keeps every filter
    non-empty even where the low mel bands are narrower than one bin.
    """
    nyq = sample_rate / 2.0
    if not (0.0 <= f_min < f_max <= nyq):
        raise ValueError(f"invalid mel band edges [{f_min}, {f_max}] for Nyquist {nyq}")
    edges = mel_to_hz(np.linspace(hz_to_mel(f_min), hz_to_mel(f_max), n_mels + 2))
    df = sample_rate / win_len
    fk = np.arange(win_len // 2 + 1) * df
    lo_b, hi_b = fk - df / 2.0, fk + df / 2.0
    lo, mid, hi = edges[:-2, None], edges[1:-1, None], edges[2:, None]
    weights = (_tri_cumulative(hi_b, lo, mid, hi) - _tri_cumulative(lo_b, lo, mid, hi)) / df
    return MelFilterbank(weights, float(f_min), float(f_max), edges[1:-1].copy())


def power(spec):
    b = spec.bins if isinstance(spec, StftTensor) else spec
    return b.real**2 + b.imag**2


def logmel(spec, fb):
    """10*log10 of mel-band power, floored at 1e-10; shape (channels, T, n_mels)."""
    p = power(spec)
    if p.shape[-1] != fb.weights.shape[1]:
        raise ValueError("spectrogram and filterbank disagree on FFT size")
    return 10.0 * np.log10(np.maximum(p @ fb.weights.T, LOG_FLOOR))


def intensity_vectors(spec, fb):
    """Unit-norm mel-space active intensity, shape (3, T, n_mels) ordered x, y, z."""
    b = spec.bins if isinstance(spec, StftTensor) else spec
    if b.shape[0] != 4:
        raise ValueError(f"intensity vectors need 4 FOA channels, got {b.shape[0]}")
    w, y, z, x = b
    wc = np.conj(w)
    iv = np.stack([(wc * x).real, (wc * y).real, (wc * z).real]) @ fb.weights.T
    norm = np.sqrt(np.sum(iv * iv, axis=0, keepdims=True))
    return iv / (norm + IV_EPS)


# --------------------------------------------------------------------------
# WPE direct / reverberant split
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class WpeConfig:
    taps: int = 60
    delay: int = 5
    iterations: int = 5
    epsilon: float = 1e-10
    regularization: float = 1e-10  # Tikhonov load relative to mean diagonal of the weighted covariance

    def __post_init__(self):
        if self.taps < 1 or self.delay < 1 or self.iterations < 0:
            raise ValueError("WPE needs taps >= 1, delay >= 1, iterations >= 0")
        if self.epsilon <= 0 or self.regularization < 0:
            raise ValueError("WPE epsilon must be > 0 and regularization >= 0")


def _snap(direct, omni):
    # Round the direct signal onto a power-of-two grid that the input already
    # lies on, so omni - direct and its sum back are exact in float64.
    peak = max(np.max(np.abs(omni), initial=0.0), np.max(np.abs(direct), initial=0.0))
    if peak == 0.0:
        return direct
    grid = 2.0 ** (math.frexp(peak)[1] - 50)
    if np.array_equal(np.round(omni / grid) * grid, omni):
        return np.round(direct / grid) * grid
    return direct


def wpe_direct(omni, cfg=WpeConfig(), win_len=WIN_LEN, hop=HOP, backend=None, return_objective=False):
    """Split a single-channel waveform into (direct, reverb) with STFT-domain WPE.

    ``reverb`` is ``omni - direct``. For inputs on a fixed-point grid (any PCM
    source) ``direct + reverb`` reproduces ``omni`` exactly.
    """
    omni = np.asarray(omni, dtype=np.float64)
    if omni.ndim != 1:
        raise ValueError("wpe_direct expects a single channel")
    if not np.all(np.isfinite(omni)):
        raise ValueError("non-finite samples in WPE input")
    n = omni.shape[0]
    if n < (cfg.taps + cfg.delay + 1) * hop:
        raise ValueError(f"signal of {n} samples too short for {cfg.taps} taps at delay {cfg.delay}")
    padded = np.pad(omni, (0, (-n) % hop))
    X = stft(padded, win_len, hop).bins[0]
    D, _, obj = kernels.wpe_bins(X.T, cfg.taps, cfg.delay, cfg.iterations, cfg.epsilon, cfg.regularization, backend)
    direct = istft(np.ascontiguousarray(D.T), padded.shape[0])[:n]
    direct = _snap(direct, omni)
    reverb = omni - direct
    if return_objective:
        return direct, reverb, obj
    return direct, reverb


# --------------------------------------------------------------------------
# feature stack
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class FeatureStack:
    data: np.ndarray  # (C_feat, T, n_mels)
    kind: str  # "base7" or "with_dr9"

    LAYOUT = ("logmel_W", "logmel_Y", "logmel_Z", "logmel_X", "iv_x", "iv_y", "iv_z")
    DR_LAYOUT = ("logmel_direct", "logmel_reverb")


def build_feature_stack(clip, with_dr=False, wpe_cfg=WpeConfig(), fb=None, win_len=WIN_LEN, hop=HOP, backend=None):
    if fb is None:
        fb = mel_filterbank(win_len=win_len, sample_rate=clip.sample_rate)
    spec = stft(clip, win_len, hop)
    parts = [logmel(spec, fb), intensity_vectors(spec, fb)]
    if with_dr:
        direct, reverb = wpe_direct(clip.w, wpe_cfg, win_len, hop, backend=backend)
        parts.append(logmel(stft(np.stack([direct, reverb]), win_len, hop), fb))
    data = np.concatenate(parts, axis=0)
    if not np.all(np.isfinite(data)):
        raise ValueError("non-finite feature values")
    return FeatureStack(data, "with_dr9" if with_dr else "base7")


# --------------------------------------------------------------------------
# tensor files: 16-byte header (magic, C, T, F) + little-endian float32
# --------------------------------------------------------------------------

TENSOR_MAGIC = b"AVSF"


def write_tensor(path, data):
    data = np.asarray(data)
    if data.ndim != 3:
        raise ValueError("tensor files hold rank-3 arrays")
    with open(path, "wb") as fh:
        fh.write(TENSOR_MAGIC + struct.pack("<3I", *data.shape))
        fh.write(np.ascontiguousarray(data, dtype="<f4").tobytes())


def read_tensor(path):
    with open(path, "rb") as fh:
        head = fh.read(16)
        if len(head) != 16 or head[:4] != TENSOR_MAGIC:
            raise ValueError(f"{path}: not a feature tensor file")
        shape = struct.unpack("<3I", head[4:])
        raw = fh.read()
    expected = 4 * shape[0] * shape[1] * shape[2]
    if len(raw) != expected:
        raise ValueError(f"{path}: payload is {len(raw)} bytes, header implies {expected}")
    return np.frombuffer(raw, dtype="<f4").reshape(shape).astype(np.float32)
