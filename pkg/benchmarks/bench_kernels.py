"""Time the numba and numpy paths of the hot kernels.

    python benchmarks/bench_kernels.py [--repeat 5]

WPE runs on a 3 s reverberant omni signal with the default 60 taps; the
remap projects one 448x224 RGB frame onto a 896x224 cubemap strip.
"""
import argparse
import time
import warnings

import numpy as np

warnings.filterwarnings("ignore", module="numba")

from avseld import kernels
from avseld._jit import use_jit
from avseld.features import WpeConfig, stft
from avseld.projection import strip_directions
from avseld.synth import Reverb, SourceSpec, plane_wave_foa


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args()

    clip = plane_wave_foa(SourceSpec(signal="white_noise", reverb=Reverb(0.5, 0.0)), 3.0)
    X = np.ascontiguousarray(stft(clip.w).bins[0].T)
    cfg = WpeConfig()
    img = np.random.default_rng(0).integers(0, 256, (224, 448, 3)).astype(np.float64)
    az, el = strip_directions()
    cols = (180.0 - az) / 360.0 * 448 - 0.5
    rows = (90.0 - el) / 180.0 * 224 - 0.5

    cases = {
        "wpe (257 bins x 480 frames)": lambda b: kernels.wpe_bins(X, cfg.taps, cfg.delay, cfg.iterations, cfg.epsilon, cfg.regularization, b),
        "remap (224x896x3)": lambda b: kernels.remap_bilinear(img, rows, cols, b),
    }
    backends = ["numpy"] + (["numba"] if use_jit() else [])
    print(f"{'kernel':<30}" + "".join(f"{b:>12}" for b in backends) + ("     speedup" if len(backends) == 2 else ""))
    for name, fn in cases.items():
        for b in backends:
            fn(b)  # compile / warm caches
        t = [best_of(lambda: fn(b), args.repeat) for b in backends]
        row = f"{name:<30}" + "".join(f"{x * 1e3:>10.1f}ms" for x in t)
        if len(t) == 2:
            row += f"{t[0] / t[1]:>11.1f}x"
        print(row)


if __name__ == "__main__":
    main()
