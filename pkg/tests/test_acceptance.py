"""Acceptance criteria, one test per criterion.

Each test prints a single ``PASS``/``FAIL`` line with the measured value; the
lines are repeated in the terminal summary (see conftest.py).
"""
import time

import numpy as np
import pytest

from avseld import accddoa, augment, ensemble, features, metrics, projection
from avseld.cli import main
from avseld.geometry import angular_distance, sph_to_cart
from avseld.io import Event, FoaClip
from avseld.synth import Reverb, SourceSpec, plane_wave_components, plane_wave_foa

from test_accddoa import _random_events
from test_metrics import _fixture, _oracle
from test_projection import _paint_disk

RESULTS = []
GRID = [(float(az), float(el)) for az in range(-180, 180, 10) for el in range(-80, 81, 10)]  # 36 x 17


def report(num, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {num:>2}: {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def test_01_shapes_and_runtime():
    clip = plane_wave_foa(SourceSpec(40, 15, signal="noise_bursts", seed=11), 3.0, pcm_bits=16)
    try:
        import numba

        numba.set_num_threads(1)
    except ImportError:
        pass
    features.build_feature_stack(clip, with_dr=True)  # warm up any JIT cache
    t0 = time.perf_counter()
    base = features.build_feature_stack(clip)
    dr = features.build_feature_stack(clip, with_dr=True)
    elapsed = time.perf_counter() - t0
    ok = base.data.shape == (7, 480, 128) and dr.data.shape == (9, 480, 128) and elapsed < 5.0
    report(1, ok, f"shapes {base.data.shape} / {dr.data.shape}, base+dr runtime {elapsed:.2f} s (< 5 s)")


def test_02_acs_audio_matches_labels():
    worst = 0.0
    for t in augment.acs_table():
        for az, el in GRID:
            src = plane_wave_foa(SourceSpec(az, el, signal="white_noise", seed=2), 0.02)
            (e,) = augment.acs_labels([Event(0, 0, 0, az, el, 1.0)], t)
            ref = plane_wave_foa(SourceSpec(e.azimuth, e.elevation, signal="white_noise", seed=2), 0.02)
            worst = max(worst, np.max(np.abs(augment.acs_audio(src, t).samples - ref.samples)))
    (e,) = augment.acs_labels([Event(0, 0, 0, 30.0, 10.0, 1.0)], augment.acs_table()[0])
    exact = (e.azimuth, e.elevation) == (-60.0, -10.0)
    report(2, worst < 1e-6 and exact, f"max sample error {worst:.2e} over 8 x 612 (< 1e-6); (30,10) -> ({e.azimuth:g},{e.elevation:g})")


def test_03_avcs_marker_pixels():
    w, h = 448, 224
    misses = checked = 0
    for t in augment.acs_table():
        for r in range(2, h - 2, 3):
            for c in range(0, w, 5):
                img = np.zeros((h, w, 3), np.uint8)
                img[r, c] = 255
                out = augment.avcs_frame(img, t)
                az, el = augment.pixel_to_angle(r, c, w, h)
                want = tuple(int(v) for v in augment.angle_to_pixel(*t.map_direction(az, el), w, h))
                hits = np.argwhere(out[..., 0])
                misses += not (len(hits) == 1 and tuple(hits[0]) == want)
                checked += 1
    report(3, misses == 0, f"{misses} misplaced markers of {checked} (0 allowed)")


def test_04_iv_direction():
    fb = features.mel_filterbank()
    worst = 0.0
    for az, el in GRID:
        clip = plane_wave_foa(SourceSpec(az, el, signal="white_noise", seed=3), 0.25)
        iv = features.intensity_vectors(features.stft(clip), fb)
        u = sph_to_cart(az, el)
        cos = np.clip(np.einsum("ctf,c->tf", iv, u) / np.linalg.norm(iv, axis=0), -1, 1)
        worst = max(worst, float(np.degrees(np.arccos(cos)).max()))
    report(4, worst < 1.0, f"worst IV angle error {worst:.2e} deg over 612 directions (< 1 deg)")


def _reverberant_fixture():
    spec = SourceSpec(0.0, 0.0, signal="white_noise", seed=3, reverb=Reverb(t60=0.5, drr_db=0.0, seed=4))
    direct, reverb = plane_wave_components(spec, 3.0)
    omni = np.round((direct[0] + reverb[0]) * 2**23) / 2**23  # 24-bit PCM grid
    return direct[0], reverb[0], omni


def test_05a_wpe_noop():
    _, _, omni = _reverberant_fixture()
    d, _ = features.wpe_direct(omni, features.WpeConfig(iterations=0))
    err = float(np.max(np.abs(d - omni)))
    report("5a", err < 1e-6, f"iterations=0 max deviation {err:.2e} (< 1e-6)")


def test_05b_wpe_drr_gain():
    direct, reverb, omni = _reverberant_fixture()
    out, _ = features.wpe_direct(omni)
    drr_in = 10 * np.log10(np.sum(direct**2) / np.sum((omni - direct) ** 2))
    drr_out = 10 * np.log10(np.sum(direct**2) / np.sum((out - direct) ** 2))
    gain = drr_out - drr_in
    report("5b", gain >= 3.0, f"DRR {drr_in:+.2f} dB -> {drr_out:+.2f} dB, gain {gain:.2f} dB (>= 3 dB)")


def test_05c_wpe_exact_split():
    _, _, omni = _reverberant_fixture()
    d, r = features.wpe_direct(omni)
    ok = np.array_equal(d + r, omni)
    report("5c", ok, f"direct + reverb == input bit-exactly: {ok}")


def test_06_cubemap():
    worst = 0.0
    for az in np.arange(-180, 180, 5.0):
        for el in np.arange(-40, 41, 5.0):
            hit = projection.dir_to_cubemap(az, el)
            if hit is not None:
                worst = max(worst, angular_distance(projection.cubemap_to_dir(*hit), (az, el)))
    s = 224
    px = 0.0
    for az0 in range(-170, 180, 20):
        if abs(az0 - 135) < 12 or abs(az0 + 225) < 12:
            continue
        for el0 in (-35, -15, 0, 20, 35):
            off = np.radians(((az0 + 45) % 90) - 45)
            if np.tan(np.radians(abs(el0) + 4.0)) > np.cos(off):
                continue
            out = projection.equirect_to_cubemap(_paint_disk(az0, el0, 3.0)).image.astype(float)
            rr, cc = np.mgrid[0 : out.shape[0], 0 : out.shape[1]]
            face, u, v = projection.dir_to_cubemap(az0, el0)
            cr, ccol = (rr * out).sum() / out.sum(), (cc * out).sum() / out.sum()
            px = max(px, float(np.hypot(cr - (v * s - 0.5), ccol - (face * s + u * s - 0.5))))
    shape = projection.equirect_to_cubemap(np.zeros((224, 448, 3), np.uint8)).image.shape
    ok = worst < 1e-9 and px < 1.5 and shape[:2] == (224, 896)
    report(6, ok, f"round trip {worst:.1e} deg (< 1e-9), disk centroid {px:.2f} px (< 1.5), strip {shape[1]}x{shape[0]}")


def test_07_accddoa_round_trip():
    rng = np.random.default_rng(2024)
    worst, exact = 0.0, True
    for _ in range(1000):
        evs = _random_events(rng, 2)
        out = accddoa.decode_frames(accddoa.encode(evs, 2))
        key = lambda e: (e.frame, e.class_id, e.source_id)  # noqa: E731
        a_s, b_s = sorted(evs, key=key), sorted(out, key=key)
        exact &= len(a_s) == len(b_s) and all(key(a) == key(b) and a.distance == b.distance for a, b in zip(a_s, b_s))
        for a, b in zip(a_s, b_s):
            worst = max(worst, angular_distance((a.azimuth, a.elevation), (b.azimuth, b.elevation)))
    ok = exact and worst < 1e-6 and accddoa.VECTOR_LEN == 156
    report(7, ok, f"1000 lists: class/distance exact={exact}, DOA error {worst:.1e} deg (< 1e-6), length {accddoa.VECTOR_LEN}")


def test_08_ensembles():
    ev = lambda az, cls=1, d=1.0: Event(0, cls, 0, az, 0.0, d)  # noqa: E731
    cfg = ensemble.EnsembleConfig()
    two = ensemble.fuse_models([[[ev(0.0, d=1.0)]], [[ev(8.0, d=3.0)]], [[]]], cfg)[0]
    one = ensemble.fuse_models([[[ev(0.0)]], [[]], [[]]], cfg)[0]
    knock = ensemble.fuse_models([[[ev(0.0, cls=12)]], [[]], [[]]], cfg)[0]
    rules = len(two) == 1 and abs(two[0].azimuth - 4.0) < 1e-9 and two[0].distance == 2.0 and one == [] and len(knock) == 1

    rng = np.random.default_rng(8)
    idem = mono = True
    need = lambda c: 1 if c in cfg.exception_classes else 2  # noqa: E731
    for _ in range(500):
        srcs = [[Event(0, int(rng.choice([1, 4, 12])), 0, rng.uniform(-180, 180), rng.uniform(-80, 80), rng.uniform(0.5, 5)) for _ in range(rng.integers(0, 4))] for _ in range(3)]
        keep = []
        for e in srcs[0]:
            if all(e.class_id != k.class_id or angular_distance((e.azimuth, e.elevation), (k.azimuth, k.elevation)) > 31 for k in keep):
                keep.append(e)
        fused = ensemble.fuse_frame([keep] * 3, 0, cfg, need)
        idem &= len(fused) == len(keep) and all(
            any(f.class_id == k.class_id and angular_distance((f.azimuth, f.elevation), (k.azimuth, k.elevation)) < 1e-9 for f in fused) for k in keep
        )
        before = ensemble.fuse_frame(srcs, 0, cfg, need)
        grown = [list(s) for s in srcs]
        grown[int(rng.integers(3))].append(Event(0, int(rng.choice([1, 4, 12])), 0, rng.uniform(-180, 180), rng.uniform(-80, 80), 1.0))
        after = ensemble.fuse_frame(grown, 0, cfg, need)
        mono &= all(sum(e.class_id == c for e in after) >= sum(e.class_id == c for e in before) for c in {e.class_id for e in before})
    report(8, rules and idem and mono, f"rule examples {rules}, idempotence {idem}, vote monotonicity {mono} (500 fixtures)")


def test_09_metrics():
    ev = lambda az, d: Event(0, 0, 0, az, 0.0, d)  # noqa: E731
    perfect = metrics.evaluate([[ev(10.0, 2.0)]], [[ev(10.0, 2.0)]])
    ang = metrics.evaluate([[ev(25.0, 2.0)]], [[ev(0.0, 2.0)]])
    dist = metrics.evaluate([[ev(0.0, 5.0)]], [[ev(0.0, 2.0)]])
    hand = (
        (perfect.f1, perfect.doae, perfect.rde) == (1.0, 0.0, 0.0)
        and ang.f1 == 0.0 and abs(ang.doae - 25.0) < 1e-12 and ang.rde == 0.0
        and dist.per_class[0].tp == 0 and dist.rde == 1.5
    )
    rng = np.random.default_rng(99)
    bad = 0
    for _ in range(500):
        preds, refs = _fixture(rng)
        rep = metrics.evaluate(preds, refs)
        bad += not np.allclose([rep.f1, rep.doae, rep.rde], _oracle(preds, refs), rtol=1e-9, atol=1e-9, equal_nan=True)
    report(9, hand and bad == 0, f"hand cases {hand}, {bad} of 500 fixtures disagree with enumeration")


def _pipeline(root, jobs):
    fx = root / "fx"
    run = lambda *a: main(["--jobs", str(jobs)] + [str(x) for x in a])  # noqa: E731
    codes = [
        run("synth", "--out", fx, "--name", "a", "--az", "30", "--el", "10", "--cls", "4", "--signal", "noise_bursts", "--pcm-bits", "16", "--seed", "1", "--t60", "0.4"),
        run("synth", "--out", fx, "--name", "b", "--az", "-100", "--el", "-5", "--cls", "11", "--pcm-bits", "16", "--seed", "2"),
    ]
    frames = fx / "frames"
    frames.mkdir(exist_ok=True)
    for name in ("a", "b"):
        (frames / f"{name}.png").write_bytes((fx / f"{name}_frame.png").read_bytes())
    out = root / "out"
    codes += [
        run("augment", "--transform-id", "4", "--wav", fx / "a.wav", "--csv", fx / "a.csv", "--frames", frames, "--out", out / "aug"),
        run("features", fx / "a.wav", fx / "b.wav", out / "aug" / "a_acs4.wav", "--dr", "--out", out / "feat"),
        run("project", out / "aug", "--out", out / "cube"),
        run("encode-labels", fx / "a.csv", "--out", out / "a_labels.feat"),
        run("decode", out / "a_labels.feat", "--out", out / "a_pred.csv"),
        run("ensemble", "models", out / "a_pred.csv", fx / "a.csv", out / "a_pred.csv", "--out", out / "ens.csv"),
        run("eval", "--pred", out / "ens.csv", "--ref", fx / "a.csv", "--report", out / "report.txt"),
    ]
    files = {p.relative_to(root): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}
    return codes, files


def test_10_determinism(tmp_path, capsys):
    c1, f1 = _pipeline(tmp_path / "run1", 1)
    c2, f2 = _pipeline(tmp_path / "run2", 1)
    c3, f3 = _pipeline(tmp_path / "run3", 3)
    capsys.readouterr()
    ok = set(c1 + c2 + c3) == {0} and f1 == f2 == f3 and len(f1) > 15
    report(10, ok, f"{len(f1)} output files byte-identical across 2 runs and --jobs 1/3: {ok}")
