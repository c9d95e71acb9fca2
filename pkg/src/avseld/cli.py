"""``avseld`` command line entry point."""
import argparse
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import accddoa, augment, ensemble, features, io, metrics, projection, synth
from .config import ConfigError, load_config

log = logging.getLogger("avseld")


def _map(fn, items, jobs):
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _out_dir(path):
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _num_frames(args, *event_lists):
    if getattr(args, "frames", None):
        return args.frames
    last = max((e.frame for evs in event_lists for e in evs), default=-1)
    return last + 1


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def cmd_features(args, cfg):
    out = _out_dir(args.out)
    fb = cfg.filterbank()
    win, hop = cfg["stft.win"], cfg["stft.hop"]
    if args.hop in ("eval", "train"):
        spec = cfg.chunk(train=args.hop == "train")
    else:
        spec = io.ChunkSpec(cfg["chunk.len"], float(args.hop))
    jobs = []
    for path in args.wav:
        clip = io.read_foa_wav(path)
        for k, (a, b) in enumerate(io.chunk_indices(clip.duration, spec)):
            jobs.append((out / f"{Path(path).stem}_c{k:04d}.feat", io.slice_clip(clip, a, b)))

    def run(job):
        dest, chunk = job
        stack = features.build_feature_stack(chunk, args.dr, cfg.wpe(), fb, win, hop)
        features.write_tensor(dest, stack.data)
        return dest

    for dest in _map(run, jobs, args.jobs):
        print(dest)
    return 0


def cmd_augment(args, cfg):
    t = augment.acs_table()[args.transform_id]
    out = _out_dir(args.out)
    suffix = f"_acs{t.id}"
    if args.wav:
        clip = augment.acs_audio(io.read_foa_wav(args.wav), t)
        dest = out / f"{Path(args.wav).stem}{suffix}.wav"
        io.write_foa_wav(dest, clip)
        print(dest)
    if args.csv:
        events = augment.acs_labels(io.read_metadata_csv(args.csv, cfg["distance_unit"]), t)
        dest = out / f"{Path(args.csv).stem}{suffix}.csv"
        io.write_metadata_csv(dest, events, cfg["distance_unit"])
        print(dest)
    if args.frames:
        def run(path):
            dest = out / f"{path.stem}{suffix}{path.suffix}"
            io.write_image(dest, augment.avcs_frame(io.read_image(path), t))
            return dest

        for dest in _map(run, io.list_frames(args.frames), args.jobs):
            print(dest)
    return 0


def cmd_project(args, cfg):
    out = _out_dir(args.out)

    def run(path):
        strip = projection.equirect_to_cubemap(io.read_image(path), args.face_size)
        dest = out / f"{path.stem}_cube{path.suffix}"
        io.write_image(dest, strip.image)
        return dest

    for dest in _map(run, io.list_frames(args.frames), args.jobs):
        print(dest)
    return 0


def cmd_encode(args, cfg):
    events = io.read_metadata_csv(args.csv, cfg["distance_unit"])
    tensor = accddoa.encode(events, _num_frames(args, events))
    features.write_tensor(args.out, accddoa.to_file_layout(tensor))
    print(args.out)
    return 0


def cmd_decode(args, cfg):
    tensor = accddoa.from_file_layout(features.read_tensor(args.tensor))
    events = accddoa.decode_frames(tensor.astype(np.float64), cfg.decode())
    io.write_prediction_csv(args.out, events)
    print(args.out)
    return 0


def cmd_ensemble(args, cfg):
    unit = cfg["distance_unit"]
    lists = [io.read_events_csv(p, unit) for p in args.inputs]
    if args.mode == "temporal":
        length = int(round(args.len * io.LABEL_FPS))
        hop = int(round(args.hop * io.LABEL_FPS))
        windows = [io.group_by_frame(evs, length) for evs in lists]
        ecfg = cfg.ensemble()
        fused = ensemble.fuse_temporal(windows, ecfg, hop)
    else:
        n = _num_frames(args, *lists)
        ecfg = cfg.ensemble()
        if args.exceptions is not None:
            names = [s for s in args.exceptions.split(",") if s.strip()]
            ecfg = ensemble.EnsembleConfig(ecfg.angle_threshold, ecfg.min_votes, frozenset(io.class_id(s) for s in names))
        fused = ensemble.fuse_models([io.group_by_frame(evs, n) for evs in lists], ecfg)
    io.write_prediction_csv(args.out, io.flatten_frames(fused))
    print(args.out)
    return 0


def format_report(report, cfg):
    head = f"F<={cfg.angle_threshold:g}deg/{cfg.rel_dist_threshold:g}"
    lines = [
        f"{head:>14} {'DOAE':>8} {'RDE':>8}",
        f"{100 * report.f1:13.1f}% {report.doae:7.1f}° {100 * report.rde:7.1f}%",
    ]
    return "\n".join(lines)


def cmd_eval(args, cfg):
    unit = cfg["distance_unit"]
    preds = io.read_events_csv(args.pred, unit)
    refs = io.read_events_csv(args.ref, unit)
    n = _num_frames(args, preds, refs)
    mcfg = cfg.matching()
    report = metrics.evaluate(io.group_by_frame(preds, n), io.group_by_frame(refs, n), mcfg)
    print(format_report(report, mcfg))
    if args.report:
        with open(args.report, "w") as fh:
            for key, value in report.as_dict().items():
                fh.write(f"{key}={value!r}\n")
    return 0


def cmd_synth(args, cfg):
    out = _out_dir(args.out)
    reverb = synth.Reverb(args.t60, args.drr, args.seed + 1) if args.t60 else None
    spec = synth.SourceSpec(args.az, args.el, args.dist, args.signal, args.seed, reverb=reverb)
    clip = synth.plane_wave_foa(spec, args.duration, pcm_bits=args.pcm_bits)
    io.write_foa_wav(out / f"{args.name}.wav", clip, args.pcm_bits)
    nframes = int(round(args.duration * io.LABEL_FPS))
    events = [io.Event(f, args.cls, 0, float(args.az), float(args.el), float(args.dist)) for f in range(nframes)]
    io.write_metadata_csv(out / f"{args.name}.csv", events, cfg["distance_unit"])
    w = args.frame_width
    io.write_image(out / f"{args.name}_frame.png", synth.marker_image(w, w // 2, args.az, args.el))
    for suffix in (".wav", ".csv", "_frame.png"):
        print(out / f"{args.name}{suffix}")
    return 0


# --------------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="avseld", description="Audio-visual SELD feature, augmentation, label and metric toolkit")
    p.add_argument("--config", help="key = value config file")
    p.add_argument("--jobs", type=int, default=1, help="parallel workers for file-level work")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("features", help="log-mel + intensity vector (+ direct/reverb) tensors per chunk")
    s.add_argument("wav", nargs="+")
    s.add_argument("--out", required=True)
    s.add_argument("--dr", action="store_true", help="append WPE direct/reverberant log-mels")
    s.add_argument("--hop", default="eval", help="eval, train, or a hop in seconds")
    s.set_defaults(fn=cmd_features)

    s = sub.add_parser("augment", help="apply one of the 8 channel-swap transforms")
    s.add_argument("--transform-id", type=int, required=True, choices=range(8))
    s.add_argument("--wav")
    s.add_argument("--csv")
    s.add_argument("--frames", help="directory of equirectangular frames")
    s.add_argument("--out", required=True)
    s.set_defaults(fn=cmd_augment)

    s = sub.add_parser("project", help="equirectangular frames to horizontal cubemap strips")
    s.add_argument("frames")
    s.add_argument("--out", required=True)
    s.add_argument("--face-size", type=int, default=projection.FACE_SIZE)
    s.set_defaults(fn=cmd_project)

    s = sub.add_parser("encode-labels", help="metadata CSV to multi-ACCDDOA tensor file")
    s.add_argument("csv")
    s.add_argument("--out", required=True)
    s.add_argument("--frames", type=int)
    s.set_defaults(fn=cmd_encode)

    s = sub.add_parser("decode", help="multi-ACCDDOA tensor file to prediction CSV")
    s.add_argument("tensor")
    s.add_argument("--out", required=True)
    s.set_defaults(fn=cmd_decode)

    s = sub.add_parser("ensemble", help="temporal or cross-model ensemble of prediction CSVs")
    s.add_argument("mode", choices=("temporal", "models"))
    s.add_argument("inputs", nargs="+", help="window CSVs in start order (temporal) or one CSV per model")
    s.add_argument("--out", required=True)
    s.add_argument("--hop", type=float, default=1.0, help="window hop in seconds (temporal)")
    s.add_argument("--len", type=float, default=3.0, help="window length in seconds (temporal)")
    s.add_argument("--exceptions", help="comma-separated class names needing a single vote (models)")
    s.add_argument("--frames", type=int)
    s.set_defaults(fn=cmd_ensemble)

    s = sub.add_parser("eval", help="F1 / DOAE / RDE of predictions against references")
    s.add_argument("--pred", required=True)
    s.add_argument("--ref", required=True)
    s.add_argument("--report", help="write key=value report here")
    s.add_argument("--frames", type=int)
    s.set_defaults(fn=cmd_eval)

    s = sub.add_parser("synth", help="write a synthetic plane-wave fixture (wav, csv, marker frame)")
    s.add_argument("--out", required=True)
    s.add_argument("--name", default="fixture")
    s.add_argument("--az", type=float, default=0.0)
    s.add_argument("--el", type=float, default=0.0)
    s.add_argument("--dist", type=float, default=1.0)
    s.add_argument("--cls", type=int, default=0)
    s.add_argument("--duration", type=float, default=3.0)
    s.add_argument("--signal", default="white_noise", choices=("white_noise", "noise_bursts", "tone", "impulse"))
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--t60", type=float, default=0.0, help="add an exponential reverb tail")
    s.add_argument("--drr", type=float, default=0.0)
    s.add_argument("--pcm-bits", type=int, choices=(16, 32))
    s.add_argument("--frame-width", type=int, default=448)
    s.set_defaults(fn=cmd_synth)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config)
        return args.fn(args, cfg)
    except (ConfigError, io.FormatError, ValueError, OSError) as exc:
        print(f"avseld {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
