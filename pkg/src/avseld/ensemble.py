"""Temporal and cross-model ensembling by spatially thresholded voting."""
from dataclasses import dataclass, field

import numpy as np

from .geometry import cart_to_sph, sph_to_cart, vector_angle
from .io import NUM_CLASSES, Event, FormatError, class_id

DEFAULT_EXCEPTIONS = frozenset(class_id(n) for n in ("Water tap", "Bell", "Knock"))


@dataclass(frozen=True)
class EnsembleConfig:
    angle_threshold: float = 15.0
    min_votes: int = 2
    exception_classes: frozenset = field(default=DEFAULT_EXCEPTIONS)
    exception_min_votes: int = 1

    def __post_init__(self):
        if self.angle_threshold <= 0:
            raise ValueError("angle_threshold must be positive")
        if not 1 <= self.min_votes <= 3:
            raise ValueError("min_votes must be in 1..3")
        if not 1 <= self.exception_min_votes <= self.min_votes:
            raise ValueError("exception_min_votes must be in 1..min_votes")
        object.__setattr__(self, "exception_classes", frozenset(self.exception_classes))


@dataclass
class Cluster:
    members: list  # (source index, Event)

    @property
    def votes(self):
        return len({s for s, _ in self.members})

    def vectors(self):
        return np.array([sph_to_cart(e.azimuth, e.elevation) for _, e in self.members])

    def centroid(self):
        v = self.vectors().sum(axis=0)
        return v / np.linalg.norm(v)


def cluster_detections(sources, cls, angle_threshold=15.0):
    """Group same-class detections of several sources by direction.

    Greedy: repeatedly seed with the closest cross-source pair within the
    threshold, then attach the detection (from a source not yet in the
    cluster) nearest to the running centroid while it stays within the
    threshold. Leftover detections become singleton clusters. Ties resolve
    by (source, position) order.
    """
    pool = [(s, i, e) for s, evs in enumerate(sources) for i, e in enumerate(evs) if e.class_id == cls]
    vecs = {(s, i): sph_to_cart(e.azimuth, e.elevation) for s, i, e in pool}
    clusters = []
    while True:
        best = None
        for a in range(len(pool)):
            for b in range(a + 1, len(pool)):
                pa, pb = pool[a], pool[b]
                if pa[0] == pb[0]:
                    continue
                ang = vector_angle(vecs[pa[:2]], vecs[pb[:2]])
                if ang <= angle_threshold and (best is None or ang < best[0]):
                    best = (ang, a, b)
        if best is None:
            break
        _, a, b = best
        members = [pool[a], pool[b]]
        pool = [p for k, p in enumerate(pool) if k not in (a, b)]
        while True:
            used = {m[0] for m in members}
            centroid = np.sum([vecs[m[:2]] for m in members], axis=0)
            pick = None
            for k, p in enumerate(pool):
                if p[0] in used:
                    continue
                ang = vector_angle(centroid, vecs[p[:2]])
                if ang <= angle_threshold and (pick is None or ang < pick[0]):
                    pick = (ang, k)
            if pick is None:
                break
            members.append(pool.pop(pick[1]))
        clusters.append(Cluster([(s, e) for s, _, e in members]))
    clusters.extend(Cluster([(s, e)]) for s, _, e in pool)
    return clusters


def fuse_cluster(cluster, frame, source_id):
    """Mean of member x, y, z and distance; the direction is renormalized."""
    xyz = cluster.vectors().mean(axis=0)
    dist = float(np.mean([e.distance for _, e in cluster.members]))
    az, el = cart_to_sph(xyz)
    return Event(frame, cluster.members[0][1].class_id, source_id, float(az), float(el), dist)


def fuse_frame(sources, frame, cfg, required):
    """Fuse one frame; ``required(cls)`` gives the vote count a cluster needs."""
    out = []
    for cls in range(NUM_CLASSES):
        kept = [c for c in cluster_detections(sources, cls, cfg.angle_threshold) if c.votes >= required(cls)]
        out.extend(fuse_cluster(c, frame, k) for k, c in enumerate(kept))
    return out


def fuse_temporal(windows, cfg=EnsembleConfig(), hop_frames=10):
    """Fuse overlapping window predictions into one per-frame sequence.

    ``windows[k]`` holds the per-frame event lists (window-local frames) of
    the window starting at absolute frame ``k * hop_frames``. Frames covered
    by S windows need a majority of them, capped at ``cfg.min_votes``.
    """
    if not windows:
        return []
    length = len(windows[0])
    if hop_frames <= 0 or any(len(w) != length for w in windows):
        raise FormatError("misaligned windows: all windows must have the same length and a positive hop")
    total = (len(windows) - 1) * hop_frames + length
    fused = []
    for t in range(total):
        sources = []
        for k, w in enumerate(windows):
            local = t - k * hop_frames
            if 0 <= local < length:
                sources.append(w[local])
        need = min(cfg.min_votes, len(sources) // 2 + 1)
        fused.append(fuse_frame(sources, t, cfg, lambda cls: need))
    return fused


def fuse_models(models, cfg=EnsembleConfig()):
    """Fuse aligned per-frame predictions of several models.

    Exception classes survive with ``cfg.exception_min_votes`` votes.
    """
    if not models:
        return []
    n = len(models[0])
    if any(len(m) != n for m in models):
        raise FormatError("misaligned inputs: models disagree on frame count")

    def need(cls):
        return cfg.exception_min_votes if cls in cfg.exception_classes else cfg.min_votes

    return [fuse_frame([m[t] for m in models], t, cfg, need) for t in range(n)]
