"""Location- and distance-dependent F1, DOA error and relative distance error.

Matching is per frame and per class: an optimal one-to-one assignment
minimizing total angular error. A matched pair is a true positive when its
angular error is within ``angle_threshold`` and its relative distance error
within ``rel_dist_threshold``; a pair failing either counts as one false
positive and one false negative. DOAE and RDE average over all matched pairs
regardless of the thresholds. Class scores are macro-averaged.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .geometry import angular_distance, sph_to_cart, vector_angle
from .io import NUM_CLASSES, FormatError

__all__ = ["MatchingConfig", "ClassScore", "EvalReport", "angular_distance", "match_frame", "evaluate"]


@dataclass(frozen=True)
class MatchingConfig:
    angle_threshold: float = 20.0
    rel_dist_threshold: float = 1.0

    def __post_init__(self):
        if self.angle_threshold <= 0 or self.rel_dist_threshold <= 0:
            raise ValueError("matching thresholds must be positive")


@dataclass
class ClassScore:
    class_id: int
    tp: int = 0
    fp: int = 0
    fn: int = 0
    n_ref: int = 0
    angle_errors: list = field(default_factory=list, repr=False)
    dist_errors: list = field(default_factory=list, repr=False)

    @property
    def f1(self):
        denom = 2 * self.tp + self.fp + self.fn
        return 2 * self.tp / denom if denom else float("nan")

    @property
    def doae(self):
        return float(np.mean(self.angle_errors)) if self.angle_errors else float("nan")

    @property
    def rde(self):
        return float(np.mean(self.dist_errors)) if self.dist_errors else float("nan")


@dataclass
class EvalReport:
    f1: float
    doae: float
    rde: float
    per_class: list

    def as_dict(self):
        out = {"f1": self.f1, "doae": self.doae, "rde": self.rde}
        for c in self.per_class:
            for key in ("tp", "fp", "fn"):
                out[f"class{c.class_id}.{key}"] = getattr(c, key)
            out[f"class{c.class_id}.doae"] = c.doae
            out[f"class{c.class_id}.rde"] = c.rde
        return out


def match_frame(preds, refs, cls):
    """Optimal pairing of one frame's class-``cls`` predictions and references.

    Returns ``(pairs, unmatched_preds, unmatched_refs)`` where each pair is
    ``(pred, ref, angle_deg)``.
    """
    p = [e for e in preds if e.class_id == cls]
    r = [e for e in refs if e.class_id == cls]
    if not p or not r:
        return [], p, r
    pv = sph_to_cart([e.azimuth for e in p], [e.elevation for e in p])
    rv = sph_to_cart([e.azimuth for e in r], [e.elevation for e in r])
    cost = vector_angle(pv[:, None, :], rv[None, :, :])
    rows, cols = linear_sum_assignment(cost)
    pairs = [(p[i], r[j], float(cost[i, j])) for i, j in zip(rows, cols)]
    used_p, used_r = set(rows.tolist()), set(cols.tolist())
    return pairs, [e for i, e in enumerate(p) if i not in used_p], [e for j, e in enumerate(r) if j not in used_r]


def evaluate(preds, refs, cfg=MatchingConfig()):
    """Score per-frame prediction lists against per-frame reference lists."""
    if len(preds) != len(refs):
        raise FormatError(f"frame count mismatch: {len(preds)} predicted vs {len(refs)} reference frames")
    scores = [ClassScore(c) for c in range(NUM_CLASSES)]
    for t, (pf, rf) in enumerate(zip(preds, refs)):
        for e in rf:
            if e.distance <= 0:
                raise FormatError(f"frame {t}, class {e.class_id}: reference distance must be positive")
        for cls in {e.class_id for e in pf} | {e.class_id for e in rf}:
            sc = scores[cls]
            pairs, up, ur = match_frame(pf, rf, cls)
            sc.n_ref += sum(1 for e in rf if e.class_id == cls)
            sc.fp += len(up)
            sc.fn += len(ur)
            for pe, re, ang in pairs:
                rel = abs(pe.distance - re.distance) / re.distance
                sc.angle_errors.append(ang)
                sc.dist_errors.append(rel)
                if ang <= cfg.angle_threshold and rel <= cfg.rel_dist_threshold:
                    sc.tp += 1
                else:
                    sc.fp += 1
                    sc.fn += 1
    f1s = [s.f1 for s in scores if s.n_ref > 0]
    doaes = [s.doae for s in scores if s.angle_errors]
    rdes = [s.rde for s in scores if s.dist_errors]
    return EvalReport(
        f1=float(np.mean(f1s)) if f1s else float("nan"),
        doae=float(np.mean(doaes)) if doaes else float("nan"),
        rde=float(np.mean(rdes)) if rdes else float("nan"),
        per_class=scores,
    )
