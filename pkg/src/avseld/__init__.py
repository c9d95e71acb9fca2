"""Audio-visual SELD toolkit: features, augmentation, projection, labels, ensembles, metrics."""
from .io import Event, FoaClip

__version__ = "0.1.0"
__all__ = ["Event", "FoaClip"]
