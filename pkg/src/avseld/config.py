"""Flat ``key = value`` pipeline configuration.

Defaults are the reference pipeline constants; a config file and ``AVSELD_*``
environment variables (``stft.hop`` -> ``AVSELD_STFT_HOP``) override them,
in that order.
"""
import os

from .accddoa import DecodeConfig
from .ensemble import EnsembleConfig
from .features import WpeConfig, mel_filterbank
from .io import ChunkSpec, class_id
from .metrics import MatchingConfig

ENV_PREFIX = "AVSELD_"


class ConfigError(ValueError):
    pass


def _names(value):
    return tuple(v.strip() for v in value.split(",") if v.strip())


# key -> (parser, default)
SCHEMA = {
    "sample_rate": (int, 24000),
    "stft.win": (int, 512),
    "stft.hop": (int, 150),
    "mel.bands": (int, 128),
    "mel.fmin": (float, 0.0),
    "mel.fmax": (float, 12000.0),
    "wpe.taps": (int, 60),
    "wpe.delay": (int, 5),
    "wpe.iterations": (int, 5),
    "wpe.epsilon": (float, 1e-10),
    "wpe.regularization": (float, 1e-10),
    "chunk.len": (float, 3.0),
    "chunk.hop_train": (float, 1.0),
    "chunk.hop_eval": (float, 3.0),
    "decode.threshold": (float, 0.5),
    "decode.merge_angle": (float, 15.0),
    "ensemble.angle": (float, 15.0),
    "ensemble.min_votes": (int, 2),
    "ensemble.exceptions": (_names, ("watertap", "bell", "knock")),
    "metrics.angle": (float, 20.0),
    "metrics.rel_dist": (float, 1.0),
    "distance_unit": (str, "cm"),
}


class PipelineConfig:
    def __init__(self, values=None):
        self.values = {k: default for k, (_, default) in SCHEMA.items()}
        if values:
            self.values.update(values)
        self.validate()

    def __getitem__(self, key):
        return self.values[key]

    def validate(self):
        v = self.values
        if v["sample_rate"] != 24000:
            raise ConfigError("sample_rate: only 24000 Hz input is supported")
        if v["stft.win"] < 2 or v["stft.hop"] < 1 or v["stft.hop"] > v["stft.win"]:
            raise ConfigError("stft: need win >= 2 and 1 <= hop <= win")
        if v["mel.bands"] < 1:
            raise ConfigError("mel.bands must be positive")
        if v["distance_unit"] not in ("cm", "m"):
            raise ConfigError("distance_unit must be cm or m")
        try:
            self.filterbank()
            self.wpe()
            self.chunk(train=True)
            self.chunk(train=False)
            self.decode()
            self.ensemble()
            self.matching()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def filterbank(self):
        v = self.values
        return mel_filterbank(v["mel.fmin"], v["mel.fmax"], v["mel.bands"], v["stft.win"], v["sample_rate"])

    def wpe(self):
        v = self.values
        return WpeConfig(v["wpe.taps"], v["wpe.delay"], v["wpe.iterations"], v["wpe.epsilon"], v["wpe.regularization"])

    def chunk(self, train=False):
        v = self.values
        return ChunkSpec(v["chunk.len"], v["chunk.hop_train"] if train else v["chunk.hop_eval"])

    def decode(self):
        return DecodeConfig(self.values["decode.threshold"], self.values["decode.merge_angle"])

    def ensemble(self):
        v = self.values
        return EnsembleConfig(v["ensemble.angle"], v["ensemble.min_votes"], frozenset(class_id(n) for n in v["ensemble.exceptions"]))

    def matching(self):
        return MatchingConfig(self.values["metrics.angle"], self.values["metrics.rel_dist"])

    def dumps(self):
        lines = []
        for key, value in self.values.items():
            if isinstance(value, tuple):
                value = ",".join(value)
            lines.append(f"{key} = {value}")
        return "\n".join(lines) + "\n"


def _parse(key, raw, origin):
    parser = SCHEMA[key][0]
    try:
        return parser(raw.strip())
    except ValueError:
        raise ConfigError(f"{origin}: bad value {raw.strip()!r} for {key}") from None


def load_config(path=None, environ=None):
    values = {}
    if path is not None:
        unknown = []
        with open(path) as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected key = value")
                key, raw = (s.strip() for s in line.split("=", 1))
                if key not in SCHEMA:
                    unknown.append(key)
                    continue
                values[key] = _parse(key, raw, f"{path}:{lineno}")
        if unknown:
            raise ConfigError(f"{path}: unknown config keys: {', '.join(unknown)}")
    environ = os.environ if environ is None else environ
    for key in SCHEMA:
        env = ENV_PREFIX + key.upper().replace(".", "_")
        if env in environ:
            values[key] = _parse(key, environ[env], env)
    return PipelineConfig(values)
