from pathlib import Path

import pytest

from avseld.config import SCHEMA, ConfigError, PipelineConfig, load_config

DEFAULT_CFG = Path(__file__).resolve().parents[1] / "configs" / "default.cfg"


def test_defaults_file_matches_code():
    assert load_config(DEFAULT_CFG, environ={}).values == PipelineConfig().values
    body = [ln for ln in DEFAULT_CFG.read_text().splitlines() if not ln.startswith("#")]
    assert body == PipelineConfig().dumps().splitlines()


def test_pipeline_constants():
    cfg = PipelineConfig()
    assert (cfg["stft.win"], cfg["stft.hop"], cfg["mel.bands"]) == (512, 150, 128)
    w = cfg.wpe()
    assert (w.taps, w.delay, w.iterations) == (60, 5, 5)
    assert cfg.ensemble().angle_threshold == 15.0 and cfg.ensemble().min_votes == 2
    assert cfg.ensemble().exception_classes == frozenset({10, 11, 12})
    m = cfg.matching()
    assert (m.angle_threshold, m.rel_dist_threshold) == (20.0, 1.0)


def test_unknown_key_lists_it(tmp_path):
    p = tmp_path / "bad.cfg"
    p.write_text("stft.hop = 150\nwpe.tapz = 3\nfoo = 1\n")
    with pytest.raises(ConfigError, match="wpe.tapz, foo"):
        load_config(p, environ={})


def test_file_then_env_override(tmp_path):
    p = tmp_path / "c.cfg"
    p.write_text("# comment\nwpe.taps = 30  # inline\nmetrics.angle = 10\n")
    cfg = load_config(p, environ={"AVSELD_WPE_TAPS": "12"})
    assert cfg["wpe.taps"] == 12 and cfg["metrics.angle"] == 10.0


@pytest.mark.parametrize(
    "line",
    ["stft.hop = 0", "stft.hop = abc", "mel.fmax = 20000", "decode.threshold = 1.5", "ensemble.exceptions = Banjo", "sample_rate = 48000", "distance_unit = ft", "no equals sign"],
)
def test_invalid_values(tmp_path, line):
    p = tmp_path / "c.cfg"
    p.write_text(line + "\n")
    with pytest.raises(ConfigError):
        load_config(p, environ={})


def test_every_key_has_env_name():
    env = {"AVSELD_" + k.upper().replace(".", "_"): str(v if not isinstance(v, tuple) else ",".join(v)) for k, (_, v) in SCHEMA.items()}
    assert load_config(environ=env).values == PipelineConfig().values
