import math

import pytest

from edapprox.config import RunConfig, format_table, table_value
from edapprox.errors import ConfigError
from edapprox.rng import derive_seed, generator


def test_round_trip(tmp_path):
    cfg = RunConfig(seed=9, c_norm=3.25, calib_table="1024:2.5,2048:3.0", output_format="json")
    assert RunConfig.loads(cfg.dumps()) == cfg
    path = tmp_path / "c.cfg"
    cfg.save(path)
    assert RunConfig.load(path) == cfg
    assert path.read_text() == cfg.dumps()
    assert RunConfig.load(path).config_hash() == cfg.config_hash()


def test_hash_tracks_content():
    assert RunConfig().config_hash() == RunConfig().config_hash()
    assert RunConfig().config_hash() != RunConfig(seed=1).config_hash()
    assert len(RunConfig().config_hash()) == 16


@pytest.mark.parametrize("kw", [dict(c_norm=0), dict(base_dim=-1), dict(seed=-1), dict(seed=1 << 64),
                                dict(output_format="xml"), dict(level_quantile=1.0),
                                dict(calib_table="1024:0"), dict(distortion_table="abc")])
def test_rejects_bad_values(kw):
    with pytest.raises(ConfigError):
        RunConfig(**kw)


def test_zero_means_auto():
    assert RunConfig(branching=0, match_reps=0, threads=0).branching == 0


def test_loads_errors():
    with pytest.raises(ConfigError):
        RunConfig.loads("nonsense")
    with pytest.raises(ConfigError):
        RunConfig.loads("no_such_key=1")
    with pytest.raises(ConfigError):
        RunConfig.loads("base_dim=abc")
    with pytest.raises(ConfigError):
        RunConfig.load("/nonexistent/file.cfg")
    cfg = RunConfig.loads("# comment\n\nseed = 0x10\n")
    assert cfg.seed == 16


def test_tables():
    assert table_value([], 5) is None
    assert table_value([(10, 4.0)], 99) == 4.0
    t = [(1024, 2.0), (4096, 8.0)]
    assert table_value(t, 2048) == pytest.approx(4.0)
    assert table_value(t, 8192) == pytest.approx(16.0)
    assert table_value(t, 512) == pytest.approx(1.0)
    assert format_table([(4096, 8.0), (1024, 2.0)]) == "1024:2.0,4096:8.0"
    cfg = RunConfig(calib_table="", calib_multiplier=3.0)
    assert cfg.multiplier(100) == 3.0 and RunConfig(distortion_table="").distortion(9) is None
    cfg = RunConfig(calib_table=format_table(t), distortion_table="1024:5.0")
    assert cfg.multiplier(2048) == pytest.approx(4.0) and cfg.distortion(1) == 5.0


def test_named_streams():
    assert derive_seed(1, "a", 2) == derive_seed(1, "a", 2)
    assert len({derive_seed(1, "a", 2), derive_seed(1, "a", 3), derive_seed(2, "a", 2), derive_seed(1, "b", 2)}) == 4
    assert 0 <= derive_seed(-5, "x") < 2 ** 64
    assert generator(3, "z").random() == generator(3, "z").random()
    assert not math.isnan(generator(0).random())
