"""Tests for the INI run configuration."""

from pathlib import Path

import pytest

from catbp_core import ConfigError, Regime
from catbp_engine.config import RunConfig, as_dict, load_config, parse_config

SAMPLE = """
[run]
seed = 42
threads = 2

[model]
n = 20
pmf1 = 0.3 0.45 0.25
pmf2 = 0.3, 0.45, 0.25

[sim]
horizon = 2.5
noise = off

[study]
n_list = 10 20 40
regime = branching
"""


class TestParse:
    def test_defaults(self):
        config = load_config(None)
        assert config == RunConfig()
        assert config.run.seed == 1
        assert config.threads is None
        assert config.study.n_list == (25, 50, 100)

    def test_values_are_typed(self):
        config = parse_config(SAMPLE)
        assert config.run.seed == 42
        assert config.threads == 2
        assert config.model.pmf1 == (0.3, 0.45, 0.25)
        assert config.model.pmf2 == config.model.pmf1
        assert config.sim.horizon == 2.5
        assert config.sim.noise is False
        assert config.study.n_list == (10, 20, 40)
        assert config.study.regime is Regime.BRANCHING

    def test_reads_file(self, tmp_path):
        path = tmp_path / "run.ini"
        path.write_text(SAMPLE, encoding="utf-8")
        assert load_config(path) == parse_config(SAMPLE)

    @pytest.mark.parametrize(
        "text,match",
        [
            ("[nope]\nx = 1\n", "unknown section"),
            ("[run]\nsede = 1\n", "unknown key"),
            ("[run]\nSeed = 1\n", "unknown key"),
            ("[run]\nseed = -1\n", "seed"),
            ("[sim]\nhorizon = soon\n", "sim.horizon"),
            ("[sim]\nnoise = maybe\n", "boolean"),
            ("[study]\nregime = jump\n", "study.regime"),
            ("[io]\nformat = xml\n", "csv or json"),
            ("[model]\npmf1 = 0:0.5, 0:0.5\n", "model.pmf1"),
            ("[model]\npmf2 = 0:0.5, 1:0.4\n", "model.pmf2"),
            ("seed = 1\n", ""),
        ],
    )
    def test_rejects_bad_input(self, text, match):
        with pytest.raises(ConfigError, match=match):
            parse_config(text)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read"):
            load_config(tmp_path / "absent.ini")


class TestModelSection:
    def test_matched_family_by_default(self):
        params = RunConfig().model.branching(20)
        assert params.pmf1.probs == pytest.approx((0.3, 0.45, 0.25))
        assert params.c1 == pytest.approx(-1.0)

    def test_explicit_pmfs_set_the_limit(self):
        limit = parse_config(SAMPLE).model.limit()
        assert limit.c1 == pytest.approx(-1.0)
        assert limit.alpha1 == pytest.approx(0.55)

    def test_pmfs_in_count_notation(self):
        config = parse_config("[model]\npmf1 = 0:0.3, 2:0.7\npmf2 = 1:1\n")
        assert config.model.pmf1 == (0.3, 0.0, 0.7)
        assert config.model.pmf2 == (0.0, 1.0)
        assert config.model.branching(10).pmf1.to_text() == "0:0.3, 2:0.7"

    def test_single_pmf_is_rejected(self):
        config = parse_config("[model]\npmf1 = 0 1\n")
        with pytest.raises(ConfigError, match="both"):
            config.model.branching()


class TestRunConfig:
    def test_override(self):
        config = RunConfig().override(seed=9, reps=30, format="json", out=None)
        assert config.run.seed == 9
        assert (config.sim.reps, config.study.reps) == (30, 30)
        assert config.io.format == "json"
        assert config.io.out == ""

    def test_override_checks_seed(self):
        with pytest.raises(ConfigError):
            RunConfig().override(seed=2**64)

    def test_digest_tracks_effective_values(self):
        base = RunConfig()
        assert base.digest() == RunConfig().digest()
        assert base.digest() != base.override(seed=2).digest()
        assert len(base.digest()) == 64

    def test_items_are_canonical(self):
        items = dict(parse_config(SAMPLE).items())
        assert items["model.pmf1"] == "0.3 0.45 0.25"
        assert items["sim.noise"] == "false"
        assert items["study.regime"] == "branching"
        assert items["sim.dt"] == "0.001"

    def test_as_dict(self):
        document = as_dict(RunConfig())
        assert set(document) == {"run", "model", "sim", "study", "io"}
        assert document["sim"]["horizon"] == 1.0


@pytest.mark.parametrize("path", sorted((Path(__file__).parents[3] / "configs").glob("*.ini")), ids=lambda p: p.name)
def test_shipped_configs_parse(path):
    config = load_config(path)
    assert config.model.pmf1 or config.model.limit().c1 < 0
