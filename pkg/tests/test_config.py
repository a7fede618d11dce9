"""Config loading, defaulting, and strict validation."""

import json

import pytest

from fedsim.config import ExperimentConfig, load_config, parse_config
from fedsim.errors import ConfigError


class TestDefaults:
    def test_minimal_config_expands(self):
        cfg = parse_config({"mode": "centralized", "seed": 1})
        assert cfg.mode == "centralized"
        assert cfg.seed == 1
        assert cfg.dataset.kind == "synthetic"
        assert cfg.clients == 10
        assert cfg.rounds == 20
        assert cfg.epochs == 10
        assert cfg.centralized_epochs == 25
        assert cfg.strategy.rule == "fedavg"
        assert cfg.partition.kind == "iid"
        assert cfg.dynamic_lr_factor is None

    def test_default_synthetic_spec(self):
        cfg = ExperimentConfig()
        assert cfg.dataset.class_count == 2
        assert cfg.dataset.dims == 8
        assert cfg.dataset.samples_per_class == 500
        assert cfg.dataset.center_separation == 6.0
        assert cfg.dataset.noise_stddev == 1.0


class TestValidation:
    def test_out_of_range_names_field(self):
        with pytest.raises(ConfigError, match="fraction_fit"):
            parse_config({"fraction_fit": 1.5})

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="bogus"):
            parse_config({"bogus": 1})

    def test_nested_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="strategy"):
            parse_config({"strategy": {"rule": "fedavg", "mu": 0.1}})

    def test_mu_belongs_to_fedprox(self):
        cfg = parse_config({"strategy": {"rule": "fedprox", "mu": 0.5}})
        assert cfg.strategy.mu == 0.5

    def test_fedopt_momentum_range(self):
        with pytest.raises(ConfigError, match="server_momentum"):
            parse_config({"strategy": {"rule": "fedopt", "server_momentum": 1.0}})

    def test_negative_hidden_layer(self):
        with pytest.raises(ConfigError, match="hidden_layers"):
            parse_config({"hidden_layers": [8, 0]})

    def test_min_fit_clients_capped_by_clients(self):
        with pytest.raises(ConfigError, match="min_fit_clients"):
            parse_config({"clients": 2, "min_fit_clients": 3})

    def test_seed_range(self):
        with pytest.raises(ConfigError, match="seed"):
            parse_config({"seed": -1})
        with pytest.raises(ConfigError, match="seed"):
            parse_config({"seed": 2**64})

    def test_dirichlet_alpha_positive(self):
        with pytest.raises(ConfigError, match="alpha"):
            parse_config({"partition": {"kind": "dirichlet", "alpha": 0.0}})

    def test_empty_hidden_layers_allowed(self):
        cfg = parse_config({"hidden_layers": []})
        assert cfg.hidden_layers == []


class TestRoundTrip:
    def test_dump_then_parse_is_identity(self):
        cfg = parse_config(
            {
                "mode": "federated",
                "strategy": {"rule": "fedopt", "server_learning_rate": 0.5},
                "partition": {"kind": "dirichlet", "alpha": 0.3},
                "dynamic_lr_factor": 2.0,
                "seed": 9,
            }
        )
        echoed = parse_config(cfg.model_dump(mode="json"))
        assert echoed == cfg


class TestLoadConfig:
    def test_reads_file(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"mode": "centralized", "seed": 3}))
        assert load_config(str(path)).seed == 3

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read"):
            load_config(str(tmp_path / "nope.json"))

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError, match="not valid JSON"):
            load_config(str(path))

    def test_non_object_root(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text("[1, 2]")
        with pytest.raises(ConfigError, match="JSON object"):
            load_config(str(path))
