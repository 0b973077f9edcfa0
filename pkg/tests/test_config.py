import json

import pytest

from ifs_sync.config import KINDS, SCHEMA, ConfigError, config_from_dict, parse_config

BASE = {
    "system": {"manifold": "circle", "maps": [{"type": "rotation", "alpha": 0.25}], "probs": [1.0]},
    "experiment": {"kind": "lyapunov", "n": 100000, "burn": 1000, "blocks": 10},
    "seed": 42,
    "output": "out/run1",
}


def with_(path, value, doc=BASE):
    doc = json.loads(json.dumps(doc))
    *head, last = path
    node = doc
    for k in head:
        node = node[k]
    node[last] = value
    return doc


def test_documented_example_is_valid():
    cfg = parse_config(json.dumps(BASE))
    assert cfg.kind == "lyapunov" and cfg.seed == 42 and cfg.output == "out/run1"
    assert cfg.experiment["n"] == 100000


def test_probability_sum_error():
    doc = with_(["system"], {"manifold": "circle", "maps": [{"type": "rotation", "alpha": 0.1}] * 2, "probs": [0.5, 0.6]})
    with pytest.raises(ConfigError, match="probabilities sum to 1.1") as e:
        config_from_dict(doc)
    assert e.value.path == "system.probs"


def test_range_error_names_field():
    doc = with_(["system", "maps"], [{"type": "north_south", "c": 0.2}])
    with pytest.raises(ConfigError) as e:
        config_from_dict(doc)
    assert e.value.path == "system.maps[0].c"


def test_nested_range_error_path():
    inner = {"type": "flat_ns", "c": -0.1, "r0": 0.5, "kappa0": 0.1}
    doc = with_(["system", "maps"], [{"type": "composition", "maps": [{"type": "rotation", "alpha": 0.1}, inner]}])
    with pytest.raises(ConfigError) as e:
        config_from_dict(doc)
    assert e.value.path == "system.maps[0].maps[1].r0"


@pytest.mark.parametrize(
    "path, value, where",
    [
        (["extra"], 1, "(root)"),
        (["experiment", "nn"], 5, "experiment"),
        (["system", "maps", 0, "beta"], 1.0, "system.maps[0]"),
        (["experiment", "n"], 1, "experiment.n"),
        (["experiment", "kind"], "nope", "experiment.kind"),
        (["seed"], -1, "seed"),
        (["seed"], 2**64, "seed"),
        (["system", "manifold"], "torus", "system.manifold"),
    ],
)
def test_schema_errors_carry_paths(path, value, where):
    with pytest.raises(ConfigError) as e:
        config_from_dict(with_(path, value))
    assert e.value.path == where


def test_missing_probs_without_noise():
    doc = with_(["system"], {"manifold": "circle", "maps": [{"type": "rotation", "alpha": 0.1}]})
    with pytest.raises(ConfigError):
        config_from_dict(doc)


def test_malformed_json():
    with pytest.raises(ConfigError, match="malformed JSON"):
        parse_config("{not json")


def test_defaults_filled_and_recorded():
    doc = with_(["experiment"], {"kind": "sync"})
    cfg = config_from_dict(doc)
    assert cfg.experiment == {"kind": "sync", "pairs": 500, "n": 2000, "tol": 1e-6}
    assert set(cfg.defaults) == {"pairs", "n", "tol"}


def test_manifold_dependent_defaults():
    sphere = {"manifold": "sphere", "maps": [{"type": "sphere_scale", "lam": 0.8}], "probs": [1.0]}
    cfg = config_from_dict(with_(["experiment"], {"kind": "pullback"}, with_(["system"], sphere)))
    assert cfg.experiment["cluster_radius"] == 1e-3
    cfg = config_from_dict(with_(["experiment"], {"kind": "pullback"}))
    assert cfg.experiment["cluster_radius"] == 1e-4


def test_round_trip():
    for kind in KINDS:
        exp = {"kind": kind}
        system = BASE["system"]
        if kind == "isolate":
            exp["U"] = [-0.3, 0.3]
            system = {"manifold": "circle", "maps": [{"type": "north_south", "c": -0.1}], "noise": {"dist": "uniform", "delta": 0.1}}
        cfg = config_from_dict(with_(["experiment"], exp, with_(["system"], system)))
        again = parse_config(cfg.serialize())
        assert again == cfg


def test_kind_compatibility():
    noise = {"manifold": "circle", "maps": [{"type": "north_south", "c": -0.1}], "noise": {"dist": "uniform", "delta": 0.1}}
    with pytest.raises(ConfigError, match="finite IFS"):
        config_from_dict(with_(["experiment"], {"kind": "minimality"}, with_(["system"], noise)))
    with pytest.raises(ConfigError, match="noise family"):
        config_from_dict(with_(["experiment"], {"kind": "isolate", "U": [0, 0.2]}))
    with pytest.raises(ConfigError) as e:
        config_from_dict(with_(["experiment"], {"kind": "lyapunov", "x0": [0, 0, 1]}))
    assert e.value.path == "experiment.x0"


def test_noise_range_error():
    noise = {"manifold": "circle", "maps": [{"type": "north_south", "c": -0.1}], "noise": {"dist": "uniform", "delta": 0.7}}
    with pytest.raises(ConfigError) as e:
        config_from_dict(with_(["system"], noise))
    assert e.value.path == "system.noise.delta"


def test_schema_is_strict_everywhere():
    assert SCHEMA["additionalProperties"] is False
    assert SCHEMA["properties"]["system"]["additionalProperties"] is False
    assert all(case["then"]["additionalProperties"] is False for case in SCHEMA["$defs"]["map"]["allOf"])
