import json
from pathlib import Path

import numpy as np
import pytest

from weyllab.config import ConfigError, apply_overrides, from_dict, load_config, parse_text

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
MINIMAL = {"dimension": 2, "eta": 0.5, "truncation": 16}


def test_minimal_defaults():
    cfg = from_dict(MINIMAL)
    assert cfg.epsilon == pytest.approx(0.025)
    assert cfg.gamma == 1.0 and cfg.bump.variant == "rho"
    assert cfg.center == (0.0, 0.0) and cfg.x_points == [[0.0, 0.0]]
    assert np.allclose(cfg.lambdas, np.geomspace(4, 8, 5))
    assert cfg.shift_floor == 0.0
    assert cfg.potential().dim == 2


@pytest.mark.parametrize(
    "patch,rule",
    [
        ({"eta": 1.2}, "eta in (0,1)"),
        ({"truncation": 10}, "truncation Lambda_max >= 2*lambda_grid.max"),
        ({"dimension": 7}, "dimension in 2..5"),
        ({"epsilon": 0.3}, "epsilon in (0, min(eta,1-eta)/10)"),
        ({"bump": {"variant": "box"}}, "bump.variant in {rho, chi}"),
        ({"bump": {"support_radius": 4.0}}, "support_radius in (0, pi)"),
        ({"lambda_grid": {"min": 5, "max": 2}}, "0 < lambda_grid.min <= lambda_grid.max"),
        ({"center": [0.0]}, "center has n coordinates"),
        ({"mode": "sharp"}, "mode in {mollified, indicator}"),
        ({"output": {"format": "xml"}}, "output.format in {csv, json}"),
        ({"truncation_factor": 1.5}, "truncation Lambda_max >= 2*lambda_grid.max"),
    ],
)
def test_violations_name_rule(patch, rule):
    with pytest.raises(ConfigError) as exc:
        from_dict({**MINIMAL, **patch})
    assert exc.value.rule == rule
    assert rule in str(exc.value)


def test_missing_and_unknown_keys():
    with pytest.raises(ConfigError, match="missing required key 'eta'"):
        from_dict({"dimension": 2, "truncation": 8})
    with pytest.raises(ConfigError, match="unknown key 'lambda_grid.step'"):
        from_dict({**MINIMAL, "lambda_grid": {"step": 1}})
    with pytest.raises(ConfigError, match="unknown key 'colour'"):
        from_dict({**MINIMAL, "colour": "red"})


def test_thresholds_free_map():
    cfg = from_dict({**MINIMAL, "thresholds": {"band_ratio": 2.0}})
    assert cfg.thresholds == {"band_ratio": 2.0}


def test_overrides():
    cfg = from_dict(MINIMAL, ["eta=0.3", "lambda_grid.count=3", "lambda_grid.spacing=linear", "center=[1, 2]"])
    assert cfg.eta == 0.3 and np.allclose(cfg.lambdas, [4, 6, 8])
    assert cfg.center == (1.0, 2.0)
    with pytest.raises(ConfigError, match="key=value"):
        apply_overrides(MINIMAL, ["eta"])
    with pytest.raises(ConfigError):
        apply_overrides(MINIMAL, ["eta.x=1"])


def test_json_and_yaml_equivalent(tmp_path):
    y = tmp_path / "c.yaml"
    j = tmp_path / "c.json"
    y.write_text("dimension: 3\neta: 0.4\ntruncation: 20\nbump: {variant: chi}\n")
    j.write_text(json.dumps({"dimension": 3, "eta": 0.4, "truncation": 20, "bump": {"variant": "chi"}}))
    a, b = load_config(y), load_config(j)
    assert a.raw == b.raw
    assert a.source == str(y)


def test_parse_errors_carry_line(tmp_path):
    with pytest.raises(ConfigError) as exc:
        parse_text('{\n "eta": 0.5,\n oops\n}', "json")
    assert exc.value.line == 3 and exc.value.rule == "parse"
    with pytest.raises(ConfigError) as exc:
        parse_text("dimension: 2\neta: [0.5\ntruncation: 3\n", "yaml")
    assert exc.value.line is not None
    with pytest.raises(ConfigError, match="mapping"):
        parse_text("- 1\n- 2\n", "yaml")
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "absent.yaml")


@pytest.mark.parametrize("path", sorted(CONFIGS.glob("*.yaml")), ids=lambda p: p.stem)
def test_shipped_manifests_validate(path):
    cfg = load_config(path)
    assert cfg.fixture == path.stem.upper()


def test_truncation_factor():
    cfg = load_config(CONFIGS / "a3.yaml")
    assert cfg.cutoff_for(16.0) == 64.0
    assert from_dict(MINIMAL).cutoff_for(3.0) == 16.0
