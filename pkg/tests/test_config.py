import json

import pytest

from kvnlab.config import DEFAULTS, ConfigError, GuardError, from_dict, parse_config, shipped_config


def write(tmp_path, obj, name="c.json"):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return p


def test_minimal_config_gets_defaults(tmp_path):
    cfg = parse_config(write(tmp_path, {"potential": {"kind": "harmonic"}}))
    assert (cfg.grid.nx, cfg.grid.nv) == (256, 256)
    assert cfg.dt == 0.005
    assert cfg.potential.omega == 1.0
    assert cfg.snapshot()["grid"] == DEFAULTS["grid"]


def test_narrow_packet_names_sigma_x(tmp_path):
    with pytest.raises(GuardError) as err:
        parse_config(write(tmp_path, {"initial": {"sigma_x": 0.1}}))
    assert err.value.field == "initial.sigma_x"
    assert "sigma_x" in str(err.value)


def test_unknown_potential_lists_kinds(tmp_path):
    with pytest.raises(ConfigError) as err:
        parse_config(write(tmp_path, {"potential": {"kind": "morse"}}))
    msg = str(err.value)
    assert all(k in msg for k in ("free", "harmonic", "quartic", "polynomial", "tabulated"))


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        parse_config(tmp_path / "nope.json")


def test_malformed_json(tmp_path):
    with pytest.raises(ConfigError, match="malformed"):
        parse_config(write(tmp_path, "{not json"))


@pytest.mark.parametrize("given, field", [
    ({"grid": {"nx": 100}}, "grid"),
    ({"grid": {"nz": 4}}, "grid.nz"),
    ({"dt": -1}, "dt"),
    ({"dt": "fast"}, "dt"),
    ({"mass": 0}, "mass"),
    ({"steps": 2.5}, "steps"),
    ({"potential": {"kind": "harmonic", "a4": 2}}, "potential.a4"),
    ({"action": {"eps": [1e-3]}}, "action.eps"),
    ({"colour": "red"}, "colour"),
])
def test_schema_violations_name_the_field(given, field):
    with pytest.raises(ConfigError) as err:
        from_dict(given)
    assert err.value.field == field
    assert not isinstance(err.value, GuardError)


def test_packet_near_edge_is_a_guard_error():
    with pytest.raises(GuardError) as err:
        from_dict({"initial": {"x0": 7.0}})
    assert err.value.field == "initial.x0"


def test_dt_guard_only_warns(caplog):
    caplog.set_level("WARNING", logger="kvnlab")
    cfg = from_dict({"dt": 0.01})
    assert cfg.dt == 0.01
    assert "reduce dt" in caplog.text


def test_hash_stable_and_sensitive():
    assert from_dict({}).hash() == from_dict({}).hash()
    assert from_dict({}).hash() != from_dict({"seed": 1}).hash()


@pytest.mark.parametrize("name", ["harmonic", "quartic", "free"])
def test_shipped_configs_load(name):
    cfg = shipped_config(name)
    assert cfg.potential.kind == name
    sc = cfg.action_scenario()
    assert sc.T == cfg.action["T"] and sc.seed == cfg.seed


def test_polynomial_and_tabulated_configs():
    cfg = from_dict({"potential": {"kind": "polynomial", "coeffs": [0, 0, 0.5]}})
    assert cfg.potential.coeffs == (0.0, 0.0, 0.5)
    xs = [-8 + 0.5 * i for i in range(33)]
    cfg = from_dict({"potential": {"kind": "tabulated", "samples": {
        "x": xs, "phi": [0.5 * x * x for x in xs], "force": [-x for x in xs]}}})
    assert cfg.potential.force(2.0) == pytest.approx(-2.0)
