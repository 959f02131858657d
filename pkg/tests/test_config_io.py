from dataclasses import replace
from pathlib import Path

import pytest

from f2fsim.config import (
    CombSettings,
    ConfigError,
    CountSettings,
    InterferometerSettings,
    LaserSettings,
    TraceSettings,
    config_fingerprint,
    config_from_dict,
    default_config,
    load_config,
    make_interferometer,
    save_config,
    validate_config,
)
from f2fsim.meas import PulseRecord, TrajectoryRecord
from f2fsim.serialize import Table, pulses_table, read_table, run_metadata

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def test_default_config_is_valid():
    validate_config(default_config())


@pytest.mark.parametrize("name", ["default", "calibrate", "emerge", "visibility"])
def test_shipped_configs_load(name):
    cfg = load_config(CONFIG_DIR / f"{name}.json")
    validate_config(cfg)


def test_round_trip_identity(tmp_path):
    cfg = replace(
        default_config(),
        comb=CombSettings(center_index=55, width=4.5, n_lines=31, delta=0.37),
        interferometer=InterferometerSettings(phi="random", n_min=7),
        laser=LaserSettings(kind="fixed-m", fixed_m=5000, mean_n=5000.0),
        counts=CountSettings(kind="fixed", value=12),
        seed=314159,
        force_first_pulse=[4, 4],
    )
    path = tmp_path / "cfg.json"
    save_config(cfg, path)
    again = load_config(path)
    assert again == cfg
    assert config_fingerprint(again) == config_fingerprint(cfg)


def test_fingerprint_tracks_content():
    a = default_config()
    b = replace(a, seed=a.seed + 1)
    assert config_fingerprint(a) != config_fingerprint(b)


def test_unknown_keys_rejected():
    with pytest.raises(ConfigError):
        config_from_dict({"bogus": 1})
    with pytest.raises(ConfigError):
        config_from_dict({"comb": {"hue": 3}})


@pytest.mark.parametrize(
    "mutate",
    [
        lambda c: replace(c, comb=CombSettings(center_index=2, n_lines=9)),
        lambda c: replace(c, laser=LaserSettings(kind="fixed-m", fixed_m=None)),
        lambda c: replace(c, counts=CountSettings(kind="fixed", value=3.5)),
        lambda c: replace(c, n_trajectories=0),
        lambda c: replace(c, trace=TraceSettings(pulses=[99], points=16)),
        lambda c: replace(c, output=replace(c.output, format="xml")),
        lambda c: replace(c, force_first_pulse=[1]),
    ],
)
def test_validation_rejects_bad_configs(mutate):
    with pytest.raises(ConfigError):
        validate_config(mutate(default_config()))


def test_balance_modes():
    cfg = replace(
        default_config(),
        laser=LaserSettings(kind="poissonian", mean_n=400.0),
    )
    p = make_interferometer(cfg, phi=0.0)
    assert p.xi1 == pytest.approx(20.0)
    cfg_exact = replace(
        cfg, interferometer=replace(cfg.interferometer, balance="exact-n")
    )
    p2 = make_interferometer(cfg_exact, phi=0.0, realized_m=900)
    assert p2.xi1 == pytest.approx(30.0)
    with pytest.raises(ConfigError):
        make_interferometer(cfg_exact, phi=0.0)


def _sample_records():
    rec = TrajectoryRecord(initial_m=100, phi0=0.25)
    rec.pulses = [
        PulseRecord(1, 5, 3, 0.5, 90.0, 2.5, -0.7, 0.25, False),
        PulseRecord(2, 4, 4, 0.61, 80.0, 3.5, -0.71, 0.25, True),
    ]
    rec.cep_fidelities = [0.8, 0.9]
    return [rec]


def test_csv_and_json_tables_carry_identical_numbers(tmp_path):
    table = pulses_table([(0, _sample_records())])
    csv_path = table.write(tmp_path / "pulses", "csv")
    json_path = table.write(tmp_path / "pulses", "json")
    a = read_table(csv_path)
    b = read_table(json_path)
    assert a.columns == b.columns == table.columns
    assert len(a.rows) == len(b.rows) == 2
    for ra, rb in zip(a.rows, b.rows):
        for va, vb in zip(ra, rb):
            assert abs(float(va) - float(vb)) <= 1e-12


def test_table_csv_is_rfc4180ish(tmp_path):
    table = Table(columns=["a", "b"], rows=[[1, 2.5], [3, -0.125]])
    path = table.write(tmp_path / "t", "csv")
    text = path.read_text()
    lines = text.strip().split("\n")
    assert lines[0] == "a,b"
    assert lines[1] == "1,2.5"


def test_run_metadata_embeds_seed_and_fingerprint():
    cfg = default_config()
    meta = run_metadata(cfg, "calibrate")
    assert meta["seed"] == cfg.seed
    assert meta["rng"] == "pcg64"
    assert meta["config_sha256"] == config_fingerprint(cfg)
    assert meta["schema_version"] == 1
