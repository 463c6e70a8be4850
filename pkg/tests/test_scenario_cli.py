from __future__ import annotations

import csv
import json
import subprocess
import sys

import pytest

from jnnwg import catalog
from jnnwg.cli import main
from jnnwg.scenario import (
    ConfigError,
    execute,
    load_config,
    parse_config,
    run_scenario,
    run_sweep,
    set_path,
)


def _small_emit() -> dict:
    doc = catalog.get("fig3_weak")
    doc = set_path(doc, "evolution.t_end", 40.0)
    return doc


def test_catalog_covers_every_panel():
    names = set(catalog.names())
    assert {"fig2a", "fig2b", "fig2c", "fig2d", "fig2e", "fig2f", "fig3_weak", "fig3_moderate",
            "fig4", "fig5_quadratic", "fig5_cubic", "fig6a", "fig6b", "fig6_rabi"} <= names
    for name in names:
        parse_config(catalog.get(name))
    with pytest.raises(KeyError):
        catalog.get("fig9")


def test_run_is_deterministic_and_writes_expected_files(tmp_path):
    doc = _small_emit()
    a = run_scenario(doc, tmp_path / "a")
    b = run_scenario(doc, tmp_path / "b")
    for name in ("summary.json", "trajectory.csv", "config.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    assert a.summary == b.summary
    header = (tmp_path / "a" / "trajectory.csv").read_text().splitlines()[0].split(",")
    assert header[:4] == ["t", "norm", "atom_1", "atom_2"] and header[4] == "site_1"


def test_config_echo_round_trips(tmp_path):
    doc = catalog.get("fig2f")
    first = run_scenario(doc, tmp_path / "first")
    echoed = json.loads((tmp_path / "first" / "config.json").read_text())
    again = run_scenario(echoed, tmp_path / "again")
    assert first.summary == again.summary
    assert (tmp_path / "first" / "config.json").read_text() == (tmp_path / "again" / "config.json").read_text()


def test_pf_series_pair_for_fig2f():
    s = execute(parse_config(catalog.get("fig2f"))).summary
    assert len(s["pf_series"]) == len(s["reference_pf_series"]) == 201
    assert s["pf_min"] >= 0.99


def test_fig3_weak_peak_field():
    s = execute(parse_config(catalog.get("fig3_weak"))).summary
    assert s["peak_b2"] == pytest.approx(0.54, abs=0.03)
    assert s["analytic_peak_b2"] == pytest.approx(0.5413, abs=1e-4)


@pytest.mark.parametrize("edit,where", [
    (lambda d: set_path(d, "atoms", []), "initial.atom"),
    (lambda d: set_path(d, "evolution.dt", 0.3), "evolution"),
    (lambda d: set_path(d, "evolution.t_end", 360.0), "evolution.t_end"),
    (lambda d: set_path(d, "waveguide.L", 120), "atoms[1].sites"),
    (lambda d: set_path(d, "atoms.0.sites", [50, 52]), "atoms[0]"),
    (lambda d: set_path(d, "kind", "teleport"), "kind"),
])
def test_validation_errors_name_the_field_and_write_nothing(tmp_path, edit, where):
    doc = edit(_small_emit())
    out = tmp_path / "run"
    with pytest.raises(ConfigError) as info:
        run_scenario(doc, out)
    assert info.value.path.startswith(where)
    assert not out.exists()
    assert list(tmp_path.iterdir()) == []


def test_refuses_to_clobber_without_overwrite(tmp_path):
    doc = set_path(catalog.get("fig2a"), "outputs.n_k", 65)
    run_scenario(doc, tmp_path / "r")
    with pytest.raises(ConfigError):
        run_scenario(doc, tmp_path / "r")
    run_scenario(doc, tmp_path / "r", overwrite=True)


def test_set_path_wildcard_and_errors():
    doc = catalog.get("fig3_weak")
    new = set_path(doc, "atoms.*.profile.g", 0.2)
    assert [a["profile"]["g"] for a in new["atoms"]] == [0.2, 0.2]
    assert doc["atoms"][0]["profile"]["g"] == 0.1
    with pytest.raises(ConfigError):
        set_path(doc, "atoms.*.profile.nope.x", 1)
    with pytest.raises(ConfigError):
        set_path(doc, "atoms.7.profile.g", 1)
    with pytest.raises(ConfigError):
        set_path(doc, "atoms", 1, require_scalar=True)


def test_single_value_sweep_equals_run(tmp_path):
    doc = _small_emit()
    [s] = run_sweep(doc, "atoms.*.profile.g", [0.1], tmp_path / "sw")
    direct = run_scenario(doc, tmp_path / "direct")
    assert s == direct.summary
    assert ((tmp_path / "sw" / "run_000" / "trajectory.csv").read_bytes()
            == (tmp_path / "direct" / "trajectory.csv").read_bytes())


def test_coupling_sweep_table(tmp_path):
    base = catalog.get("fig3_weak")
    values = [0.05, 0.1, 0.2, 0.5]
    summaries = run_sweep(base, "atoms.*.profile.g", values, tmp_path / "g", workers=2)
    rows = list(csv.DictReader(open(tmp_path / "g" / "sweep.csv")))
    assert [json.loads(r["value"]) for r in rows] == values
    peaks = [float(r["peak_b2"]) for r in rows]
    assert peaks[0] == pytest.approx(0.54, abs=0.03) and peaks[1] == pytest.approx(0.54, abs=0.03)
    assert peaks[3] == pytest.approx(0.88, abs=0.03)
    assert summaries[3]["peak_b2"] == peaks[3]
    meta = json.loads((tmp_path / "g" / "sweep.json").read_text())
    assert meta["runs"] == ["run_000", "run_001", "run_002", "run_003"]


def test_sweep_validates_every_value_before_running(tmp_path):
    with pytest.raises(ConfigError):
        run_sweep(_small_emit(), "atoms.*.profile.g", [0.1, -1.0], tmp_path / "bad")
    with pytest.raises(ConfigError):
        run_sweep(_small_emit(), "atoms.*.profile.gee", [0.1], tmp_path / "bad")
    assert not (tmp_path / "bad").exists()


def test_packet_width_sweep_records_pf(tmp_path):
    summaries = run_sweep(catalog.get("fig2f"), "initial.sigma", [2.0, 3.0, 5.0], tmp_path / "s")
    pf = [s["reference_pf_final"] for s in summaries]
    assert all(0 <= p <= 1 for p in pf)
    assert all(s["pf_min"] > 0.9 for s in summaries)


# -- command line -------------------------------------------------------------------

def test_cli_run_and_exit_codes(tmp_path, capsys):
    assert main(["list-scenarios"]) == 0
    assert "fig4" in capsys.readouterr().out
    assert main(["solve-dispersion", "--kind", "chiral_linear", "--J", "5", "--out", str(tmp_path / "d")]) == 0
    hops = json.loads((tmp_path / "d" / "hoppings.json").read_text())
    assert hops["terms"][0]["h"] == pytest.approx(5 / 6)
    rows = (tmp_path / "d" / "dispersion.csv").read_text().splitlines()
    assert rows[0] == "k,omega,v_group"
    assert main(["emit-absorb", "--scenario", "fig3_weak", "--set", "evolution.t_end=20",
                 "--out", str(tmp_path / "e")]) == 0
    # validation problems exit with 2 and leave nothing behind
    assert main(["emit-absorb", "--scenario", "fig3_weak", "--set", "evolution.dt=0.3",
                 "--out", str(tmp_path / "bad")]) == 2
    assert not (tmp_path / "bad").exists()
    assert main(["propagate", "--scenario", "fig3_weak", "--out", str(tmp_path / "x")]) == 2
    assert main(["run", "--scenario", "nope", "--out", str(tmp_path / "y")]) == 2
    assert main(["bogus-command"]) == 2
    assert main(["sweep", "--scenario", "fig2a", "--axis", "outputs.rel_tol", "--values", "0.01,0.05",
                 "--out", str(tmp_path / "sw")]) == 0
    assert (tmp_path / "sw" / "sweep.csv").exists()


def test_cli_step_guard_is_a_validation_error(tmp_path):
    code = main(["emit-absorb", "--scenario", "fig4", "--set", "evolution.dt=0.5",
                 "--set", "evolution.t_end=10", "--out", str(tmp_path / "f")])
    assert code == 2
    assert not (tmp_path / "f").exists()


def test_cli_runtime_error_exits_1(tmp_path, monkeypatch):
    import jnnwg.scenario as scenario

    def broken(cfg):
        raise FloatingPointError("eigensolver did not converge")

    monkeypatch.setitem(scenario._RUNNERS, "dispersion", broken)
    assert main(["run", "--scenario", "fig2a", "--out", str(tmp_path / "f")]) == 1
    assert not (tmp_path / "f").exists()


def test_config_file_and_console_script(tmp_path):
    doc = set_path(catalog.get("fig6a"), "outputs.n_k", 129)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(doc))
    assert load_config(config_path=path) == doc
    proc = subprocess.run([sys.executable, "-m", "jnnwg.cli", "solve-dispersion", "--config", str(path),
                           "--out", str(tmp_path / "o")], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert json.loads(proc.stdout)["v_g"] == pytest.approx(1.0)
