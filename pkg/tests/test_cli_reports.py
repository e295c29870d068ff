import json

import pytest

from hubbard_gf.cli import main
from hubbard_gf.reports import read_csv, write_correlator_csv, write_csv


def run_cli(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_usage_error_exit_code(capsys):
    code, _, _ = run_cli(["correlator", "--protocol", "nonsense"], capsys)
    assert code == 2
    code, _, _ = run_cli(["vha-sweep", "--grid", "0"], capsys)
    assert code == 2


def test_vha_sweep_small_grid(tmp_path, capsys):
    code, out, _ = run_cli(
        ["vha-sweep", "--t", "1", "--u", "4", "--grid", "21", "--outdir", str(tmp_path)], capsys
    )
    assert code == 0
    assert "optimum" in out
    header, cols, rows = read_csv(tmp_path / "landscape.csv")
    assert cols == ["alpha", "beta", "energy", "stderr"]
    assert len(rows) == 21 * 21
    assert (tmp_path / "landscape.svg").exists()
    # grid values equal the closed form in exact mode
    from hubbard_gf.vha import variational_energy_formula

    for r in rows[:40]:
        a, b, e = float(r[0]), float(r[1]), float(r[2])
        assert e == pytest.approx(variational_energy_formula(1.0, 4.0, a, b), abs=1e-10)


def test_vha_sweep_requires_seed_for_shots(tmp_path, capsys):
    code, _, err = run_cli(
        ["vha-sweep", "--grid", "3", "--shots", "16", "--outdir", str(tmp_path)], capsys
    )
    assert code == 2
    assert "seed" in err


def test_correlator_exact_run_and_compare_pass(tmp_path, capsys):
    args = [
        "correlator", "--t", "1", "--u", "4", "--dtau", "0.314", "--steps", "6",
        "--phi", "1.5707963267948966", "--kind", "retarded", "--shots", "0",
        "--pair", "y2y2", "--outdir", str(tmp_path),
    ]
    code, out, _ = run_cli(args, capsys)
    assert code == 0
    csv_path = tmp_path / "y2y2.csv"
    assert csv_path.exists() and (tmp_path / "y2y2.svg").exists()
    code, out, _ = run_cli(["compare", "--csv", str(csv_path)], capsys)
    assert code == 0
    report = json.loads(out)
    assert report["reports"][0]["status"] == "PASS"


def test_correlator_byte_reproducible(tmp_path, capsys):
    args = [
        "correlator", "--steps", "4", "--shots", "256", "--seed", "11",
        "--pair", "y3y3", "--outdir",
    ]
    code, _, _ = run_cli(args + [str(tmp_path / "a")], capsys)
    assert code == 0
    code, _, _ = run_cli(args + [str(tmp_path / "b")], capsys)
    assert code == 0
    a = (tmp_path / "a" / "y3y3.csv").read_bytes()
    b = (tmp_path / "b" / "y3y3.csv").read_bytes()
    assert a == b


def test_compare_detects_wrong_dtau(tmp_path, capsys):
    args = [
        "correlator", "--steps", "5", "--shots", "0", "--pair", "y2y2",
        "--outdir", str(tmp_path),
    ]
    run_cli(args, capsys)
    # tamper: claim the data was taken at a different dtau so the curves disagree
    path = tmp_path / "y2y2.csv"
    text = path.read_text().replace("# dtau=0.314", "# dtau=0.5")
    # taus in rows must pretend to be on the 0.5 grid
    lines = text.splitlines()
    out_lines = []
    for line in lines:
        if line and not line.startswith("#") and not line.startswith("tau"):
            parts = line.split(",")
            parts[0] = repr(float(parts[0]) / 0.314 * 0.5)
            out_lines.append(",".join(parts))
        else:
            out_lines.append(line)
    path.write_text("\n".join(out_lines) + "\n")
    code, out, _ = run_cli(["compare", "--csv", str(path)], capsys)
    assert code == 3
    report = json.loads(out)
    assert report["reports"][0]["status"] == "FAIL"
    assert report["reports"][0]["max_dev"] > 0


def test_compare_shot_mode_band(tmp_path, capsys):
    args = [
        "correlator", "--steps", "6", "--shots", "4096", "--seed", "3",
        "--pair", "x3y2", "--outdir", str(tmp_path),
    ]
    run_cli(args, capsys)
    code, out, _ = run_cli(["compare", "--csv", str(tmp_path / "x3y2.csv")], capsys)
    assert code == 0
    rep = json.loads(out)["reports"][0]
    assert rep["in_band_fraction"] >= 0.95


def test_zne_demo(capsys):
    code, out, _ = run_cli(["zne-demo"], capsys)
    assert code == 0
    assert "zero-noise estimate=1.0" in out


def test_dump_circuit(capsys):
    code, out, _ = run_cli(["dump-circuit", "--which", "slater"], capsys)
    assert code == 0
    assert out.splitlines()[0] == "H 0"
    code, out, _ = run_cli(["dump-circuit", "--which", "trotter-step", "--dtau", "0.1"], capsys)
    assert code == 0
    assert any(line.startswith("CNOT") for line in out.splitlines())


def test_config_file_defaults_flags_win(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"steps": 3, "shots": 0, "pair": "y2y2", "outdir": str(tmp_path)}))
    code, _, _ = run_cli(["--config", str(cfg), "correlator", "--pair", "y3y3"], capsys)
    assert code == 0
    assert (tmp_path / "y3y3.csv").exists()  # flag overrode the config pair
    header, _, rows = read_csv(tmp_path / "y3y3.csv")
    assert header["steps"] == "3"  # config default applied


def test_outdir_env_var(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("HUBBARD_GF_OUTDIR", str(tmp_path / "envout"))
    code, _, _ = run_cli(["correlator", "--steps", "2", "--shots", "0", "--pair", "y2y2"], capsys)
    assert code == 0
    assert (tmp_path / "envout" / "y2y2.csv").exists()


def test_csv_round_trip(tmp_path):
    write_csv(tmp_path / "x.csv", {"a": 1, "b": 0.25}, ["u", "v"], [(1.0, 2.0), (3.0, 4.5)])
    header, cols, rows = read_csv(tmp_path / "x.csv")
    assert header == {"a": "1", "b": "0.25"}
    assert cols == ["u", "v"]
    assert rows == [["1.0", "2.0"], ["3.0", "4.5"]]
    write_correlator_csv(tmp_path / "c.csv", "demo", [0.0, 0.5], [1 + 0j, 0.5 - 0.25j])
    header, cols, rows = read_csv(tmp_path / "c.csv")
    assert header["correlator"] == "demo"
    assert cols == ["tau", "re", "im"]
    assert float(rows[1][2]) == -0.25
