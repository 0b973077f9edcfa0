import json
import math
import re

import pytest

from ifs_sync import cli
from ifs_sync.config import config_from_dict

CIRCLE_FLAT = {
    "manifold": "circle",
    "maps": [{"type": "flat_ns", "c": -0.12, "r0": 0.05, "kappa0": 0.01}, {"type": "rotation", "alpha": 0.6180339887498949}],
    "probs": [0.5, 0.5],
}
SPHERE_SYS = {
    "manifold": "sphere",
    "maps": [
        {"type": "sphere_scale", "lam": 0.8},
        {"type": "sphere_rotation", "axis": [1, 2, 3], "angle": 1.1},
        {"type": "sphere_rotation", "axis": [-1, 0.5, 0.2], "angle": 2.3},
    ],
    "probs": [0.4, 0.3, 0.3],
}
NOISE_SYS = {"manifold": "circle", "maps": [{"type": "north_south", "c": -0.12}], "noise": {"dist": "uniform", "delta": 0.05}}

SMALL = {
    "lyapunov": (CIRCLE_FLAT, {"n": 2000, "burn": 100, "blocks": 10, "bound_samples": 500}),
    "spectrum": (SPHERE_SYS, {"n": 500, "burn": 50, "blocks": 5}),
    "stationary": (CIRCLE_FLAT, {"method": "mc", "n_keep": 5000, "resolution": 64}),
    "pullback": (CIRCLE_FLAT, {"depth": 100, "ensemble": 50}),
    "sync": (CIRCLE_FLAT, {"pairs": 5, "n": 50}),
    "minimality": (CIRCLE_FLAT, {"resolution": 128, "T": 100}),
    "baker-verify": ({"manifold": "circle", "maps": [{"type": "rotation", "alpha": 0.1}] * 2, "probs": [0.7, 0.3]}, {"words": 50}),
    "isolate": (NOISE_SYS, {"U": [-0.3, 0.3], "n_samples": 100}),
    "unique": (CIRCLE_FLAT, {"n_keep": 2000}),
}


def config(tmp_path, kind, name="run", **extra):
    system, params = SMALL[kind]
    return {"system": system, "experiment": {"kind": kind, **params, **extra}, "seed": 7, "output": str(tmp_path / name)}


def write(tmp_path, doc, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


@pytest.mark.parametrize("kind", sorted(SMALL))
def test_every_kind_runs(tmp_path, kind):
    doc = config(tmp_path, kind)
    manifest = cli.run_experiment(config_from_dict(doc))
    assert manifest.status == "ok"
    for f in manifest.files:
        assert (tmp_path / f.split("/")[-1]).exists()
    report = json.loads((tmp_path / "run.report.json").read_text())
    assert report["kind"] == kind and report["seed"] == 7


def test_baker_verify_passes(tmp_path):
    cli.run_experiment(config_from_dict(config(tmp_path, "baker-verify", words=1000)))
    rep = json.loads((tmp_path / "run.report.json").read_text())["result"]
    assert rep["pass"] and rep["max_residual"] <= 1e-9


def test_rotation_lyapunov_is_zero(tmp_path):
    doc = {
        "system": {"manifold": "circle", "maps": [{"type": "rotation", "alpha": 0.25}], "probs": [1.0]},
        "experiment": {"kind": "lyapunov", "n": 100000, "burn": 1000, "blocks": 10},
        "seed": 42,
        "output": str(tmp_path / "rot"),
    }
    cli.run_experiment(config_from_dict(doc))
    rep = json.loads((tmp_path / "rot.report.json").read_text())
    assert abs(rep["result"]["exponents"][0]) <= 1e-10


@pytest.mark.parametrize("kind", ["sync", "stationary", "pullback", "spectrum", "unique"])
def test_reports_are_byte_identical(tmp_path, kind):
    a = cli.run_experiment(config_from_dict(config(tmp_path, kind, "a")), threads=1)
    b = cli.run_experiment(config_from_dict(config(tmp_path, kind, "b")), threads=4)
    for fa, fb in zip(sorted(a.files), sorted(b.files)):
        if "manifest" in fa:
            continue
        assert open(fa, "rb").read() == open(fb, "rb").read()


def test_report_format(tmp_path):
    cli.run_experiment(config_from_dict(config(tmp_path, "lyapunov")))
    text = (tmp_path / "run.report.json").read_text()
    assert text.endswith("}\n")
    doc = json.loads(text)
    assert json.dumps(doc, sort_keys=True, indent=2) + "\n" == text
    for tok in re.findall(r"-?\d+\.\d+(?:e-?\d+)?", text):
        assert repr(float(tok)) == tok


def test_csv_headers_and_line_endings(tmp_path):
    cli.run_experiment(config_from_dict(config(tmp_path, "sync")))
    raw = (tmp_path / "run.traces.csv").read_bytes()
    assert raw.startswith(b"pair_id,step,distance\n") and b"\r" not in raw
    rows = raw.decode().splitlines()[1:]
    assert len(rows) == 5 * 51
    for row in rows[:60]:
        _, _, d = row.split(",")
        assert repr(float(d)) == d
    cli.run_experiment(config_from_dict(config(tmp_path, "stationary")))
    assert (tmp_path / "run.histogram.csv").read_text().startswith("cell_index,mass\n")


def test_ulam_writes_matrix(tmp_path):
    cli.run_experiment(config_from_dict(config(tmp_path, "stationary", method="ulam", samples_per_cell=20)))
    rep = json.loads((tmp_path / "run.report.json").read_text())["result"]
    assert rep["residual"] <= 1e-8 and rep["row_sum_error"] <= 1e-12
    lines = (tmp_path / "run.matrix.csv").read_text().splitlines()
    assert len(lines) == 65 and len(lines[1].split(",")) == 65


def test_manifest_contents(tmp_path):
    m = cli.run_experiment(config_from_dict(config(tmp_path, "minimality")))
    doc = json.loads((tmp_path / "run.manifest.json").read_text())
    assert doc["config"]["seed"] == 7
    assert doc["status"] == "ok" and doc["version"]
    assert "x0" in doc["defaults_filled"]
    assert doc["files"] == m.files


def test_main_exit_codes(tmp_path, capsys):
    good = write(tmp_path, config(tmp_path, "minimality"))
    assert cli.main(["validate", good]) == 0
    assert cli.main(["run", good]) == 0
    bad = config(tmp_path, "minimality")
    bad["system"] = dict(bad["system"], probs=[0.5, 0.6])
    assert cli.main(["validate", write(tmp_path, bad, "bad.json")]) == 2
    assert "probabilities sum to 1.1" in capsys.readouterr().err
    assert cli.main(["run", str(tmp_path / "missing.json")]) == 2


def test_computation_error_exit_code(tmp_path, monkeypatch):
    def boom(cfg, system, threads):
        raise ArithmeticError("derivative vanished")

    monkeypatch.setitem(cli.RUNNERS, "minimality", boom)
    path = write(tmp_path, config(tmp_path, "minimality"))
    assert cli.main(["run", path]) == 3
    doc = json.loads((tmp_path / "run.manifest.json").read_text())
    assert doc["status"] == "error" and doc["error"]["stage"] == "compute"


def test_threads_env_validation(tmp_path, monkeypatch):
    monkeypatch.setenv("IFS_SYNC_THREADS", "many")
    assert cli.main(["run", write(tmp_path, config(tmp_path, "minimality"))]) == 2


def test_schema_command(capsys):
    assert cli.main(["schema"]) == 0
    schema = json.loads(capsys.readouterr().out)
    assert "experiment" in schema["properties"]


def test_non_finite_floats_become_null():
    assert cli.dumps({"a": math.inf, "b": float("nan"), "c": 0.1}) == '{\n  "a": null,\n  "b": null,\n  "c": 0.1\n}\n'
