import json
import math
from pathlib import Path

import jsonschema
import pytest

from chlattice.cli import load_config, main

SCHEMA = json.loads(
    (Path(__file__).resolve().parents[1] / "docs" / "report_schema.json")
    .read_text())


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


SQUARE_INI = """
[lattice]
k1 = 1 0
k2 = 0 1

[model]
lambda = auto:1.01
gamma2 = 0
gamma3 = 1
"""


def test_load_config_ini(tmp_path):
    cfg = load_config(write(tmp_path, "a.ini", SQUARE_INI))
    assert cfg.lattice["k1"] == "1 0"
    assert cfg.model["lambda"] == "auto:1.01"


def test_load_config_json(tmp_path):
    text = json.dumps({
        "lattice": {"k1": [1, 0], "k2": [0, 1]},
        "model": {"lambda": "auto:1.01", "gamma3": 2.0},
    })
    cfg = load_config(write(tmp_path, "a.json", text))
    assert cfg.model["gamma3"] == 2.0


def test_unknown_key_rejected(tmp_path):
    path = write(tmp_path, "bad.ini", SQUARE_INI + "\n[model]\n")
    # duplicate section is a parse error -> exit 2 through the CLI
    assert main(["analyze", "--config", path, "--out", str(tmp_path)]) == 2

    path2 = write(tmp_path, "bad2.ini",
                  SQUARE_INI.replace("gamma2", "gamma9"))
    assert main(["analyze", "--config", path2, "--out", str(tmp_path)]) == 2


def test_both_vector_kinds_rejected(tmp_path):
    text = SQUARE_INI + "l1 = 1 0\nl2 = 0 1\n"
    # keys appended to [model]: unknown there -> config error either way
    assert main(["analyze", "--config", write(tmp_path, "b.ini", text),
                 "--out", str(tmp_path)]) == 2


def test_degenerate_lattice_exit_code(tmp_path):
    text = SQUARE_INI.replace("k2 = 0 1", "k2 = 2 0")
    assert main(["analyze", "--config", write(tmp_path, "d.ini", text),
                 "--out", str(tmp_path)]) == 2


def test_analyze_report_validates(tmp_path, capsys):
    path = write(tmp_path, "a.ini", SQUARE_INI)
    out = tmp_path / "out"
    assert main(["analyze", "--config", path, "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    jsonschema.validate(report, SCHEMA)
    assert report["shell"]["multiplicity"] == 4
    assert report["classification"]["transition_type"] == "TypeI"


def test_analyze_hexagonal_resonant(tmp_path):
    text = """
[lattice]
k1 = 1 0
k2 = -0.5 -0.8660254037844386

[model]
lambda = auto:1.01
gamma2 = 0.5
gamma3 = 1
even = true
"""
    out = tmp_path / "out"
    assert main(["analyze", "--config", write(tmp_path, "h.ini", text),
                 "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    jsonschema.validate(report, SCHEMA)
    assert report["shell"]["multiplicity"] == 6
    assert report["shell"]["resonance"] == "mult6_resonant"
    assert report["reduction"]["case"] == "mult6_resonant_even"
    patterns = {e["pattern"] for e in report["equilibria"]}
    assert "hexagon" in patterns


def test_analyze_general_resonant_classification_unavailable(tmp_path):
    text = """
[lattice]
k1 = 1 0
k2 = -0.5 -0.8660254037844386

[model]
lambda = auto:1.01
gamma2 = 0.5
gamma3 = 1
"""
    out = tmp_path / "out"
    assert main(["analyze", "--config", write(tmp_path, "g.ini", text),
                 "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    jsonschema.validate(report, SCHEMA)
    assert report["classification"]["available"] is False
    assert report["reduction"]["a_constant"] == "nan"


def test_analyze_determinism(tmp_path):
    path = write(tmp_path, "a.ini", SQUARE_INI)
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    assert main(["analyze", "--config", path, "--out", str(out1)]) == 0
    assert main(["analyze", "--config", path, "--out", str(out2)]) == 0
    assert (out1 / "report.json").read_bytes() == \
        (out2 / "report.json").read_bytes()


SIM_INI = SQUARE_INI + """
[sim]
n = 8
dt = 0.05
t_end = 1.0
seed = 3
"""


def test_simulate_outputs(tmp_path):
    path = write(tmp_path, "s.ini", SIM_INI)
    out = tmp_path / "sim"
    assert main(["simulate", "--config", path, "--out", str(out)]) == 0
    assert (out / "history.csv").exists()
    assert (out / "final_field.csv").exists()
    assert (out / "history.png").exists()
    note = json.loads((out / "verdict.json").read_text())
    assert note["predicted"] == "TypeI"
    assert note["observed"] in ("settled", "escaped")


def test_simulate_determinism(tmp_path):
    path = write(tmp_path, "s.ini", SIM_INI)
    out1, out2 = tmp_path / "s1", tmp_path / "s2"
    assert main(["simulate", "--config", path, "--out", str(out1)]) == 0
    assert main(["simulate", "--config", path, "--out", str(out2)]) == 0
    assert (out1 / "history.csv").read_bytes() == \
        (out2 / "history.csv").read_bytes()
    assert (out1 / "verdict.json").read_bytes() == \
        (out2 / "verdict.json").read_bytes()


def test_render_equilibrium(tmp_path):
    text = SQUARE_INI + """
[render]
equilibrium = p3
width = 128
height = 128
tiles = 3 3
"""
    path = write(tmp_path, "r.ini", text)
    out = tmp_path / "render"
    assert main(["render", "--config", path, "--out", str(out),
                 "--format", "pgm"]) == 0
    files = sorted(p.name for p in out.iterdir())
    assert any(f.startswith("p3_square") and f.endswith(".pgm")
               for f in files)
    assert any(f.endswith("_figure.png") for f in files)


def test_render_unknown_equilibrium_exit_2(tmp_path):
    text = SQUARE_INI + "\n[render]\nequilibrium = nope\n"
    assert main(["render", "--config", write(tmp_path, "r.ini", text),
                 "--out", str(tmp_path)]) == 2


def test_reproduce_known_figures(tmp_path):
    out = tmp_path / "figs"
    assert main(["reproduce", "square-packed-circles",
                 "--out", str(out), "--format", "png"]) == 0
    assert any(p.name.startswith("square-packed-circles")
               for p in out.iterdir())


def test_reproduce_unknown_figure(tmp_path):
    assert main(["reproduce", "no-such-figure", "--out", str(tmp_path)]) == 2
