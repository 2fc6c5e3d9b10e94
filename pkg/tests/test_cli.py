import json
import subprocess
import sys

import pytest

from ifsends.cli import main
from ifsends.fixtures import FIXTURE_SOURCES, KOCH3_AS_PRINTED

CUBE = """dim 3
radicand 0
map a : [1/2, 0, 0; 0, 1/2, 0; 0, 0, 1/2] ; [0, 0, 0]
map b : [1/2, 0, 0; 0, 1/2, 0; 0, 0, 1/2] ; [1/2, 0, 0]
"""


@pytest.fixture
def write(tmp_path):
    def _write(name, text):
        p = tmp_path / name
        p.write_text(text)
        return str(p)
    return _write


def test_fixtures_lists_every_name(capsys):
    assert main(["fixtures"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert [line.split()[0] for line in out] == list(FIXTURE_SOURCES)


def test_validate(write, capsys):
    assert main(["validate", write("k.ifs", FIXTURE_SOURCES["koch3"])]) == 0
    assert capsys.readouterr().out.startswith("ok: 3 generators, dim 2")
    assert main(["validate", write("bad.ifs", "dim 1\nradicand 0\n")]) == 1
    assert "no generators" in capsys.readouterr().err
    assert main(["validate", "/nonexistent/file.ifs"]) == 1


@pytest.mark.parametrize("argv", [
    [],
    ["frobnicate"],
    ["analyze"],
    ["analyze", "x.ifs", "--fixture", "koch3"],
    ["analyze", "--fixture", "koch3", "--margin", "1"],
    ["analyze", "--fixture", "koch3", "--k-max", "one"],
    ["analyze", "--fixture", "koch3", "--epsilon", "-1"],
    ["analyze", "--fixture", "nope"],
    ["analyze", "--fixture", "koch3", "--bogus"],
    ["render", "--fixture", "koch3"],
    ["graph", "tree", "--fixture", "koch3", "--out", "x"],
])
def test_usage_errors_exit_64(argv, capsys):
    assert main(argv) == 64
    captured = capsys.readouterr()
    assert captured.err.startswith("usage:") and "error:" in captured.err
    assert captured.out == ""


def test_analyze_koch3_to_stdout(capsys):
    assert main(["analyze", "--fixture", "koch3"]) == 0
    captured = capsys.readouterr()
    report = json.loads(captured.out)
    assert report["certificate"] is not None
    assert "{" not in captured.err


def test_analyze_anomalies_exit_2(write, tmp_path, capsys):
    out = tmp_path / "r.json"
    code = main(["analyze", write("printed.ifs", KOCH3_AS_PRINTED), "--ball-depth", "6",
                 "--link-depth", "3", "--k-max", "3", "--cloud-length", "6", "--out", str(out)])
    assert code == 2
    err = capsys.readouterr().err
    assert "anomaly (relation): a a b = c a" in err
    assert json.loads(out.read_text())["anomalies"]


def test_analyze_is_byte_identical(tmp_path):
    paths = [tmp_path / f"r{i}.json" for i in range(2)]
    for p in paths:
        assert main(["analyze", "--fixture", "ex21", "--out", str(p)]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_analyze_other_formats(tmp_path):
    dot = tmp_path / "l.dot"
    assert main(["analyze", "--fixture", "koch3", "--format", "dot_link", "--out", str(dot)]) == 0
    assert dot.read_text().startswith("graph link {")


def test_render_crooked_koch(tmp_path, capsys):
    out = tmp_path / "ck.pgm"
    assert main(["render", "--fixture", "crooked_koch4", "--resolution", "512",
                 "--out", str(out)]) == 0
    data = out.read_bytes()
    assert data.startswith(b"P5\n520 179\n255\n")
    assert len(data) == len(b"P5\n520 179\n255\n") + 520 * 179


def test_render_refuses_three_dimensions(write, tmp_path, capsys):
    assert main(["render", write("cube.ifs", CUBE), "--out", str(tmp_path / "c.pgm")]) == 1
    assert "dimension" in capsys.readouterr().err


def test_graph_commands(tmp_path):
    link, cay = tmp_path / "l.dot", tmp_path / "c.dot"
    assert main(["graph", "link", "--fixture", "koch3", "--out", str(link)]) == 0
    assert main(["graph", "cayley", "--fixture", "ex21", "--depth", "4", "--out", str(cay)]) == 0
    assert '"a" -- "c"' in link.read_text()
    assert cay.read_text().count("dead_end") == 4


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "ifsends", "fixtures"], capture_output=True,
                          text=True, timeout=120)
    assert proc.returncode == 0 and "koch3" in proc.stdout
    proc = subprocess.run([sys.executable, "-m", "ifsends", "--nope"], capture_output=True,
                          text=True, timeout=120)
    assert proc.returncode == 64 and "usage" in proc.stderr
