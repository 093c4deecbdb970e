import json
import logging
import math

from fractions import Fraction as F

import pytest

from click.testing import CliRunner

from plslope.cli import main
from plslope.lab.families import example1


@pytest.fixture(autouse=True)
def drop_cli_handlers():
    yield
    log = logging.getLogger("plslope")
    for handler in [h for h in log.handlers if getattr(h, "plslope_cli", False)]:
        log.removeHandler(handler)


@pytest.fixture
def run(tmp_path):
    """Invokes the CLI with --out and returns (exit code, output text)."""
    def invoke(*args):
        out = tmp_path / "out.txt"
        if out.exists():
            out.unlink()
        result = CliRunner().invoke(main, ["--out", str(out)] + list(args))
        text = out.read_text() if out.exists() else ""
        return result.exit_code, text
    return invoke


def test_entropy(run, map_file, horseshoe):
    code, text = run("entropy", map_file(horseshoe))
    assert code == 0
    data = json.loads(text)
    assert data["command"] == "entropy"
    assert len(data["config_sha256"]) == 64
    result = data["result"]
    assert float(result["value"]) == pytest.approx(math.log(3))
    assert result["lambda_bracket"] == ["3", "3"]
    assert result["method"] == "MarkovExact"


def test_entropy_in_bits(map_file, tent, tmp_path):
    out = tmp_path / "bits.json"
    result = CliRunner().invoke(main, ["--log2", "--out", str(out), "entropy", map_file(tent), "--method", "markov"])
    assert result.exit_code == 0
    data = json.loads(out.read_text())["result"]
    assert float(data["value_log2"]) == pytest.approx(1.0)


def test_entropy_methods(run, map_file, golden):
    path = map_file(golden)
    code, text = run("entropy", path, "--method", "lap", "--depth", "10")
    assert code == 0
    assert json.loads(text)["result"]["method"] == "LapCount"
    code, _ = run("entropy", map_file(example1(0).g_tilde, "gtilde.json"), "--method", "markov")
    assert code == 0


def test_parse_errors(run, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"dots": [["0", "0"], ["1/2", "3/2"], ["1", "1"]]}))
    code, text = run("entropy", str(bad))
    assert code == 2
    assert "dot 1" in json.loads(text)["error"]
    bad.write_text(json.dumps({"dots": [[0, 0], [0.5, 1], [1, 0]]}))
    code, _ = run("check", str(bad))
    assert code == 2


def test_bad_config(map_file, horseshoe, tmp_path):
    config = tmp_path / "bad.yaml"
    config.write_text("entropy:\n  bogus: 1\n")
    result = CliRunner().invoke(main, ["--config", str(config), "check", map_file(horseshoe)])
    assert result.exit_code == 2


def test_check(run, map_file, horseshoe, identity):
    code, text = run("check", map_file(horseshoe))
    assert code == 0
    result = json.loads(text)["result"]
    assert result["transitivity"]["status"] == "TransitiveLEO"
    assert result["modality"] == 2
    assert result["fixed_points"] == ["0", "1/2", "1"]
    assert result["endpoint_accessibility"] == {"x": "2/9", "y": "1/9"}
    code, text = run("check", map_file(identity, "identity.json"))
    assert code == 0
    result = json.loads(text)["result"]
    assert result["transitivity"]["status"] == "NotTransitive"
    assert result["transitivity"]["evidence"]["invariant_interval"] == ["0", "1/2"]
    assert result["diagonal_segment"] == ["0", "1"]


def test_csmodel(run, map_file, horseshoe, gtilde0):
    code, text = run("csmodel", map_file(horseshoe))
    assert code == 0
    result = json.loads(text)["result"]
    assert result["psi"] == [["0", "0"], ["1", "1"]]
    assert result["trusted"] is True
    code, text = run("csmodel", map_file(gtilde0, "gtilde.json"))
    assert code == 4
    body = json.loads(text)
    assert body["exit_code"] == 4
    assert body["result"]["status"] == "NotTransitive"


def test_csmodel_out_option(map_file, tent, tmp_path):
    out = tmp_path / "model.json"
    result = CliRunner().invoke(main, ["csmodel", map_file(tent), "--out", str(out)])
    assert result.exit_code == 0
    assert json.loads(out.read_text())["result"]["model"] == [["0", "0"], ["1/2", "1"], ["1", "0"]]


def test_diagram(run, map_file, horseshoe):
    path = map_file(horseshoe)
    code, text = run("diagram", path, "--format", "json")
    assert code == 0
    result = json.loads(text)["result"]
    assert (result["vertices"], result["arrows"]) == (3, 9)
    assert result["exact"] is True
    code, text = run("diagram", path)
    assert code == 0
    assert text.count("->") == 9
    assert "// config_sha256:" in text


def test_preimages(run, map_file, horseshoe):
    path = map_file(horseshoe)
    code, text = run("preimages", path, "--point", "1/2", "--n", "6")
    assert code == 0
    rows = [line for line in text.splitlines() if not line.startswith("#")]
    assert rows[0] == "n,count,ratio"
    assert [line.split(",")[2] for line in rows[1:]] == ["1"] * 7
    code, _ = run("preimages", path, "--point", "3/2")
    assert code == 2
    code, _ = run("preimages", path, "--point", "0.5")
    assert code == 2


def test_preimages_budget_is_partial(run, map_file, tent):
    code, text = run("preimages", map_file(tent), "--point", "1/2", "--n", "10", "--budget", "50")
    assert code == 3
    assert "# truncated: True" in text


@pytest.mark.slow
def test_experiment(run):
    code, text = run("experiment", "modality-preserving", "--t-values", "1/8")
    assert code == 0
    assert "t,d_map,h,h_gap,d_model,d_psi,model_slope,h_lower,verdict,error" in text


def test_entropy_tol_applies_under_auto(run, map_file, golden):
    path = map_file(golden)
    code, text = run("entropy", path)
    assert code == 0
    lo, hi = (F(v) for v in json.loads(text)["result"]["lambda_bracket"])
    assert hi - lo <= F(1, 10 ** 9)
    code, text = run("entropy", path, "--tol", "0.001")
    assert code == 0
    lo, hi = (F(v) for v in json.loads(text)["result"]["lambda_bracket"])
    assert F(1, 10 ** 6) < hi - lo <= F(1, 1000)
    assert lo < (1 + math.sqrt(5)) / 2 < hi
