import csv
import io
import json
import math
import subprocess
import sys
import textwrap
from pathlib import Path

import pytest

from logconcave import cli
from logconcave.errors import ConfigError


def write(tmp_path: Path, body: str) -> Path:
    p = tmp_path / "cfg.yaml"
    p.write_text(textwrap.dedent(body), encoding="utf-8")
    return p


BASIC = """\
grid:
  n: 512
measures:
  g: gaussian(0, 1)
  e: exponential(1)
suites: [constants]
seed: 3
"""


# measure expressions ---------------------------------------------------------------

@pytest.mark.parametrize("expr", ["gaussian(0, 1)", "exponential(1)", "uniform(-1, 1)", "potential('x**4/4')",
                                  "truncate(gaussian(0,1), -1, 2)", "convolve_gaussian(uniform(-1,1), 0.3)",
                                  "affine(exponential(1), 2, 0.5)", "scale_mix(uniform(-1,1), 0.5)",
                                  "ou(exponential(1), 1.0)"])
def test_parse_measure(expr):
    m = cli.parse_measure(expr)(256, 1e-12)
    assert abs(m.mass - 1.0) < 1e-8


@pytest.mark.parametrize("expr", ["gaussian(0,", "__import__('os')", "nosuch(1)", "gaussian(0, -1)"])
def test_parse_measure_rejects(expr):
    with pytest.raises(ConfigError):
        cli.parse_measure(expr)(256, 1e-12)


# config validation ----------------------------------------------------------------

def test_validate_well_formed(tmp_path):
    cfg = cli.validate_config(write(tmp_path, BASIC))
    assert cfg.grid_n == 512 and cfg.suites == ("constants",) and set(cfg.measures) == {"g", "e"}


def test_validate_collects_every_error(tmp_path):
    p = write(tmp_path, """\
    grid:
      n: 16
    measures:
      g: gaussian(0, 1)
    suites: [constants, nonsense]
    references:
      - [g, missing]
    bogus: 1
    """)
    with pytest.raises(ConfigError) as exc:
        cli.validate_config(p)
    msg = str(exc.value)
    for frag in ("nonsense", "missing", "bogus", "grid.n"):
        assert frag in msg
    assert "line 5" in msg


def test_validate_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        cli.validate_config(tmp_path / "absent.yaml")


def test_main_config_error_exit_code(tmp_path, capsys):
    p = write(tmp_path, "suites: [nope]\n")
    assert cli.main(["validate", str(p)]) == 2
    assert "nope" in capsys.readouterr().err


# running and emitting ----------------------------------------------------------------

def test_run_constants_values(tmp_path):
    cfg = cli.config_from_dict({"grid": {"n": 2048}, "measures": {"g": "gaussian(0,1)"}, "suites": ["constants"]})
    rep = cli.run(cfg)
    (t,) = rep.tables
    assert t.header == ("measure", "oracle_c_p", "oracle_cheeger", "sigma2", "median")
    _, cp, cc, _, _ = t.rows[0]
    assert abs(cp - 1) < 1e-3 and abs(cc - math.sqrt(math.pi / 2)) < 1e-3


def test_empty_suites(tmp_path):
    rep = cli.run(cli.config_from_dict({"measures": {"g": "gaussian(0,1)"}}))
    assert rep.tables == [] and rep.failures == 0
    paths = cli.emit(rep, tmp_path, ("json",))
    data = json.loads(paths[0].read_text())
    assert data["metadata"]["suites"] == []


def test_bounds_suite_exponential_passes(tmp_path):
    cfg = cli.config_from_dict({"grid": {"n": 1024}, "measures": {"e": "exponential(1)"}, "suites": ["bounds"]})
    rep = cli.run(cfg)
    (t,) = rep.tables
    assert t.header == ("measure", "formula_id", "value", "oracle", "tightness", "preconditions", "pass")
    assert t.rows and rep.failures == 0


def test_distance_matrices(tmp_path):
    cfg = cli.config_from_dict({"grid": {"n": 256}, "measures": {"a": "gaussian(0,1)", "b": "uniform(-1,1)"},
                                "suites": ["distances"]})
    rep = cli.run(cfg)
    assert [t.name for t in rep.tables] == [f"distances_{m}" for m in cli.metrics.METRICS]
    for t in rep.tables:
        assert t.header == ("measure", "a", "b")
        assert t.rows[0][1] == 0 and t.rows[0][2] == t.rows[1][1]


def test_csv_format(tmp_path):
    rep = cli.run(cli.config_from_dict({"grid": {"n": 512}, "measures": {"g": "gaussian(0,1)"},
                                        "suites": ["constants"]}))
    (path,) = [p for p in cli.emit(rep, tmp_path, ("csv",)) if p.suffix == ".csv"]
    raw = path.read_bytes()
    assert b"\r" not in raw
    rows = list(csv.reader(io.StringIO(raw.decode("utf-8"))))
    assert rows[0] == ["measure", "oracle_c_p", "oracle_cheeger", "sigma2", "median"]
    assert len(rows[1][1].replace(".", "").replace("-", "").lstrip("0").split("e")[0]) <= 12


def test_fmt():
    assert cli.fmt(True) == "true" and cli.fmt(False) == "false"
    assert cli.fmt(1 / 3) == "0.333333333333"
    assert cli.fmt(math.inf) == "inf"


def test_deterministic_output(tmp_path):
    p = write(tmp_path, """\
    grid:
      n: 256
    measures:
      g: gaussian(0, 1)
      u: uniform(-1, 1)
    suites: [constants, distances, metric_chain]
    pairs: 2
    seed: 9
    """)
    outs = []
    for k in range(2):
        d = tmp_path / f"r{k}"
        assert cli.main(["run", str(p), "--out", str(d), "--format", "csv"]) in (0, 1)
        outs.append({q.name: q.read_bytes() for q in sorted(d.glob("*.csv"))})
    assert outs[0] == outs[1] and outs[0]


def test_exit_code_reflects_failures(tmp_path, monkeypatch):
    p = write(tmp_path, BASIC)
    assert cli.main(["run", str(p), "--out", str(tmp_path / "ok")]) == 0

    def failing(ms, cfg):
        t = cli.Table("constants", ("measure",), [("x",)])
        t.failures.append({"measure": "x"})
        return [t]
    monkeypatch.setitem(cli._SUITE_FNS, "constants", failing)
    assert cli.main(["run", str(p), "--out", str(tmp_path / "bad")]) == 1


def test_constants_verb(capsys):
    assert cli.main(["constants", "gaussian(0,1)", "--grid-n", "1024"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "measure,oracle_c_p,oracle_cheeger,sigma2,median"


def test_distance_verb(capsys):
    assert cli.main(["distance", "gaussian(0,1)", "gaussian(1,1)", "--metric", "TV", "--grid-n", "1024"]) == 0
    rows = list(csv.reader(io.StringIO(capsys.readouterr().out)))
    assert rows[1][2] == "TV" and abs(float(rows[1][3]) - 0.382924922548) < 1e-5


def test_grid_n_guard(capsys):
    assert cli.main(["constants", "gaussian(0,1)", "--grid-n", "10"]) == 2


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "logconcave", "constants", "uniform(-1,1)", "--grid-n", "256",
                        "--format", "json"], capture_output=True, text=True, check=True)
    data = json.loads(r.stdout)
    assert data["header"][0] == "measure"
    assert abs(data["rows"][0][1] - 4 / math.pi ** 2) < 1e-3


def test_validate_reports_bad_family_parameters(tmp_path):
    p = write(tmp_path, """\
    measures:
      g: gaussian(0, -1)
      t: truncate(uniform(2, 1), 0, 1)
    """)
    with pytest.raises(ConfigError) as exc:
        cli.validate_config(p)
    assert "measures.g" in str(exc.value) and "measures.t" in str(exc.value)
