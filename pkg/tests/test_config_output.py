import json
import math

import pytest

from rotowave.config import DEFAULTS, ConfigError, default_config, load_config, parse_config
from rotowave.output import NonFiniteOutput, RunManifest, read_csv, resolve_out_dir, write_csv


def test_defaults_validate():
    cfg = default_config()
    assert cfg.n == 64 and cfg["gamma_bar"] == 0.5
    assert cfg.as_dict().keys() == DEFAULTS.keys()


def test_parse_values():
    cfg = parse_config(
        """
        # comment
        n = 32            # trailing comment
        length = 8*pi
        mode = schedule
        eps_list = [0.2, 0.1, 0.05, 0.025]
        q_space = inf
        dt = 1e-2
        """
    )
    assert cfg.n == 32 and isinstance(cfg.n, int)
    assert cfg.length == pytest.approx(8 * math.pi)
    assert cfg.mode == "schedule"
    assert cfg.eps_list == [0.2, 0.1, 0.05, 0.025]
    assert cfg.q_space == math.inf and cfg.dt == 0.01
    assert parse_config("length = pi").length == pytest.approx(math.pi)


@pytest.mark.parametrize(
    "text, match",
    [
        ("n 32", "expected 'key = value'"),
        ("colour = red", "unknown key"),
        ("n = 32\nn = 16", "duplicate"),
        ("n = 7", "even integer"),
        ("n = 16.5", "integer"),
        ("gamma_bar = -1", "gamma_bar must be positive"),
        ("r = 5", "0 < r < R"),
        ("s = 2.5", "5/2"),
        ("p = 2", "1 < p < 2"),
        ("eps = 1.5", r"\(0, 1\)"),
        ("eps_list = [0.1, 0.05, 0.03, 0.01]", "geometric"),
        ("eps_list = [0.1, 0.05]", "four"),
        ("eps_list = 0.1", "bracketed"),
        ("R_list = [3, 2, 4]", "increasing"),
        ("branch = [1, 0]", "branch"),
        ("mode = auto", "manual"),
        ("dt = abc", "cannot parse"),
    ],
)
def test_parse_errors(text, match):
    with pytest.raises(ConfigError, match=match):
        parse_config(text)


def test_override():
    cfg = default_config().override(n=16, eps=None)
    assert cfg.n == 16 and cfg.eps == DEFAULTS["eps"]
    with pytest.raises(ConfigError, match="unknown"):
        default_config().override(colour=1)
    with pytest.raises(ConfigError):
        default_config().override(gamma_bar=-1.0)


def test_load_config(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_config(tmp_path / "missing.cfg")
    p = tmp_path / "run.cfg"
    p.write_text("n = 16\nbogus = 1\n")
    with pytest.raises(ConfigError, match=r"run\.cfg:2: unknown key"):
        load_config(p)


def test_out_dir_precedence(tmp_path, monkeypatch):
    monkeypatch.setenv("ROTOWAVE_OUT", str(tmp_path / "env"))
    assert resolve_out_dir(str(tmp_path / "flag"), str(tmp_path / "cfg")) == tmp_path / "flag"
    assert resolve_out_dir(None, str(tmp_path / "cfg")) == tmp_path / "env"
    monkeypatch.delenv("ROTOWAVE_OUT")
    assert resolve_out_dir(None, str(tmp_path / "cfg")) == tmp_path / "cfg"
    assert (tmp_path / "cfg").is_dir()


def test_csv_roundtrip(tmp_path):
    path = write_csv(tmp_path / "t.csv", "demo", ["a", "b", "c"], [(1, 0.1, True), (2, 1e-300, "x")])
    schema, header, rows = read_csv(path)
    assert schema == "# schema=rotowave.demo.v1"
    assert header == ["a", "b", "c"]
    assert rows == [["1", "0.1", "true"], ["2", "1e-300", "x"]]
    assert float(rows[0][1]) == 0.1


@pytest.mark.parametrize("bad", [float("nan"), float("inf"), -float("inf")])
def test_csv_refuses_non_finite(tmp_path, bad):
    with pytest.raises(NonFiniteOutput):
        write_csv(tmp_path / "t.csv", "demo", ["a"], [(1.0,), (bad,)])
    assert not (tmp_path / "t.csv").exists()


def test_csv_row_width(tmp_path):
    with pytest.raises(ValueError, match="header"):
        write_csv(tmp_path / "t.csv", "demo", ["a", "b"], [(1,)])


def test_manifest(tmp_path):
    man = RunManifest(tmp_path, "demo", default_config().as_dict(), seed=3)
    man.table("values", ["x"], [(1.0,)])
    man.results = {"slope": float("inf"), "ok": True}
    path = man.write()
    doc = json.loads(path.read_text())
    assert doc["experiment"] == "demo" and doc["seed"] == 3
    assert doc["outputs"] == ["demo.values.csv"]
    assert doc["complete"] is False
    assert doc["results"]["slope"] == "inf"
    assert doc["config"]["q_space"] == "inf"
