import io as _io
import json
import math
from pathlib import Path

import numpy as np
import pytest

from matorder import cli
from matorder import experiments as ex
from matorder import io
from matorder import linalg as la
from matorder import spaces as sp
from matorder import structures as st

DATA = Path(__file__).resolve().parent.parent / "demos" / "data"
FLIP = str(DATA / "flip.json")


def run(*argv):
    buf = _io.StringIO()
    code = cli.cli_main([str(a) for a in argv], out=buf)
    return code, buf.getvalue().strip()


def write(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return str(path)


class TestCone:
    def test_flip_schatten(self):
        assert run("cone", FLIP, "--kind", "schatten") == (0, "non-member, min_eig=-1.000000000000")

    def test_flip_min(self):
        assert run("cone", FLIP, "--kind", "min") == (0, "member")

    def test_flip_with_embedded_space(self):
        code, out = run("cone", DATA / "flip_with_space.json", "--kind", "schatten")
        assert code == 0 and out.startswith("non-member")

    def test_space_file_and_element(self, tmp_path):
        X = sp.lattice(1, 2)
        x = X.elementary(np.eye(2), [1.0, 2.0])
        path = write(tmp_path, "x.json", io.element_to_json(x))
        assert run("cone", DATA / "l1_2.json", path, "--kind", "max") == (0, "member")

    def test_json_verdict(self):
        code, out = run("cone", FLIP, "--kind", "schatten", "--json")
        data = json.loads(out)
        assert code == 0 and data["verdict"] == "non-member"
        assert data["certificate"]["min_eig"] == pytest.approx(-1.0, abs=1e-9)

    def test_strict_undecided(self, tmp_path):
        X = sp.schatten(2, 3)
        x = st.random_cone_member(st.MatricialStructure(X, st.MAX), 3, np.random.default_rng(0))
        path = write(tmp_path, "sep.json", io.element_to_json(x, X))
        code, out = run("cone", path, "--kind", "max", "--budget", "5")
        assert (code, out) == (0, "UNDECIDED")
        code, _ = run("cone", path, "--kind", "max", "--strict")
        assert code == cli.EXIT_UNDECIDED

    def test_strict_decided_exits_zero(self):
        assert run("cone", FLIP, "--kind", "schatten", "--strict")[0] == 0


class TestNormAndPositivise:
    def test_matsys_norm_exact(self):
        code, out = run("norm", FLIP, "--kind", "matsys")
        assert code == 0 and out == "1.000000000000"

    def test_min_bracket(self):
        code, out = run("norm", FLIP, "--kind", "min", "--json")
        data = json.loads(out)
        assert code == 0 and data["lower"] <= data["upper"] * (1 + 1e-12)

    def test_positivise_round_trip(self):
        code, out = run("positivise", FLIP, "--kind", "matsys", "--json", "--budget", "4")
        assert code == 0
        data = json.loads(out)
        X = sp.schatten(math.inf, 2)
        S = st.matrix_system(2)
        x1 = io.element_from_json(data["completion"]["x1"], X)
        x2 = io.element_from_json(data["completion"]["x2"], X)
        assert st.cone_member(S, x1).member and st.cone_member(S, x2).member
        assert data["value_lower"] <= data["value_upper"] * (1 + 1e-12)

    def test_positivise_text(self):
        code, out = run("positivise", FLIP, "--kind", "matsys", "--budget", "4")
        assert code == 0 and out.startswith("lower=") and ", upper=" in out

    def test_dual(self, tmp_path):
        X = sp.lattice(1, 2)
        xb = sp.dual_space(X).elementary(np.eye(2), [1.0, 1.0])
        path = write(tmp_path, "xb.json", io.element_to_json(xb))
        assert run("dual", DATA / "l1_2.json", path, "--kind", "max") == (0, "member")


class TestRegularity:
    def test_text_and_json(self):
        code, out = run("regularity", DATA / "s2_2.json", "--kind", "schatten", "--level", "1",
                        "--budget", "10", "--restarts", "4")
        assert code == 0 and out.startswith("normality_lower_bound=")
        code, out = run("regularity", DATA / "s2_2.json", "--kind", "schatten", "--level", "1",
                        "--budget", "10", "--restarts", "4", "--json")
        data = json.loads(out)
        assert data["level"] == 1 and data["budget"] == 10


class TestErrors:
    def test_missing_file(self):
        assert run("cone", "/nonexistent.json", "--kind", "min")[0] == cli.EXIT_INPUT

    def test_malformed_element(self, tmp_path):
        path = write(tmp_path, "bad.json", {"level": 2, "base_dim": 4, "coeffs": [[1, 2]]})
        assert run("cone", path, "--kind", "min")[0] == cli.EXIT_INPUT

    def test_not_json(self, tmp_path):
        path = tmp_path / "junk.json"
        path.write_text("{not json")
        assert run("norm", path, "--kind", "min")[0] == cli.EXIT_INPUT

    def test_level_mismatch(self):
        assert run("cone", FLIP, "--kind", "min", "--level", "3")[0] == cli.EXIT_INPUT

    def test_bad_kind(self):
        assert run("cone", FLIP, "--kind", "middle")[0] == cli.EXIT_INPUT

    def test_kind_not_allowed_for_base(self):
        assert run("cone", DATA / "l1_2.json", FLIP, "--kind", "schatten")[0] == cli.EXIT_INPUT

    def test_unknown_experiment(self):
        assert run("experiment", "nope")[0] == cli.EXIT_INPUT


class TestExperiments:
    def test_experiment_pass(self):
        assert run("experiment", "flip_separation") == (0, "flip_separation: pass")

    def test_experiment_json(self):
        code, out = run("experiment", "products_lemma", "--budget", "10", "--json")
        rec = json.loads(out)
        assert code == 0 and rec["name"] == "products_lemma" and rec["pass"]

    def test_experiment_failure_exit(self, monkeypatch):
        monkeypatch.setitem(ex.REGISTRY, "always_fails",
                            ex.Experiment("always_fails", "test anchor",
                                          lambda config: {"bounds": {}, "pass": False}))
        assert run("experiment", "always_fails") == (cli.EXIT_FAILED, "always_fails: FAIL")


class TestSettings:
    def test_config_file_seed(self, tmp_path, monkeypatch):
        monkeypatch.delenv("MATORDER_SEED", raising=False)
        conf = tmp_path / "conf.json"
        conf.write_text(json.dumps({"seed": 7}))
        code, out = run("experiment", "flip_separation", "--json", "--config", conf)
        assert code == 0 and json.loads(out)["seed"] == 7

    def test_env_overrides_config_and_flag_overrides_env(self, tmp_path, monkeypatch):
        conf = tmp_path / "conf.json"
        conf.write_text(json.dumps({"seed": 7}))
        monkeypatch.setenv("MATORDER_SEED", "11")
        _, out = run("experiment", "flip_separation", "--json", "--config", conf)
        assert json.loads(out)["seed"] == 11
        _, out = run("experiment", "flip_separation", "--json", "--config", conf, "--seed", "5")
        assert json.loads(out)["seed"] == 5

    def test_unknown_config_key(self, tmp_path):
        conf = tmp_path / "conf.json"
        conf.write_text(json.dumps({"colour": "red"}))
        assert run("norm", FLIP, "--kind", "matsys", "--config", conf)[0] == cli.EXIT_INPUT

    def test_same_seed_same_output(self):
        a = run("norm", FLIP, "--kind", "min", "--seed", "4")
        b = run("norm", FLIP, "--kind", "min", "--seed", "4")
        assert a == b


def test_flip_fixture_matches_swap():
    data = json.loads(Path(FLIP).read_text())
    x = io.element_from_json(data, sp.schatten(math.inf, 2))
    np.testing.assert_allclose(la.realign_schatten(x), la.swap_matrix(2, 2))
