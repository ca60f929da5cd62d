import io as _io
import json

import pytest

from matorder import experiments as ex
from matorder.errors import UnknownExperimentError

EXPECTED = {
    "schatten_regularity", "flip_separation", "wittstock_lattice_coincidence", "min_lattice_normality",
    "max_nice_reconstruction", "alpha_plus_fixed_point", "max_min_duality", "min_max_duality",
    "products_lemma", "horn_mathias", "am_obstruction_growth", "ruan_all_kinds", "cone_axioms_all_kinds",
}


def test_registry_contents():
    assert set(ex.REGISTRY) == EXPECTED
    for exp in ex.REGISTRY.values():
        assert exp.anchor.strip()


def test_register_requires_anchor():
    with pytest.raises(ValueError):
        ex.register("anchorless", "")


def test_unknown_experiment():
    with pytest.raises(UnknownExperimentError):
        ex.run_experiment("no_such_experiment")


def test_record_shape():
    rec = ex.run_experiment("flip_separation", {"seed": 3})
    assert set(rec) == {"name", "seed", "bounds", "pass", "anchor", "elapsed"}
    assert rec["seed"] == 3 and rec["pass"]
    json.dumps(rec)


@pytest.mark.parametrize("name,config", [
    ("products_lemma", {"seed": 1, "samples": 20}),
    ("horn_mathias", {"seed": 2, "samples": 20}),
    ("wittstock_lattice_coincidence", {"seed": 0, "samples": 10}),
    ("max_min_duality", {"seed": 0, "samples": 10}),
])
def test_reruns_identically(name, config):
    a, b = ex.run_experiment(name, config), ex.run_experiment(name, config)
    assert a["bounds"] == b["bounds"] and a["pass"] == b["pass"]
    assert a["pass"]


def test_suite_streams_ndjson():
    buf = _io.StringIO()
    names = ["flip_separation", "products_lemma"]
    records = ex.run_suite({"seed": 0, "samples": 10}, names=names, stream=buf)
    lines = buf.getvalue().splitlines()
    assert [json.loads(line)["name"] for line in lines] == names
    assert [r["name"] for r in records] == names


def test_max_nice_small():
    rec = ex.run_experiment("max_nice_reconstruction", {"samples": 50})
    assert rec["pass"] and rec["bounds"]["max_residual"] <= 1e-12
