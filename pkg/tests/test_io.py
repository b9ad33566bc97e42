import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from conftest import block_matrices, rand_vec
from pcontract.errors import FormatError
from pcontract.io import (
    Instance,
    dumps,
    instance_from_dict,
    instance_to_dict,
    load_instance,
    result_from_dict,
    result_to_dict,
    save_instance,
    series_from_dict,
    series_to_dict,
    shipped_instances,
)
from pcontract.rep import Rep, validate
from pcontract.solver import solve


@settings(max_examples=40)
@given(st.data())
def test_instance_round_trip(data):
    p = data.draw(st.sampled_from([2, 3, 5]))
    A = data.draw(block_matrices(p, data.draw(st.integers(1, 3))))
    inst = Instance(Rep(A), {"family": "test"})
    text = dumps(instance_to_dict(inst))
    assert instance_from_dict(json.loads(text)) == inst


def test_series_round_trip():
    rng = random.Random(5)
    for p in (2, 3, 5):
        for prec in (None, 7):
            z = rand_vec(rng, p, 3, -3, 5, prec)
            assert series_from_dict(series_to_dict(z)) == z
            assert series_from_dict(json.loads(json.dumps(series_to_dict(z)))) == z


def test_result_round_trip(valid_reps):
    for rep in list(valid_reps.values())[:5]:
        res = solve(rep)
        back = result_from_dict(json.loads(dumps(result_to_dict(res))))
        assert back.xi == res.xi and back.exact == res.exact
        assert back.residuals == res.residuals and back.oracle == res.oracle


def test_file_round_trip(tmp_path, suite):
    for name, inst in suite.items():
        path = tmp_path / f"{name}.json"
        save_instance(inst, path)
        again = load_instance(path)
        assert again == inst and again.name == name


def test_dumps_is_stable_and_compact(suite):
    inst = next(iter(suite.values()))
    a = dumps(instance_to_dict(inst))
    assert a == dumps(json.loads(a))
    assert "[0, 1]," in a


def base():
    return {"format": "pcontract-instance", "version": 1, "p": 3, "d": 2,
            "blocks": [{"i": 1, "j": 0, "entries": [[0, 1], [0, 0]]}]}


@pytest.mark.parametrize("edit, location", [
    (lambda o: o.update(p=4), "$.p"),
    (lambda o: o.update(p=65537), "$.p"),
    (lambda o: o.update(d=0), "$.d"),
    (lambda o: o.update(p=True), "$.p"),
    (lambda o: o.update(format="other"), "$.format"),
    (lambda o: o.update(version=2), "$.version"),
    (lambda o: o.pop("blocks"), "$"),
    (lambda o: o.update(blocks={}), "$.blocks"),
    (lambda o: o["blocks"][0]["entries"][0].__setitem__(1, 3), "$.blocks[0].entries[0][1]"),
    (lambda o: o["blocks"][0]["entries"][1].__setitem__(0, -1), "$.blocks[0].entries[1][0]"),
    (lambda o: o["blocks"][0]["entries"][1].__setitem__(0, 1.5), "$.blocks[0].entries[1][0]"),
    (lambda o: o["blocks"][0].update(entries=[[0, 1]]), "$.blocks[0].entries"),
    (lambda o: o["blocks"][0].update(entries=[[0, 0], [0, 0]]), "$.blocks[0]"),
    (lambda o: o["blocks"][0].pop("i"), "$.blocks[0]"),
    (lambda o: o["blocks"].append(dict(o["blocks"][0])), "$.blocks[1]"),
    (lambda o: o.update(metadata=[]), "$.metadata"),
])
def test_format_errors_carry_locations(edit, location):
    obj = base()
    edit(obj)
    with pytest.raises(FormatError) as exc:
        instance_from_dict(obj)
    assert exc.value.location == location


def test_file_errors_are_prefixed(tmp_path):
    path = tmp_path / "bad.json"
    obj = base()
    obj["d"] = -1
    path.write_text(json.dumps(obj))
    with pytest.raises(FormatError) as exc:
        load_instance(path)
    assert exc.value.location == f"{path}:$.d"
    path.write_text("{not json")
    with pytest.raises(FormatError, match="invalid JSON"):
        load_instance(path)
    with pytest.raises(FormatError, match="cannot read"):
        load_instance(tmp_path / "missing.json")


def test_shipped_suite():
    suite = shipped_instances()
    assert len(suite) >= 12
    valid = {n for n, inst in suite.items() if validate(inst.rep).valid}
    assert suite.keys() - valid == {"invalid_d1_p2"}
    assert {inst.rep.p for inst in suite.values()} >= {2, 3, 5}
    assert {inst.rep.d for inst in suite.values()} >= {1, 2, 3}
