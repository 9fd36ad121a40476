import pytest

import pdts


def test_fids_counterexample():
    r = pdts.run("fids", "base", "builtin:fids")
    resp = {s["txn"]: s for s in r.responses()}
    assert set(resp) == {"T1", "T2"}
    for s in resp.values():
        assert s["outcome"] == "commit"
        assert all(rv["value"] is None for rv in s["readSet"])
    v = r.check("serializability")
    assert not v["pass"]
    assert len(v["witness"]["cycle"]) == 2


def test_rfids_three_cycle():
    v = pdts.run("rfids", "base", "builtin:rfids").check("serializability")
    assert not v["pass"]
    assert len(v["witness"]["cycle"]) == 3


@pytest.mark.parametrize("algorithm", ["no-fast", "weak-ir", "no-seamless", "no-ddap"])
def test_variants_serialize_fids(algorithm):
    assert pdts.run("fids", algorithm, "builtin:fids").check("serializability")["pass"]


def test_run_is_deterministic_and_replays():
    a = pdts.run("conflict", "base", "random:3")
    b = pdts.run("conflict", "base", "random:3")
    assert a.jsonl == b.jsonl
    replay = pdts.run("conflict", "base", a.schedule)
    assert replay.jsonl == a.jsonl


def test_context_dependent_checks():
    r = pdts.run("strong-ir", "weak-ir", "fifo")
    assert not r.check("strong-ir")["pass"]
    assert pdts.run("strong-ir", "base", "fifo").check("strong-ir")["pass"]
    assert pdts.run("solo-2", "base", "fifo").check("seamless-ft", s=1)["pass"]


def test_history_checks_agree():
    h = {
        "initial": {},
        "txns": [
            {"txn": "T1", "ops": [{"kind": "R", "item": "X1", "value": None}, {"kind": "W", "item": "X2", "value": "a"}]},
            {"txn": "T2", "ops": [{"kind": "R", "item": "X2", "value": "a"}]},
        ],
    }
    for method in ("auto", "brute-force", "graph"):
        v = pdts.check_history(h, method)
        assert v["pass"]
        assert v["witness"]["serialOrder"] == ["T1", "T2"]


def test_explore_finds_fids_violation():
    r = pdts.explore("fids", "base", "exhaustive")
    assert r["violationCount"] > 0
    assert pdts.explore("fids", "weak-ir", "exhaustive")["violationCount"] == 0


def test_errors_carry_codes():
    with pytest.raises(pdts.PdtsError) as e:
        pdts.run("fids", "bogus", "fifo")
    assert e.value.code == "ConfigError"
    with pytest.raises(pdts.PdtsError):
        pdts.run("fids", "base", [{"deliver": 99}])


def test_catalogue():
    assert "fids" in pdts.scenario_names()
    assert pdts.variants() == ["base", "no-fast", "weak-ir", "no-seamless", "no-ddap"]
    assert pdts.scenario("fids")["name"] == "fids"
