import os

import pytest

import linsbft


SCENARIO_DIR = os.environ.get("LINSBFT_SCENARIOS")


def make_scenario(**kw):
    sc = linsbft.Scenario()
    sc.n = 5
    sc.f = 1
    sc.delta = 10
    sc.seed = 7
    sc.target = 8
    for k, v in kw.items():
        setattr(sc, k, v)
    return sc


def test_ordinary_run_finalizes():
    rep = linsbft.run_scenario(make_scenario())
    assert rep.all_ok
    assert rep.result.reached_target
    assert rep.result.safety_ok
    assert not rep.result.deadlocked
    assert rep.liveness.ok()
    finalized = [h for h, st in rep.result.heights.items() if st.finalized]
    assert max(finalized) >= 8


def test_report_formats():
    rep = linsbft.run_scenario(make_scenario())
    lines = [l for l in rep.jsonl.splitlines() if l]
    assert lines[0].startswith('{"record":"meta"')
    assert lines[-1].startswith('{"record":"aggregate"')
    assert "safety:" in rep.table and "liveness:" in rep.table


def test_determinism():
    a = linsbft.run_scenario(make_scenario(seed=42))
    b = linsbft.run_scenario(make_scenario(seed=42))
    assert a.result.trace == b.result.trace
    assert a.jsonl == b.jsonl
    c = linsbft.run_scenario(make_scenario(seed=43))
    assert c.result.trace != a.result.trace


def test_trace_checker_rejects_fork():
    ok, detail = linsbft.scan_trace(
        "t=10 a=0 e=fin h=3 b=aabbccdd\nt=11 a=1 e=fin h=3 b=11223344\n"
    )
    assert not ok
    assert "height 3" in detail
    rep = linsbft.run_scenario(make_scenario())
    ok, _ = linsbft.scan_trace(rep.result.trace)
    assert ok


def test_random_faults_stay_safe():
    sc = make_scenario(seed=11)
    sc.fault_mode = "random"
    sc.random_kinds = ["crash", "selective", "equivocate", "spam"]
    rep = linsbft.run_scenario(sc)
    assert rep.result.safety_ok
    assert rep.result.l1_violations == 0
    assert rep.result.l2_violations == 0
    assert rep.result.l3_violations == 0


def test_formula_helpers():
    delta = 10
    assert linsbft.timeout_collect(0, delta) == delta
    assert linsbft.timeout_propose(0, delta) == 2 * delta
    assert linsbft.timeout_propose(3, delta) == 16 * delta
    dtf = 3 * delta
    assert linsbft.dur_ticks(8, 10, 2, dtf, delta) == 2 * dtf + 6 * delta


def test_encoding_oracle_values():
    assert (
        linsbft.genesis_hash_hex()
        == "d4817aa5497628e7c77e6b606107042bbba3130888c5f47a375e6179be789fbb"
    )
    payload = bytes.fromhex("0102030405")
    assert linsbft.tx_encode(7, payload) == (
        (7).to_bytes(8, "big") + (5).to_bytes(4, "big") + payload
    )


def test_collector_draw_weighted_degenerates():
    wire = b"\x01" * 52
    for v in range(6):
        uniform = linsbft.select_collector(wire, v, 5)
        weighted = linsbft.select_collector_weighted(wire, v, [1, 1, 1, 1, 1])
        assert uniform == weighted


@pytest.mark.skipif(SCENARIO_DIR is None, reason="scenario dir not exported")
def test_scenario_files_load_and_roundtrip():
    names = sorted(os.listdir(SCENARIO_DIR))
    assert any(n.endswith(".scenario") for n in names)
    path = os.path.join(SCENARIO_DIR, "ordinary.scenario")
    sc = linsbft.Scenario.load(path)
    sc.validate()
    again = linsbft.Scenario.parse(sc.to_text())
    assert again.to_text() == sc.to_text()
    rep = linsbft.run_scenario(sc)
    assert rep.all_ok
