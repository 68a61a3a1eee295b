"""One test per acceptance criterion; each records a PASS/FAIL line.

The lines are printed in the "acceptance criteria" section of the pytest
terminal summary (see conftest.py).
"""

import json
import random
import time
from datetime import datetime, timedelta, timezone

import numpy as np
from helpers import FIXTURES, GOLDEN, record_criterion

from threatfuse.app import Engine, load_config
from threatfuse.estimative import BANDS, AdmiraltyReliability, TermRow, band_for_probability, range_for_term
from threatfuse.fusion import (
    argmax_quintile,
    combine_all,
    combine_noisy_or,
    combine_odds,
    odds,
    spread,
)
from threatfuse.reports import parse_report
from threatfuse.sources import OutcomeFeedback, ProfileStore, letter_from_history
from threatfuse.triage import TriageItem, TriagePolicy, freshness, rank, triage_jsonl

NOW = datetime(2024, 3, 15, tzinfo=timezone.utc)
R1 = spread(3, 0.80, "nearest")
R2 = spread(1, 0.80, "nearest")


def _check(number, name, ok, detail=""):
    record_criterion(number, name, bool(ok), detail)
    assert ok, f"AC{number} {name}: {detail}"


# 1 ---------------------------------------------------------------------------

def test_ac1_worked_combination_table():
    start = time.perf_counter()
    pct = 0.01
    checks = []

    def close(got, want, tol):
        checks.append(bool(np.all(np.abs(np.asarray(got) - np.asarray(want)) <= tol)))

    close(combine_noisy_or(R1, R2), [0.80, 0.28, 0.80, 0.10, 0], pct)
    close(combine_noisy_or(R1, R1), [0, 0.19, 0.96, 0.19, 0], pct)
    # Case C: odds rows, product row and probability row
    close(odds(R1)[1:4], [0.111, 4.000, 0.111], 0.0005)
    close((odds(R1) * odds(R1))[1:4], [0.012, 16.000, 0.012], 0.0005)
    close(combine_odds(R1, R1), [0, 0.01, 0.94, 0.01, 0], pct)
    # Case D: odds 2 row, product and probability
    close(odds(R2)[:2], [4.000, 0.250], 0.0005)
    close((odds(R1) * odds(R2))[1], 0.028, 0.0005)
    close(combine_odds(R1, R2), [0, 0.03, 0, 0, 0], pct)
    elapsed = time.perf_counter() - start
    _check(1, "combination table cases A-D within 1pp", all(checks) and elapsed < 1.0,
           f"{sum(checks)}/{len(checks)} row groups, {elapsed * 1000:.1f} ms")


# 2 ---------------------------------------------------------------------------

def test_ac2_spread_rows_exact():
    rows = [
        (spread(3, 0.80, "nearest"), [0, 0.10, 0.80, 0.10, 0]),
        (spread(1, 0.80, "nearest"), [0.80, 0.20, 0, 0, 0]),
        (spread(1, 0.80, "extremes_wide"), [0.80, 0.10, 0.10, 0, 0]),
    ]
    # exact up to the binary representation of (1 - 0.8) / 2
    ok = all(np.allclose(got, want, rtol=0, atol=1e-15) for got, want in rows)
    _check(2, "spread rows reproduced", ok, "3 rows")


# 3 ---------------------------------------------------------------------------

def test_ac3_property_suite():
    rng = np.random.default_rng(20240301)
    n = 1000
    tol = 1e-9
    failures = {}

    def bump(name, ok):
        failures[name] = failures.get(name, 0) + (not ok)

    for _ in range(n):
        a, b, c = rng.uniform(0, 1, (3, 5))
        # associativity under odds needs distance from the 1 - eps cap
        ao, bo, co = rng.uniform(0, 0.999, (3, 5))
        bump("noisy-or commutative", np.allclose(combine_noisy_or(a, b), combine_noisy_or(b, a), rtol=0, atol=tol))
        bump("odds commutative", np.allclose(combine_odds(a, b), combine_odds(b, a), rtol=0, atol=tol))
        bump("noisy-or associative", np.allclose(
            combine_noisy_or(combine_noisy_or(a, b), c), combine_noisy_or(a, combine_noisy_or(b, c)), rtol=0, atol=tol))
        bump("odds associative", np.allclose(
            combine_odds(combine_odds(ao, bo), co), combine_odds(ao, combine_odds(bo, co)), rtol=0, atol=tol))
        bump("noisy-or monotone growth", bool(np.all(combine_noisy_or(a, b) >= np.maximum(a, b) - tol)))
        k = rng.integers(5)
        z = a.copy()
        z[k] = 0.0
        bump("odds annihilation", combine_odds(z, b)[k] == 0.0 and combine_odds(b, z)[k] == 0.0)
        v = spread(int(rng.integers(1, 6)), float(rng.uniform(0.01, 1.0)), rng.choice(["nearest", "extremes_wide"]))
        bump("spread sums to 1", abs(v.sum() - 1.0) <= tol)
        band = BANDS[rng.integers(7)]
        row = TermRow.LIKELIHOOD if rng.integers(2) else TermRow.PROBABILITY
        lo, hi = range_for_term(band.term(row), row)
        p = lo + rng.uniform(0, 1) * (hi - lo)
        bump("estimative round trip", p >= hi or band_for_probability(p).index == band.index)

    round_trip_terms = all(
        band_for_probability(sum(range_for_term(b.term(r), r)) / 2).index == b.index for b in BANDS for r in TermRow
    )
    grid = [band_for_probability(p).index for p in np.round(np.arange(0, 1.0005, 0.001), 3)]
    totality = len(grid) == 1001 and set(grid) == set(range(1, 8)) and grid == sorted(grid)
    bad = {k: v for k, v in failures.items() if v}
    ok = not bad and round_trip_terms and totality
    detail = f"{len(failures)} properties x {n} cases, 14 terms, 1001-point grid"
    _check(3, "property suite", ok, detail if ok else f"failures {bad}, terms {round_trip_terms}, grid {totality}")


# 4 ---------------------------------------------------------------------------

def test_ac4_monte_carlo_noisy_or():
    n = 10**6
    worst = 0.0
    ok = True
    for seed in range(10):
        rng = np.random.default_rng(seed)
        ps = rng.uniform(0, 1, 3)
        cell = seed % 5
        vectors = []
        for p in ps:
            v = np.zeros(5)
            v[cell] = p
            vectors.append(v)
        predicted = combine_all(vectors, "noisy_or")[cell]
        hits = (rng.random((n, 3)) < ps).any(axis=1).mean()
        se = np.sqrt(hits * (1 - hits) / n)
        z = abs(predicted - hits) / se if se > 0 else 0.0
        worst = max(worst, z)
        ok &= z <= 3.0
    _check(4, "noisy-OR matches 1e6-sample simulation", ok, f"10 seeds, worst |z| = {worst:.2f}")


# 5 ---------------------------------------------------------------------------

def _session_outputs(config_path, extra_records):
    engine = Engine.open(load_config(config_path))
    engine.ingest(config_path.parent / "reports_6.jsonl")
    engine.ingest_records([json.dumps(r) for r in extra_records])
    fusion = "".join(
        json.dumps(engine.fuse_incident(i, rule).as_dict(), sort_keys=True) + "\n"
        for i in ("INC-1", "INC-2") for rule in ("noisy_or", "odds")
    )
    triage = "".join(triage_jsonl(engine.triage(p, NOW)) for p in ("confidence_first", "cost_first"))
    return fusion, triage


def test_ac5_echo_invariance(workdir, tmp_path):
    echoes = []
    for k in range(10):
        t = f"2024-03-0{4 + k % 5}T1{k}:00:00Z"
        echoes.append({
            "report_id": f"echo{k}", "provenance": {"kind": "descendant", "parent_report_id": ["r1", "r3"][k % 2]},
            "source_id": "S1", "observed_at": t, "published_at": t,
            "assertion": {"kind": "quintile", "value": 1 + k % 5}, "reliability_letter": "A",
            "vetting": "human", "detail_score": 3,
        })
    bare = _session_outputs(workdir / "config.json", [])
    echo_dir = tmp_path / "echo"
    echo_dir.mkdir()
    for name in ("config.json", "incidents.json", "trusted.txt", "reports_6.jsonl"):
        (echo_dir / name).write_bytes((workdir / name).read_bytes())
    echoed = _session_outputs(echo_dir / "config.json", echoes)
    ok = bare == echoed
    _check(5, "echo-chamber invariance", ok, "10 same-source descendants, fusion and triage byte-identical")


# 6 ---------------------------------------------------------------------------

def test_ac6_policy_divergence():
    def item(name, conf_q, cost):
        v = spread(conf_q, 0.8)
        return TriageItem(name, "high", cost, v, argmax_quintile(v)[0], 0.0)

    patch_a = item("Patch A", 5, "high")
    patch_b = item("Patch B", 3, "low")
    conf = [i.incident_id for i in rank([patch_b, patch_a], TriagePolicy.confidence_first())]
    cost = [i.incident_id for i in rank([patch_a, patch_b], TriagePolicy.cost_first())]
    ok = conf == ["Patch A", "Patch B"] and cost == ["Patch B", "Patch A"]
    _check(6, "priority policies diverge on the patch pair", ok, f"confidence-first {conf}, cost-first {cost}")


# 7 ---------------------------------------------------------------------------

def test_ac7_reliability_letters():
    at = datetime(2024, 1, 1, tzinfo=timezone.utc)
    store = ProfileStore()
    store.register_report("r0", "fresh", at)
    zero_is_f = store["fresh"].letter is AdmiraltyReliability.F and letter_from_history(0, 0) is AdmiraltyReliability.F

    rank_of = "ABCDE".index
    violations = 0
    rng = random.Random(7)
    for seq in range(1000):
        store = ProfileStore()
        length = rng.randint(1, 60)
        for i in range(length):
            store.register_report(f"r{i}", "S", at)
        previous = store["S"].letter
        for i in range(length):
            outcome = "confirmed" if rng.random() < rng.choice([0.2, 0.5, 0.9]) else "refuted"
            letter = store.record(OutcomeFeedback(f"r{i}", outcome, at + timedelta(minutes=i))).letter
            if previous is not AdmiraltyReliability.F and letter is not AdmiraltyReliability.F:
                if outcome == "confirmed" and rank_of(letter.value) > rank_of(previous.value):
                    violations += 1
                if outcome == "refuted" and rank_of(letter.value) < rank_of(previous.value):
                    violations += 1
            previous = letter
    ok = zero_is_f and violations == 0
    _check(7, "zero history is F and letters move monotonically", ok,
           f"1000 sequences, {violations} violations")


# 8 ---------------------------------------------------------------------------

def test_ac8_freshness():
    half_life = timedelta(days=30)
    report = parse_report({
        "report_id": "f", "provenance": {"kind": "initiating", "incident_id": "I"}, "source_id": "S",
        "observed_at": "2024-01-01T00:00:00Z", "published_at": "2024-01-01T00:00:00Z",
        "expires_at": "2024-03-01T00:00:00Z", "assertion": {"kind": "quintile", "value": 3},
    })
    at_half = freshness(report, report.published_at + half_life, half_life)
    expired = [freshness(report, report.expires_at + timedelta(seconds=s), half_life) for s in (0, 1, 86400 * 400)]
    ok = abs(at_half - 0.5) <= 1e-12 and expired == [0.0, 0.0, 0.0]
    _check(8, "freshness decay and expiry", ok, f"one half-life -> {at_half!r}, expired -> {expired}")


# 9 ---------------------------------------------------------------------------

def test_ac9_end_to_end_determinism(workdir):
    golden = (GOLDEN / "triage_fixture.jsonl").read_text(encoding="utf-8")
    config = load_config(workdir / "config.json")
    live = Engine.open(config)
    summary = live.ingest(workdir / "reports_6.jsonl")
    live_out = triage_jsonl(live.triage("confidence_first", NOW))
    replayed = Engine.replay(config.paths.log, config)
    replay_out = triage_jsonl(replayed.triage("confidence_first", NOW))
    ok = (summary.accepted, summary.rejected) == (6, 0) and live_out == golden and replay_out == golden
    _check(9, "fixture triage matches golden, replay byte-identical", ok,
           f"live {'==' if live_out == golden else '!='} golden, replay {'==' if replay_out == golden else '!='} golden")


def test_fixture_is_the_shipped_one(workdir):
    assert (workdir / "reports_6.jsonl").read_bytes() == (FIXTURES / "reports_6.jsonl").read_bytes()
