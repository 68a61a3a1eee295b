import itertools
import json
import random
from datetime import timedelta

import numpy as np
import pytest
from helpers import T0, make_report
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from threatfuse.errors import ConfigError, DomainError
from threatfuse.reports import IncidentThread, ThreadStore, Vetting
from threatfuse.sources import SourceProfile
from threatfuse.triage import (
    Level,
    ScoringWeights,
    TriageItem,
    TriagePolicy,
    acquiring_score,
    freshness,
    rank,
    render_triage,
    triage_jsonl,
)

DAY = timedelta(days=1)
HALF_LIFE = 30 * DAY


def weights(**kw):
    base = dict(trusted=1.0, reliability=1.0, corroboration=1.0, vetted_human=1.0, detail=1.0,
                freshness=1.0, freshness_half_life=HALF_LIFE)
    base.update(kw)
    return ScoringWeights(**base)


def only(name, **kw):
    zero = dict(trusted=0, reliability=0, corroboration=0, vetted_human=0, detail=0, freshness=0)
    zero[name] = 1.0
    zero.update(kw)
    return weights(**zero)


def thread_of(*reports):
    store = ThreadStore()
    for r in reports:
        store.assign(r)
    (thread,) = store.threads.values()
    return thread, store.reports


# -- freshness ----------------------------------------------------------------

def test_freshness_at_publication():
    r = make_report("r", "S", incident="I")
    assert freshness(r, T0, HALF_LIFE) == 1.0


def test_freshness_one_half_life():
    r = make_report("r", "S", incident="I")
    assert abs(freshness(r, T0 + HALF_LIFE, HALF_LIFE) - 0.5) <= 1e-12


def test_freshness_two_half_lives():
    r = make_report("r", "S", incident="I")
    assert freshness(r, T0 + 2 * HALF_LIFE, HALF_LIFE) == pytest.approx(0.25, abs=1e-12)


def test_freshness_expired():
    r = make_report("r", "S", incident="I", expires_in=DAY)
    assert freshness(r, T0 + DAY - timedelta(seconds=1), HALF_LIFE) > 0.97
    assert freshness(r, T0 + DAY, HALF_LIFE) == 0.0
    assert freshness(r, T0 + 400 * DAY, HALF_LIFE) == 0.0


def test_freshness_before_publication():
    r = make_report("r", "S", incident="I", hours=5)
    with pytest.raises(DomainError):
        freshness(r, T0, HALF_LIFE)


# -- acquiring score ----------------------------------------------------------

def test_single_untrusted_f_report():
    thread, reports = thread_of(make_report("r", "S", incident="I", letter=None))
    w = weights(reliability=2.0, freshness=3.0)
    assert acquiring_score(thread, reports, {}, T0, w) == pytest.approx(2.0 * 0.20 + 3.0 * 1.0, abs=1e-12)


def test_all_weights_zero():
    thread, reports = thread_of(
        make_report("r1", "S1", incident="I", vetting=Vetting.HUMAN, detail=3),
        make_report("r2", "S2", parent="r1"),
    )
    profiles = {"S1": SourceProfile("S1", trusted=True)}
    w = weights(trusted=0, reliability=0, corroboration=0, vetted_human=0, detail=0, freshness=0)
    assert acquiring_score(thread, reports, profiles, T0, w) == 0.0


def test_two_trusted_sources_versus_one():
    r1 = make_report("r1", "S1", incident="I", letter="A")
    r2 = make_report("r2", "S2", parent="r1", letter="C")
    profiles = {"S1": SourceProfile("S1", trusted=True), "S2": SourceProfile("S2", trusted=True)}
    w = weights(trusted=1.5, reliability=2.0, corroboration=0.7)
    one = acquiring_score(*thread_of(r1), profiles, T0, w)
    two = acquiring_score(*thread_of(r1, r2), profiles, T0, w)
    # Same fresh timestamps, machine vetting, detail 0: only these terms move.
    assert two - one == pytest.approx(1.5 * 1 + 0.7 * 1 + 2.0 * 0.60, abs=1e-12)


def test_feature_terms_individually():
    r = make_report("r", "S", incident="I", vetting=Vetting.BOTH, detail=2, letter="B")
    thread, reports = thread_of(r)
    profiles = {"S": SourceProfile("S", trusted=True)}
    assert acquiring_score(thread, reports, profiles, T0, only("trusted")) == 1.0
    assert acquiring_score(thread, reports, profiles, T0, only("reliability")) == pytest.approx(0.70)
    assert acquiring_score(thread, reports, profiles, T0, only("vetted_human")) == 1.0
    assert acquiring_score(thread, reports, profiles, T0, only("detail")) == pytest.approx(2 / 3)
    assert acquiring_score(thread, reports, profiles, T0, only("corroboration")) == 0.0


def test_corroboration_cap():
    reports = [make_report("r0", "S0", incident="I")]
    reports += [make_report(f"r{i}", f"S{i}", parent="r0") for i in range(1, 7)]
    thread, lookup = thread_of(*reports)
    assert acquiring_score(thread, lookup, {}, T0, only("corroboration")) == 3.0
    assert acquiring_score(thread, lookup, {}, T0, only("corroboration", corroboration_cap=5)) == 5.0


def test_same_source_echoes_do_not_score():
    base = make_report("r1", "S1", incident="I")
    echoes = [make_report(f"e{i}", "S1", parent="r1", hours=i + 1, vetting=Vetting.HUMAN, detail=3) for i in range(5)]
    w = weights()
    assert acquiring_score(*thread_of(base), {}, T0 + DAY, w) == acquiring_score(
        *thread_of(base, *echoes), {}, T0 + DAY, w
    )


def test_empty_thread_is_domain_error():
    with pytest.raises(DomainError):
        acquiring_score(IncidentThread("I"), {}, {}, T0, weights())


weight_values = st.floats(0, 5)
letters = st.sampled_from([None, "A", "B", "C", "D", "E"])
report_specs = st.tuples(letters, st.booleans(), st.integers(0, 3), st.floats(0, 200), st.booleans())


def _build(specs, trusted_mask):
    reports = []
    for i, (letter, human, detail, hours, _) in enumerate(specs):
        kw = dict(letter=letter, vetting=Vetting.HUMAN if human else Vetting.MACHINE, detail=detail, hours=hours)
        if i == 0:
            reports.append(make_report("r0", "S0", incident="I", **kw))
        else:
            reports.append(make_report(f"r{i}", f"S{i}", parent="r0", **kw))
    profiles = {f"S{i}": SourceProfile(f"S{i}", trusted=t) for i, t in enumerate(trusted_mask)}
    return reports, profiles


@settings(max_examples=1000)
@given(st.lists(report_specs, min_size=1, max_size=6), report_specs,
       st.tuples(*[weight_values] * 5), st.floats(0, 1000))
def test_corroboration_monotone_without_freshness(specs, extra, ws, later):
    """A new distinct source never lowers the score when freshness carries no weight."""
    w = weights(trusted=ws[0], reliability=ws[1], corroboration=ws[2], vetted_human=ws[3], detail=ws[4], freshness=0)
    reports, profiles = _build(specs + [extra], [s[4] for s in specs + [extra]])
    now = T0 + timedelta(hours=300 + later)
    before = acquiring_score(*thread_of(*reports[:-1]), profiles, now, w)
    after = acquiring_score(*thread_of(*reports), profiles, now, w)
    assert after >= before - 1e-12


@settings(max_examples=1000)
@given(st.lists(report_specs, min_size=1, max_size=6), report_specs,
       st.tuples(*[weight_values] * 6), st.floats(0, 1000))
def test_corroboration_monotone_with_fresh_addition(specs, extra, ws, later):
    """With freshness weighted, monotone whenever the newcomer is at least as fresh as the mean."""
    w = weights(trusted=ws[0], reliability=ws[1], corroboration=ws[2], vetted_human=ws[3], detail=ws[4],
                freshness=ws[5])
    reports, profiles = _build(specs + [extra], [s[4] for s in specs + [extra]])
    now = T0 + timedelta(hours=300 + later)
    old = [freshness(r, now, HALF_LIFE) for r in reports[:-1]]
    assume(freshness(reports[-1], now, HALF_LIFE) >= sum(old) / len(old))
    before = acquiring_score(*thread_of(*reports[:-1]), profiles, now, w)
    after = acquiring_score(*thread_of(*reports), profiles, now, w)
    assert after >= before - 1e-9


def test_stale_corroborator_can_lower_mean_freshness():
    # Mean freshness means one stale newcomer dilutes the freshness term;
    # with only freshness weighted, the score drops.
    fresh = make_report("r1", "S1", incident="I", hours=100)
    stale = make_report("r2", "S2", parent="r1", hours=0)
    now = T0 + timedelta(hours=100)
    w = only("freshness")
    assert acquiring_score(*thread_of(fresh, stale), {}, now, w) < acquiring_score(*thread_of(fresh), {}, now, w)
    # Any corroboration weight at or above the freshness loss restores monotonicity.
    w = only("freshness", corroboration=1.0)
    assert acquiring_score(*thread_of(fresh, stale), {}, now, w) >= acquiring_score(*thread_of(fresh), {}, now, w)


@settings(max_examples=1000)
@given(st.lists(report_specs, min_size=1, max_size=6), st.tuples(*[weight_values] * 6),
       st.floats(0, 5000), st.floats(0, 5000), st.sampled_from([None, 10.0, 150.0]))
def test_freshness_monotone_in_now(specs, ws, a, b, expiry_hours):
    w = weights(trusted=ws[0], reliability=ws[1], corroboration=ws[2], vetted_human=ws[3], detail=ws[4],
                freshness=ws[5])
    reports, profiles = _build(specs, [s[4] for s in specs])
    if expiry_hours is not None:
        r = reports[0]
        reports[0] = make_report("r0", "S0", incident="I", letter=r.asserted_reliability and r.asserted_reliability.value,
                                 vetting=r.vetting, detail=r.detail_score,
                                 hours=(r.published_at - T0) / timedelta(hours=1),
                                 expires_in=timedelta(hours=expiry_hours))
    start = max(r.published_at for r in reports)
    t1, t2 = sorted((start + timedelta(hours=a), start + timedelta(hours=b)))
    thread, lookup = thread_of(*reports)
    assert acquiring_score(thread, lookup, profiles, t2, w) <= acquiring_score(thread, lookup, profiles, t1, w) + 1e-12


# -- weights config -----------------------------------------------------------

def test_weights_from_dict_round_trip():
    w = weights(trusted=0.5, corroboration_cap=2)
    assert ScoringWeights.from_dict(w.to_dict()) == w


def test_weights_from_dict_rejects_unknown_and_missing():
    d = weights().to_dict()
    with pytest.raises(ConfigError):
        ScoringWeights.from_dict({**d, "recency": 1})
    d.pop("detail")
    with pytest.raises(ConfigError):
        ScoringWeights.from_dict(d)


@pytest.mark.parametrize("kw", [{"trusted": -1}, {"detail": float("nan")}, {"freshness_half_life": timedelta(0)},
                                {"corroboration_cap": -1}])
def test_weights_validation(kw):
    with pytest.raises(ConfigError):
        weights(**kw)


# -- ranking ------------------------------------------------------------------

def item(iid, seriousness, cost, quintile, score=0.0):
    fused = np.zeros(5)
    if quintile:
        fused[quintile - 1] = 0.8
    return TriageItem(iid, seriousness, cost, fused, quintile, score)


# Both patches are serious; A is high-confidence but expensive, B medium-confidence and cheap.
PATCH_A = item("Patch A", "high", "high", 5)
PATCH_B = item("Patch B", "high", "low", 3)


def test_patch_pair_confidence_first():
    assert [i.incident_id for i in rank([PATCH_B, PATCH_A], TriagePolicy.confidence_first())] == ["Patch A", "Patch B"]


def test_patch_pair_cost_first():
    assert [i.incident_id for i in rank([PATCH_A, PATCH_B], TriagePolicy.cost_first())] == ["Patch B", "Patch A"]


def test_identical_items_order_by_id():
    items = [item(x, "medium", "medium", 3, 1.0) for x in ("c", "a", "b")]
    for policy in (TriagePolicy.confidence_first(), TriagePolicy.cost_first(), TriagePolicy.weighted(1, 1, 1)):
        assert [i.incident_id for i in rank(items, policy)] == ["a", "b", "c"]


def test_seriousness_dominates_both_policies():
    low = item("x", "low", "low", 5, 10.0)
    high = item("y", "high", "high", 1, 0.0)
    for policy in (TriagePolicy.confidence_first(), TriagePolicy.cost_first()):
        assert rank([low, high], policy)[0] is high


def test_confidence_first_uses_score_after_quintile():
    a = item("a", "high", "low", 4, 1.0)
    b = item("b", "high", "low", 4, 2.0)
    assert rank([a, b], TriagePolicy.confidence_first())[0] is b


def test_annihilated_ranks_below_every_quintile():
    dead = item("a", "high", "high", None, 99.0)
    weak = item("b", "high", "high", 1, 0.0)
    for policy in (TriagePolicy.confidence_first(), TriagePolicy.cost_first(), TriagePolicy.weighted(0, 1, 0)):
        assert rank([dead, weak], policy)[0] is weak


def test_weighted_mode():
    # score = ws*lv(serious) + wc*(q-1)/4 + wk*(1 - lv(cost))
    policy = TriagePolicy.weighted(1.0, 2.0, 1.0)
    a = item("a", "high", "high", 3)    # 1 + 1.0 + 0 = 2.0
    b = item("b", "medium", "low", 3)   # 0.5 + 1.0 + 1 = 2.5
    c = item("c", "low", "medium", 5)   # 0 + 2.0 + 0.5 = 2.5
    assert [i.incident_id for i in rank([a, b, c], policy)] == ["b", "c", "a"]


def test_weighted_custom_level_values():
    values = {"high": 1.0, "medium": 0.9, "low": 0.0}
    policy = TriagePolicy.weighted(1.0, 0.0, 0.0, level_values=values)
    assert policy.level_values[Level.MEDIUM] == 0.9
    with pytest.raises(ConfigError):
        TriagePolicy.weighted(1.0, 0.0, 0.0, level_values={"high": 1.0})


def test_weighted_needs_a_weight():
    with pytest.raises(ConfigError):
        TriagePolicy.weighted(0, 0, 0)


def test_policy_mode_aliases():
    assert TriagePolicy("cost-first") == TriagePolicy.cost_first()
    with pytest.raises(ValueError):
        TriagePolicy("fastest-first")


levels = st.sampled_from(list(Level))
items_strategy = st.lists(
    st.builds(item, st.text("abcdef", min_size=1, max_size=3), levels, levels,
              st.sampled_from([None, 1, 2, 3, 4, 5]), st.sampled_from([0.0, 1.0, 2.5])),
    max_size=8,
    unique_by=lambda i: i.incident_id,
)
policies = st.sampled_from([TriagePolicy.confidence_first(), TriagePolicy.cost_first(), TriagePolicy.weighted(1, 1, 1)])


@settings(max_examples=1000)
@given(items_strategy, policies, st.randoms(use_true_random=False))
def test_rank_permutation_invariant(items, policy, rng):
    shuffled = items[:]
    rng.shuffle(shuffled)
    assert rank(shuffled, policy) == rank(items, policy)
    assert sorted(i.incident_id for i in rank(items, policy)) == sorted(i.incident_id for i in items)


def test_rank_all_permutations_small():
    items = [item("a", "high", "low", 3), item("b", "high", "low", 3), item("c", "medium", "high", 5),
             item("d", "high", "high", 5)]
    for policy in (TriagePolicy.confidence_first(), TriagePolicy.cost_first()):
        outputs = {tuple(i.incident_id for i in rank(list(p), policy)) for p in itertools.permutations(items)}
        assert len(outputs) == 1


# -- output formats -----------------------------------------------------------

def test_triage_jsonl():
    text = triage_jsonl(rank([PATCH_A, PATCH_B], TriagePolicy.confidence_first()))
    lines = text.splitlines()
    assert len(lines) == 2
    first = json.loads(lines[0])
    assert first == {
        "incident_id": "Patch A", "seriousness": "high", "action_cost": "high",
        "fused": [0.0, 0.0, 0.0, 0.0, 0.8], "fused_quintile": 5, "acquiring_score": 0.0,
    }
    assert list(first) == sorted(first)


def test_render_triage_columns():
    text = render_triage([PATCH_B, item("dead", "low", "low", None)])
    lines = text.splitlines()
    assert lines[0].split()[:6] == ["rank", "incident", "serious", "cost", "quint", "score"]
    assert lines[1].split()[:2] == ["1", "Patch"]
    assert "Q3" in lines[1]
    assert lines[2].split()[4] == "-"
    assert lines[1].endswith("0.000 0.000 0.800 0.000 0.000")


def test_rank_is_reproducible_across_runs():
    rng = random.Random(2)
    items = [item(f"i{n}", rng.choice(list(Level)), rng.choice(list(Level)), rng.randint(1, 5), rng.random())
             for n in range(30)]
    policy = TriagePolicy.confidence_first()
    assert triage_jsonl(rank(items, policy)) == triage_jsonl(rank(list(reversed(items)), policy))
