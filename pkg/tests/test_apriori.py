import json
from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adlmine.apriori import (
    RuleSet,
    frequent_itemsets,
    generate_rules,
    label_item,
    mine_adl_rules,
    pool_and_mine,
    check_role_consistency,
    to_fraction,
)
from adlmine.domain import (
    AdlKind,
    MiningParams,
    SensorMap,
    Transaction,
    Window,
)
from helpers import ts


def brute_force_itemsets(transactions, min_support):
    """Power-set enumeration oracle; independent of the level-wise miner."""
    sets = [frozenset(t) for t in transactions]
    universe = sorted(set().union(*sets))
    n = len(sets)
    threshold = to_fraction(min_support)
    out = {}
    for k in range(1, len(universe) + 1):
        for combo in combinations(universe, k):
            itemset = frozenset(combo)
            count = sum(1 for t in sets if itemset <= t)
            support = Fraction(count, n)
            if support >= threshold:
                out[itemset] = support
    return out


# -- frequent_itemsets --------------------------------------------------------

def test_worked_example_exact_supports():
    T = [
        {"Kettle", "Fridge", "Toaster"},
        {"Kettle", "Fridge"},
        {"Kettle"},
        {"Fridge", "Toaster"},
    ]
    result = dict(frequent_itemsets(T, 0.5))
    assert result == {
        frozenset({"Kettle"}): Fraction(3, 4),
        frozenset({"Fridge"}): Fraction(3, 4),
        frozenset({"Toaster"}): Fraction(1, 2),
        frozenset({"Kettle", "Fridge"}): Fraction(1, 2),
        frozenset({"Fridge", "Toaster"}): Fraction(1, 2),
    }


def test_single_transaction_identity():
    assert frequent_itemsets([{"A"}], 1.0) == [(frozenset({"A"}), Fraction(1))]


def test_accepts_transaction_objects():
    w = Window("P1", ts("08:00:00"), 60)
    txs = [Transaction(w, frozenset({"A", "B"})), Transaction(w, frozenset({"A"}))]
    result = dict(frequent_itemsets(txs, 0.5))
    assert result[frozenset({"A"})] == Fraction(1)


def test_empty_input_rejected():
    with pytest.raises(ValueError):
        frequent_itemsets([], 0.5)


def test_default_operating_point_accepts_point_15():
    # a support of exactly 3/20 clears the default 0.15 threshold
    T = [{"A"}] * 3 + [{"B"}] * 17
    result = dict(frequent_itemsets(T, 0.15))
    assert frozenset({"A"}) in result


def test_candidate_explosion_aborts_clearly():
    wide = [{f"i{n:04d}" for n in range(1500)}]
    with pytest.raises(MemoryError, match="candidate explosion"):
        frequent_itemsets(wide, 0.5)


corpora = st.integers(1, 10_000).flatmap(
    lambda seed: st.just(seed)
)


@settings(max_examples=40)
@given(
    n_items=st.integers(1, 7),
    n_tx=st.integers(1, 40),
    tenths=st.integers(1, 5),
    rnd=st.randoms(use_true_random=False),
)
def test_oracle_equivalence_small(n_items, n_tx, tenths, rnd):
    universe = [f"r{i}" for i in range(n_items)]
    transactions = [
        {item for item in universe if rnd.random() < 0.45} or {universe[0]}
        for _ in range(n_tx)
    ]
    min_support = Fraction(tenths, 10)
    mined = dict(frequent_itemsets(transactions, min_support))
    oracle = brute_force_itemsets(transactions, min_support)
    assert mined == oracle


@settings(max_examples=30)
@given(
    n_items=st.integers(2, 8),
    n_tx=st.integers(2, 50),
    rnd=st.randoms(use_true_random=False),
)
def test_anti_monotonicity(n_items, n_tx, rnd):
    universe = [f"r{i}" for i in range(n_items)]
    transactions = [
        {item for item in universe if rnd.random() < 0.5} or {universe[0]}
        for _ in range(n_tx)
    ]
    mined = dict(frequent_itemsets(transactions, 0.2))
    for itemset, support in mined.items():
        for k in range(1, len(itemset)):
            for sub in combinations(sorted(itemset), k):
                sub_set = frozenset(sub)
                assert sub_set in mined
                assert mined[sub_set] >= support


@given(st.permutations(list(range(6))))
def test_transaction_order_invariance(order):
    base = [
        {"A", "B"},
        {"A"},
        {"B", "C"},
        {"A", "B", "C"},
        {"C"},
        {"A", "C"},
    ]
    expected = frequent_itemsets(base, 0.3)
    shuffled = frequent_itemsets([base[i] for i in order], 0.3)
    assert expected == shuffled


# -- generate_rules -----------------------------------------------------------

EAT = AdlKind.EatingDrinking
L = label_item(EAT)


def test_rule_confidence_from_supports():
    frequent = [
        (frozenset({"Kettle"}), Fraction(40, 100)),
        (frozenset({L}), Fraction(30, 100)),
        (frozenset({"Kettle", L}), Fraction(30, 100)),
    ]
    rules = generate_rules(frequent, EAT, 0.5, 60)
    (rule,) = rules
    assert rule.antecedent == frozenset({"Kettle"})
    assert rule.confidence == 0.75
    assert rule.support == 0.3
    assert rule.window_minutes == 60
    assert L not in rule.antecedent


def test_rule_below_confidence_threshold_dropped():
    frequent = [
        (frozenset({"Kettle"}), Fraction(100, 100)),
        (frozenset({L}), Fraction(49, 100)),
        (frozenset({"Kettle", L}), Fraction(49, 100)),
    ]
    assert generate_rules(frequent, EAT, 0.5, 60) == []


def test_confidence_boundary_inclusive():
    frequent = [
        (frozenset({"Kettle"}), Fraction(60, 100)),
        (frozenset({L}), Fraction(30, 100)),
        (frozenset({"Kettle", L}), Fraction(30, 100)),
    ]
    (rule,) = generate_rules(frequent, EAT, 0.5, 60)
    assert rule.confidence == 0.5


def test_minimality_filter_drops_dominated_supersets():
    frequent = [
        (frozenset({"Kettle"}), Fraction(30, 100)),
        (frozenset({"Fridge"}), Fraction(40, 100)),
        (frozenset({"Kettle", "Fridge"}), Fraction(25, 100)),
        (frozenset({L}), Fraction(30, 100)),
        (frozenset({"Kettle", L}), Fraction(27, 100)),
        (frozenset({"Kettle", "Fridge", L}), Fraction(20, 100)),
    ]
    rules = generate_rules(frequent, EAT, 0.5, 60)
    antecedents = {tuple(sorted(r.antecedent)) for r in rules}
    # {Kettle} at 0.9 confidence dominates {Kettle, Fridge} at 0.8
    assert ("Kettle",) in antecedents
    assert ("Fridge", "Kettle") not in antecedents
    unfiltered = generate_rules(frequent, EAT, 0.5, 60, minimal_antecedents=False)
    assert {tuple(sorted(r.antecedent)) for r in unfiltered} == {
        ("Kettle",),
        ("Fridge", "Kettle"),
    }


def test_superset_with_higher_confidence_survives():
    frequent = [
        (frozenset({"BathroomHumidity"}), Fraction(40, 100)),
        (frozenset({"BathroomMotion"}), Fraction(40, 100)),
        (frozenset({"BathroomHumidity", "BathroomMotion"}), Fraction(20, 100)),
        (frozenset({label_item(AdlKind.Bathing)}), Fraction(20, 100)),
        (frozenset({"BathroomHumidity", label_item(AdlKind.Bathing)}), Fraction(20, 100)),
        (
            frozenset({"BathroomHumidity", "BathroomMotion", label_item(AdlKind.Bathing)}),
            Fraction(20, 100),
        ),
    ]
    rules = generate_rules(frequent, AdlKind.Bathing, 0.5, 60)
    confidences = {tuple(sorted(r.antecedent)): r.confidence for r in rules}
    # the AND rule is perfectly confident, the single humidity rule only 0.5
    assert confidences[("BathroomHumidity",)] == 0.5
    assert confidences[("BathroomHumidity", "BathroomMotion")] == 1.0


def test_confidence_bounds_support():
    frequent = [
        (frozenset({"Kettle"}), Fraction(40, 100)),
        (frozenset({L}), Fraction(30, 100)),
        (frozenset({"Kettle", L}), Fraction(30, 100)),
    ]
    for rule in generate_rules(frequent, EAT, 0.1, 60):
        assert rule.support <= rule.confidence <= 1.0


# -- mine_adl_rules / pooling --------------------------------------------------

def _tx(items, label=None, start="08:00:00", pid="P1", size=60):
    return Transaction(Window(pid, ts(start), size), frozenset(items), label)


def _labeled_corpus(pid="P1"):
    eating = [
        _tx({"Kettle", "KitchenMotion"}, EAT, "08:00:00", pid),
        _tx({"Kettle", "Fridge"}, EAT, "08:05:00", pid),
        _tx({"Kettle"}, EAT, "08:10:00", pid),
        _tx({"HallPress"}, None, "11:00:00", pid),
        _tx({"Fridge"}, None, "16:00:00", pid),
    ]
    bathing = [
        _tx({"BathroomHumidity", "BathroomMotion"}, AdlKind.Bathing, "09:00:00", pid),
        _tx({"BathroomHumidity", "BathroomMotion"}, AdlKind.Bathing, "09:05:00", pid),
        _tx({"BathroomMotion"}, None, "21:00:00", pid),
        _tx({"BathroomHumidity"}, None, "22:00:00", pid),
    ]
    return {
        EAT: eating,
        AdlKind.Bathing: bathing,
        AdlKind.Dressing: [_tx({"Wardrobe"}, None, "10:00:00", pid)],
        AdlKind.LeavingHouse: [],
    }


def test_rule_groups_only_for_adls_with_positives():
    params = MiningParams(min_support=0.2)
    ruleset, diags = mine_adl_rules(_labeled_corpus(), params, "P1")
    assert EAT in ruleset.rules
    assert AdlKind.Bathing in ruleset.rules
    assert AdlKind.Dressing not in ruleset.rules
    assert AdlKind.LeavingHouse not in ruleset.rules
    messages = " ".join(d.message for d in diags)
    assert "Dressing" in messages and "LeavingHouse" in messages


def test_bathing_and_rule_emerges():
    # positives always show humidity AND motion together; each sensor alone
    # also fires outside baths, so the conjunction is the confident rule
    params = MiningParams(min_support=0.2)
    ruleset, _ = mine_adl_rules(_labeled_corpus(), params, "P1")
    by_antecedent = {
        tuple(sorted(r.antecedent)): r for r in ruleset.rules[AdlKind.Bathing]
    }
    pair = by_antecedent[("BathroomHumidity", "BathroomMotion")]
    assert pair.confidence == 1.0
    for single in (("BathroomHumidity",), ("BathroomMotion",)):
        if single in by_antecedent:
            assert by_antecedent[single].confidence < pair.confidence


def test_kitchen_or_family_of_single_appliance_rules():
    params = MiningParams(min_support=0.2)
    ruleset, _ = mine_adl_rules(_labeled_corpus(), params, "P1")
    eating = {tuple(sorted(r.antecedent)) for r in ruleset.rules[EAT]}
    assert ("Kettle",) in eating  # conjunctive rules whose union realises the OR


def test_all_negative_corpus_yields_empty_ruleset():
    corpus = {adl: [_tx({"HallPress"})] for adl in AdlKind}
    ruleset, diags = mine_adl_rules(corpus, MiningParams(), "P1")
    assert ruleset.rules == {}
    assert len(diags) == 4


def test_label_support_counts_all_windows():
    # 1 positive of 4 non-empty windows: label support 0.25
    corpus = {
        EAT: [
            _tx({"Kettle"}, EAT, "08:00:00"),
            _tx({"Kettle"}, None, "09:00:00"),
            _tx({"Kettle"}, None, "10:00:00"),
            _tx({"Kettle"}, None, "11:00:00"),
        ],
        AdlKind.Bathing: [],
        AdlKind.Dressing: [],
        AdlKind.LeavingHouse: [],
    }
    ruleset, _ = mine_adl_rules(
        corpus, MiningParams(min_support=0.25, min_confidence=0.2), "P1"
    )
    (rule,) = ruleset.rules[EAT]
    assert rule.support == 0.25
    assert rule.confidence == 0.25  # all four kettle windows count, not positives only
    ruleset2, _ = mine_adl_rules(
        corpus, MiningParams(min_support=0.26, min_confidence=0.2), "P1"
    )
    assert EAT not in ruleset2.rules


def test_pooling_single_participant_degenerates_to_per_participant():
    params = MiningParams(min_support=0.2)
    solo, _ = mine_adl_rules(_labeled_corpus(), params, "P1")
    pooled, _ = pool_and_mine({"P1": _labeled_corpus()}, params)
    assert pooled.rules == solo.rules
    assert pooled.content_hash() == solo.content_hash()
    assert pooled.scope == "pooled"
    assert pooled.provenance == ("P1",)


def test_pooling_concatenates_and_lists_provenance():
    params = MiningParams(min_support=0.2)
    pooled, _ = pool_and_mine(
        {"P1": _labeled_corpus("P1"), "P2": _labeled_corpus("P2")}, params
    )
    assert pooled.provenance == ("P1", "P2")
    assert EAT in pooled.rules


def test_role_collision_diagnostics():
    a = SensorMap("P1", {("d", None): "Mystery"}, {"Mystery": frozenset({EAT})})
    b = SensorMap("P2", {("d", None): "Mystery"}, {"Mystery": frozenset({AdlKind.Bathing})})
    diags = check_role_consistency([a, b])
    assert diags and diags[0].severity == "error"
    assert "Mystery" in diags[0].message


# -- RuleSet serialization ------------------------------------------------------

def test_ruleset_roundtrip_and_content_hash():
    params = MiningParams(min_support=0.2)
    ruleset, _ = mine_adl_rules(_labeled_corpus(), params, "P1")
    blob = json.dumps(ruleset.to_dict(), sort_keys=True)
    again = RuleSet.from_dict(json.loads(blob))
    assert again.rules == ruleset.rules
    assert again.content_hash() == ruleset.content_hash()
    assert json.loads(blob)["content_hash"] == ruleset.content_hash()


def test_schema_version_mismatch_rejected():
    params = MiningParams(min_support=0.2)
    ruleset, _ = mine_adl_rules(_labeled_corpus(), params, "P1")
    doc = ruleset.to_dict()
    doc["schema_version"] = 99
    with pytest.raises(ValueError, match="schema version"):
        RuleSet.from_dict(doc)


def test_rule_ids_resolve_in_ruleset():
    params = MiningParams(min_support=0.2)
    ruleset, _ = mine_adl_rules(_labeled_corpus(), params, "P1")
    for rule in ruleset.all_rules():
        assert ruleset.rule_by_id(rule.id) == rule
