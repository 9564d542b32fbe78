"""Frequent-itemset mining and per-ADL association-rule generation.

Level-wise Apriori: candidates of size k are joined from frequent (k-1)
itemsets sharing a prefix, pruned by the anti-monotonicity of support, then
counted in one pass over bitmask-encoded transactions. Supports are exact
rationals; they are converted to floats only when rules are emitted.

The ADL label is injected as an ordinary transaction item so that standard
Apriori yields class-association rules of the shape antecedent -> ADL.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence, Union

from .domain import (
    AdlKind,
    Diagnostic,
    MiningParams,
    Rule,
    SensorMap,
    Transaction,
)

RULESET_SCHEMA_VERSION = 1

#: Hard cap on candidates per level; mining aborts with a clear error beyond it.
MAX_CANDIDATES = 1 << 20

LABEL_PREFIX = "ADL="


def label_item(adl: AdlKind) -> str:
    return LABEL_PREFIX + adl.value


def to_fraction(threshold: Union[float, int, str, Fraction]) -> Fraction:
    """Thresholds compare exactly: floats go through their decimal repr."""
    if isinstance(threshold, Fraction):
        return threshold
    if isinstance(threshold, float):
        return Fraction(str(threshold))
    return Fraction(threshold)


def _item_sets(transactions: Iterable) -> list[frozenset[str]]:
    sets = []
    for t in transactions:
        if isinstance(t, Transaction):
            sets.append(t.items)
        else:
            sets.append(frozenset(t))
    return sets


def frequent_itemsets(
    transactions: Sequence,
    min_support: Union[float, Fraction, str],
) -> list[tuple[frozenset[str], Fraction]]:
    """All itemsets whose support meets min_support, with exact supports.

    Accepts Transactions or plain item collections. Output is canonically
    ordered (by size, then item names) and independent of transaction order.
    """
    sets = _item_sets(transactions)
    if not sets:
        raise ValueError("cannot mine an empty transaction list")
    threshold = to_fraction(min_support)
    n = len(sets)
    min_count = threshold * n  # keep itemsets with count >= min_count

    universe = sorted(set().union(*sets)) if sets else []
    bit_of = {item: 1 << i for i, item in enumerate(universe)}
    masks = [sum(bit_of[i] for i in s) for s in sets]

    # L1
    counts: dict[tuple[str, ...], int] = {}
    for item in universe:
        bit = bit_of[item]
        c = sum(1 for m in masks if m & bit)
        if c >= min_count:
            counts[(item,)] = c
    frequent: dict[tuple[str, ...], int] = dict(counts)
    level = sorted(counts)

    k = 2
    while level:
        candidates = _join_and_prune(level, k)
        next_level = []
        for cand in candidates:
            mask = 0
            for item in cand:
                mask |= bit_of[item]
            c = sum(1 for m in masks if m & mask == mask)
            if c >= min_count:
                frequent[cand] = c
                next_level.append(cand)
        level = sorted(next_level)
        k += 1

    return [
        (frozenset(items), Fraction(count, n))
        for items, count in sorted(frequent.items(), key=lambda kv: (len(kv[0]), kv[0]))
    ]


def _join_and_prune(level: list[tuple[str, ...]], k: int) -> list[tuple[str, ...]]:
    """Classic lexicographic join of (k-1)-itemsets plus subset pruning."""
    candidates = []
    by_prefix: dict[tuple[str, ...], list[tuple[str, ...]]] = {}
    for itemset in level:
        by_prefix.setdefault(itemset[:-1], []).append(itemset)
    prior_set = set(level)
    for prefix, group in by_prefix.items():
        for i in range(len(group)):
            for j in range(i + 1, len(group)):
                cand = group[i] + (group[j][-1],)
                # prune: every (k-1)-subset must itself be frequent
                if all(
                    cand[:m] + cand[m + 1 :] in prior_set for m in range(len(cand))
                ):
                    candidates.append(cand)
                    if len(candidates) > MAX_CANDIDATES:
                        raise MemoryError(
                            f"apriori candidate explosion: over {MAX_CANDIDATES} "
                            f"size-{k} candidates; lower the item universe or "
                            f"raise min_support"
                        )
    return candidates


def generate_rules(
    frequent: Sequence[tuple[frozenset[str], Fraction]],
    adl: AdlKind,
    min_confidence: Union[float, Fraction, str],
    window_minutes: int,
    minimal_antecedents: bool = True,
) -> list[Rule]:
    """Class-association rules antecedent -> adl from the frequent itemsets.

    For each frequent itemset containing the label item, the rule keeps the
    joint support and confidence = support(itemset) / support(antecedent);
    anti-monotonicity guarantees the antecedent's support is known. With
    minimal_antecedents on, a rule is dropped when a strict-subset antecedent
    reaches at least its confidence (prevents combinatorial rule blowup).
    """
    label = label_item(adl)
    threshold = to_fraction(min_confidence)
    support_of = {items: sup for items, sup in frequent}
    kept: list[tuple[frozenset[str], Fraction, Fraction]] = []
    for items, sup in frequent:
        if label not in items:
            continue
        antecedent = items - {label}
        if not antecedent:
            continue
        confidence = sup / support_of[antecedent]
        if confidence >= threshold:
            kept.append((antecedent, sup, confidence))
    if minimal_antecedents:
        kept.sort(key=lambda r: (len(r[0]), sorted(r[0])))
        minimal: list[tuple[frozenset[str], Fraction, Fraction]] = []
        for antecedent, sup, conf in kept:
            if any(a < antecedent and c >= conf for a, _s, c in minimal):
                continue
            minimal.append((antecedent, sup, conf))
        kept = minimal
    rules = [
        Rule(
            adl=adl,
            antecedent=antecedent,
            support=float(sup),
            confidence=float(conf),
            window_minutes=window_minutes,
        )
        for antecedent, sup, conf in kept
    ]
    rules.sort(key=lambda r: (len(r.antecedent), sorted(r.antecedent)))
    return rules


# ---------------------------------------------------------------------------
# Rule sets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RuleSet:
    """Deployable set of per-ADL rules plus the params that produced them."""

    scope: str  # "pooled" or "participant:<id>"
    rules: Mapping[AdlKind, tuple[Rule, ...]]
    params: MiningParams
    provenance: tuple[str, ...] = ()

    def all_rules(self) -> list[Rule]:
        return [r for adl in AdlKind for r in self.rules.get(adl, ())]

    def rule_by_id(self, rid: str) -> Optional[Rule]:
        for rule in self.all_rules():
            if rule.id == rid:
                return rule
        return None

    def content_hash(self) -> str:
        """Hash of rules + params only, so scope/provenance metadata does not
        break content identity between pooled and per-participant runs."""
        payload = {
            "params": self.params.to_dict(),
            "rules": {
                adl.value: [r.to_dict() for r in self.rules.get(adl, ())]
                for adl in AdlKind
            },
        }
        blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()

    def to_dict(self) -> dict:
        return {
            "schema_version": RULESET_SCHEMA_VERSION,
            "scope": self.scope,
            "params": self.params.to_dict(),
            "provenance": list(self.provenance),
            "rules": {
                adl.value: [r.to_dict() for r in self.rules.get(adl, ())]
                for adl in AdlKind
            },
            "content_hash": self.content_hash(),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "RuleSet":
        version = d.get("schema_version")
        if version != RULESET_SCHEMA_VERSION:
            raise ValueError(
                f"ruleset schema version {version!r} unsupported "
                f"(expected {RULESET_SCHEMA_VERSION})"
            )
        rules = {
            AdlKind(adl): tuple(Rule.from_dict(r) for r in rule_list)
            for adl, rule_list in d.get("rules", {}).items()
            if rule_list
        }
        return cls(
            scope=d.get("scope", "pooled"),
            rules=rules,
            params=MiningParams.from_dict(d.get("params", {})),
            provenance=tuple(d.get("provenance", [])),
        )


def mine_adl_rules(
    labeled: Mapping[AdlKind, Sequence[Transaction]],
    params: MiningParams,
    participant_id: str,
) -> tuple[RuleSet, list[Diagnostic]]:
    """Per-participant mining: one Apriori run per ADL at that ADL's window size.

    ADLs with no labeled positive are skipped with a diagnostic — there is no
    training data to mine for them.
    """
    params.validate()
    diagnostics: list[Diagnostic] = []
    rules: dict[AdlKind, tuple[Rule, ...]] = {}
    for adl in AdlKind:
        transactions = [t for t in labeled.get(adl, []) if t.items]
        positives = sum(1 for t in transactions if t.label is adl)
        if positives == 0:
            diagnostics.append(
                Diagnostic(
                    "warning",
                    f"no training data for {adl.value}; ADL skipped",
                )
            )
            continue
        mining_input = [
            t.items | {label_item(adl)} if t.label is adl else t.items
            for t in transactions
        ]
        frequent = frequent_itemsets(mining_input, params.min_support)
        adl_rules = generate_rules(
            frequent, adl, params.min_confidence, params.window_sizes[adl]
        )
        if adl_rules:
            rules[adl] = tuple(adl_rules)
        else:
            diagnostics.append(
                Diagnostic(
                    "warning",
                    f"{adl.value}: no rule cleared min_support="
                    f"{params.min_support}, min_confidence={params.min_confidence}",
                )
            )
    return (
        RuleSet(
            scope=f"participant:{participant_id}",
            rules=rules,
            params=params,
            provenance=(participant_id,),
        ),
        diagnostics,
    )


def check_role_consistency(
    maps: Sequence[SensorMap],
) -> list[Diagnostic]:
    """Flag roles that two participants map to different ADL group sets."""
    diagnostics = []
    seen: dict[str, tuple[frozenset, str]] = {}
    for smap in maps:
        for role in sorted(smap.roles()):
            groups = smap.groups_for(role)
            if role in seen and seen[role][0] != groups:
                diagnostics.append(
                    Diagnostic(
                        "error",
                        f"role {role!r} maps to groups "
                        f"{sorted(g.value for g in groups)} for "
                        f"{smap.participant_id} but "
                        f"{sorted(g.value for g in seen[role][0])} for "
                        f"{seen[role][1]}",
                    )
                )
            else:
                seen.setdefault(role, (groups, smap.participant_id))
    return diagnostics


def pool_and_mine(
    labeled_by_participant: Mapping[str, Mapping[AdlKind, Sequence[Transaction]]],
    params: MiningParams,
    maps: Optional[Sequence[SensorMap]] = None,
) -> tuple[RuleSet, list[Diagnostic]]:
    """Concatenate all participants' labeled transactions and mine once.

    Requires canonical role names across homes; pass the sensor maps to get
    collision diagnostics when two participants disagree on a role.
    """
    diagnostics: list[Diagnostic] = []
    if maps:
        diagnostics.extend(check_role_consistency(list(maps)))
    pooled: dict[AdlKind, list[Transaction]] = {adl: [] for adl in AdlKind}
    for pid in sorted(labeled_by_participant):
        for adl in AdlKind:
            pooled[adl].extend(labeled_by_participant[pid].get(adl, []))
    ruleset, mine_diags = mine_adl_rules(pooled, params, participant_id="pool")
    diagnostics.extend(mine_diags)
    return (
        RuleSet(
            scope="pooled",
            rules=ruleset.rules,
            params=params,
            provenance=tuple(sorted(labeled_by_participant)),
        ),
        diagnostics,
    )
