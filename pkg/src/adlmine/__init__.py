"""adlmine: detect activities of daily living from in-home sensor logs.

Pipeline: ingest raw sensor events, binarize sliding windows into
order-independent transactions, mine per-ADL association rules with Apriori,
apply rules to detect and merge ADL events, and score against ground truth.
A briefing HTTP service closes the human-in-the-loop annotation cycle.
"""

from .domain import (
    AdlEvent,
    AdlKind,
    Annotation,
    MiningParams,
    Rule,
    SensorEvent,
    SensorKind,
    SensorMap,
    Transaction,
    Verdict,
    Window,
)

__version__ = "0.1.0"

__all__ = [
    "AdlEvent",
    "AdlKind",
    "Annotation",
    "MiningParams",
    "Rule",
    "SensorEvent",
    "SensorKind",
    "SensorMap",
    "Transaction",
    "Verdict",
    "Window",
    "__version__",
]
