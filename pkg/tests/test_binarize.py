from collections import Counter

from hypothesis import given
from hypothesis import strategies as st

from adlmine.binarize import humidity_rise, items_for_window, window_activations
from adlmine.domain import MiningParams, Window, default_sensor_map
from adlmine.ingest import build_log
from helpers import contact, motion, multi, plug, ts

PARAMS = MiningParams()
MAP = default_sensor_map("P1")
W = Window("P1", ts("08:00:00"), 60)


def _tx(events, window=W, params=PARAMS, unmapped=None):
    return items_for_window(build_log(events), window, MAP, params, unmapped)


# -- humidity_rise -----------------------------------------------------------

def _readings(values, start_minute=0):
    return [(ts(f"08:{start_minute + i:02d}:00"), v) for i, v in enumerate(values)]


def test_humidity_rise_examples():
    assert humidity_rise(_readings([60, 62, 75]), 5.0) is True
    assert humidity_rise(_readings([75, 62, 60]), 5.0) is False
    assert humidity_rise(_readings([60]), 5.0) is False


def test_humidity_rise_requires_rise_not_range():
    # high-then-low has range 17 but no low-before-high pair
    assert humidity_rise(_readings([75, 58]), 5.0) is False
    # rise then dip: the earlier rise still counts
    assert humidity_rise(_readings([60, 75, 58]), 5.0) is True


def test_humidity_rise_boundary_inclusive():
    assert humidity_rise(_readings([60, 65]), 5.0) is True
    assert humidity_rise(_readings([60, 64.9]), 5.0) is False


@given(
    st.lists(st.floats(min_value=0, max_value=100, allow_nan=False), min_size=2, max_size=12),
    st.floats(min_value=0.5, max_value=20),
)
def test_humidity_rise_matches_pairwise_oracle(values, delta):
    readings = _readings(values)
    oracle = any(
        values[j] - values[i] >= delta
        for i in range(len(values))
        for j in range(i + 1, len(values))
    )
    assert humidity_rise(readings, delta) == oracle


# -- items_for_window --------------------------------------------------------

def test_kettle_plug_reading_makes_item():
    tx = _tx([plug("08:01:00", "kettle_plug", 1850.0)])
    assert tx.items == frozenset({"Kettle"})


def test_standby_watts_below_threshold_no_item():
    assert _tx([plug("08:01:00", "kettle_plug", 2.5)]).items == frozenset()


def test_contact_close_contributes_nothing():
    assert _tx([contact("08:05:00", "fridge_door", 0.0)]).items == frozenset()
    assert _tx([contact("08:05:00", "fridge_door", 1.0)]).items == {"Fridge"}


def test_empty_window_empty_transaction():
    tx = _tx([contact("12:00:00", "fridge_door", 1.0)])  # outside 08:00-09:00
    assert tx.items == frozenset()


def test_order_independence():
    events = [
        plug("08:01:00", "kettle_plug", 1850.0),
        contact("08:03:00", "fridge_door", 1.0),
        multi("08:05:00", "kitchen_multi", "motion", 1.0),
    ]
    assert _tx(events).items == _tx(list(reversed(events))).items


def test_humidity_rise_within_window_makes_item():
    events = [
        multi("08:05:00", "bathroom_multi", "humidity", 60.0),
        multi("08:15:00", "bathroom_multi", "humidity", 62.0),
        multi("08:25:00", "bathroom_multi", "humidity", 75.0),
    ]
    assert _tx(events).items == {"BathroomHumidity"}


def test_falling_humidity_no_item():
    events = [
        multi("08:05:00", "bathroom_multi", "humidity", 75.0),
        multi("08:25:00", "bathroom_multi", "humidity", 60.0),
    ]
    assert _tx(events).items == frozenset()


def test_temperature_and_light_channels_never_itemise():
    smap = default_sensor_map("P1")
    entries = dict(smap.entries)
    entries[("bathroom_multi", "temperature")] = "BathroomTemp"
    entries[("bathroom_multi", "light")] = "BathroomLight"
    from adlmine.domain import SensorMap

    extended = SensorMap("P1", entries)
    log = build_log(
        [
            multi("08:05:00", "bathroom_multi", "temperature", 21.0),
            multi("08:06:00", "bathroom_multi", "light", 300.0),
        ]
    )
    tx = items_for_window(log, W, extended, PARAMS)
    assert tx.items == frozenset()


def test_unmapped_sensors_tallied_not_dropped():
    tally = Counter()
    tx = _tx(
        [contact("08:05:00", "mystery_door", 1.0), contact("08:06:00", "mystery_door", 1.0)],
        unmapped=tally,
    )
    assert tx.items == frozenset()
    assert tally == Counter({"mystery_door": 2})


def test_window_activations_reports_timestamps():
    events = [
        plug("08:01:00", "kettle_plug", 1850.0),
        plug("08:07:00", "kettle_plug", 1900.0),
        multi("08:05:00", "bathroom_multi", "humidity", 60.0),
        multi("08:20:00", "bathroom_multi", "humidity", 75.0),
    ]
    acts = window_activations(build_log(events), W, MAP, PARAMS)
    assert acts["Kettle"] == (ts("08:01:00"), ts("08:07:00"))
    assert acts["BathroomHumidity"] == (ts("08:05:00"), ts("08:20:00"))


# -- properties ---------------------------------------------------------------

base_events = st.lists(
    st.one_of(
        st.builds(lambda m: contact(f"08:{m:02d}:00", "fridge_door", 1.0), st.integers(0, 59)),
        st.builds(lambda m: contact(f"08:{m:02d}:00", "front_door", 1.0), st.integers(0, 59)),
        st.builds(lambda m: plug(f"08:{m:02d}:00", "kettle_plug", 1850.0), st.integers(0, 59)),
        st.builds(lambda m: motion(f"08:{m:02d}:00", "hall_motion"), st.integers(0, 59)),
        st.builds(
            lambda m, v: multi(f"08:{m:02d}:00", "bathroom_multi", "humidity", float(v)),
            st.integers(0, 59),
            st.integers(40, 90),
        ),
    ),
    min_size=1,
    max_size=24,
    unique_by=lambda e: (e.timestamp, e.sensor_id, e.channel, e.value),
)


@given(base_events, base_events)
def test_monotonicity_adding_events_never_removes_items(events, extra):
    before = _tx(events).items
    combined = {(e.timestamp, e.sensor_id, e.channel, e.value): e for e in events + extra}
    after = _tx(list(combined.values())).items
    assert before <= after


@given(base_events, st.randoms(use_true_random=False))
def test_union_decomposition_for_pointwise_items(events, rnd):
    """items(A ∪ B) == items(A) ∪ items(B) for contact/motion/plug items."""
    split_a, split_b = [], []
    for e in events:
        (split_a if rnd.random() < 0.5 else split_b).append(e)
    whole = {i for i in _tx(events).items if i != "BathroomHumidity"}
    part_a = {i for i in _tx(split_a).items if i != "BathroomHumidity"} if split_a else set()
    part_b = {i for i in _tx(split_b).items if i != "BathroomHumidity"} if split_b else set()
    assert whole == part_a | part_b


def test_humidity_is_exempt_from_decomposition():
    readings = [
        multi("08:00:00", "bathroom_multi", "humidity", 60.0),
        multi("08:10:00", "bathroom_multi", "humidity", 63.0),
        multi("08:20:00", "bathroom_multi", "humidity", 66.0),
        multi("08:30:00", "bathroom_multi", "humidity", 70.0),
    ]
    whole = _tx(readings).items
    first, second = readings[:2], readings[2:]
    assert whole == {"BathroomHumidity"}
    assert _tx(first).items == frozenset()
    assert _tx(second).items == frozenset()  # 66 -> 70 is below the 5-point delta


@given(base_events)
def test_binarize_deterministic(events):
    assert _tx(events) == _tx(events)
