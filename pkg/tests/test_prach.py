import pytest
from hypothesis import given, strategies as st

from rachsim.prach import (SUBFRAMES_PER_SFN_CYCLE, USABLE_INDICES, ConfigurationError, Parity,
                           RadioTime, RaParameters, defined_indices, format_of_index,
                           is_ra_opportunity, next_opportunity, next_opportunity_abs,
                           occasion_rule)

E, A = "even", "any"

# FDD random access configuration table, one literal row per index:
# index: (preamble format, SFN constraint, subframe numbers). None = N/A.
TRANSCRIPTION = {
    0: (0, E, {1}), 1: (0, E, {4}), 2: (0, E, {7}), 3: (0, A, {1}), 4: (0, A, {4}),
    5: (0, A, {7}), 6: (0, A, {1, 6}), 7: (0, A, {2, 7}), 8: (0, A, {3, 8}),
    9: (0, A, {1, 4, 7}), 10: (0, A, {2, 5, 8}), 11: (0, A, {3, 6, 9}),
    12: (0, A, {0, 2, 4, 6, 8}), 13: (0, A, {1, 3, 5, 7, 9}),
    14: (0, A, {0, 1, 2, 3, 4, 5, 6, 7, 8, 9}), 15: (0, E, {9}),
    16: (1, E, {1}), 17: (1, E, {4}), 18: (1, E, {7}), 19: (1, A, {1}), 20: (1, A, {4}),
    21: (1, A, {7}), 22: (1, A, {1, 6}), 23: (1, A, {2, 7}), 24: (1, A, {3, 8}),
    25: (1, A, {1, 4, 7}), 26: (1, A, {2, 5, 8}), 27: (1, A, {3, 6, 9}),
    28: (1, A, {0, 2, 4, 6, 8}), 29: (1, A, {1, 3, 5, 7, 9}), 30: None, 31: (1, E, {9}),
    32: (2, E, {1}), 33: (2, E, {4}), 34: (2, E, {7}), 35: (2, A, {1}), 36: (2, A, {4}),
    37: (2, A, {7}), 38: (2, A, {1, 6}), 39: (2, A, {2, 7}), 40: (2, A, {3, 8}),
    41: (2, A, {1, 4, 7}), 42: (2, A, {2, 5, 8}), 43: (2, A, {3, 6, 9}),
    44: (2, A, {0, 2, 4, 6, 8}), 45: (2, A, {1, 3, 5, 7, 9}), 46: None, 47: (2, E, {9}),
    48: (3, E, {1}), 49: (3, E, {4}), 50: (3, E, {7}), 51: (3, A, {1}), 52: (3, A, {4}),
    53: (3, A, {7}), 54: (3, A, {1, 6}), 55: (3, A, {2, 7}), 56: (3, A, {3, 8}),
    57: (3, A, {1, 4, 7}), 58: (3, A, {2, 5, 8}), 59: (3, A, {3, 6, 9}),
    60: None, 61: None, 62: None, 63: (3, E, {9}),
}


@pytest.mark.parametrize("index", range(64))
def test_table_matches_transcription(index):
    expected = TRANSCRIPTION[index]
    if expected is None:
        with pytest.raises(ConfigurationError):
            occasion_rule(index)
        return
    fmt, parity, sfs = expected
    rule = occasion_rule(index)
    assert (rule.format, rule.parity.value, set(rule.subframes)) == (fmt, parity, sfs)


@pytest.mark.parametrize("index, subframe", [(0, 1), (1, 4), (2, 7), (15, 9)])
def test_usable_indices(index, subframe):
    rule = occasion_rule(index)
    assert rule.format == 0
    assert rule.parity is Parity.EVEN
    assert rule.subframes == {subframe}


@pytest.mark.parametrize("index, fmt", [(1, 0), (18, 1), (50, 3)])
def test_format_of_index(index, fmt):
    assert format_of_index(index) == fmt


def test_format_agrees_with_rule():
    for i in defined_indices():
        assert format_of_index(i) == occasion_rule(i).format


@pytest.mark.parametrize("bad", [-1, 64, 30, 46, 60, 61, 62, 1.5, "x"])
def test_invalid_indices_rejected(bad):
    with pytest.raises(ConfigurationError):
        occasion_rule(bad)


def test_is_ra_opportunity():
    rule = occasion_rule(1)
    assert is_ra_opportunity(rule, RadioTime(4, 4))
    assert not is_ra_opportunity(rule, RadioTime(5, 4))
    assert not is_ra_opportunity(rule, RadioTime(4, 5))


def test_any_parity_accepts_odd_frames():
    assert is_ra_opportunity(occasion_rule(4), RadioTime(5, 4))


@pytest.mark.parametrize("index, after, expected", [
    (1, (0, 0), (0, 4)),
    (1, (0, 4), (2, 4)),
    (15, (1, 0), (2, 9)),
    (1, (1023, 4), (0, 4)),
])
def test_next_opportunity(index, after, expected):
    assert next_opportunity(occasion_rule(index), RadioTime(*after)) == RadioTime(*expected)


@pytest.mark.parametrize("index", USABLE_INDICES)
def test_period_is_20_subframes_across_wrap(index):
    rule = occasion_rule(index)
    t = RadioTime(1020, 0)
    prev = next_opportunity(rule, t)
    wrapped = False
    for _ in range(1200):
        nxt = next_opportunity(rule, prev)
        gap = (nxt.total_subframes - prev.total_subframes) % SUBFRAMES_PER_SFN_CYCLE
        assert gap == 20
        wrapped |= nxt.sfn < prev.sfn
        prev = nxt
    assert wrapped


@pytest.mark.parametrize("index", [0, 1, 2, 15, 6, 14, 19, 31, 57, 63])
def test_next_opportunity_exhaustive(index):
    rule = occasion_rule(index)
    opportunities = [t for t in range(SUBFRAMES_PER_SFN_CYCLE)
                     if is_ra_opportunity(rule, RadioTime.from_absolute(t))]
    # successor of every subframe in one full SFN cycle, by linear scan
    j = 0
    for t in range(SUBFRAMES_PER_SFN_CYCLE):
        while j < len(opportunities) and opportunities[j] <= t:
            j += 1
        expected = opportunities[j] if j < len(opportunities) else opportunities[0] + SUBFRAMES_PER_SFN_CYCLE
        assert next_opportunity_abs(rule, t) == expected
        nxt = next_opportunity(rule, RadioTime.from_absolute(t))
        assert is_ra_opportunity(rule, nxt)
        assert nxt == RadioTime.from_absolute(expected)


@given(st.integers(0, 10**7), st.sampled_from(USABLE_INDICES))
def test_next_opportunity_abs_is_strictly_later(t, index):
    rule = occasion_rule(index)
    n = next_opportunity_abs(rule, t)
    assert t < n <= t + 20
    assert is_ra_opportunity(rule, RadioTime.from_absolute(n))


def test_radio_time_ordering_and_bounds():
    assert RadioTime(3, 9) < RadioTime(4, 0)
    assert RadioTime.from_absolute(10240 + 13) == RadioTime(1, 3)
    with pytest.raises(ValueError):
        RadioTime(1024, 0)
    with pytest.raises(ValueError):
        RadioTime(0, 10)


def test_ra_parameter_defaults_and_validation():
    p = RaParameters()
    assert (p.num_ra_preambles, p.preamble_trans_max, p.ra_response_window_sf) == (52, 10, 10)
    with pytest.raises(ConfigurationError):
        RaParameters(preamble_trans_max=0)
    with pytest.raises(ConfigurationError):
        RaParameters(ra_response_window_sf=0)
