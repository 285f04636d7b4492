"""Property-checker tests.

Exercise the probes on small set functions with known structure (modular,
|S|^2, sqrt|S|, ...) before pointing them at the discrete per-packet cost,
where monotonicity and distortion-only supermodularity must hold but the
delay term is known to break supermodularity of the full cost.
"""

import math

import pytest

from edds.model import Instance, Order, SizeError
from edds.discrete import DiscreteParams
from edds.verify import (
    SetFunction,
    check_convexity,
    check_monotone,
    check_supermodular,
    di_as_set_function,
)


def _ground(m):
    return tuple(range(1, m + 1))


def test_set_function_call_accepts_any_iterable():
    sf = SetFunction(_ground(3), lambda s: float(len(s)))
    assert sf([1, 2]) == 2.0
    assert sf((2, 1, 2)) == 2.0
    assert sf(frozenset()) == 0.0


def test_supermodular_modular_function_is_tight():
    weights = {1: 0.25, 2: 1.5, 3: 4.0, 4: 0.125}
    sf = SetFunction(_ground(4), lambda s: sum(weights[i] for i in s))
    report = check_supermodular(sf)
    assert report.violations == 0
    assert report.margin == 0.0  # dyadic weights: slacks are exactly zero
    assert report.worst_witness is None
    # 2^4 subsets, C(rest, 2) pairs each
    assert report.trials == sum(
        math.comb(4 - k, 2) * math.comb(4, k) for k in range(5)
    )


def test_supermodular_square_cardinality():
    sf = SetFunction(_ground(5), lambda s: float(len(s) ** 2))
    report = check_supermodular(sf)
    assert report.violations == 0
    assert report.margin == pytest.approx(2.0)


def test_supermodular_flags_submodular_function():
    sf = SetFunction(_ground(5), lambda s: math.sqrt(len(s)))
    report = check_supermodular(sf)
    assert report.violations > 0
    assert report.margin < -1e-3
    s, i, j = report.worst_witness
    assert i not in s and j not in s and i != j


def test_supermodular_sampled_mode_and_determinism():
    sf = SetFunction(_ground(12), lambda s: math.sqrt(len(s)))
    first = check_supermodular(sf, trials=300, seed=7)
    again = check_supermodular(sf, trials=300, seed=7)
    assert first == again
    assert first.trials == 300
    assert first.violations > 0


def test_supermodular_forced_exhaustive_on_medium_ground():
    sf = SetFunction(_ground(11), lambda s: float(len(s) ** 2))
    report = check_supermodular(sf, exhaustive=True)
    assert report.violations == 0
    assert report.trials == sum(
        math.comb(11 - k, 2) * math.comb(11, k) for k in range(12)
    )


def test_ground_set_size_cap():
    sf = SetFunction(_ground(21), lambda s: float(len(s)))
    with pytest.raises(SizeError):
        check_supermodular(sf)
    with pytest.raises(SizeError):
        check_monotone(sf)


def test_monotone_decreasing_and_constant_pass():
    halving = SetFunction(_ground(6), lambda s: 2.0 ** -len(s))
    report = check_monotone(halving)
    assert report.violations == 0
    assert report.margin > 0.0
    const = SetFunction(_ground(6), lambda s: 3.0)
    assert check_monotone(const).violations == 0


def test_monotone_flags_increasing_function():
    sf = SetFunction(_ground(6), lambda s: float(len(s)))
    report = check_monotone(sf)
    assert report.violations == report.trials
    assert report.margin == pytest.approx(-1.0)
    s, x = report.worst_witness
    assert x not in s


def test_monotone_sampled_determinism():
    sf = SetFunction(_ground(14), lambda s: float(len(s)))
    first = check_monotone(sf, trials=250, seed=3)
    assert first == check_monotone(sf, trials=250, seed=3)
    assert first.trials == 250


def _single_packet_setup(max_slots=3, levels=2):
    inst = Instance((2.0,), 2.0)
    params = DiscreteParams(1.0, 1.0, levels, max_slots)
    ownership = {j: 1 for j in range(1, max_slots + 1)}
    return inst, params, ownership


def test_di_values_on_small_sets():
    inst, params, ownership = _single_packet_setup()
    sf = di_as_set_function(inst, params, 1, ownership)
    assert len(sf.ground) == 3 * 2
    assert sf(frozenset()) == pytest.approx(4.0)
    # one quantum in slot 1: one bit sent, delay 1
    assert sf({(1, 1)}) == pytest.approx(2.0 + 1.0)
    # same load placed in slot 3: same bits, delay 3
    assert sf({(3, 1)}) == pytest.approx(2.0 + 3.0)
    # two quanta in slot 1: log2(3) bits
    assert sf({(1, 1), (1, 2)}) == pytest.approx(2.0 ** (2 - math.log2(3)) + 1.0)


def test_di_ignores_foreign_slots():
    inst, params, _ = _single_packet_setup()
    sf = di_as_set_function(inst, params, 1, {1: 1, 2: 2, 3: 2})
    assert sf({(2, 1), (3, 1)}) == pytest.approx(4.0)  # no bits, no delay
    assert sf({(1, 1), (2, 1)}) == pytest.approx(3.0)


def test_di_distortion_only_drops_delay():
    inst, params, ownership = _single_packet_setup()
    sf = di_as_set_function(inst, params, 1, ownership, distortion_only=True)
    assert sf({(3, 1)}) == pytest.approx(2.0)
    assert sf(frozenset()) == pytest.approx(4.0)


def test_di_greedy_reachable_counts_level_prefixes():
    inst, params, ownership = _single_packet_setup()
    sf = di_as_set_function(inst, params, 1, ownership, greedy_reachable=True)
    # level 2 without level 1 is unreachable one-quantum-at-a-time: no effect
    assert sf({(1, 2)}) == pytest.approx(4.0)
    assert sf({(1, 1), (1, 2)}) == pytest.approx(2.0 ** (2 - math.log2(3)) + 1.0)
    full = di_as_set_function(inst, params, 1, ownership)
    assert full({(1, 2)}) == pytest.approx(3.0)  # count mode sees one quantum


def test_di_max_level_and_packet_validation():
    inst, params, ownership = _single_packet_setup()
    sf = di_as_set_function(inst, params, 1, ownership, max_level=1)
    assert len(sf.ground) == 3
    with pytest.raises(ValueError):
        di_as_set_function(inst, params, 2, ownership)


def test_full_cost_breaks_supermodularity_via_delay():
    inst, params, ownership = _single_packet_setup()
    sf = di_as_set_function(inst, params, 1, ownership)
    report = check_supermodular(sf)  # 6 cells -> exhaustive
    assert report.violations > 0
    assert report.margin < -1.0
    # the recorded witness must actually violate the inequality
    s, i, j = report.worst_witness
    slack = sf(s) + sf(set(s) | {i, j}) - sf(set(s) | {i}) - sf(set(s) | {j})
    assert slack == pytest.approx(report.margin)


def test_distortion_only_cost_is_supermodular_and_monotone():
    inst, params, ownership = _single_packet_setup()
    sf = di_as_set_function(inst, params, 1, ownership, distortion_only=True)
    assert check_supermodular(sf).violations == 0
    assert check_monotone(sf).violations == 0


def test_greedy_reachable_distortion_is_monotone():
    # with contiguous-prefix semantics each added cell either does nothing or
    # adds bits, so the distortion-only cost can only go down
    inst, params, ownership = _single_packet_setup(max_slots=2, levels=2)
    sf = di_as_set_function(inst, params, 1, ownership, greedy_reachable=True,
                            distortion_only=True)
    assert check_monotone(sf).violations == 0


def test_convexity_clean_on_reference_instance():
    inst = Instance((15.0, 20.0), 50.0)
    report = check_convexity(inst, Order.identity(2), trials=200, seed=1)
    assert report.violations == 0
    assert report.margin > 0.0
    # each trial records one midpoint slack and one curvature slack per packet
    assert report.trials == 200 * (1 + 2)
    assert report.name == "convexity"


def test_convexity_is_deterministic_and_validates_order():
    inst = Instance((3.0, 5.0), 4.0)
    a = check_convexity(inst, Order.identity(2), trials=50, seed=9)
    b = check_convexity(inst, Order.identity(2), trials=50, seed=9)
    assert a == b
    with pytest.raises(ValueError):
        check_convexity(inst, Order.identity(3), trials=1, seed=0)


def test_report_doc_serializes_witness():
    sf = SetFunction(_ground(4), lambda s: math.sqrt(len(s)))
    doc = check_supermodular(sf).to_doc()
    assert doc["name"] == "supermodular"
    assert doc["violations"] > 0
    assert isinstance(doc["worst_witness"][0], list)
    clean = check_supermodular(SetFunction(_ground(3), lambda s: float(len(s) ** 2)))
    assert clean.to_doc()["worst_witness"] is None
