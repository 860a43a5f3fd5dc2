import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lteu_coexist.config import RateRequirements, ScenarioConfig, Weights
from lteu_coexist.optimizer import Scenario, allocate_dof, evaluate_allocation, select_wifi_users

CFG = ScenarioConfig()
SCENARIO = Scenario.from_config(CFG)


def test_select_wifi_users_ties_and_bounds():
    assert select_wifi_users(2, [0.1, 0.5, 0.5, 0.2]) == (1, 2)
    assert select_wifi_users(0, [0.3]) == ()
    assert select_wifi_users(3, [0.3, 0.1, 0.2]) == (0, 1, 2)
    with pytest.raises(ValueError):
        select_wifi_users(4, [0.1, 0.2])


def test_evaluate_allocation_respects_dof_budget():
    for d in range(1, 6):
        a = evaluate_allocation(d, SCENARIO)
        assert a.sue_dof + len(a.selected_wifi) == CFG.small_cell.n_antennas - 1
        assert 2 <= a.k_served <= a.sue_dof
        assert a.constraints["dof_budget"]
    with pytest.raises(ValueError):
        evaluate_allocation(6, SCENARIO)


def test_clamped_contender_count_flagged():
    a = evaluate_allocation(0, SCENARIO)
    assert a.m_bar < 1.0 and a.clamped


def test_wifi_throughput_grows_with_nulled_users():
    rw = [evaluate_allocation(d, SCENARIO).r_wifi for d in range(1, 6)]
    assert rw == sorted(rw)


def test_weight_extremes():
    low = allocate_dof(SCENARIO, Weights(0.1, 0.9))
    high = allocate_dof(SCENARIO, Weights(0.5, 0.5))
    assert (low.sue_dof, low.wifi_dof) == (6, 1)
    assert (high.sue_dof, high.wifi_dof) == (2, 5)
    assert low.feasible and high.feasible


def test_infeasible_requirements_reported():
    a = allocate_dof(SCENARIO, Weights(0.5, 0.5), RateRequirements(1e9, 1e9))
    assert not a.feasible
    assert "sue_rate" in a.diagnostic and "wifi_rate" in a.diagnostic


@settings(max_examples=25, deadline=None)
@given(st.floats(min_value=0.0, max_value=1.0), st.integers(min_value=0, max_value=50))
def test_allocation_best_of_visited(e_s, seed):
    scenario = Scenario.from_config(CFG.replace(seed=seed))
    w = Weights(e_s, 1.0 - e_s)
    best = allocate_dof(scenario, w)
    assert best.iterations <= math.ceil(math.log2(CFG.small_cell.n_antennas)) + 1
    assert best.iterations == len(best.visited)
    for d in best.visited:
        other = evaluate_allocation(d, scenario, weights=w)
        if best.feasible and other.feasible:
            assert best.objective >= other.objective


def test_select_wifi_users_matches_enumeration():
    import itertools

    from lteu_coexist.checks import exhaustive_wifi_selection
    from lteu_coexist.interference import WifiInterference

    pl = (2e-7, 5e-8, 1e-8, 4e-9, 7e-10)
    thr = CFG.access_threshold
    users = WifiInterference(pl, 2, 0.999, CFG.small_cell.tx_power, "matched", 8, 5)
    gains = users.gains(thr)
    assert len(set(gains.tolist())) == 5
    chosen = select_wifi_users(2, gains)
    assert set(chosen) == set(np.argsort(-gains)[:2].tolist())
    m_bar = sum(users.access(i, i in chosen, thr) for i in range(5))
    assert m_bar == pytest.approx(exhaustive_wifi_selection(2, users, thr), rel=1e-14)
    assert select_wifi_users(5, gains) == tuple(range(5))


def test_zero_requirements_always_feasible():
    for d in range(0, 6):
        assert evaluate_allocation(d, SCENARIO, RateRequirements(0.0, 0.0)).feasible


def test_d_zero_boundary():
    a0, a1 = evaluate_allocation(0, SCENARIO), evaluate_allocation(1, SCENARIO)
    assert a0.sue_dof == 7 and a0.selected_wifi == ()
    assert a0.m_bar <= a1.m_bar


def test_rates_monotone_in_d():
    allocs = [evaluate_allocation(d, SCENARIO) for d in range(0, 6)]
    assert all(a.r_small >= b.r_small for a, b in zip(allocs, allocs[1:]))
    assert all(a.r_wifi <= b.r_wifi for a, b in zip(allocs, allocs[1:]))


def test_check_constraints_examples():
    from lteu_coexist.optimizer import DofAllocation, check_constraints

    reqs = RateRequirements()
    ok = DofAllocation(1, 6, 2, (0,), 24e6, 40e6, 2.0)
    report = check_constraints(ok, reqs, 2.0, 8)
    assert all(report.values())
    one = DofAllocation(1, 6, 1, (0,), 24e6, 40e6, 2.0)
    assert not check_constraints(one, reqs, 2.0, 8)["sue_count"]
    bad = DofAllocation(1, 5, 2, (0,), 24e6, 40e6, 2.0)
    assert not check_constraints(bad, reqs, 2.0, 8)["dof_budget"]


def test_weighted_small_cell_rate_grows_with_weight():
    from lteu_coexist.config import TABLE3_WEIGHTS

    vals = [es * allocate_dof(SCENARIO, Weights(es, ew)).r_small for es, ew in TABLE3_WEIGHTS]
    assert vals == sorted(vals)


def test_needs_four_antennas():
    from lteu_coexist.config import SmallCellConfig

    small = Scenario(CFG.replace(small_cell=SmallCellConfig(n_antennas=3)), SCENARIO.path_loss)
    with pytest.raises(ValueError):
        allocate_dof(small)
