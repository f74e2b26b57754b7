from __future__ import annotations

import json
import math

import pytest

from fogndt.dof import per_user_dof_default
from fogndt.model import DemandVector, GroupIndex
from fogndt.scheduler import (
    CODED_MULTICAST,
    NAIVE_MULTICAST,
    build_schedule,
    coded_messages_for_group,
    coop_sets_for,
    fronthaul_plan,
    group_ndt_candidates,
    iter_group_terms,
    optimize_cooperation,
    sub_messages_for_group,
)
from conftest import make_cfg, reference_3x3_group_pairs


def test_message_count_3x3_group_1_1():
    cfg = make_cfg(nt=3, nr=3)
    msgs = coded_messages_for_group(GroupIndex(1, 1), cfg, DemandVector.distinct(cfg))
    assert len(msgs) == 9
    for msg in msgs:
        assert len(msg.ue_group) == 2
        assert len(msg.en_cache_set) == 1
        assert len(msg.constituents) == 2
        for lbl in msg.constituents:
            assert lbl.ue in msg.ue_group
            assert lbl.cached_ues == tuple(u for u in msg.ue_group if u != lbl.ue)
            assert lbl.cached_ens == msg.en_cache_set


def test_message_count_full_user_group():
    cfg = make_cfg(nt=3, nr=4, nfiles=4)
    msgs = coded_messages_for_group(GroupIndex(3, 2), cfg, DemandVector.distinct(cfg))
    assert len(msgs) == math.comb(3, 2)
    assert all(msg.ue_group == (1, 2, 3, 4) for msg in msgs)


def test_bare_subfiles_for_uncached_group():
    cfg = make_cfg(nt=2, nr=2)
    msgs = coded_messages_for_group(GroupIndex(0, 0), cfg, DemandVector.distinct(cfg))
    assert [(m.ue_group, m.en_cache_set) for m in msgs] == [((1,), ()), ((2,), ())]
    for msg in msgs:
        (lbl,) = msg.constituents
        assert lbl.cached_ues == () and lbl.cached_ens == ()


def test_messages_demand_maps_files():
    cfg = make_cfg(nt=2, nr=2, nfiles=3)
    msgs = coded_messages_for_group(GroupIndex(0, 1), cfg, DemandVector((3, 3)))
    assert {lbl.file_id for msg in msgs for lbl in msg.constituents} == {3}


def test_messages_emitted_in_lexicographic_order():
    cfg = make_cfg(nt=3, nr=3)
    msgs = coded_messages_for_group(GroupIndex(1, 1), cfg, DemandVector.distinct(cfg))
    keys = [(m.ue_group, m.en_cache_set) for m in msgs]
    assert keys == sorted(keys)


def test_candidates_2x2_against_straight_line_arithmetic():
    cfg = make_cfg(nt=2, nr=2, mu_t=0.5, mu_r=0.5, r=1.0)
    f = 0.5 ** 0 * (1 - 0.5) ** 2 * 0.5 ** 1 * (1 - 0.5) ** 1
    d1 = max(2 / (2 + (2 - 0 - 1) / (0 + 1)), 0.5)
    expected = {
        0: (
            math.comb(2, 1) * math.comb(2, 1) * min(1.0, 0 / 2) * f / 1.0,
            math.comb(1, 0) * math.comb(2, 1) * f / d1,
        ),
        1: (
            math.comb(2, 1) * math.comb(2, 1) * min(1.0, 1 / 2) * f / 1.0,
            math.comb(1, 0) * math.comb(2, 1) * f / 1.0,
        ),
    }
    assert group_ndt_candidates(GroupIndex(0, 1), cfg) == expected


def test_candidates_3x3_single_en_fronthaul_form():
    # For one caching edge node the fronthaul time collapses to the
    # closed form 3 * C(3, m+1) * i * f / (2r).
    cfg = make_cfg(nt=3, nr=3, mu_t=0.4, mu_r=0.3, r=2.0)
    f = 0.3 ** 1 * (1 - 0.3) ** 2 * 0.4 ** 1 * (1 - 0.4) ** 2
    table = group_ndt_candidates(GroupIndex(1, 1), cfg)
    for i in (0, 1, 2):
        assert table[i][0] == 3 * math.comb(3, 2) * i * f / (2 * 2.0)


def test_candidates_zero_fronthaul_at_i_zero():
    cfg = make_cfg(nt=4, nr=3, mu_t=0.3, mu_r=0.3)
    table = group_ndt_candidates(GroupIndex(1, 1), cfg)
    assert table[0][0] == 0.0


def test_candidates_n0_single_entry():
    cfg = make_cfg(nt=3, nr=3, mu_t=0.2, mu_r=0.2, r=2.0)
    table = group_ndt_candidates(GroupIndex(1, 0), cfg)
    f = 0.2 ** 1 * 0.8 ** 2 * 0.2 ** 0 * 0.8 ** 3
    assert list(table) == [3]
    assert table[3] == (math.comb(3, 2) * f / 2.0, math.comb(2, 1) * f / 1.0)


def test_candidates_match_group_terms_bitwise():
    # The streaming evaluator and the public per-group table share arithmetic.
    for cfg in (
        make_cfg(nt=3, nr=4, nfiles=4, mu_t=0.37, mu_r=0.81, r=0.7),
        make_cfg(nt=5, nr=2, mu_t=0.64, mu_r=0.11, r=13.0),
    ):
        for group, f, i_star, tau_f, tau_a, _d in iter_group_terms(cfg):
            table = group_ndt_candidates(group, cfg)
            key = i_star if group.n >= 1 else cfg.num_ens
            assert table[key] == (tau_f, tau_a)


def test_optimize_prefers_no_fronthaul_when_r_tiny():
    cfg = make_cfg(nt=4, nr=4, nfiles=4, mu_t=0.5, mu_r=0.5, r=1e-9)
    for n in range(1, 5):
        for m in range(4):
            i_star, _ = optimize_cooperation(GroupIndex(m, n), cfg)
            assert i_star == 0


def test_optimize_maxes_cooperation_when_r_huge():
    def increasing(m, j, cfg):
        return 0.5 + 0.5 * j / cfg.num_ens

    cfg = make_cfg(nt=3, nr=3, mu_t=0.5, mu_r=0.5, r=1e9)
    for n in (1, 2, 3):
        for m in range(3):
            i_star, _ = optimize_cooperation(GroupIndex(m, n), cfg, increasing)
            assert i_star == cfg.num_ens - n


def test_optimize_never_beats_i_zero_claim():
    cfg = make_cfg(nt=3, nr=3, mu_t=0.4, mu_r=0.3, r=2.0)
    for n in (1, 2, 3):
        for m in range(3):
            table = group_ndt_candidates(GroupIndex(m, n), cfg)
            _, best = optimize_cooperation(GroupIndex(m, n), cfg)
            assert best <= sum(table[0])


def test_optimize_rejects_n0():
    with pytest.raises(ValueError):
        optimize_cooperation(GroupIndex(0, 0), make_cfg())


def test_sub_message_split_counts():
    cfg = make_cfg(nt=4, nr=2, mu_t=0.5, mu_r=0.5)
    demand = DemandVector.distinct(cfg)
    msgs = coded_messages_for_group(GroupIndex(0, 1), cfg, demand)
    subs = sub_messages_for_group(GroupIndex(0, 1), 2, msgs, cfg)
    assert len(subs) == len(msgs) * math.comb(3, 2)
    for sub in subs:
        assert set(sub.en_cache_set) <= set(sub.coop_set)
        assert len(sub.coop_set) == 3
        assert sub.size_fraction == msgs[0].size_fraction / math.comb(3, 2)


def test_coop_sets_sorted_and_supersets():
    cfg = make_cfg(nt=4, nr=2)
    sets = coop_sets_for((2,), 2, cfg)
    assert sets == [(1, 2, 3), (1, 2, 4), (2, 3, 4)]


def test_fronthaul_mode_selection():
    cfg = make_cfg(nt=4, nr=2, mu_t=0.5, mu_r=0.5)
    demand = DemandVector.distinct(cfg)
    msgs = coded_messages_for_group(GroupIndex(0, 1), cfg, demand)
    # i = 1: XOR combining sends binom(2,2)=1 payload against binom(2,1)=2.
    assert fronthaul_plan(GroupIndex(0, 1), 1, msgs, cfg).mode == CODED_MULTICAST
    # i = 3: binom(4,1)=4 one-by-one payloads against binom(4,2)=6 XORs.
    assert fronthaul_plan(GroupIndex(0, 1), 3, msgs, cfg).mode == NAIVE_MULTICAST


def test_fronthaul_plan_i_zero_is_empty():
    cfg = make_cfg(nt=3, nr=2, mu_t=0.4, mu_r=0.4)
    demand = DemandVector.distinct(cfg)
    msgs = coded_messages_for_group(GroupIndex(0, 2), cfg, demand)
    plan = fronthaul_plan(GroupIndex(0, 2), 0, msgs, cfg)
    assert plan.mode == CODED_MULTICAST
    assert plan.transmissions == ()
    assert plan.normalized_load == 0.0


def test_fronthaul_load_matches_min_rule():
    cfg = make_cfg(nt=4, nr=3, nfiles=3, mu_t=0.3, mu_r=0.2)
    demand = DemandVector.distinct(cfg)
    for n in (1, 2):
        msgs = coded_messages_for_group(GroupIndex(1, n), cfg, demand)
        f = msgs[0].size_fraction
        for i in range(cfg.num_ens - n + 1):
            plan = fronthaul_plan(GroupIndex(1, n), i, msgs, cfg)
            expected = math.comb(3, 2) * math.comb(4, n) * min(1.0, i / (n + 1)) * f
            assert plan.normalized_load == expected
            per_pair = math.comb(n + i, n + 1) if plan.mode == CODED_MULTICAST else math.comb(n + i, n)
            assert len(plan.transmissions) == math.comb(4, n + i) * math.comb(3, 2) * per_pair


def test_fronthaul_n0_multicasts_every_message():
    cfg = make_cfg(nt=3, nr=2, mu_t=0.4, mu_r=0.4)
    demand = DemandVector.distinct(cfg)
    msgs = coded_messages_for_group(GroupIndex(0, 0), cfg, demand)
    plan = fronthaul_plan(GroupIndex(0, 0), 0, msgs, cfg)
    assert plan.mode == NAIVE_MULTICAST
    assert len(plan.transmissions) == len(msgs)
    assert all(tx.coop_set == (1, 2, 3) for tx in plan.transmissions)
    assert plan.normalized_load == math.comb(2, 1) * msgs[0].size_fraction


def test_schedule_empty_when_users_cache_everything():
    schedule = build_schedule(make_cfg(nt=3, nr=3, mu_t=0.5, mu_r=1.0))
    assert schedule.groups == {}
    assert schedule.breakdown.total == 0.0


def test_schedule_3x3_matches_specialized_expressions():
    for mu_t, mu_r, r in [(0.5, 0.5, 1.0), (0.25, 0.5, 2.0), (0.7, 0.3, 0.5)]:
        cfg = make_cfg(nt=3, nr=3, mu_t=mu_t, mu_r=mu_r, r=r)
        schedule = build_schedule(cfg)
        expected = reference_3x3_group_pairs(mu_t, mu_r, r)
        assert set(schedule.groups) == set(GroupIndex(*g) for g in expected)
        for g, (tau_f, tau_a) in expected.items():
            plan = schedule.groups[GroupIndex(*g)]
            assert plan.tau_f == tau_f
            assert plan.tau_a == tau_a


def test_schedule_total_2x2_matches_straight_line_sum():
    cfg = make_cfg(nt=2, nr=2, mu_t=0.5, mu_r=0.5, r=1.0)
    d = {
        (m, j): per_user_dof_default(m, j, cfg)
        for m in range(2)
        for j in (1, 2)
    }
    total = 0.0
    for m in range(2):
        for n in range(3):
            f = 0.5 ** m * (1 - 0.5) ** (2 - m) * 0.5 ** n * (1 - 0.5) ** (2 - n)
            if n == 0:
                total += math.comb(2, m + 1) * f / 1.0 + math.comb(1, m) * f / d[(m, 2)]
            else:
                best = None
                for i in range(2 - n + 1):
                    tf = math.comb(2, m + 1) * math.comb(2, n) * min(1.0, i / (n + 1)) * f / 1.0
                    ta = math.comb(1, m) * math.comb(2, n) * f / d[(m, n + i)]
                    if best is None or tf + ta < best:
                        best = tf + ta
                total += best
    assert build_schedule(cfg).breakdown.total == pytest.approx(total, rel=1e-15)


def test_schedule_invariant_under_demand_permutation():
    cfg = make_cfg(nt=2, nr=3, nfiles=3, mu_t=0.4, mu_r=0.3, r=2.0)
    a = build_schedule(cfg, DemandVector((1, 2, 3)))
    b = build_schedule(cfg, DemandVector((3, 1, 2)))
    assert a.breakdown == b.breakdown


def test_schedule_messages_do_not_depend_on_dof_provider():
    cfg = make_cfg(nt=3, nr=3, mu_t=0.5, mu_r=0.5, r=2.0)
    a = build_schedule(cfg)
    b = build_schedule(cfg, dof=lambda m, j, c: 0.25 + 0.75 * j / c.num_ens)
    assert set(a.groups) == set(b.groups)
    for g in a.groups:
        assert a.groups[g].messages == b.groups[g].messages
        if a.groups[g].chosen_i == b.groups[g].chosen_i:
            assert a.groups[g].sub_messages == b.groups[g].sub_messages
            assert a.groups[g].fronthaul == b.groups[g].fronthaul


def test_schedule_mode_identity():
    for cfg in (
        make_cfg(nt=3, nr=3, mu_t=0.25, mu_r=0.25, r=4.0),
        make_cfg(nt=4, nr=2, mu_t=0.6, mu_r=0.1, r=50.0),
        make_cfg(nt=2, nr=5, nfiles=5, mu_t=0.5, mu_r=0.2, r=2.0),
    ):
        schedule = build_schedule(cfg)
        for g, plan in schedule.groups.items():
            if g.n == 0:
                assert plan.mode == NAIVE_MULTICAST
            else:
                assert (plan.mode == CODED_MULTICAST) == (plan.chosen_i <= g.n)
                assert plan.fronthaul.mode == plan.mode


def test_schedule_total_non_increasing_in_r():
    previous = None
    for r in [0.01 * 10 ** (k / 4) for k in range(20)]:
        cfg = make_cfg(nt=3, nr=4, nfiles=4, mu_t=0.3, mu_r=0.2, r=r)
        total = build_schedule(cfg).breakdown.total
        if previous is not None:
            assert total <= previous
        previous = total


def test_schedule_json_is_stable_and_complete():
    cfg = make_cfg(nt=2, nr=2, mu_t=0.5, mu_r=0.5, r=4.0)
    doc_a = build_schedule(cfg).to_json()
    doc_b = build_schedule(cfg).to_json()
    assert json.dumps(doc_a, sort_keys=True) == json.dumps(doc_b, sort_keys=True)
    assert doc_a["format"] == "fogndt-schedule/1"
    assert doc_a["total_ndt"] == doc_a["fronthaul_ndt"] + doc_a["access_ndt"]
    by_group = {(g["m"], g["n"]): g for g in doc_a["groups"]}
    g01 = by_group[(0, 1)]
    assert g01["cooperation_increment"] == 1
    assert g01["fronthaul_mode"] == CODED_MULTICAST
    assert len(g01["messages"]) == 4
    assert all(len(m["sub_messages"]) == 1 for m in g01["messages"])


def test_sub_message_counts_in_schedule():
    cfg = make_cfg(nt=3, nr=3, mu_t=0.25, mu_r=0.25, r=4.0)
    schedule = build_schedule(cfg)
    for g, plan in schedule.groups.items():
        expected_msgs = math.comb(3, g.m + 1) * math.comb(3, g.n)
        assert len(plan.messages) == expected_msgs
        if g.n >= 1:
            per_msg = math.comb(3 - g.n, plan.chosen_i)
            assert len(plan.sub_messages) == expected_msgs * per_msg
        assignment = plan.access_assignment()
        assert sum(len(v) for v in assignment.values()) == len(plan.sub_messages)
