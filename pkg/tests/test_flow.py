"""Closure network construction, exact max-flow, and optimal-cut extraction."""

from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from robustmatch import (
    Matching,
    ShiftDistribution,
    build_network,
    build_rotation_poset,
    closed_set_to_matching,
    enumerate_shift_domain,
    robust_matching,
    solve_pipeline,
)
from robustmatch.cli import gen_random_instance
from robustmatch.flow import (
    ClosureNetwork,
    analyze_domain,
    certificate_violations,
    dump_ip,
    dump_network,
    extract_closed_set,
    objective_of_mask,
    solve,
)
from robustmatch.oracle import oracle_argmin, oracle_objective

from test_instance import random_instances
from test_matching import M0_I2, M0_I3, MZ_I3

I3_POINT = "GIRL_LIST g1 b1 1"


def point_dist(inst, text):
    from robustmatch import parse_shift

    return ShiftDistribution(((parse_shift(text, inst), Fraction(1)),))


def chain_network() -> ClosureNetwork:
    """Two-rotation chain with F-edges on every interval, bottleneck 1/10.

    Nodes: R0, R1, S=2, T=3; the three closed sets {}, {R0}, {R0,R1} pay
    1/10, 6/10, 3/10 respectively, so the optimum is 1/10 at the empty set.
    """
    return ClosureNetwork(
        n_rotations=2,
        hasse_edges=((2, 0), (0, 1), (1, 3)),
        shift_edges=(
            (0, 2, Fraction(1, 10)),   # separated exactly by S = {}
            (1, 0, Fraction(6, 10)),   # separated exactly by S = {R0}
            (3, 1, Fraction(3, 10)),   # separated exactly by S = {R0, R1}
        ),
        constant_loss=Fraction(0),
    )


class TestBuildNetwork:
    def test_i3_point_distribution(self, i3):
        poset = build_rotation_poset(i3)
        dist = point_dist(i3, I3_POINT)
        network = build_network(poset, analyze_domain(poset, i3, dist), dist)
        assert network.n_rotations == 2
        assert network.shift_edges == ((1, 0, Fraction(1)),)
        assert set(network.hasse_edges) == {(0, 1), (network.bottom, 0), (1, network.top)}
        assert network.constant_loss == 0

    def test_parallel_edges_merged(self, i3):
        poset = build_rotation_poset(i3)
        shifts = [s for s in enumerate_shift_domain(i3)]
        dist = ShiftDistribution(tuple((s, Fraction(1, len(shifts))) for s in shifts))
        network = build_network(poset, analyze_domain(poset, i3, dist), dist)
        endpoints = [(u, v) for u, v, _ in network.shift_edges]
        assert len(endpoints) == len(set(endpoints))

    def test_disjoint_goes_to_constant(self):
        from test_shift_analysis import UNIQUE

        poset = build_rotation_poset(UNIQUE)
        dist = point_dist(UNIQUE, "GIRL_LIST g1 b3 1")
        network = build_network(poset, analyze_domain(poset, UNIQUE, dist), dist)
        assert network.shift_edges == ()
        assert network.constant_loss == 1

    def test_mismatched_analyses_rejected(self, i3):
        poset = build_rotation_poset(i3)
        dist = point_dist(i3, I3_POINT)
        with pytest.raises(ValueError, match="analys"):
            build_network(poset, [], dist)

    def test_node_names(self, i3):
        poset = build_rotation_poset(i3)
        dist = point_dist(i3, I3_POINT)
        network = build_network(poset, analyze_domain(poset, i3, dist), dist)
        assert network.node_name(0) == "R0"
        assert network.node_name(network.bottom) == "S"
        assert network.node_name(network.top) == "T"


class TestSolve:
    def test_chain_bottleneck(self):
        network = chain_network()
        flow = solve(network)
        assert flow.flow_value == Fraction(1, 10)
        assert extract_closed_set(network, flow) == 0

    def test_empty_f_gives_zero_flow(self, i3):
        poset = build_rotation_poset(i3)
        dist = ShiftDistribution(())
        network = build_network(poset, [], dist)
        flow = solve(network)
        assert flow.flow_value == 0
        assert extract_closed_set(network, flow) == 0
        assert closed_set_to_matching(poset, 0) == M0_I3

    def test_unavoidable_edge(self):
        network = ClosureNetwork(
            n_rotations=0, hasse_edges=(), shift_edges=((1, 0, Fraction(3, 7)),),
            constant_loss=Fraction(0),
        )
        flow = solve(network)
        assert flow.flow_value == Fraction(3, 7)

    def test_flow_before_extraction_must_be_maximum(self):
        network = chain_network()
        flow = solve(network)
        flow.cap[:] = flow.original  # roll the residual back to an empty flow
        with pytest.raises(ValueError, match="not maximum"):
            extract_closed_set(network, flow)


class TestCertificate:
    def test_clean_on_solved_instances(self, i3):
        run = solve_pipeline(i3, ShiftDistribution.uniform(i3))
        assert certificate_violations(run.network, run.flow, run.closed_mask) == []

    def test_detects_suboptimal_cut(self, i3):
        run = solve_pipeline(i3, point_dist(i3, I3_POINT))
        # {R0} pays the full edge probability instead of the optimum 0
        violations = certificate_violations(run.network, run.flow, 0b01)
        assert violations


class TestPipeline:
    def test_i3_point_distribution_ties(self, i3):
        solution = solve_pipeline(i3, point_dist(i3, I3_POINT)).solution
        assert solution.objective == 0
        assert solution.matching in (M0_I3, MZ_I3)

    def test_i2_point_distribution(self, i2):
        solution = robust_matching(i2, point_dist(i2, "GIRL_LIST g1 b1 1"))
        assert solution.closed_set == ()
        assert solution.matching == M0_I2
        assert solution.objective == 0

    def test_i2_uniform_matches_oracle(self, i2):
        dist = ShiftDistribution.uniform(i2)
        solution = robust_matching(i2, dist)
        best, winners = oracle_argmin(i2, dist)
        assert solution.objective == best
        assert solution.matching in winners

    def test_constant_loss_included(self):
        from test_shift_analysis import UNIQUE

        solution = robust_matching(UNIQUE, point_dist(UNIQUE, "GIRL_LIST g1 b3 1"))
        assert solution.flow_value == 0
        assert solution.constant_loss == 1
        assert solution.objective == 1

    def test_single_agent_instance(self):
        inst = gen_random_instance(1, 0)
        solution = robust_matching(inst, ShiftDistribution(()))
        assert solution.matching == Matching([(0, 0)])
        assert solution.objective == 0

    def test_objective_equals_mask_accounting(self, i3):
        dist = ShiftDistribution.uniform(i3)
        run = solve_pipeline(i3, dist)
        assert run.solution.objective == objective_of_mask(run.analyses, dist, run.closed_mask)

    @given(random_instances(max_n=5), st.randoms(use_true_random=False))
    @settings(max_examples=30, deadline=None)
    def test_monotone_in_added_shifts(self, inst, rng):
        domain = enumerate_shift_domain(inst)
        if not domain:
            return
        chosen = [s for s in domain if rng.random() < 0.5]
        split = rng.randrange(len(chosen) + 1)
        total = 2 * len(domain)
        small = ShiftDistribution(
            tuple((s, Fraction(1, total)) for s in chosen[:split]), allow_partial=True
        )
        large = ShiftDistribution(
            tuple((s, Fraction(1, total)) for s in chosen), allow_partial=True
        )
        small_obj = solve_pipeline(inst, small).solution.objective
        large_obj = solve_pipeline(inst, large).solution.objective
        assert small_obj <= large_obj

    @given(random_instances(max_n=5))
    @settings(max_examples=40, deadline=None)
    def test_uniform_objective_matches_oracle(self, inst):
        dist = ShiftDistribution.uniform(inst)
        run = solve_pipeline(inst, dist)
        best, winners = oracle_argmin(inst, dist)
        assert run.solution.objective == best
        assert run.solution.matching in winners
        assert oracle_objective(inst, dist, run.solution.matching) == best


class TestDumps:
    def test_network_dump(self, i3):
        run = solve_pipeline(i3, point_dist(i3, I3_POINT))
        text = dump_network(run.network)
        assert "NODES R0 R1 S T" in text
        assert "SHIFT R1 -> R0 cap 1" in text
        assert "CONSTANT 0" in text

    def test_ip_dump(self, i3):
        run = solve_pipeline(i3, point_dist(i3, I3_POINT))
        text = dump_ip(run.network)
        assert text.startswith("min 1 x0")
        assert "x0 >= y_R1 - y_R0" in text
        assert "y_S = 0, y_T = 1" in text
