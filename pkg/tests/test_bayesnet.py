import itertools

import numpy as np
import pytest

from stagedtree import (
    DiscreteBN,
    bn_edge_labels,
    bn_to_staged_tree,
    classify_bn,
    distribution_from_labels,
    find_simple_ordering,
    is_decomposable,
    is_regular,
    is_simple,
)
from stagedtree.errors import OrderInconsistentWithDAG, StagedTreeError


def binary_bn(variables, edges, cpts=None):
    return DiscreteBN(tuple(variables), {v: 2 for v in variables}, tuple(edges), cpts)


COLLIDER = binary_bn("XYZ", [("X", "Z"), ("Y", "Z")])
CHAIN = binary_bn("XYZ", [("X", "Y"), ("Y", "Z")])
EMPTY3 = binary_bn("XYZ", [])


def stage_partition(tree):
    groups = {}
    for v in tree.inner:
        groups.setdefault(tree.stage_of[v], set()).add(v)
    return {frozenset(g) for g in groups.values()}


def all_dags(n):
    """Every DAG on n labeled nodes, as edge tuples."""
    nodes = [f"X{i}" for i in range(n)]
    pairs = list(itertools.combinations(nodes, 2))
    for choice in itertools.product((0, 1, 2), repeat=len(pairs)):
        edges = []
        for (a, b), c in zip(pairs, choice):
            if c == 1:
                edges.append((a, b))
            elif c == 2:
                edges.append((b, a))
        try:
            yield binary_bn(nodes, edges)
        except StagedTreeError:
            continue


def random_cpt_bn(rng, max_vars=4, max_card=3):
    m = int(rng.integers(2, max_vars + 1))
    variables = [f"X{i}" for i in range(m)]
    cards = {v: int(rng.integers(2, max_card + 1)) for v in variables}
    edges = [
        (variables[i], variables[j])
        for i in range(m)
        for j in range(i + 1, m)
        if rng.random() < 0.5
    ]
    bn = DiscreteBN(tuple(variables), cards, tuple(edges))
    cpts = {}
    for v in variables:
        n_rows = int(np.prod([cards[p] for p in bn.parents(v)])) if bn.parents(v) else 1
        cpts[v] = [list(rng.dirichlet([1.0] * cards[v])) for _ in range(n_rows)]
    return DiscreteBN(tuple(variables), cards, tuple(edges), cpts)


class TestUnfolding:
    def test_collider_reproduces_fig1a_staging(self, fig1a):
        tree = bn_to_staged_tree(COLLIDER, ("X", "Y", "Z"))
        assert tree.n == 8 and tree.k == 7
        # compare partitions through the vertex enumeration
        by_index = lambda t: {
            frozenset(t.index[v] for v in group) for group in stage_partition(t)
        }
        assert by_index(tree) == by_index(fig1a)

    def test_chain_stages_z_on_y_only(self):
        tree = bn_to_staged_tree(CHAIN, ("X", "Y", "Z"))
        part = stage_partition(tree)
        assert frozenset({"v_0.0", "v_1.0"}) in part
        assert frozenset({"v_0.1", "v_1.1"}) in part
        assert frozenset({"v_0"}) in part and frozenset({"v_1"}) in part

    def test_disconnected_pools_each_level(self):
        tree = bn_to_staged_tree(EMPTY3, ("X", "Y", "Z"))
        part = stage_partition(tree)
        assert frozenset({"v_0", "v_1"}) in part
        assert frozenset({"v_0.0", "v_0.1", "v_1.0", "v_1.1"}) in part

    def test_bad_order_rejected(self):
        with pytest.raises(OrderInconsistentWithDAG):
            bn_to_staged_tree(CHAIN, ("Z", "Y", "X"))

    def test_cyclic_graph_rejected(self):
        with pytest.raises(StagedTreeError):
            binary_bn("AB", [("A", "B"), ("B", "A")])


class TestDecomposable:
    def test_collider_not_decomposable(self):
        assert not is_decomposable(COLLIDER)

    def test_chain_decomposable(self):
        assert is_decomposable(CHAIN)

    def test_complete_dag_decomposable(self):
        bn = binary_bn("ABC", [("A", "B"), ("A", "C"), ("B", "C")])
        assert is_decomposable(bn)

    def test_four_cycle_skeleton_not_chordal(self):
        bn = binary_bn("ABCD", [("A", "B"), ("B", "C"), ("A", "D"), ("D", "C")])
        assert not is_decomposable(bn)


class TestSimpleOrdering:
    def test_chain_has_simple_ordering(self):
        assert find_simple_ordering(CHAIN) == ("X", "Y", "Z")

    def test_collider_has_none(self):
        assert find_simple_ordering(COLLIDER) is None

    def test_single_node(self):
        bn = binary_bn("A", [])
        assert find_simple_ordering(bn) == ("A",)

    def test_returned_order_is_topological(self, rng):
        for _ in range(30):
            bn = random_cpt_bn(rng)
            order = find_simple_ordering(bn)
            if order is None:
                continue
            pos = {v: i for i, v in enumerate(order)}
            assert all(pos[a] < pos[b] for a, b in bn.edges)


class TestClassify:
    def test_chain_certified_and_regular(self):
        report = classify_bn(CHAIN)
        assert report.regular_certified
        assert is_regular(bn_to_staged_tree(CHAIN))[0]

    def test_collider_not_certified_and_not_regular(self):
        report = classify_bn(COLLIDER)
        assert not report.regular_certified
        assert not is_regular(bn_to_staged_tree(COLLIDER))[0]

    def test_empty_bn_certified(self):
        report = classify_bn(EMPTY3)
        assert report.decomposable and report.regular_certified
        assert is_regular(bn_to_staged_tree(EMPTY3))[0]

    def test_corollary_sound_on_three_node_dags(self):
        for bn in all_dags(3):
            report = classify_bn(bn)
            if report.regular_certified:
                order = report.simple_ordering or bn.default_order()
                assert is_regular(bn_to_staged_tree(bn, order))[0]

    def test_simple_ordering_gives_simple_tree(self):
        for bn in all_dags(3):
            order = find_simple_ordering(bn)
            if order is not None:
                assert is_simple(bn_to_staged_tree(bn, order))


class TestJointEquality:
    def test_chain_fixture_joint(self):
        import json

        from conftest import data_path

        bn = DiscreteBN.from_json(data_path("chain_bn.json").read_text())
        tree = bn_to_staged_tree(bn)
        theta = bn_edge_labels(bn)
        dist = distribution_from_labels(tree, theta)
        order = bn.default_order()
        for atom, p in dist.items():
            assignment = {order[lvl]: j - 1 for lvl, (_, j) in enumerate(atom.steps)}
            assert p == pytest.approx(bn.joint_probability(assignment), abs=1e-12)

    def test_random_cpt_bns_match_factorization(self, rng):
        for _ in range(30):
            bn = random_cpt_bn(rng)
            order = bn.default_order()
            tree = bn_to_staged_tree(bn, order)
            assert tree.n <= 81
            theta = bn_edge_labels(bn, order)
            dist = distribution_from_labels(tree, theta)
            for atom in tree.atoms:
                assignment = {order[lvl]: j - 1 for lvl, (_, j) in enumerate(atom.steps)}
                assert dist[atom] == pytest.approx(
                    bn.joint_probability(assignment), abs=1e-12
                )

    def test_cpt_row_sum_validated(self):
        with pytest.raises(StagedTreeError):
            binary_bn("AB", [("A", "B")], cpts={"A": [[0.5, 0.6]], "B": [[0.5, 0.5]] * 2})
