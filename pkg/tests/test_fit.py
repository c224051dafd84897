import io
import math
from fractions import Fraction

import numpy as np
import pytest

from stagedtree import (
    AtomTable,
    ParameterVector,
    SearchConfig,
    bic,
    distribution_from_labels,
    ingest_csv,
    log_likelihood,
    mle,
    select_staging,
    star,
)
from stagedtree import StagedTree
from stagedtree.errors import RowDoesNotReachLeaf, UnknownCategory, ZeroStageTraffic
from stagedtree.random_trees import random_staged_tree
from conftest import data_path


def csv_table(text, tree, levels=None):
    return ingest_csv(io.StringIO(text), tree, levels)


class TestIngest:
    def test_path_rows_on_fig1a(self, fig1a):
        table = ingest_csv(str(data_path("xyz_rows.csv")), fig1a)
        assert table.n_obs == 4
        assert len(table.counts) == 8

    def test_row_maps_to_expected_atom(self, fig1a):
        table = csv_table("X,Y,Z\n0,0,0\n", fig1a)
        assert table.counts[0] == 1 and table.counts.sum() == 1

    def test_atom_id_format(self, fig1a):
        table = ingest_csv(str(data_path("atom_counts.csv")), fig1a)
        assert table.counts.tolist() == [5, 3, 2, 1, 4, 0, 6, 9]

    def test_unknown_category(self, fig1a):
        with pytest.raises(UnknownCategory):
            csv_table("X,Y,Z\n0,maybe,1\n", fig1a)

    def test_out_of_range_state(self, fig1a):
        with pytest.raises(UnknownCategory):
            csv_table("X,Y,Z\n0,2,1\n", fig1a)

    def test_named_levels(self, fig1a):
        table = csv_table(
            "X,Y,Z\nno,no,yes\n",
            fig1a,
            levels={"X": ["no", "yes"], "Y": ["no", "yes"], "Z": ["no", "yes"]},
        )
        assert table.counts[1] == 1

    def test_short_row_rejected(self, fig1a):
        with pytest.raises(RowDoesNotReachLeaf):
            csv_table("X,Y,Z\n0,0,\n", fig1a)

    def test_ragged_tree_rows(self):
        # left branch is a leaf at depth one, right branch goes deeper
        t = StagedTree({"r": ["a", "b"], "b": ["c", "d"]})
        table = csv_table("c0,c1\n0,\n1,0\n1,1\n1,1\n", t)
        assert table.counts.tolist() == [1, 1, 2]


class TestMLE:
    def test_star_boundary_estimate(self):
        t = star(4)
        theta = mle(t, AtomTable(t, [3, 1, 0, 0]))
        assert theta[(t.root, 1)] == pytest.approx(0.75)
        assert theta[(t.root, 3)] == 0.0
        assert theta.is_boundary()

    def test_fig1a_pooled_counts(self, fig1a):
        # v2 takes edge 1 on 3 of 4 visits, v3 on 1 of 4: pooled (3+1)/(4+4)
        rows = ["0,0,0"] * 3 + ["0,1,0"] + ["1,0,0"] + ["1,1,0"] * 3
        table = csv_table("X,Y,Z\n" + "\n".join(rows) + "\n", fig1a)
        theta = mle(fig1a, table, alpha=1.0)  # smoothing for unvisited Z stages
        pooled = (3 + 1 + 1.0) / (4 + 4 + 2.0)
        assert theta[("cyan", 1)] == pytest.approx(pooled)

    def test_uniform_counts_give_uniform_labels(self, fig1b):
        table = AtomTable(fig1b, [2] * 8)
        theta = mle(fig1b, table)
        assert all(p == pytest.approx(0.5) for p in theta.values())

    def test_zero_stage_traffic(self, fig1a):
        table = csv_table("X,Y,Z\n0,0,0\n", fig1a)  # v3 subtree never visited
        with pytest.raises(ZeroStageTraffic):
            mle(fig1a, table)

    def test_smoothing_avoids_boundary(self):
        t = star(4)
        theta = mle(t, AtomTable(t, [3, 1, 0, 0]), alpha=0.5)
        assert not theta.is_boundary()
        assert theta[(t.root, 1)] == pytest.approx(3.5 / 6)

    def test_brute_force_optimality(self, rng):
        for _ in range(5):
            t = random_staged_tree(rng, max_depth=2, max_children=3)
            if t.n > 12:
                continue
            counts = rng.multinomial(25, np.ones(t.n) / t.n)
            table = AtomTable(t, counts)
            theta_hat = mle(t, table, alpha=1e-9)
            best = log_likelihood(t, theta_hat, table)
            for _ in range(200):
                theta = ParameterVector.random(t, rng)
                assert best >= log_likelihood(t, theta, table) - 1e-9

    def test_saturated_fit_matches_empirical_rationally(self, rng):
        # independent oracle in exact rational arithmetic
        for _ in range(10):
            t = random_staged_tree(rng, max_depth=2, max_children=3, merge_prob=0.0)
            counts = [int(c) for c in rng.integers(1, 6, size=t.n)]
            n_obs = sum(counts)
            visit = {v: Fraction(0) for v in t.vertices}
            edge = {}
            for atom, c in zip(t.atoms, counts):
                for v, j in atom.steps:
                    visit[v] += c
                    edge[(v, j)] = edge.get((v, j), Fraction(0)) + c
            for atom, c in zip(t.atoms, counts):
                prob = Fraction(1)
                for v, j in atom.steps:
                    prob *= edge[(v, j)] / visit[v]
                assert prob == Fraction(c, n_obs)
            # float implementation agrees within rounding
            theta_hat = mle(t, AtomTable(t, counts))
            dist = distribution_from_labels(t, theta_hat)
            for atom, c in zip(t.atoms, counts):
                assert dist[atom] == pytest.approx(c / n_obs, abs=1e-12)


class TestLogLikelihood:
    def test_single_observation(self, example1):
        theta = ParameterVector.uniform(example1)
        table = AtomTable(example1, [1] + [0] * 7)
        assert log_likelihood(example1, theta, table) == pytest.approx(math.log(0.125))

    def test_empty_table_is_zero(self, example1):
        theta = ParameterVector.uniform(example1)
        assert log_likelihood(example1, theta, AtomTable(example1, [0] * 8)) == 0.0

    def test_saturated_mle_multinomial_identity(self, rng):
        t = star(6)
        counts = [4, 1, 2, 7, 3, 3]
        table = AtomTable(t, counts)
        theta = mle(t, table)
        expected = sum(c * math.log(c / 20) for c in counts)
        assert log_likelihood(t, theta, table) == pytest.approx(expected, rel=1e-12)


class TestBIC:
    def test_star_two_fixture(self):
        t = star(2)
        result = bic(t, AtomTable(t, [3, 1]))
        assert result.log_likelihood == pytest.approx(3 * math.log(0.75) + math.log(0.25))
        assert result.d == 1
        assert result.bic == pytest.approx(math.log(4) - 2 * result.log_likelihood)
        assert result.bic == pytest.approx(5.8850, abs=1e-3)

    def test_penalty_difference_fig1b(self, fig1b, example1):
        table = AtomTable(fig1b, [3, 1, 4, 1, 5, 9, 2, 6])
        staged = bic(fig1b, table)
        saturated = bic(example1, AtomTable(example1, table.counts))
        penalty_gap = (7 - 4) * math.log(table.n_obs)
        ll_gap = 2 * (saturated.log_likelihood - staged.log_likelihood)
        assert ll_gap >= -1e-12
        assert saturated.bic - staged.bic == pytest.approx(penalty_gap - ll_gap, abs=1e-10)

    def test_zero_count_table_errors(self, example1):
        with pytest.raises(ZeroStageTraffic):
            bic(example1, AtomTable(example1, [0] * 8))


class TestSelect:
    def test_max_merges_zero_returns_saturated(self, example1):
        table = AtomTable(example1, [3, 1, 4, 1, 5, 9, 2, 6])
        result = select_staging(example1, table, SearchConfig(max_merges=0))
        assert result.tree.is_saturated()
        assert result.trace == ()

    def test_uniform_data_merges_each_level(self, example1):
        table = AtomTable(example1, [5] * 8)
        result = select_staging(example1, table)
        part = {}
        for v in result.tree.inner:
            part.setdefault(result.tree.stage_of[v], set()).add(v)
        groups = {frozenset(g) for g in part.values()}
        assert groups == {
            frozenset({"v1"}),
            frozenset({"v2", "v3"}),
            frozenset({"v4", "v5", "v6", "v7"}),
        }

    def test_fig1b_data_beats_saturated(self, fig1b, rng):
        vals = {("v1", 1): 0.3, ("v1", 2): 0.7, ("cyan", 1): 0.6, ("cyan", 2): 0.4,
                ("red", 1): 0.2, ("red", 2): 0.8, ("green", 1): 0.55, ("green", 2): 0.45}
        dist = distribution_from_labels(fig1b, ParameterVector(vals))
        counts = rng.multinomial(10_000, [dist[x] for x in fig1b.atoms])
        table = AtomTable(fig1b, counts)
        result = select_staging(fig1b, table)
        saturated = bic(fig1b.saturated(), AtomTable(fig1b.saturated(), counts))
        assert result.fit.bic <= saturated.bic
        assert all(step.delta < 0 for step in result.trace)

    def test_trace_deltas_match_scores(self, example1, rng):
        counts = rng.multinomial(500, np.ones(8) / 8)
        table = AtomTable(example1, counts)
        result = select_staging(example1, table)
        for before, after in zip(result.trace, result.trace[1:]):
            assert after.bic_before == pytest.approx(before.bic_after)
        if result.trace:
            assert result.trace[-1].bic_after == pytest.approx(result.fit.bic)

    def test_deterministic(self, example1, rng):
        counts = rng.multinomial(300, np.ones(8) / 8)
        table = AtomTable(example1, counts)
        r1 = select_staging(example1, table)
        r2 = select_staging(example1, table)
        assert r1.tree.stage_of == r2.tree.stage_of
        assert r1.fit.bic == r2.fit.bic

    def test_cross_depth_merge_allowed_by_config(self, rng):
        # a three-level binary comb where depth restriction matters
        t = StagedTree({"r": ["a", "b"], "a": ["c", "d"], "c": ["e", "f"]})
        counts = rng.multinomial(200, np.ones(4) / 4)
        table = AtomTable(t, counts)
        free = select_staging(t, table, SearchConfig(same_depth=False))
        constrained = select_staging(t, table, SearchConfig(same_depth=True))
        assert free.fit.bic <= constrained.fit.bic + 1e-9
