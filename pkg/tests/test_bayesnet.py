import itertools
import math

import numpy as np
import pytest

from credaltrace.bayesnet import (
    BayesNet,
    count_tables,
    dirichlet_estimate,
    forward_sample,
    log_joint,
    log_likelihood,
    mle,
    random_parameters,
    subsample,
)
from credaltrace.graph import Dag, random_dag


def all_assignments(g):
    return np.array(list(itertools.product(*(range(c) for c in g.cardinalities))))


class TestParameters:
    def test_single_orphan(self):
        bn = random_parameters(Dag((2,), (), (0,)), seed=3)
        (row,) = bn.cpts[0]
        assert 0 <= row[1] <= 1 and row.sum() == pytest.approx(1.0, abs=1e-15)

    def test_seeded(self):
        g = random_dag(8, 2, 2, seed=1)
        a, b = random_parameters(g, seed=4), random_parameters(g, seed=4)
        assert a.allclose(b, atol=0)

    def test_chain_row_count(self):
        g = Dag.from_edges((2, 2, 2), [(0, 1), (1, 2)])
        assert sum(t.shape[0] for t in random_parameters(g, seed=0).cpts) == 5

    def test_rejects_bad_rows(self):
        g = Dag((2,), (), (0,))
        with pytest.raises(ValueError):
            BayesNet(g, (np.array([[0.5, 0.6]]),))
        with pytest.raises(ValueError):
            BayesNet(g, (np.array([[0.5, 0.5], [0.5, 0.5]]),))


class TestLogJoint:
    def test_uniform(self):
        g = random_dag(6, 1, 2, seed=2)
        bn = BayesNet(g, tuple(np.full((g.n_configs(x), 2), 0.5) for x in range(6)))
        assert log_joint(bn, [0, 1, 0, 1, 1, 0]) == pytest.approx(6 * math.log(0.5))

    def test_hand_chain(self, chain2):
        assert log_joint(chain2, [1, 1]) == pytest.approx(math.log(0.24), abs=1e-14)
        assert log_joint(chain2, [0, 0]) == pytest.approx(math.log(0.7 * 0.4), abs=1e-14)

    def test_unit_factor(self):
        g = Dag((2,), (), (0,))
        bn = BayesNet(g, (np.array([[0.0, 1.0]]),))
        assert log_joint(bn, [1]) == 0.0

    def test_floor(self):
        g = Dag((2,), (), (0,))
        bn = BayesNet(g, (np.array([[0.0, 1.0]]),))
        assert log_joint(bn, [0]) == pytest.approx(math.log(1e-12))
        assert bn.cpts[0][0, 0] == 0.0

    def test_incomplete(self, chain2):
        with pytest.raises(ValueError):
            log_joint(chain2, [1])
        with pytest.raises(ValueError):
            log_joint(chain2, [1, 2])

    @pytest.mark.parametrize("m,e,seed", [(4, 1, 0), (8, 2, 1), (12, 1, 2), (12, 3, 3)])
    def test_normalisation(self, m, e, seed):
        bn = random_parameters(random_dag(m, e, 2, seed=seed), seed=seed)
        total = np.exp(log_joint(bn, all_assignments(bn.dag))).sum()
        assert total == pytest.approx(1.0, abs=1e-9)

    def test_normalisation_nonbinary(self):
        g = Dag.from_edges((3, 2, 4), [(0, 2), (1, 2), (0, 1)])
        bn = random_parameters(g, seed=7)
        assert np.exp(log_joint(bn, all_assignments(g))).sum() == pytest.approx(1.0, abs=1e-12)


class TestSampling:
    def test_degenerate(self):
        g = Dag.from_edges((2, 2, 2), [(0, 1), (1, 2)])
        bn = BayesNet(g, (np.array([[0.0, 1.0]]), np.array([[1.0, 0.0], [1.0, 0.0]]),
                          np.array([[0.0, 1.0], [0.0, 1.0]])))
        data = forward_sample(bn, 500, seed=1)
        assert np.all(data == [1, 0, 1])

    def test_frequencies_match_joint(self, chain2):
        n = 100_000
        data = forward_sample(chain2, n, seed=11)
        for x in all_assignments(chain2.dag):
            p = math.exp(log_joint(chain2, x))
            freq = np.mean(np.all(data == x, axis=1))
            assert abs(freq - p) <= 3 * math.sqrt(p * (1 - p) / n)

    def test_mle_recovers_cpts(self):
        g = random_dag(6, 1, 2, seed=4)
        bn = random_parameters(g, seed=4)
        n = 100_000
        data = forward_sample(bn, n, seed=5)
        counts = count_tables(g, data)
        est = mle(g, data)
        for t, e, c in zip(bn.cpts, est.cpts, counts):
            nj = c.sum(axis=1, keepdims=True)
            se = np.sqrt(t * (1 - t) / np.maximum(nj, 1))
            assert np.all(np.abs(t - e) <= 3 * se + 1e-12)

    def test_subsample(self):
        pop = np.arange(40).reshape(20, 2) % 2
        full, idx = subsample(pop, 20, seed=0, return_index=True)
        assert sorted(idx) == list(range(20))
        assert len(set(subsample(np.arange(10)[:, None], 7, seed=3).ravel())) == 7
        with pytest.raises(ValueError):
            subsample(pop, 21, seed=0)
        with pytest.raises(ValueError):
            subsample(pop, 0, seed=0)


class TestLearning:
    def test_relative_frequency(self):
        bn = mle(Dag((2,), (), (0,)), [[1], [1], [1], [0]])
        np.testing.assert_array_equal(bn.cpts[0], [[0.25, 0.75]])

    def test_unseen_configuration_uniform(self):
        g = Dag((2, 2), ((0, 1),), (0, 1))
        bn = mle(g, [[0, 1], [0, 0], [0, 1]])
        np.testing.assert_array_equal(bn.cpts[1][1], [0.5, 0.5])

    def test_hand_tally(self):
        g = Dag((2, 2), ((0, 1),), (0, 1))
        data = [[0, 0], [0, 1], [0, 1], [1, 1], [1, 1], [1, 1], [1, 0], [0, 1]]
        bn = mle(g, data)
        np.testing.assert_allclose(bn.cpts[0], [[4 / 8, 4 / 8]], rtol=0, atol=0)
        np.testing.assert_allclose(bn.cpts[1], [[1 / 4, 3 / 4], [1 / 4, 3 / 4]], rtol=0, atol=0)

    def test_schema_mismatch(self):
        with pytest.raises(ValueError):
            mle(Dag((2, 2), (), (0, 1)), [[0, 1, 0]])

    def test_mle_is_local_maximum(self):
        g = random_dag(5, 1, 2, seed=8)
        data = forward_sample(random_parameters(g, seed=8), 300, seed=9)
        est = mle(g, data)
        counts = count_tables(g, data)
        base = log_likelihood(est, counts)
        assert base == pytest.approx(log_joint(est, data).sum(), rel=1e-12)
        for x in range(g.n_vars):
            for j in range(g.n_configs(x)):
                for delta in (1e-3, -1e-3):
                    cpts = [t.copy() for t in est.cpts]
                    row = cpts[x][j]
                    row[1] = min(max(row[1] + delta, 0.0), 1.0)
                    row[0] = 1.0 - row[1]
                    assert log_likelihood(BayesNet(g, tuple(cpts)), counts) <= base + 1e-12

    def test_dirichlet_substitution(self):
        g = Dag((2,), (), (0,))
        data = [[0]] * 3 + [[1]] * 7
        np.testing.assert_allclose(dirichlet_estimate(g, data, [1, 1]).cpts[0], [[4 / 12, 8 / 12]])
        np.testing.assert_allclose(dirichlet_estimate(g, data, 2.0).cpts[0], [[4 / 12, 8 / 12]])

    def test_dirichlet_empty_data_returns_prior(self):
        g = Dag((3,), (), (0,))
        est = dirichlet_estimate(g, np.zeros((0, 1), dtype=int), [1, 2, 3])
        np.testing.assert_allclose(est.cpts[0], [[1 / 6, 2 / 6, 3 / 6]])

    def test_dirichlet_small_prior_limit(self):
        g = random_dag(5, 1, 2, seed=3)
        data = forward_sample(random_parameters(g, seed=3), 200, seed=3)
        a, b = dirichlet_estimate(g, data, 1e-6), mle(g, data)
        counts = count_tables(g, data)
        for ta, tb, c in zip(a.cpts, b.cpts, counts):
            seen = c.sum(axis=1) > 0
            np.testing.assert_allclose(ta[seen], tb[seen], atol=1e-4)

    def test_dirichlet_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            dirichlet_estimate(Dag((2,), (), (0,)), [[0]], [1, 0])
