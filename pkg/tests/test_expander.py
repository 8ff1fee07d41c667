import numpy as np
import pytest

from expandersketch import (
    EnumerationLimitError,
    PlainSparseModel,
    SparseBinaryMatrix,
    TreeModel,
    enumerate_supports,
    generate_random_matrix,
    group_expander_params,
    raney_tree_count,
    tree_expander_params,
    unique_neighbor_check,
    verify_model_expansion,
)


def disjoint_matrix(n=2, d=2):
    """Every left node owns its own d check nodes: a perfect expander."""
    cols = np.arange(n * d).reshape(n, d)
    return SparseBinaryMatrix(n_left=n, n_right=n * d, degree=d, columns=cols)


OVERLAP = SparseBinaryMatrix(n_left=2, n_right=3, degree=2, columns=[[0, 1], [1, 2]])


class TestConstruction:
    def test_seeded_generation_is_deterministic(self):
        a = generate_random_matrix(3, 6, 2, seed=123)
        b = generate_random_matrix(3, 6, 2, seed=123)
        assert np.array_equal(a.columns, b.columns)

    def test_different_seeds_differ(self):
        a = generate_random_matrix(50, 20, 3, seed=1)
        b = generate_random_matrix(50, 20, 3, seed=2)
        assert not np.array_equal(a.columns, b.columns)

    def test_every_column_has_degree_entries(self):
        a = generate_random_matrix(11, 5, 4, seed=0)
        assert a.columns.shape == (11, 4)
        assert a.columns.min() >= 0 and a.columns.max() < 5

    def test_duplicates_allowed_by_default(self):
        a = generate_random_matrix(200, 2, 5, seed=0)
        assert any(len(set(col)) < 5 for col in a.columns.tolist())

    def test_no_duplicates_mode(self):
        a = generate_random_matrix(50, 6, 6, seed=0, allow_duplicates=False)
        assert all(len(set(col)) == 6 for col in a.columns.tolist())
        with pytest.raises(ValueError):
            generate_random_matrix(3, 4, 5, seed=0, allow_duplicates=False)

    def test_edge_distribution_is_roughly_uniform(self):
        # 10,000 edges over 10 check nodes: each should see 1000 +- 100.
        a = generate_random_matrix(1000, 10, 10, seed=7)
        counts = np.bincount(a.columns.ravel(), minlength=10)
        assert counts.sum() == 10_000
        assert counts.min() >= 900 and counts.max() <= 1100

    def test_rejects_bad_shapes_and_ranges(self):
        with pytest.raises(ValueError):
            SparseBinaryMatrix(n_left=2, n_right=3, degree=2, columns=[[0, 1]])
        with pytest.raises(ValueError):
            SparseBinaryMatrix(n_left=1, n_right=3, degree=2, columns=[[0, 3]])

    def test_columns_are_immutable(self):
        a = generate_random_matrix(3, 6, 2, seed=0)
        with pytest.raises(ValueError):
            a.columns[0, 0] = 1


class TestApply:
    def test_zero_maps_to_zero(self):
        assert np.all(disjoint_matrix().apply([0.0, 0.0]) == 0.0)

    def test_disjoint_neighborhoods(self):
        y = disjoint_matrix().apply([1.0, -2.0])
        assert np.array_equal(y, [1.0, 1.0, -2.0, -2.0])

    def test_duplicate_edge_counts_multiplicity(self):
        a = SparseBinaryMatrix(n_left=1, n_right=2, degree=3, columns=[[0, 0, 1]])
        assert np.array_equal(a.apply([1.0]), [2.0, 1.0])

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            disjoint_matrix().apply([1.0, 2.0, 3.0])

    def test_basis_vectors_have_l1_norm_d(self):
        a = generate_random_matrix(40, 9, 5, seed=3)
        for i in range(40):
            e = np.zeros(40)
            e[i] = 1.0
            assert np.abs(a.apply(e)).sum() == 5.0

    def test_rip1_upper_bound_on_random_inputs(self):
        a = generate_random_matrix(60, 25, 4, seed=5)
        rng = np.random.default_rng(0)
        for _ in range(50):
            x = rng.standard_normal(60)
            assert np.abs(a.apply(x)).sum() <= 4 * np.abs(x).sum() + 1e-9


class TestNeighbors:
    def test_disjoint_no_collisions(self):
        counts = disjoint_matrix().neighbors({0, 1})
        assert counts == (4, 4, 0)

    def test_overlap_collision(self):
        counts = OVERLAP.neighbors({0, 1})
        assert counts.gamma == 3 and counts.unique == 2 and counts.collisions == 1

    def test_empty_set(self):
        assert OVERLAP.neighbors([]) == (0, 0, 0)

    def test_gamma_splits_into_unique_and_collided(self):
        a = generate_random_matrix(30, 12, 3, seed=11)
        rng = np.random.default_rng(1)
        for _ in range(30):
            s = rng.choice(30, size=rng.integers(1, 6), replace=False)
            c = a.neighbors(s)
            assert c.gamma == c.unique + c.collisions

    def test_out_of_range_index(self):
        with pytest.raises(ValueError):
            OVERLAP.neighbors([5])


class TestVerification:
    def test_disjoint_matrix_has_zero_epsilon(self):
        rep = verify_model_expansion(disjoint_matrix(), PlainSparseModel(2, 2))
        assert rep.epsilon == 0.0
        assert rep.exhaustive

    def test_overlap_epsilon_quarter(self):
        rep = verify_model_expansion(OVERLAP, PlainSparseModel(2, 2))
        assert rep.epsilon == 0.25
        assert rep.worst_set == frozenset({0, 1})

    def test_epsilon_nondecreasing_in_budget(self):
        a = generate_random_matrix(10, 8, 3, seed=2)
        eps = [
            verify_model_expansion(a, PlainSparseModel(10, k)).epsilon
            for k in (1, 2, 3)
        ]
        assert eps[0] <= eps[1] <= eps[2]

    def test_epsilon_in_unit_interval(self):
        a = generate_random_matrix(8, 6, 3, seed=9)
        rep = verify_model_expansion(a, PlainSparseModel(8, 2))
        assert 0.0 <= rep.epsilon < 1.0

    def test_tree_model_verification(self):
        tree = TreeModel.complete(7, 2, 3)
        a = generate_random_matrix(7, 30, 4, seed=4)
        rep = verify_model_expansion(a, tree)
        assert rep.budget == 3
        assert 0.0 <= rep.epsilon < 1.0
        # delta from sign probes can never exceed the worst-case bound of 1
        assert 0.0 <= rep.delta < 1.0

    def test_enumeration_cap(self):
        a = generate_random_matrix(30, 10, 2, seed=0)
        with pytest.raises(EnumerationLimitError):
            verify_model_expansion(a, PlainSparseModel(30, 6), max_sets=100)

    def test_sampled_mode_is_lower_bound(self):
        a = generate_random_matrix(12, 8, 3, seed=21)
        model = PlainSparseModel(12, 3)
        full = verify_model_expansion(a, model)
        sampled = verify_model_expansion(a, model, samples=40, seed=5)
        assert not sampled.exhaustive
        assert sampled.epsilon <= full.epsilon + 1e-12

    def test_verification_is_deterministic(self):
        a = generate_random_matrix(9, 7, 3, seed=13)
        r1 = verify_model_expansion(a, PlainSparseModel(9, 2), seed=3)
        r2 = verify_model_expansion(a, PlainSparseModel(9, 2), seed=3)
        assert r1 == r2


class TestUniqueNeighborBound:
    def test_disjoint_equality(self):
        a = disjoint_matrix()
        assert unique_neighbor_check(a, [0, 1], 0.0)
        assert a.neighbors([0, 1]).unique == 2 * 2

    def test_overlap_boundary_case(self):
        # |Gamma'| = 2 and (1 - 2 * 0.25) * 2 * 2 = 2: holds with equality.
        assert unique_neighbor_check(OVERLAP, [0, 1], 0.25)

    def test_empty_set_vacuous(self):
        assert unique_neighbor_check(OVERLAP, [], 0.3)

    def test_holds_for_all_member_sets_with_verified_epsilon(self):
        rng = np.random.default_rng(17)
        for _ in range(20):
            a = generate_random_matrix(9, 25, 4, seed=int(rng.integers(2**32)))
            model = PlainSparseModel(9, 3)
            rep = verify_model_expansion(a, model)
            from expandersketch import enumerate_member_sets

            for s in enumerate_member_sets(model):
                assert unique_neighbor_check(a, s, rep.epsilon)
                counts = a.neighbors(s)
                # collision count bound from the same argument
                assert counts.collisions <= rep.epsilon * 4 * len(s) + 1e-9


class TestParameterFormulas:
    def test_tree_recipe_value(self):
        d, m = tree_expander_params(8192, 26, epsilon=1.0, c_d=2.5)
        assert d == 8
        assert m == d * 26

    def test_tree_monotone_in_k(self):
        ds = [tree_expander_params(4096, k)[0] for k in (8, 16, 32, 64)]
        assert ds == sorted(ds, reverse=True)

    def test_tree_m_at_least_d(self):
        d, m = tree_expander_params(100, 2, epsilon=1.0, c_m=0.0001)
        assert m >= d

    def test_tree_domain_error(self):
        with pytest.raises(ValueError):
            tree_expander_params(10, 5)  # n/k = 2 < e

    def test_group_recipe_value(self):
        d, m = group_expander_params(1024, 5, 10, epsilon=1.0, c_d=2.0)
        assert d == 3
        assert m == d * 50

    def test_group_domain_error(self):
        with pytest.raises(ValueError):
            group_expander_params(50, 5, 10)  # n <= k * g_max

    def test_group_monotone_in_gmax(self):
        ds = [group_expander_params(4096, 4, g)[0] for g in (4, 8, 16, 32)]
        assert ds == sorted(ds, reverse=True)


class TestRaneyNumbers:
    @pytest.mark.parametrize(
        "arity,k,expected",
        [(2, 1, 1), (2, 2, 2), (2, 3, 5), (2, 4, 14), (3, 1, 1), (3, 2, 3)],
    )
    def test_known_values(self, arity, k, expected):
        assert raney_tree_count(arity, k) == expected

    def test_enumeration_cross_check(self):
        for arity in (2, 3):
            for k in range(1, 7):
                n = (arity ** k - 1) // (arity - 1)  # k full levels
                tree = TreeModel.complete(n, arity, k)
                count = sum(
                    1 for s in enumerate_supports(tree, max_sets=None) if len(s) == k
                )
                assert count == raney_tree_count(arity, k)

    def test_large_values_exact(self):
        # far past float precision; must be exact integer arithmetic
        assert raney_tree_count(2, 60) > 10 ** 30
        assert raney_tree_count(4, 30) == (
            __import__("math").comb(120, 30) // (3 * 30 + 1)
        )
