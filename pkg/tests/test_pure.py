import numpy as np
import pytest

from love.covariance import sample_covariance
from love.model import FactorModel, population_covariance, pure_set_of, sample_dataset, truth_diagnostics
from love.pure import candidate_set, estimate_pure_rows, find_pure_variables, pure_loading_matrix


def naive_candidates(sigma: np.ndarray, i: int, delta: float) -> list[int]:
    """Literal double-loop transcription of the candidate definition."""
    p = sigma.shape[0]
    row_max = max(abs(sigma[i, j]) for j in range(p) if j != i)
    return [
        l for l in range(p) if l != i and row_max <= abs(sigma[i, l]) + 2 * delta
    ]


def random_symmetric(p: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    m = rng.standard_normal((p, p))
    return 0.5 * (m + m.T)


class TestCandidateSet:
    @pytest.mark.parametrize("delta", [0.0, 0.05, 0.3])
    def test_matches_naive_enumeration(self, delta):
        for seed in range(5):
            sigma = random_symmetric(12, seed)
            for i in range(12):
                got = candidate_set(sigma, i, delta).tolist()
                assert got == naive_candidates(sigma, i, delta), (seed, i, delta)

    def test_two_variable_case(self):
        model = FactorModel(A=[[1.0], [1.0]], C=[[2.0]], Gamma=[1.0, 1.0])
        sigma = population_covariance(model)
        assert candidate_set(sigma, 0, 0.5).tolist() == [1]

    def test_toy_pure_row(self, toy_sigma):
        assert candidate_set(toy_sigma, 0, 0.01).tolist() == [1]

    def test_toy_mixed_row_has_two_argmaxes(self, toy_sigma):
        assert candidate_set(toy_sigma, 6, 0.01).tolist() == [2, 3]

    def test_never_empty(self):
        sigma = random_symmetric(8, 99)
        for i in range(8):
            assert candidate_set(sigma, i, 0.0).size >= 1


class TestFindPureVariables:
    def test_toy_population_recovery(self, toy_sigma):
        partition, scan = find_pure_variables(toy_sigma, 0.01)
        assert partition.k == 3
        assert [g.tolist() for g in partition.groups] == [[0, 1], [2, 3], [4, 5]]
        # the mixed rows are rejected with a recorded witness
        assert not scan.pure_flags[6] and not scan.pure_flags[7]
        assert scan.witness[6] in (2, 3)

    def test_design_population_recovery(self, design_model, design_sigma):
        partition, _ = find_pure_variables(design_sigma, 0.01)
        truth = pure_set_of(design_model.A)
        assert partition.k == 20
        got = sorted(tuple(g.tolist()) for g in partition.groups)
        expected = sorted(tuple(g.tolist()) for g in truth.groups)
        assert got == expected

    def test_single_factor_pair(self):
        model = FactorModel(A=[[1.0], [1.0]], C=[[1.5]], Gamma=[0.5, 0.5])
        partition, _ = find_pure_variables(population_covariance(model), 0.01)
        assert [g.tolist() for g in partition.groups] == [[0, 1]]

    def test_random_valid_models_recovered_exactly(self):
        # population-oracle exactness at small delta for generated models
        rng = np.random.default_rng(5)
        for trial in range(5):
            k = 3
            rows = [np.eye(k)[a] * s for a in range(k) for s in (1, -1)]
            for _ in range(4):
                support = rng.choice(k, size=2, replace=False)
                row = np.zeros(k)
                row[support] = rng.choice([-0.5, 0.5], size=2)
                rows.append(row)
            a = np.vstack(rows)
            c = np.eye(k) + 0.2 * (np.ones((k, k)) - np.eye(k))
            model = FactorModel(A=a, C=c, Gamma=rng.uniform(0.5, 2.0, len(rows)))
            partition, _ = find_pure_variables(population_covariance(model), 1e-6)
            truth = pure_set_of(model.A)
            got = sorted(tuple(g.tolist()) for g in partition.groups)
            assert got == sorted(tuple(g.tolist()) for g in truth.groups), trial

    def test_permutation_equivariance(self, toy_model):
        sigma = population_covariance(toy_model).values
        rng = np.random.default_rng(11)
        perm = rng.permutation(toy_model.p)
        permuted = sigma[np.ix_(perm, perm)]
        base, _ = find_pure_variables(sigma, 1e-3)
        moved, _ = find_pure_variables(permuted, 1e-3)
        relabel = {int(orig): new for new, orig in enumerate(perm)}
        expected = sorted(
            tuple(sorted(relabel[int(i)] for i in g)) for g in base.groups
        )
        got = sorted(tuple(sorted(g.tolist())) for g in moved.groups)
        assert got == expected

    def test_singleton_groups_are_dissolved(self):
        # candidate-set intersections shrink the only group to one member
        sigma = np.array(
            [
                [1.5, 0.30, 0.30, 0.85],
                [0.30, 1.5, 0.50, 0.45],
                [0.30, 0.50, 1.5, 1.00],
                [0.85, 0.45, 1.00, 1.5],
            ]
        )
        partition, scan = find_pure_variables(sigma, 0.1)
        assert partition.k == 0
        assert [g.tolist() for g in scan.dissolved] == [[3]]

    def test_rejects_negative_delta(self, toy_sigma):
        with pytest.raises(ValueError):
            find_pure_variables(toy_sigma, -0.1)

    def test_tie_at_exactly_two_delta_counts_as_pure(self):
        # row 0's only candidate is 1, whose own row maximum is 0.75, so the
        # purity gap is 0.25 exactly (all values binary-exact)
        sigma = np.array(
            [
                [1.0, 0.5, 0.0],
                [0.5, 1.0, 0.75],
                [0.0, 0.75, 1.0],
            ]
        )
        _, tie_scan = find_pure_variables(sigma, 0.125)  # gap == 2*delta
        assert tie_scan.pure_flags[0]
        _, tight_scan = find_pure_variables(sigma, 0.12)  # gap > 2*delta
        assert not tight_scan.pure_flags[0]
        assert tight_scan.witness[0] == 1

    def test_scan_record_is_one_based_json(self, toy_sigma):
        _, scan = find_pure_variables(toy_sigma, 0.01)
        record = scan.record()
        assert record["delta"] == 0.01
        verdicts = {entry["variable"]: entry for entry in record["verdicts"]}
        assert verdicts[1]["pure"] is True
        assert verdicts[7]["pure"] is False
        assert verdicts[7]["witness"] in (3, 4)

    def test_scan_candidates_contain_argmax_sets(self, toy_sigma):
        _, scan = find_pure_variables(toy_sigma, 0.05)
        s = np.abs(toy_sigma.values).copy()
        np.fill_diagonal(s, -np.inf)
        for i in range(8):
            assert set(scan.argmax_sets[i]) <= set(scan.candidates[i])
            assert scan.row_max[i] == s[i, scan.argmax_sets[i]].max()

    def test_noise_containment_on_sampled_runs(self, design_model):
        # with delta under the separation condition, each recovered group
        # should sit between the true group and its quasi-pure extension
        delta = 0.08
        diag = truth_diagnostics(design_model, delta, mu=0.05)
        truth = pure_set_of(design_model.A)
        hits = 0
        reps = 10
        for rep in range(reps):
            data = sample_dataset(design_model, 20_000, seed=1000 + rep)
            cov = sample_covariance(data, center=False)
            partition, _ = find_pure_variables(cov, delta)
            ok = partition.k == 20
            if ok:
                for g in partition.groups:
                    members = set(g.tolist())
                    matched = False
                    for a, tg in enumerate(truth.groups):
                        allowed = set(tg.tolist()) | set(diag.j1_by_factor[a].tolist())
                        if set(tg.tolist()) <= members <= allowed:
                            matched = True
                            break
                    if not matched:
                        ok = False
                        break
            hits += ok
        assert hits >= 9, f"containment held in only {hits}/{reps} replicates"


class TestEstimatePureRows:
    def test_toy_signs(self, toy_sigma):
        partition, _ = find_pure_variables(toy_sigma, 0.01)
        signed, warnings = estimate_pure_rows(toy_sigma, partition)
        assert warnings == []
        # anchor of {0, 1} gets +1; Sigma_01 = -tau flips the partner
        assert signed.signs[0] == 1 and signed.signs[1] == -1
        assert signed.signs[2] == 1 and signed.signs[3] == 1

    def test_all_positive_group_has_empty_negative_part(self, toy_sigma):
        partition, _ = find_pure_variables(toy_sigma, 0.01)
        signed, _ = estimate_pure_rows(toy_sigma, partition)
        pos, neg = signed.direction_split(1)
        assert pos.tolist() == [2, 3] and neg.size == 0

    def test_design_sign_split_counts(self, design_sigma):
        partition, _ = find_pure_variables(design_sigma, 0.01)
        signed, _ = estimate_pure_rows(design_sigma, partition)
        splits = sorted(
            (max(len(p), len(n)), min(len(p), len(n)))
            for p, n in (signed.direction_split(a) for a in range(signed.k))
        )
        # patterns (3,2), (4,1), (2,3), (1,4), (5,0) four times each, up to
        # the unidentifiable global sign of a group
        assert splits == sorted([(3, 2), (4, 1), (3, 2), (4, 1), (5, 0)] * 4)

    def test_triple_product_sign_consistency(self, design_sigma):
        partition, _ = find_pure_variables(design_sigma, 0.01)
        signed, _ = estimate_pure_rows(design_sigma, partition)
        s = design_sigma.values
        for a in range(signed.k):
            g = signed.groups[a]
            for i in range(len(g)):
                for j in range(i + 1, len(g)):
                    for k in range(j + 1, len(g)):
                        prod = (
                            np.sign(s[g[i], g[j]])
                            * np.sign(s[g[i], g[k]])
                            * np.sign(s[g[j], g[k]])
                        )
                        assert prod == 1.0

    def test_zero_covariance_defaults_positive_with_warning(self):
        sigma = np.array(
            [
                [1.0, 0.0, 0.9],
                [0.0, 1.0, 0.9],
                [0.9, 0.9, 1.0],
            ]
        )
        from love.model import PurePartition

        partition = PurePartition(groups=[np.array([0, 1])])
        signed, warnings = estimate_pure_rows(sigma, partition)
        assert signed.signs == {0: 1, 1: 1}
        assert warnings == [(0, 1)]

    def test_pure_loading_matrix_rows(self, toy_sigma):
        partition, _ = find_pure_variables(toy_sigma, 0.01)
        signed, _ = estimate_pure_rows(toy_sigma, partition)
        idx, rows = pure_loading_matrix(signed)
        assert idx.tolist() == [0, 1, 2, 3, 4, 5]
        assert np.abs(rows).sum(axis=1).tolist() == [1.0] * 6
        assert rows[1, 0] == -1.0
