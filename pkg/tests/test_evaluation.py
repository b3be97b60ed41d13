import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from phasemax.errors import DimensionMismatchError, ZeroSeriesError, ZeroVarianceError
from phasemax.evaluation import (
    MethodSpec,
    MonteCarloConfig,
    associate,
    cross_method_correlations,
    monte_carlo_rms,
    normalize_unit,
    pearson,
)
from phasemax.pca import pca_separate
from phasemax.separation import separate_maximum
from phasemax.signals import (
    MultichannelSignal,
    NoiseSpec,
    add_noise,
    disjoint_sources_spec,
    generate_sources,
)


class TestNormalizeUnit:
    def test_three_four_example(self):
        out = normalize_unit([3.0, 4.0, 0.0, 0.0])
        np.testing.assert_allclose(out, [0.6, 0.8, 0.0, 0.0], atol=1e-15)

    def test_unit_series_unchanged(self):
        x = np.array([0.6, 0.8])
        np.testing.assert_allclose(normalize_unit(x), x, atol=1e-12)

    def test_output_norm_is_one(self):
        rng = np.random.default_rng(71)
        out = normalize_unit(rng.normal(size=200))
        assert abs(float(out @ out) - 1.0) <= 1e-12

    def test_idempotent_and_sign_preserving(self):
        rng = np.random.default_rng(72)
        x = rng.normal(size=40)
        once = normalize_unit(x)
        np.testing.assert_allclose(normalize_unit(once), once, atol=1e-12)
        assert np.all(np.sign(once) == np.sign(x))

    def test_zero_series_raises(self):
        with pytest.raises(ZeroSeriesError):
            normalize_unit(np.zeros(5))


class TestPearson:
    def test_self_correlation_is_one(self):
        rng = np.random.default_rng(73)
        x = rng.normal(size=100)
        assert pearson(x, x) == pytest.approx(1.0, abs=1e-12)

    def test_negated_is_minus_one(self):
        rng = np.random.default_rng(74)
        x = rng.normal(size=100)
        assert pearson(x, -x) == pytest.approx(-1.0, abs=1e-12)

    def test_matches_covariance_oracle(self):
        rng = np.random.default_rng(75)
        x, y = rng.normal(size=(2, 60))
        xc, yc = x - x.mean(), y - y.mean()
        oracle = float((xc * yc).sum() / np.sqrt((xc**2).sum() * (yc**2).sum()))
        assert pearson(x, y) == pytest.approx(oracle, abs=1e-12)

    @given(st.floats(0.01, 100.0), st.floats(-50.0, 50.0))
    def test_invariant_under_positive_affine_maps(self, a, b):
        rng = np.random.default_rng(76)
        x, y = rng.normal(size=(2, 50))
        assert pearson(a * x + b, y) == pytest.approx(pearson(x, y), abs=1e-12)

    def test_zero_variance_raises(self):
        with pytest.raises(ZeroVarianceError):
            pearson(np.ones(10), np.arange(10.0))

    def test_length_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            pearson(np.ones(5), np.ones(6))


class TestAssociate:
    def test_identity_pairing(self):
        rng = np.random.default_rng(77)
        truth = MultichannelSignal(rng.normal(size=(3, 80)))
        report = associate(truth, truth)
        assert [(i, j) for i, j, _ in report.pairs] == [(0, 0), (1, 1), (2, 2)]
        for _, _, rho in report.pairs:
            assert rho == pytest.approx(1.0, abs=1e-12)

    def test_swapped_and_negated_channels(self):
        rng = np.random.default_rng(78)
        truth = MultichannelSignal(rng.normal(size=(2, 60)))
        estimates = MultichannelSignal(np.vstack([-truth.data[1], truth.data[0]]))
        report = associate(truth, estimates)
        assert [(i, j) for i, j, _ in report.pairs] == [(0, 1), (1, 0)]
        assert report.pairs[0][2] == pytest.approx(1.0, abs=1e-12)
        assert report.pairs[1][2] == pytest.approx(-1.0, abs=1e-12)

    def test_matches_exhaustive_bijection_oracle(self):
        # greedy matching against the best-total-|rho| bijection over all 3!
        # pairings; with estimates dominated by one source each, the two
        # agree exactly (verified for these frozen seeds before freezing)
        rng = np.random.default_rng(79)
        for _ in range(25):
            truth = MultichannelSignal(rng.normal(size=(3, 50)))
            mixing = np.eye(3) + 0.3 * rng.normal(size=(3, 3))
            estimates = MultichannelSignal(mixing @ truth.data)
            report = associate(truth, estimates)

            def total(perm, matrix=report.correlation_matrix):
                return sum(abs(matrix[i, p]) for i, p in enumerate(perm))

            best = max(itertools.permutations(range(3)), key=total)
            greedy_perm = tuple(j for _, j, _ in report.pairs)
            assert total(greedy_perm) == pytest.approx(total(best), abs=1e-12)

    def test_heavily_mixed_cases_stay_bijective_and_near_optimal(self, caplog):
        # greedy can fall short of the optimal assignment when every
        # estimate correlates with every source; it must still produce a
        # bijection, and disagreements are logged, not hidden
        import logging

        rng = np.random.default_rng(83)
        logger = logging.getLogger("tests.associate")
        with caplog.at_level(logging.INFO, logger="tests.associate"):
            for trial in range(25):
                truth = MultichannelSignal(rng.normal(size=(3, 50)))
                estimates = MultichannelSignal(
                    (rng.normal(size=(3, 3)) + 2 * np.eye(3)) @ truth.data
                )
                report = associate(truth, estimates)

                def total(perm, matrix=report.correlation_matrix):
                    return sum(abs(matrix[i, p]) for i, p in enumerate(perm))

                best = max(itertools.permutations(range(3)), key=total)
                greedy_perm = tuple(j for _, j, _ in report.pairs)
                assert sorted(greedy_perm) == [0, 1, 2]
                assert total(greedy_perm) <= total(best) + 1e-12
                if total(best) - total(greedy_perm) > 1e-12:
                    logger.info(
                        "trial %d: greedy %s (%.6f) vs optimal %s (%.6f)",
                        trial, greedy_perm, total(greedy_perm), best, total(best),
                    )

    def test_relabeling_invariance(self):
        rng = np.random.default_rng(80)
        truth = MultichannelSignal(rng.normal(size=(4, 70)))
        estimates = MultichannelSignal(rng.normal(size=(4, 70)) + 0.5 * truth.data)
        base = associate(truth, estimates)
        perm = [2, 0, 3, 1]
        shuffled = MultichannelSignal(estimates.data[perm])
        relabeled = associate(truth, shuffled)
        # pairs follow the relabeling, with the same correlation multiset
        base_map = {i: j for i, j, _ in base.pairs}
        new_map = {i: j for i, j, _ in relabeled.pairs}
        inverse = {old: new for new, old in enumerate(perm)}
        assert new_map == {i: inverse[j] for i, j in base_map.items()}
        assert sorted(round(r, 12) for *_, r in base.pairs) == sorted(
            round(r, 12) for *_, r in relabeled.pairs
        )

    def test_channel_count_mismatch(self):
        a = MultichannelSignal(np.random.default_rng(81).normal(size=(2, 30)))
        b = MultichannelSignal(np.random.default_rng(82).normal(size=(3, 30)))
        with pytest.raises(DimensionMismatchError):
            associate(a, b)


class TestCrossMethodCorrelations:
    def test_identical_results(self):
        sig = generate_sources(disjoint_sources_spec())
        res = separate_maximum(sig, whitening="gram_schmidt")
        report = cross_method_correlations(res, res)
        assert [(i, j) for i, j, _ in report.pairs] == [(0, 0), (1, 1)]
        for *_, rho in report.pairs:
            assert rho == pytest.approx(1.0, abs=1e-12)

    def test_sign_flips_give_plus_minus_one(self):
        sig = generate_sources(disjoint_sources_spec())
        res = separate_maximum(sig, whitening="gram_schmidt")
        flipped = pca_separate(sig)  # same sources, possibly flipped/permuted
        report = cross_method_correlations(res, flipped)
        for *_, rho in report.pairs:
            assert abs(rho) == pytest.approx(1.0, abs=1e-6)


def small_config(**overrides):
    base = dict(
        fixture=disjoint_sources_spec(),
        noise_sds=(0.001,),
        n_runs=5,
        base_seed=99,
        methods=(MethodSpec("maximum", whitening="gram_schmidt"), MethodSpec("pca")),
    )
    base.update(overrides)
    return MonteCarloConfig(**base)


class TestMonteCarloRms:
    def test_noiseless_whitened_maximum_is_exact(self):
        cfg = small_config(noise_sds=(0.0,), n_runs=3, methods=(MethodSpec("maximum", whitening="gram_schmidt"),))
        (report,) = monte_carlo_rms(cfg)
        assert report.rms.max() < 1e-6

    def test_single_run_equals_absolute_error(self):
        cfg = small_config(n_runs=1, methods=(MethodSpec("pca"),))
        (report,) = monte_carlo_rms(cfg)

        sources = generate_sources(cfg.fixture)
        truth = np.vstack([normalize_unit(ch) for ch in sources.data])
        noisy = add_noise(sources, NoiseSpec(0.001, cfg.base_seed))
        result = pca_separate(noisy)
        est = np.vstack([normalize_unit(e.series) for e in result.estimates])
        rep = associate(sources, MultichannelSignal(est))
        expected = np.empty_like(truth)
        for i, j, rho in rep.pairs:
            aligned = est[j] if rho >= 0 else -est[j]
            expected[i] = np.abs(aligned - truth[i])
        np.testing.assert_allclose(report.rms, expected, atol=1e-15)

    def test_bitwise_deterministic(self):
        a = monte_carlo_rms(small_config())
        b = monte_carlo_rms(small_config())
        for ra, rb in zip(a, b):
            assert ra.method == rb.method and ra.noise_sd == rb.noise_sd
            np.testing.assert_array_equal(ra.rms, rb.rms)

    def test_report_layout(self):
        reports = monte_carlo_rms(small_config(noise_sds=(0.001, 0.005)))
        assert len(reports) == 4  # 2 sds x 2 methods
        labels = {r.method for r in reports}
        assert labels == {"maximum-gramschmidt", "pca"}
        for r in reports:
            assert r.rms.shape == (2, 1000)
            assert np.all(r.rms >= 0)
