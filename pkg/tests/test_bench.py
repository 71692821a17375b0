import pytest

from imdet.bench import BenchResult, run_bench


class TestValidation:
    def test_too_few_counts(self):
        with pytest.raises(ValueError):
            run_bench([25, 50, 100], 200)

    def test_narrow_span(self):
        with pytest.raises(ValueError):
            run_bench([25, 30, 40, 50], 200)

    def test_too_few_repetitions(self):
        with pytest.raises(ValueError):
            run_bench([25, 50, 100, 200], 0)
        with pytest.raises(ValueError):
            run_bench([25, 50, 100, 200], 99)

    def test_result_shape_enforced(self):
        with pytest.raises(ValueError):
            BenchResult([25, 50, 100, 200], [1.0, 2.0], [0.1, 0.1],
                        fit_slope_ns_per_prb=1.0, fit_r2=0.99)
        with pytest.raises(ValueError):
            BenchResult([25, 50, 100, 200], [1.0, 2.0, 3.0, -4.0],
                        [0.1] * 4, fit_slope_ns_per_prb=1.0, fit_r2=0.99)


class TestSmokeRun:
    def test_small_run_is_well_formed(self):
        result = run_bench([25, 50, 100, 200], 150, seed=1)
        assert result.n_prb_values == [25, 50, 100, 200]
        assert all(v > 0 for v in result.mean_runtime_ns)
        assert result.normalized_runtime[0] == 1.0
        # The timed body does real work: the no-op baseline must be a
        # small fraction of the measured mean.
        for mean, base in zip(result.mean_runtime_ns, result.baseline_ns):
            assert 0 < base < 0.25 * mean

    def test_duplicate_counts_collapse(self):
        result = run_bench([25, 25, 50, 100, 200], 150, seed=1)
        assert result.n_prb_values == [25, 50, 100, 200]
