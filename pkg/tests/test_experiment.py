import math
import random
from pathlib import Path

import pytest

from moddenoise import (
    Experiment,
    ExperimentConfig,
    FunctionSpec,
    GammaRule,
    ModDenoiseNumericalError,
    ModDenoiseParameterError,
    ModDenoiseTrialError,
    ModDenoiseValidationError,
    SolverMethod,
    linear_gamma_sweep_config,
    log_sigma_grid,
    run_trial,
    sqrt_gamma_sweep_config,
    sweep_sigma,
    sweep_sigma_async,
    verify_event_bound,
    verify_identity,
)
from moddenoise.experiment import aggregate, resolve_max_workers
from moddenoise.models import EventParams
from moddenoise.types import CAPTION_SIGMA_RANGE, LOW_SIGMA_RANGE, THREADS_ENV_VAR


def _small_config(**changes):
    values = dict(
        n=40,
        function=FunctionSpec(kind="f2"),
        sigma_grid=[0.01, 0.05],
        trials=3,
        gamma_rule=GammaRule(kind="path-lipschitz"),
        base_seed=7,
    )
    values.update(changes)
    return ExperimentConfig(**values)


class TestLogSigmaGrid:
    def test_main_range(self):
        grid = log_sigma_grid(*CAPTION_SIGMA_RANGE)
        assert len(grid) == 25
        assert grid[0] == 1e-3
        assert grid[-1] == 0.096

    def test_low_range(self):
        grid = log_sigma_grid(*LOW_SIGMA_RANGE)
        assert len(grid) == 13
        assert grid[0] == 1e-4
        assert grid[-1] == 1e-3

    def test_increasing(self):
        grid = log_sigma_grid(1e-3, 0.1)
        assert all(a < b for a, b in zip(grid, grid[1:]))

    def test_single_point(self):
        assert log_sigma_grid(0.01, 0.01) == [0.01]

    def test_invalid_endpoints(self):
        with pytest.raises(ModDenoiseValidationError) as exc_info:
            log_sigma_grid(0.0, 0.1)
        assert "0 < lo <= hi" in str(exc_info.value)
        with pytest.raises(ModDenoiseValidationError):
            log_sigma_grid(0.1, 0.01)


class TestResolveMaxWorkers:
    def test_explicit(self, monkeypatch):
        monkeypatch.setenv(THREADS_ENV_VAR, "3")
        assert resolve_max_workers(5) == 5

    def test_environment(self, monkeypatch):
        monkeypatch.setenv(THREADS_ENV_VAR, "3")
        assert resolve_max_workers() == 3

    def test_invalid_environment(self, monkeypatch, caplog):
        monkeypatch.setenv(THREADS_ENV_VAR, "many")
        assert resolve_max_workers() >= 1
        assert "not an integer" in caplog.text

    def test_non_positive_environment(self, monkeypatch, caplog):
        monkeypatch.setenv(THREADS_ENV_VAR, "0")
        assert resolve_max_workers() >= 1
        assert "must be >= 1" in caplog.text


class TestExperimentConfig:
    def test_grid_dict_expands(self):
        cfg = _small_config(sigma_grid={"start": 0.001, "stop": 0.096, "per_decade": 12})
        assert len(cfg.sigma_grid) == 25

    def test_input_is_not_a_method(self):
        with pytest.raises(ValueError) as exc_info:
            _small_config(methods=["ucqp", "input"])
        assert "'input' is always recorded" in str(exc_info.value)

    def test_unsorted_grid(self):
        with pytest.raises(ValueError) as exc_info:
            _small_config(sigma_grid=[0.05, 0.01])
        assert "sorted" in str(exc_info.value)

    def test_non_positive_grid(self):
        with pytest.raises(ValueError) as exc_info:
            _small_config(sigma_grid=[0.0, 0.01])
        assert "positive" in str(exc_info.value)

    def test_custom_function_rejected(self):
        with pytest.raises(ValueError) as exc_info:
            _small_config(function=FunctionSpec(kind="custom", lipschitz_M=1.0))
        assert "built-in function" in str(exc_info.value)

    def test_bundled_configs(self):
        sqrt_cfg = sqrt_gamma_sweep_config("f1")
        assert sqrt_cfg.n == 500
        assert len(sqrt_cfg.sigma_grid) == 25
        assert sqrt_cfg.trials == 30
        linear_cfg = linear_gamma_sweep_config("f2")
        assert len(linear_cfg.sigma_grid) == 13
        assert linear_cfg.gamma_rule.constant == 400.0

    def test_json_round_trip(self):
        cfg = _small_config()
        assert ExperimentConfig.model_validate_json(cfg.model_dump_json()) == cfg

    @pytest.mark.parametrize(
        "name, factory, kind",
        [
            ("sqrt_gamma_f1.json", sqrt_gamma_sweep_config, "f1"),
            ("sqrt_gamma_f2.json", sqrt_gamma_sweep_config, "f2"),
            ("linear_gamma_f1.json", linear_gamma_sweep_config, "f1"),
            ("linear_gamma_f2.json", linear_gamma_sweep_config, "f2"),
        ],
    )
    def test_config_files_match_factories(self, name, factory, kind):
        path = Path(__file__).resolve().parents[1] / "configs" / name
        assert ExperimentConfig.model_validate_json(path.read_text()) == factory(kind)


class TestRunTrial:
    def test_deterministic(self):
        cfg = _small_config()
        first = run_trial(cfg, 0.05, trial_index=3, sigma_index=1)
        assert first == run_trial(cfg, 0.05, trial_index=3, sigma_index=1)

    def test_streams_do_not_collide(self):
        cfg = _small_config()
        a = run_trial(cfg, 0.05, trial_index=1, sigma_index=0)
        b = run_trial(cfg, 0.05, trial_index=0, sigma_index=1)
        assert a.mse[SolverMethod.INPUT] != b.mse[SolverMethod.INPUT]

    def test_zero_sigma(self):
        record = run_trial(_small_config(), 0.0, trial_index=0)
        assert record.mse[SolverMethod.INPUT] == 0.0
        assert record.gamma == 0.0

    def test_records_every_method(self):
        record = run_trial(_small_config(), 0.05, trial_index=0)
        assert set(record.mse) == {SolverMethod.INPUT, SolverMethod.UCQP, SolverMethod.TRS}
        assert 0 < record.mu_star <= 2

    def test_linear_gamma(self):
        cfg = _small_config(gamma_rule=GammaRule(kind="linear", constant=400.0))
        assert Experiment(cfg).gamma(0.01) == pytest.approx(4.0)

    def test_solver_failure_carries_trial_context(self, monkeypatch):
        def failing(*args, **kwargs):
            raise ModDenoiseNumericalError("secular root failed")

        monkeypatch.setattr("moddenoise.experiment.estimate", failing)
        with pytest.raises(ModDenoiseTrialError) as exc_info:
            run_trial(_small_config(), 0.05, trial_index=7, sigma_index=2)
        error = exc_info.value
        assert error.sigma == 0.05
        assert error.trial_index == 7
        assert error.partial == []
        assert isinstance(error.__cause__, ModDenoiseNumericalError)
        assert "trial 7 at sigma=0.05 failed" in str(error)


class TestSweep:
    def test_rows(self):
        cfg = _small_config()
        result = sweep_sigma(cfg)
        assert len(result.rows) == 2 * 3
        assert [row.method for row in result.rows[:3]] == [
            SolverMethod.INPUT,
            SolverMethod.UCQP,
            SolverMethod.TRS,
        ]
        row = result.row(0.05, SolverMethod.TRS)
        assert row.trials == 3
        assert row.mean_mu_star is not None
        assert result.row(0.05, SolverMethod.UCQP).mean_mu_star is None
        assert len(result.series(SolverMethod.INPUT)) == 2

    def test_missing_row(self):
        result = sweep_sigma(_small_config(sigma_grid=[0.05], methods=["ucqp"]))
        with pytest.raises(KeyError):
            result.row(0.05, SolverMethod.TRS)

    def test_independent_of_worker_count(self):
        serial = sweep_sigma(_small_config(max_workers=1))
        parallel = sweep_sigma(_small_config(max_workers=4))
        assert serial.rows == parallel.rows

    def test_matches_single_trials(self):
        cfg = _small_config(sigma_grid=[0.05], trials=2)
        result = sweep_sigma(cfg)
        records = [run_trial(cfg, 0.05, t, 0) for t in range(2)]
        expected = sum(r.mse[SolverMethod.UCQP] for r in records) / 2
        assert result.row(0.05, SolverMethod.UCQP).mean_mse == pytest.approx(expected)

    def test_aggregate_ignores_order(self):
        cfg = _small_config()
        experiment = Experiment(cfg)
        records = [
            experiment.run_trial(sigma, t, i)
            for i, sigma in enumerate(cfg.sigma_grid)
            for t in range(cfg.trials)
        ]
        shuffled = records[:]
        random.Random(0).shuffle(shuffled)
        assert aggregate(shuffled, cfg.methods) == aggregate(records, cfg.methods)

    def test_trial_failure_keeps_partial_records(self, monkeypatch):
        original = Experiment.run_trial

        def failing(self, sigma, trial_index, sigma_index=0):
            if sigma_index == 1 and trial_index == 1:
                raise RuntimeError("solver exploded")
            return original(self, sigma, trial_index, sigma_index)

        monkeypatch.setattr(Experiment, "run_trial", failing)
        with pytest.raises(ModDenoiseTrialError) as exc_info:
            sweep_sigma(_small_config())
        error = exc_info.value
        assert error.sigma == 0.05
        assert error.trial_index == 1
        assert len(error.partial) == 5
        assert isinstance(error.__cause__, RuntimeError)
        assert "trial 1 at sigma=0.05 failed" in str(error)

    def test_solver_failure_is_not_wrapped_twice(self, monkeypatch):
        def failing(*args, **kwargs):
            raise ModDenoiseNumericalError("secular root failed")

        monkeypatch.setattr("moddenoise.experiment.estimate", failing)
        with pytest.raises(ModDenoiseTrialError) as exc_info:
            sweep_sigma(_small_config(sigma_grid=[0.05], trials=2))
        error = exc_info.value
        assert error.sigma == 0.05
        assert error.partial == []
        assert isinstance(error.__cause__, ModDenoiseNumericalError)
        assert "secular root failed" in str(error.__cause__)


class TestExperimentLifecycle:
    async def test_context_manager(self):
        async with Experiment(_small_config()) as experiment:
            assert experiment._executor is not None
        assert experiment._executor is None

    async def test_close_idempotent(self):
        experiment = Experiment(_small_config())
        experiment._ensure_executor()
        await experiment.close()
        await experiment.close()
        assert experiment._executor is None

    async def test_ensure_executor_creates_once(self):
        experiment = Experiment(_small_config(max_workers=2))
        first = experiment._ensure_executor()
        assert experiment._ensure_executor() is first
        await experiment.close()

    async def test_sweep_async(self):
        result = await sweep_sigma_async(_small_config(sigma_grid=[0.05], trials=2))
        assert len(result.rows) == 3

    async def test_context_built_once(self):
        async with Experiment(_small_config()) as experiment:
            assert experiment.context is experiment.context
            await experiment.sweep()


class TestVerifyIdentity:
    @pytest.mark.parametrize(
        "identity", ["prop1_i", "prop1_ii", "prop1_iii", "prop1_iv", "prop1_v"]
    )
    def test_identity_holds(self, identity):
        check = verify_identity(identity, n=200, sigma=0.1, trials=300, seed=1)
        assert abs(check.z_score) <= 4

    @pytest.mark.parametrize("sigma", [0.05, 0.1, 0.2])
    @pytest.mark.parametrize(
        "identity", ["prop1_i", "prop1_ii", "prop1_iii", "prop1_iv", "prop1_v", "eq8"]
    )
    def test_identity_at_full_size(self, identity, sigma):
        check = verify_identity(identity, n=2000, sigma=sigma, trials=200, seed=0)
        assert abs(check.z_score) <= 3
        if identity == "eq8":
            assert check.within_interval

    def test_sandwich(self):
        check = verify_identity("eq8", n=200, sigma=0.05, trials=100, seed=2)
        assert check.lower < check.upper
        assert check.within_interval

    def test_projection_direction_is_random(self):
        n, sigma = 200, 0.1
        check = verify_identity("prop1_iii", n=n, sigma=sigma, trials=30, seed=4)
        # a direction aligned with h would give about n e^(-4 pi^2 sigma^2)
        assert check.theoretical < 0.1 * n * math.exp(-4 * math.pi**2 * sigma**2)
        assert check == verify_identity("prop1_iii", n=n, sigma=sigma, trials=30, seed=4)

    def test_zero_sigma(self):
        check = verify_identity("prop1_i", n=50, sigma=0.0, trials=30)
        assert check.z_score == 0.0
        assert check.theoretical == 1.0

    def test_too_few_trials(self):
        with pytest.raises(ModDenoiseParameterError) as exc_info:
            verify_identity("prop1_i", n=50, sigma=0.1, trials=29)
        assert "trials must be >= 30" in str(exc_info.value)


class TestVerifyEventBound:
    @pytest.mark.parametrize("item", ["prop2_ii", "prop2_iii", "prop2_iv"])
    def test_concentration_events(self, item):
        check = verify_event_bound(item, EventParams(n=60, sigma=0.05), trials=200, seed=3)
        assert check.violations == 0
        assert check.sound
        assert check.failure_budget == pytest.approx(2 / 60**2)

    @pytest.mark.slow
    @pytest.mark.parametrize("n", [200, 500])
    @pytest.mark.parametrize("item", ["prop2_ii", "prop2_iii", "prop2_iv"])
    def test_concentration_events_at_full_size(self, item, n):
        check = verify_event_bound(item, EventParams(n=n, sigma=0.1), trials=10_000, seed=5)
        assert check.trials == 10_000
        assert check.sound
        assert check.failure_budget == pytest.approx(2 / n**2)

    def test_two_sided_doubles_budget(self):
        params = EventParams(n=60, sigma=0.05, two_sided=True)
        check = verify_event_bound("prop2_iii", params, trials=50)
        assert check.failure_budget == pytest.approx(4 / 60**2)

    def test_multiplier_bound_at_desk_scale(self):
        check = verify_event_bound("lemma7", EventParams(n=50, sigma=0.05), trials=10)
        assert check.conditions_hold is False
        assert check.violations == 0
        assert check.failure_budget == pytest.approx(4 / 50**2)

    def test_invalid_width(self):
        with pytest.raises(ValueError) as exc_info:
            EventParams(n=10, sigma=0.1, k=10)
        assert "k must be in range" in str(exc_info.value)

    def test_no_trials(self):
        with pytest.raises(ModDenoiseParameterError):
            verify_event_bound("prop2_ii", EventParams(n=10, sigma=0.1), trials=0)


@pytest.mark.slow
class TestReproduction:
    def test_ucqp_beats_input_at_high_noise(self):
        for kind in ("f1", "f2"):
            cfg = sqrt_gamma_sweep_config(kind, sigma_range=(0.096, 0.096), trials=5)
            result = sweep_sigma(cfg)
            assert result.row(0.096, SolverMethod.UCQP).mean_mse < result.row(0.096, SolverMethod.INPUT).mean_mse

    def test_trs_beats_input_on_smooth_function(self):
        cfg = sqrt_gamma_sweep_config("f2", sigma_range=(0.096, 0.096), trials=5)
        result = sweep_sigma(cfg)
        assert result.row(0.096, SolverMethod.TRS).mean_mse < result.row(0.096, SolverMethod.INPUT).mean_mse

    @pytest.mark.parametrize("kind", ["f1", "f2"])
    def test_sqrt_gamma_loses_to_input_at_low_noise(self, kind):
        result = sweep_sigma(sqrt_gamma_sweep_config(kind, sigma_range=(1e-4, 1e-4), trials=3))
        baseline = result.row(1e-4, SolverMethod.INPUT).mean_mse
        assert result.row(1e-4, SolverMethod.UCQP).mean_mse > baseline
        assert result.row(1e-4, SolverMethod.TRS).mean_mse > baseline

    @pytest.mark.parametrize("kind", ["f1", "f2"])
    def test_estimators_beat_input_at_top_of_grid(self, kind):
        cfg = sqrt_gamma_sweep_config(kind)
        cfg = cfg.model_copy(update={"sigma_grid": cfg.sigma_grid[-3:]})
        result = sweep_sigma(cfg)
        for sigma in cfg.sigma_grid:
            baseline = result.row(sigma, SolverMethod.INPUT).mean_mse
            assert result.row(sigma, SolverMethod.UCQP).mean_mse < baseline
            assert result.row(sigma, SolverMethod.TRS).mean_mse < baseline
        if kind == "f1":
            top = cfg.sigma_grid[-1]
            assert result.row(top, SolverMethod.TRS).mean_mse >= result.row(top, SolverMethod.UCQP).mean_mse

    @pytest.mark.parametrize("kind", ["f1", "f2"])
    def test_linear_gamma_beats_input_over_low_grid(self, kind):
        cfg = linear_gamma_sweep_config(kind)
        result = sweep_sigma(cfg)
        assert len(cfg.sigma_grid) == 13
        for sigma in cfg.sigma_grid:
            baseline = result.row(sigma, SolverMethod.INPUT).mean_mse
            assert result.row(sigma, SolverMethod.UCQP).mean_mse < baseline
            assert result.row(sigma, SolverMethod.TRS).mean_mse < baseline

    @pytest.mark.parametrize("kind", ["f1", "f2"])
    def test_linear_gamma_improves_low_noise(self, kind):
        sqrt_result = sweep_sigma(sqrt_gamma_sweep_config(kind, sigma_range=(1e-4, 1e-4), trials=3))
        linear_result = sweep_sigma(linear_gamma_sweep_config(kind, sigma_range=(1e-4, 1e-4), trials=3))
        for method in (SolverMethod.UCQP, SolverMethod.TRS):
            assert linear_result.row(1e-4, method).mean_mse < sqrt_result.row(1e-4, method).mean_mse
