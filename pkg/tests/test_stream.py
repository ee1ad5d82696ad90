import filecmp
import statistics
from random import Random

import pytest

import neatstream as ns
from neatstream.data import LoanRecord
from neatstream.errors import ConfigError, NoDataError
from neatstream.evolution import EvolutionConfig
from neatstream.fitness import FitnessKind, FitnessSpec
from neatstream.stream import (
    REPORT_COLUMNS,
    StreamConfig,
    TimeWindow,
    champion_drift,
    execute_run,
    partition,
    run_online,
    write_reports,
)

from helpers import alignment_genomes, make_record, random_grown_genome


def dummy_records(n, n_features=2):
    return [make_record(i, i % 2, [0.1 * (i % 7)] * n_features) for i in range(n)]


def quick_config(**evo_overrides):
    evo = dict(population_size=20, max_generations_per_window=3, plateau_generations=2)
    evo.update(evo_overrides)
    return StreamConfig(
        window_size=500,
        fitness_spec=FitnessSpec(FitnessKind.ACC),
        evolution=EvolutionConfig(**evo),
        seed=5,
    )


def synth_stream(n, seed, drift_at=None, n_features=4):
    cfg = ns.SynthConfig(
        n_records=n,
        n_features=n_features,
        positive_fraction=0.5,
        drift_at=drift_at,
        drift_kind="label_flip",
        boundary_sharpness=None,
        seed=seed,
    )
    return ns.normalize_stream(ns.synthesize(cfg))


class TestPartition:
    def test_full_scale_window_count(self):
        windows = partition(dummy_records(229_501), 500)
        assert len(windows) == 460
        assert sum(len(w.records) for w in windows[:-1]) == 229_500
        assert len(windows[-1].records) == 1

    def test_exact_fit_single_window(self):
        windows = partition(dummy_records(1000), 1000)
        assert len(windows) == 1

    def test_remainder_window(self):
        windows = partition(dummy_records(999), 500)
        assert [len(w.records) for w in windows] == [500, 499]

    def test_record_conservation_and_order(self):
        records = dummy_records(1234)
        windows = partition(records, 100)
        rebuilt = [r for w in windows for r in w.records]
        assert rebuilt == records
        assert [w.index for w in windows] == list(range(len(windows)))

    def test_empty_input(self):
        with pytest.raises(NoDataError):
            partition([], 10)


class TestRunOnline:
    def test_two_windows_one_generation_each(self):
        records = synth_stream(1000, seed=0)
        config = quick_config(plateau_generations=0)
        reports = run_online(records, config)
        assert len(reports) == 2
        assert [r.generations_run for r in reports] == [1, 1]

    def test_window_zero_reports_nulls(self):
        records = synth_stream(1000, seed=1)
        reports = run_online(records, quick_config())
        first = reports[0]
        assert first.test_accuracy is None
        assert first.test_recall is None
        assert first.test_specificity is None
        assert first.test_profit is None
        assert first.champion_drift is None
        assert reports[1].test_accuracy is not None

    def test_prequential_purity_under_label_flip(self):
        # the champion is tested on the flipped window before it may train on
        # it, so the measured accuracy must collapse exactly there
        records = synth_stream(3000, seed=2, drift_at=2000)
        config = StreamConfig(
            window_size=500,
            fitness_spec=FitnessSpec(FitnessKind.ACC),
            evolution=EvolutionConfig(population_size=100),
            seed=0,
        )
        reports = run_online(records, config)
        assert reports[3].test_accuracy > 0.8
        assert reports[4].test_accuracy < 0.5
        assert reports[4].best_fitness > 0.8  # training then adapts in-window

    def test_report_shape_and_invariants(self):
        records = synth_stream(1500, seed=3)
        reports = run_online(records, quick_config())
        assert [r.window_index for r in reports] == [0, 1, 2]
        assert sum(r.n_records for r in reports) == 1500
        for r in reports[1:]:
            assert 0.0 <= r.test_accuracy <= 1.0
            assert 0.0 <= r.test_recall <= 1.0
            assert 0.0 <= r.test_specificity <= 1.0
            assert r.champion_drift >= 0.0
            assert r.species_count >= 1

    def test_population_continuity_and_pap_write_back(self):
        records = synth_stream(1000, seed=4)
        config = StreamConfig(
            window_size=500,
            fitness_spec=FitnessSpec(FitnessKind.PAP, alpha=1e-6, beta=0.5),
            evolution=EvolutionConfig(
                population_size=15, max_generations_per_window=2, plateau_generations=1
            ),
            seed=9,
        )
        result = execute_run(records, config)
        population = result.population
        assert len(population.genomes) == 15
        assert population.fitnesses is not None
        for genome, fit in zip(population.genomes, population.fitnesses):
            assert genome.historical_fitness == fit

    def test_mode_validation(self):
        with pytest.raises(ConfigError):
            run_online(dummy_records(10), quick_config(), mode="offline")

    def test_frozen_initial_never_retrains(self):
        records = synth_stream(2000, seed=6)
        config = quick_config()
        reports = run_online(records, config, mode="frozen-initial")
        assert reports[0].generations_run > 0
        for r in reports[1:]:
            assert r.generations_run == 0
            assert r.champion_drift == 0.0
        assert len({r.champion_connections for r in reports}) == 1


class TestChampionDrift:
    def test_identical_champions(self):
        g = random_grown_genome(0)
        assert champion_drift(g, g) == 0.0

    def test_disjoint_structures_reuse_distance(self):
        a, b = alignment_genomes()
        assert champion_drift(a, b) == pytest.approx(3.0)

    def test_stationary_stream_drifts_less(self):
        def pooled(drift_at):
            values = []
            for seed in range(5):
                records = synth_stream(4000, seed=800 + seed, drift_at=drift_at)
                config = StreamConfig(
                    window_size=500,
                    fitness_spec=FitnessSpec(FitnessKind.ACC),
                    evolution=EvolutionConfig(population_size=100),
                    seed=seed,
                )
                values += [
                    r.champion_drift
                    for r in run_online(records, config)
                    if r.champion_drift is not None
                ]
            return statistics.median(values)

        assert pooled(None) <= pooled(2000)


class TestReportFiles:
    def test_written_files_and_header(self, tmp_path):
        records = synth_stream(1000, seed=7)
        reports = run_online(records, quick_config())
        paths = write_reports(reports, tmp_path)
        table = tmp_path / "reports.tsv"
        assert table in paths
        lines = table.read_text().splitlines()
        assert lines[0] == "#" + "\t".join(REPORT_COLUMNS)
        assert len(lines) == 1 + len(reports)
        assert lines[1].split("\t")[2] == "NA"  # window 0 test accuracy
        assert (tmp_path / "accuracy.dat").exists()
        assert (tmp_path / "best_fitness.dat").exists()

    def test_plot_files_skip_nulls(self, tmp_path):
        records = synth_stream(1000, seed=7)
        reports = run_online(records, quick_config())
        write_reports(reports, tmp_path)
        accuracy_rows = (tmp_path / "accuracy.dat").read_text().splitlines()
        assert len(accuracy_rows) == len(reports) - 1
        assert accuracy_rows[0].startswith("1\t")
        fitness_rows = (tmp_path / "best_fitness.dat").read_text().splitlines()
        assert len(fitness_rows) == len(reports)

    def test_identical_runs_identical_bytes(self, tmp_path):
        config = quick_config()
        dir_a, dir_b = tmp_path / "a", tmp_path / "b"
        write_reports(run_online(synth_stream(1500, seed=8), config), dir_a)
        write_reports(run_online(synth_stream(1500, seed=8), config), dir_b)
        match, mismatch, errors = filecmp.cmpfiles(
            dir_a, dir_b, [p.name for p in dir_a.iterdir()], shallow=False
        )
        assert not mismatch and not errors
        assert match
