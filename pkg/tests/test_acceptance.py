"""Acceptance suite: one test per release criterion.

Each criterion runs at its stated tolerance and prints a PASS/FAIL line via
the conftest hook. The seeded experiments (criteria 4-6) are scaled-down
end-to-end runs with explicit success-rate floors and wall-clock budgets.
"""

import filecmp
import math
import time
from random import Random

import pytest

from neatstream.cli import main as cli_main
from neatstream.data import SynthConfig, normalize_stream, synthesize
from neatstream.evolution import (
    EvolutionConfig,
    _largest_remainder,
    initial_population,
    reproduce,
    speciate,
)
from neatstream.fitness import (
    ConfusionCounts,
    FitnessKind,
    FitnessSpec,
    classification_metrics,
    fitness_value,
    record_profit,
)
from neatstream.genome import (
    GenomeConfig,
    InnovationRegistry,
    crossover,
    minimal_genome,
    mutate_add_connection,
    mutate_add_node,
    mutate_weights,
    validate_genome,
)
from neatstream.stream import StreamConfig, partition, run_online

from helpers import (
    always_negative_genome,
    make_record,
    make_window,
    random_grown_genome,
    xor_window,
    zero_genome,
)
from oracles import oracle_metrics, oracle_profit

GENOME_CFG = GenomeConfig()


def test_c1_metric_oracle_equivalence():
    started = time.perf_counter()
    rng = Random(101)
    for _ in range(1000):
        tp, fn, fp, tn = (rng.randrange(0, 10**6) for _ in range(4))
        if tp + fn + fp + tn == 0:
            tn = 1
        metrics = classification_metrics(ConfusionCounts(tp, fn, fp, tn))
        acc, rec, spec = oracle_metrics(tp, fn, fp, tn)
        assert abs(metrics.accuracy - acc) <= 1e-12
        assert abs(metrics.recall - rec) <= 1e-12
        assert abs(metrics.specificity - spec) <= 1e-12
    for _ in range(1000):
        rows = [
            (
                rng.randrange(2),
                rng.randrange(2),
                rng.uniform(0, 50_000),
                rng.uniform(0, 15_000),
            )
            for _ in range(rng.randrange(1, 30))
        ]
        total = sum(record_profit(lab, pred, loan, inter) for lab, pred, loan, inter in rows)
        assert abs(total - oracle_profit(rows)) <= 1e-12 * max(1.0, abs(total))
    assert time.perf_counter() - started < 1.0


def test_c2_fitness_formula_checks():
    window = make_window(
        [
            (1, (0.9,), 1000.0, 200.0),
            (0, (0.1,), 700.0, 90.0),
            (1, (0.7,), 500.0, 80.0),
        ]
    )
    pan = FitnessSpec(FitnessKind.PAN)
    assert fitness_value(zero_genome(1), window, pan) == 1.0
    assert fitness_value(always_negative_genome(1), window, pan) == 1.0

    rng = Random(202)
    pro = FitnessSpec(FitnessKind.PRO)
    pap0 = FitnessSpec(FitnessKind.PAP, alpha=1e-6, beta=0.0)
    for seed in range(100):
        genome = random_grown_genome(seed)
        genome.historical_fitness = rng.uniform(-10, 10)
        window = make_window(
            [
                (
                    rng.randrange(2),
                    tuple(rng.uniform(0, 1) for _ in range(4)),
                    rng.uniform(100, 40_000),
                    rng.uniform(10, 10_000),
                )
                for _ in range(rng.randrange(1, 25))
            ]
        )
        lhs = fitness_value(genome, window, pap0)
        rhs = 1e-6 * fitness_value(genome, window, pro)
        assert abs(lhs - rhs) <= 1e-12

    # alpha * profit + beta * previous fitness, alpha = 1e-6
    half_million = make_window(
        [(1, (0.9,), 250_000.0, 250_000.0), (1, (0.8,), 250_000.0, 250_000.0)]
    )
    genome = zero_genome(1)
    genome.historical_fitness = 0.53
    spec = FitnessSpec(FitnessKind.PAP, alpha=1e-6, beta=0.5)
    assert fitness_value(genome, half_million, spec) == pytest.approx(0.765, abs=1e-12)
    spec = FitnessSpec(FitnessKind.PAP, alpha=1e-6, beta=1.0)
    assert fitness_value(genome, half_million, spec) == pytest.approx(1.03, abs=1e-12)


def test_c3_structural_invariant_battery():
    rng = Random(303)
    registry = InnovationRegistry()
    pool = [minimal_genome(3, registry, rng) for _ in range(8)]
    applications = 0
    while applications < 10_000:
        if applications % 50 == 0:
            registry.begin_generation()
        op = rng.randrange(4)
        genome = rng.choice(pool)
        if op == 0:
            child = mutate_weights(genome, rng, GENOME_CFG)
        elif op == 1:
            child = mutate_add_connection(genome, registry, rng, GENOME_CFG)
        elif op == 2:
            child = mutate_add_node(genome, registry, rng)
        else:
            mate = rng.choice(pool)
            child = crossover(genome, mate, rng.random(), rng.random(), rng, GENOME_CFG)
        applications += 1
        validate_genome(child)
        if applications % 10 == 0:
            twin = crossover(child, child, 1.0, 1.0, rng, GENOME_CFG)
            assert twin.innovations() == child.innovations()
        # keep the walk bounded; stale giants are retired
        if len(child.connections) > 120:
            child = minimal_genome(3, registry, rng)
        pool[rng.randrange(len(pool))] = child

    for _ in range(500):
        weights = [rng.uniform(0, 5) for _ in range(rng.randrange(1, 10))]
        total = rng.randrange(1, 400)
        quotas = _largest_remainder(weights, total)
        assert sum(quotas) == total

    config = EvolutionConfig(
        population_size=60, max_generations_per_window=10**9, plateau_generations=10**9
    )
    population = initial_population(3, config, InnovationRegistry(), rng)
    window = make_window(
        [(rng.randrange(2), tuple(rng.uniform(0, 1) for _ in range(3)))
         for _ in range(40)]
    )
    spec = FitnessSpec(FitnessKind.ACC)
    for _ in range(25):
        population.fitnesses = [
            fitness_value(g, window, spec) for g in population.genomes
        ]
        speciate(population, config, rng)
        reproduce(population, config, rng)
        assert len(population.genomes) == config.population_size
        for genome in population.genomes:
            validate_genome(genome)


def test_c4_xor_sanity():
    started = time.perf_counter()
    config = EvolutionConfig(
        population_size=150,
        genome=GenomeConfig(small_genome_size=10**9),
    )
    window = xor_window()
    spec = FitnessSpec(FitnessKind.ACC)
    solve_generations = []
    for seed in range(20):
        rng = Random(seed)
        registry = InnovationRegistry()
        population = initial_population(2, config, registry, rng)
        solved = None
        for generation in range(1, 301):
            population.fitnesses = [
                fitness_value(g, window, spec) for g in population.genomes
            ]
            if max(population.fitnesses) >= 1.0:
                solved = generation
                break
            speciate(population, config, rng)
            reproduce(population, config, rng)
        solve_generations.append(solved)
    elapsed = time.perf_counter() - started

    solved = sorted(g for g in solve_generations if g is not None)
    assert len(solved) >= 18, f"solved only {len(solved)}/20: {solve_generations}"
    median = solved[len(solved) // 2]
    assert median < 150, f"median solve generation {median}"
    assert elapsed < 60.0, f"xor battery took {elapsed:.1f}s"


def drift_stream(seed):
    cfg = SynthConfig(
        n_records=20_000,
        n_features=5,
        positive_fraction=0.5,
        drift_at=10_500,  # windows 0..20 clean, flipped from window 21 on
        drift_kind="label_flip",
        boundary_sharpness=None,
        seed=100 + seed,
    )
    return normalize_stream(synthesize(cfg))


def drift_config(seed):
    return StreamConfig(
        window_size=500,
        fitness_spec=FitnessSpec(FitnessKind.ACC),
        evolution=EvolutionConfig(population_size=200),
        seed=seed,
    )


def test_c5_drift_adaptation_vs_frozen_model():
    started = time.perf_counter()
    adapted = 0
    for seed in range(10):
        records = drift_stream(seed)
        reports = run_online(records, drift_config(seed))
        crashed = reports[21].test_accuracy < 0.5
        recovered = max(r.test_accuracy for r in reports[22:27]) >= 0.8
        if crashed and recovered:
            adapted += 1

        frozen = run_online(records, drift_config(seed), mode="frozen-initial")
        post_drift = [r.test_accuracy for r in frozen if r.window_index >= 21]
        assert max(post_drift) < 0.5, f"frozen model recovered on seed {seed}"
    elapsed = time.perf_counter() - started
    assert adapted >= 8, f"adapted in only {adapted}/10 seeds"
    assert elapsed < 600.0, f"drift experiment took {elapsed:.1f}s"


def test_c6_imbalance_pan_beats_acc_on_specificity():
    def mean_metrics(kind, seed):
        cfg = SynthConfig(
            n_records=5000,
            n_features=5,
            positive_fraction=0.75,
            boundary_sharpness=4.0,
            seed=500 + seed,
        )
        records = normalize_stream(synthesize(cfg))
        stream_cfg = StreamConfig(
            window_size=500,
            fitness_spec=FitnessSpec(kind),
            evolution=EvolutionConfig(population_size=150),
            seed=seed,
        )
        reports = run_online(records, stream_cfg)
        accs = [r.test_accuracy for r in reports[1:]]
        specs = [r.test_specificity for r in reports[1:]]
        return sum(accs) / len(accs), sum(specs) / len(specs)

    acc_accuracy = acc_specificity = 0.0
    pan_accuracy = pan_specificity = 0.0
    seeds = range(10)
    for seed in seeds:
        a_acc, a_spec = mean_metrics(FitnessKind.ACC, seed)
        p_acc, p_spec = mean_metrics(FitnessKind.PAN, seed)
        acc_accuracy += a_acc
        acc_specificity += a_spec
        pan_accuracy += p_acc
        pan_specificity += p_spec
    n = len(seeds)
    acc_accuracy, acc_specificity = acc_accuracy / n, acc_specificity / n
    pan_accuracy, pan_specificity = pan_accuracy / n, pan_specificity / n

    assert pan_specificity > acc_specificity, (
        f"PAN specificity {pan_specificity:.3f} vs ACC {acc_specificity:.3f}"
    )
    assert abs(pan_accuracy - acc_accuracy) < 0.1, (
        f"accuracy gap {abs(pan_accuracy - acc_accuracy):.3f}"
    )


def test_c7_protocol_arithmetic_and_data_fixtures():
    records = [make_record(i, i % 2, [0.0]) for i in range(229_501)]
    windows = partition(records, 500)
    assert len(windows) == 460
    assert all(len(w.records) == 500 for w in windows[:459])
    assert len(windows[459].records) == 1

    # two-year loan-book tallies used as data-sanity fixtures
    assert 121_775 + 46_561 == 168_336
    assert abs(46_561 / 168_336 - 0.2765) < 1e-4
    assert 43_283 + 17_881 == 61_164
    assert abs(17_881 / 61_164 - 0.2923) < 1e-4
    majority = classification_metrics(ConfusionCounts(tp=121_775, fn=0, fp=46_561, tn=0))
    assert abs(majority.accuracy - (1 - 0.2765)) < 1e-4


def test_c8_cmd_run_determinism(tmp_path):
    args = [
        "run", "--synth", "2000", "--window-size", "500", "--fitness", "pro",
        "--seed", "11", "--population-size", "30", "--max-generations", "4",
        "--plateau-generations", "2",
    ]
    dir_a, dir_b = tmp_path / "a", tmp_path / "b"
    assert cli_main(args + ["--out", str(dir_a)]) == 0
    assert cli_main(args + ["--out", str(dir_b)]) == 0
    names = sorted(p.name for p in dir_a.iterdir())
    assert names == sorted(p.name for p in dir_b.iterdir())
    match, mismatch, errors = filecmp.cmpfiles(dir_a, dir_b, names, shallow=False)
    assert sorted(match) == names
    assert not mismatch and not errors
