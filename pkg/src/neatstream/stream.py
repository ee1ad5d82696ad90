"""The online loop: partition the ordered stream into time windows, test the
current champion on each new window (prequential, test-then-train), then
evolve on it and report.

Window 0 has no prior champion, so its test metrics are reported as nulls
(written as "NA") rather than fabricated values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from functools import cached_property
from pathlib import Path
from random import Random

import numpy as np

from neatstream.errors import (
    ConfigError,
    InvalidDimensionError,
    InvalidInputError,
    NoDataError,
)
from neatstream.evolution import (
    EvolutionConfig,
    Population,
    evolve_on_window,
    initial_population,
)
from neatstream.fitness import (
    FitnessKind,
    FitnessSpec,
    evaluate_metrics,
    fitness_value,
)
from neatstream.genome import (
    Genome,
    GenomeConfig,
    InnovationRegistry,
    compatibility_distance,
)
from neatstream.network import DEFAULT_THRESHOLD

MODES = ("online", "frozen-initial")


@dataclass
class TimeWindow:
    """Contiguous slice of the record stream, with cached dense arrays."""

    index: int
    records: tuple

    @cached_property
    def n_features(self) -> int:
        return len(self.records[0].features)

    @cached_property
    def features(self) -> np.ndarray:
        for r in self.records:
            if any(x is None for x in r.features):
                raise InvalidInputError(
                    f"record {r.id!r} has missing features; normalize the stream first"
                )
        out = np.array([r.features for r in self.records], dtype=np.float64)
        if not np.isfinite(out).all():
            raise InvalidInputError("non-finite feature values in window")
        return out

    @cached_property
    def labels(self) -> np.ndarray:
        return np.array([r.label for r in self.records], dtype=np.int8)

    @cached_property
    def loans(self) -> np.ndarray:
        return np.array([r.loan_amount for r in self.records], dtype=np.float64)

    @cached_property
    def interests(self) -> np.ndarray:
        return np.array([r.total_interest for r in self.records], dtype=np.float64)


@dataclass
class StreamConfig:
    window_size: int
    fitness_spec: FitnessSpec
    evolution: EvolutionConfig = field(default_factory=EvolutionConfig)
    seed: int = 0

    def __post_init__(self):
        if self.window_size < 2:
            raise ConfigError(f"window_size must be >= 2, got {self.window_size}")


@dataclass
class WindowReport:
    """Per-window prequential metrics plus evolution statistics.

    The test_* fields are computed with the previous window's champion
    before any training on this window; they are None for window 0.
    champion_drift is the compatibility distance to the previous champion.
    """

    window_index: int
    n_records: int
    test_accuracy: float | None
    test_recall: float | None
    test_specificity: float | None
    test_profit: float | None
    best_fitness: float
    generations_run: int
    species_count: int
    champion_nodes: int
    champion_connections: int
    champion_drift: float | None


REPORT_COLUMNS = tuple(f.name for f in fields(WindowReport))
PLOT_METRICS = (
    "test_accuracy",
    "test_recall",
    "test_specificity",
    "test_profit",
    "best_fitness",
)


def partition(records, window_size: int) -> list[TimeWindow]:
    """Split the ordered stream into consecutive windows of ``window_size``
    records; a shorter final window holds any remainder."""
    records = list(records)
    if not records:
        raise NoDataError("no records to partition")
    if window_size < 1:
        raise ConfigError(f"window_size must be >= 1, got {window_size}")
    windows = []
    for start in range(0, len(records), window_size):
        windows.append(
            TimeWindow(index=len(windows), records=tuple(records[start:start + window_size]))
        )
    return windows


def champion_drift(prev: Genome, curr: Genome, config: GenomeConfig | None = None) -> float:
    """Structural distance between consecutive champions."""
    return compatibility_distance(prev, curr, config)


@dataclass
class RunResult:
    reports: list[WindowReport]
    population: Population
    champion: Genome


def execute_run(records, config: StreamConfig, mode: str = "online") -> RunResult:
    """Run the full prequential loop and return reports plus final state.

    In "frozen-initial" mode the champion of window 0 is never retrained;
    later windows only report its prequential metrics.
    """
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {mode!r}")
    records = list(records)
    if not records:
        raise NoDataError("no records to run on")
    n_features = len(records[0].features)
    for r in records:
        if len(r.features) != n_features:
            raise InvalidDimensionError(
                f"record {r.id!r} has {len(r.features)} features, expected {n_features}"
            )

    windows = partition(records, config.window_size)
    rng = Random(config.seed)
    registry = InnovationRegistry()
    population = initial_population(n_features, config.evolution, registry, rng)
    spec = config.fitness_spec

    reports: list[WindowReport] = []
    prev_champion: Genome | None = None
    for window in windows:
        if prev_champion is None:
            test = None
        else:
            test = evaluate_metrics(prev_champion, window, DEFAULT_THRESHOLD)

        if mode == "online" or window.index == 0:
            population, generations, champion = evolve_on_window(
                population, window, spec, config.evolution, rng
            )
            best_fitness = max(population.fitnesses)
            if spec.kind is FitnessKind.PAP:
                for genome, fit in zip(population.genomes, population.fitnesses):
                    genome.historical_fitness = fit
        else:
            champion = prev_champion
            generations = 0
            best_fitness = fitness_value(champion, window, spec)

        drift = (
            champion_drift(prev_champion, champion, config.evolution.genome)
            if prev_champion is not None
            else None
        )
        reports.append(
            WindowReport(
                window_index=window.index,
                n_records=len(window.records),
                test_accuracy=test.accuracy if test else None,
                test_recall=test.recall if test else None,
                test_specificity=test.specificity if test else None,
                test_profit=test.profit if test else None,
                best_fitness=best_fitness,
                generations_run=generations,
                species_count=len(population.species),
                champion_nodes=len(champion.nodes),
                champion_connections=len(champion.connections),
                champion_drift=drift,
            )
        )
        prev_champion = champion
    return RunResult(reports=reports, population=population, champion=prev_champion)


def run_online(records, config: StreamConfig, mode: str = "online") -> list[WindowReport]:
    """Prequential reports for the whole stream (see execute_run)."""
    return execute_run(records, config, mode).reports


def _format_cell(value) -> str:
    if value is None:
        return "NA"
    if isinstance(value, float):
        if math.isnan(value):
            return "NA"
        return repr(value)
    return str(value)


def write_reports(reports, out_dir) -> list[Path]:
    """Write the tab-separated report table plus one two-column plot file
    per metric; returns the paths written."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    table = out_dir / "reports.tsv"
    with open(table, "w", encoding="utf-8") as fh:
        fh.write("#" + "\t".join(REPORT_COLUMNS) + "\n")
        for report in reports:
            fh.write(
                "\t".join(
                    _format_cell(getattr(report, col)) for col in REPORT_COLUMNS
                )
                + "\n"
            )
    paths.append(table)
    for metric in PLOT_METRICS:
        path = out_dir / f"{metric.removeprefix('test_')}.dat"
        with open(path, "w", encoding="utf-8") as fh:
            for report in reports:
                value = getattr(report, metric)
                if value is None:
                    continue
                fh.write(f"{report.window_index}\t{_format_cell(value)}\n")
        paths.append(path)
    return paths
