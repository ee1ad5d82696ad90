"""Population management: speciation, fitness sharing, reproduction, and the
per-window evolution loop.

The population is a fixed-size pool of genomes partitioned into species by
topological similarity. Each generation: evaluate every genome on the
current window, assign species, share fitness within species, then rebuild
the population from per-species offspring quotas. The loop for one window
terminates on a generation cap or when the best raw fitness plateaus.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from random import Random

from neatstream.errors import ConfigError, NoDataError
from neatstream.fitness import FitnessSpec, fitness_value
from neatstream.genome import (
    Genome,
    GenomeConfig,
    InnovationRegistry,
    compatibility_distance,
    crossover,
    minimal_genome,
    mutate_add_connection,
    mutate_add_node,
    mutate_weights,
)


@dataclass
class Species:
    id: int
    representative: Genome
    member_ids: list[int] = field(default_factory=list)
    best_fitness_ever: float = float("-inf")
    stagnation: int = 0


@dataclass
class EvolutionConfig:
    population_size: int = 200
    distance_threshold: float = 3.0
    survival_fraction: float = 0.2
    elitism: int = 1
    elitism_min_species_size: int = 5
    stagnation_limit: int = 15
    interspecies_mating_prob: float = 0.001
    crossover_prob: float = 0.75
    max_generations_per_window: int = 50
    plateau_generations: int = 10
    plateau_epsilon: float = 1e-6
    genome: GenomeConfig = field(default_factory=GenomeConfig)

    def __post_init__(self):
        if self.population_size < 1:
            raise ConfigError("population_size must be positive")
        if self.max_generations_per_window < 1:
            raise ConfigError("max_generations_per_window must be positive")
        for name in ("survival_fraction", "interspecies_mating_prob", "crossover_prob"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"{name} must be in [0, 1], got {value}")
        if self.distance_threshold < 0 or self.plateau_epsilon < 0:
            raise ConfigError("thresholds must be nonnegative")
        if self.plateau_generations < 0 or self.stagnation_limit < 0:
            raise ConfigError("generation counts must be nonnegative")


@dataclass
class Population:
    genomes: list[Genome]
    registry: InnovationRegistry
    fitnesses: list[float] | None = None
    species: list[Species] = field(default_factory=list)
    generation: int = 0
    next_species_id: int = 1


def initial_population(
    n_features: int,
    config: EvolutionConfig,
    registry: InnovationRegistry,
    rng: Random,
) -> Population:
    """Population of minimal genomes; identical structure, random weights."""
    genomes = [
        minimal_genome(n_features, registry, rng, config.genome)
        for _ in range(config.population_size)
    ]
    return Population(genomes=genomes, registry=registry)


def speciate(population: Population, config: EvolutionConfig, rng: Random) -> Population:
    """Assign every genome to the first species whose representative is
    within the distance threshold, founding new species as needed; then
    resample each representative uniformly from the new members."""
    for sp in population.species:
        sp.member_ids = []
    species = list(population.species)
    for i, genome in enumerate(population.genomes):
        for sp in species:
            if (
                compatibility_distance(genome, sp.representative, config.genome)
                < config.distance_threshold
            ):
                sp.member_ids.append(i)
                genome.species_id = sp.id
                break
        else:
            sp = Species(
                id=population.next_species_id, representative=genome, member_ids=[i]
            )
            population.next_species_id += 1
            genome.species_id = sp.id
            species.append(sp)
    species = [sp for sp in species if sp.member_ids]
    for sp in species:
        sp.representative = population.genomes[rng.choice(sp.member_ids)]
    population.species = species
    return population


def shared_fitness(population: Population) -> list[float]:
    """Raw fitness floored at zero and divided by species size.

    The floor (the minimum raw fitness this generation, when negative)
    keeps reproduction weights nonnegative for profit-based fitness.
    """
    fits = population.fitnesses
    if fits is None:
        raise ConfigError("population has no fitness values")
    floor = min(0.0, min(fits))
    size_of = {}
    for sp in population.species:
        for i in sp.member_ids:
            size_of[i] = len(sp.member_ids)
    return [(f - floor) / size_of[i] for i, f in enumerate(fits)]


def _largest_remainder(weights: list[float], total: int) -> list[int]:
    """Integer quotas proportional to ``weights`` summing to ``total``."""
    weight_sum = sum(weights)
    if weight_sum <= 0:
        # degenerate generation: fall back to equal weighting
        weights = [1.0] * len(weights)
        weight_sum = float(len(weights))
    shares = [w / weight_sum * total for w in weights]
    quotas = [int(math.floor(s)) for s in shares]
    leftover = total - sum(quotas)
    by_remainder = sorted(
        range(len(weights)), key=lambda i: (quotas[i] - shares[i], i)
    )
    for i in by_remainder[:leftover]:
        quotas[i] += 1
    return quotas


def reproduce(population: Population, config: EvolutionConfig, rng: Random) -> Population:
    """Build the next generation in place.

    Offspring quotas are proportional to each species' summed shared
    fitness (largest-remainder rounding, so they total exactly the
    population size). Only the top ``survival_fraction`` of each species may
    parent. Species of at least ``elitism_min_species_size`` members copy
    their champion unmodified, and the population champion is always
    carried over so the best fitness never regresses. Species stagnant past
    the limit stop reproducing unless they hold the population champion.
    """
    fits = population.fitnesses
    if fits is None or population.species == []:
        raise ConfigError("reproduce requires evaluated, speciated population")
    genome_cfg = config.genome

    champ_index = max(range(len(fits)), key=lambda i: (fits[i], -i))
    champion_species = next(
        sp for sp in population.species if champ_index in sp.member_ids
    )

    for sp in population.species:
        best = max(fits[i] for i in sp.member_ids)
        if best > sp.best_fitness_ever:
            sp.best_fitness_ever = best
            sp.stagnation = 0
        else:
            sp.stagnation += 1

    eligible = [
        sp
        for sp in population.species
        if sp.stagnation <= config.stagnation_limit or sp is champion_species
    ]
    if all(sp.stagnation > config.stagnation_limit for sp in population.species):
        champion_species.stagnation = 0
        eligible = [champion_species]

    adjusted = shared_fitness(population)
    quotas = _largest_remainder(
        [sum(adjusted[i] for i in sp.member_ids) for sp in eligible],
        config.population_size,
    )
    champ_pos = eligible.index(champion_species)
    if config.elitism >= 1 and quotas[champ_pos] == 0:
        donor = max(range(len(quotas)), key=lambda i: (quotas[i], -i))
        quotas[donor] -= 1
        quotas[champ_pos] += 1

    # parent pools: top survival_fraction of each species, best first
    pools: dict[int, list[int]] = {}
    for sp in eligible:
        ranked = sorted(sp.member_ids, key=lambda i: (-fits[i], i))
        keep = max(1, math.ceil(config.survival_fraction * len(ranked)))
        pools[sp.id] = ranked[:keep]

    population.registry.begin_generation()
    next_genomes: list[Genome] = []
    for sp, quota in zip(eligible, quotas):
        if quota == 0:
            continue
        remaining = quota
        pool = pools[sp.id]
        is_champion_home = sp is champion_species
        if config.elitism >= 1 and (
            is_champion_home or len(sp.member_ids) >= config.elitism_min_species_size
        ):
            best_id = min(sp.member_ids, key=lambda i: (-fits[i], i))
            next_genomes.append(population.genomes[best_id].copy())
            remaining -= 1
        for _ in range(remaining):
            parent_id = rng.choice(pool)
            parent = population.genomes[parent_id]
            if rng.random() < config.crossover_prob:
                other_pool = pool
                if len(eligible) > 1 and rng.random() < config.interspecies_mating_prob:
                    foreign = [
                        i
                        for other in eligible
                        if other is not sp
                        for i in pools[other.id]
                    ]
                    if foreign:
                        other_pool = foreign
                mate_id = rng.choice(other_pool)
                mate = population.genomes[mate_id]
                child = crossover(
                    parent, mate, fits[parent_id], fits[mate_id], rng, genome_cfg
                )
            else:
                child = parent.copy()
            child = mutate_weights(child, rng, genome_cfg)
            if rng.random() < genome_cfg.p_add_node:
                child = mutate_add_node(child, population.registry, rng)
            if rng.random() < genome_cfg.p_add_connection:
                child = mutate_add_connection(child, population.registry, rng, genome_cfg)
            next_genomes.append(child)

    population.genomes = next_genomes
    population.fitnesses = None
    population.generation += 1
    return population


def evolve_on_window(
    population: Population,
    window,
    fitness_spec: FitnessSpec,
    config: EvolutionConfig,
    rng: Random,
) -> tuple[Population, int, Genome]:
    """Evolve until the generation cap or a fitness plateau; returns the
    population, the number of generations evaluated, and the window's best
    genome by raw fitness.

    Species improvement history is window-relative (fitness scales change
    with the data), so stagnation tracking resets at window entry.
    """
    if len(window.records) == 0:
        raise NoDataError(f"window {window.index} is empty")
    for sp in population.species:
        sp.best_fitness_ever = float("-inf")
        sp.stagnation = 0

    best_seen = float("-inf")
    stall = 0
    generations = 0
    while True:
        population.fitnesses = [
            fitness_value(g, window, fitness_spec) for g in population.genomes
        ]
        generations += 1
        gen_best = max(population.fitnesses)
        if gen_best - best_seen >= config.plateau_epsilon or generations == 1:
            stall = 0
        else:
            stall += 1
        if gen_best > best_seen:
            best_seen = gen_best
        speciate(population, config, rng)
        if (
            generations >= config.max_generations_per_window
            or stall >= config.plateau_generations
        ):
            break
        reproduce(population, config, rng)

    best_index = max(
        range(len(population.fitnesses)), key=lambda i: (population.fitnesses[i], -i)
    )
    return population, generations, population.genomes[best_index]
