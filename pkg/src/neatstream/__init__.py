"""Online neuroevolution (NEAT) for streaming binary classification.

Evolves feed-forward network topologies and weights over a time-ordered
record stream, one window at a time, with prequential (test-then-train)
evaluation, speciation, and profit-aware fitness functions.
"""

from neatstream.data import LoanRecord, Normalizer, SynthConfig, load_stream, normalize, normalize_stream, synthesize, write_stream
from neatstream.errors import NeatStreamError
from neatstream.evolution import (
    EvolutionConfig,
    Population,
    Species,
    evolve_on_window,
    initial_population,
    reproduce,
    shared_fitness,
    speciate,
)
from neatstream.fitness import (
    ConfusionCounts,
    FitnessKind,
    FitnessSpec,
    Metrics,
    classification_metrics,
    confusion,
    evaluate_metrics,
    fitness_value,
    record_profit,
)
from neatstream.genome import (
    ConnectionGene,
    Genome,
    GenomeConfig,
    InnovationRegistry,
    NodeGene,
    NodeKind,
    compatibility_distance,
    crossover,
    genome_from_text,
    genome_to_text,
    load_genome,
    minimal_genome,
    mutate_add_connection,
    mutate_add_node,
    mutate_weights,
    save_genome,
    validate_genome,
)
from neatstream.kernels import backend_name
from neatstream.network import Network, activate, classify, compile_network
from neatstream.stream import (
    RunResult,
    StreamConfig,
    TimeWindow,
    WindowReport,
    champion_drift,
    execute_run,
    partition,
    run_online,
    write_reports,
)

__version__ = "0.1.0"
