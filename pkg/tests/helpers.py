"""Hand-built genomes and windows shared across test modules."""

from __future__ import annotations

from random import Random

from neatstream.data import LoanRecord
from neatstream.genome import ConnectionGene, Genome, NodeGene, NodeKind
from neatstream.stream import TimeWindow


def make_record(i, label, features, loan=1000.0, interest=100.0):
    return LoanRecord(
        id=f"t{i:04d}",
        label=label,
        loan_amount=loan,
        total_interest=interest,
        features=tuple(float(x) for x in features),
    )


def make_window(rows, index=0):
    """rows: iterable of (label, features) or (label, features, loan, interest)."""
    records = []
    for i, row in enumerate(rows):
        if len(row) == 2:
            label, features = row
            records.append(make_record(i, label, features))
        else:
            label, features, loan, interest = row
            records.append(make_record(i, label, features, loan, interest))
    return TimeWindow(index=index, records=tuple(records))


def perceptron_genome(weights, bias_weight, historical_fitness=0.0):
    """Minimal-topology genome with chosen weights (inputs then bias)."""
    n = len(weights)
    nodes = tuple(
        [NodeGene(i, NodeKind.INPUT) for i in range(n)]
        + [NodeGene(n, NodeKind.BIAS), NodeGene(n + 1, NodeKind.OUTPUT)]
    )
    conns = [
        ConnectionGene(i, n + 1, float(w), True, i + 1) for i, w in enumerate(weights)
    ]
    conns.append(ConnectionGene(n, n + 1, float(bias_weight), True, n + 1))
    return Genome(
        nodes=nodes,
        connections=tuple(conns),
        historical_fitness=historical_fitness,
    )


def zero_genome(n_features):
    """Scores exactly 0.5 everywhere, so every record is classed positive."""
    return perceptron_genome([0.0] * n_features, 0.0)


def always_negative_genome(n_features):
    """Strong negative bias: scores far below 0.5 for features in [0, 1]."""
    return perceptron_genome([0.0] * n_features, -2.0)


def step_genome():
    """One feature in [0, 1]: positive iff the feature exceeds 0.5."""
    return perceptron_genome([8.0], -4.0)


def alignment_genomes():
    """Two genomes over innovations {1,2,3} and {1,2,4,5} with equal weights
    on the matching genes; used by the crossover/distance hand examples."""
    nodes_a = (
        NodeGene(0, NodeKind.INPUT),
        NodeGene(1, NodeKind.BIAS),
        NodeGene(2, NodeKind.OUTPUT),
        NodeGene(3, NodeKind.HIDDEN),
    )
    a = Genome(
        nodes=nodes_a,
        connections=(
            ConnectionGene(0, 2, 0.5, True, 1),
            ConnectionGene(1, 2, -0.25, True, 2),
            ConnectionGene(0, 3, 1.0, True, 3),
        ),
    )
    nodes_b = (
        NodeGene(0, NodeKind.INPUT),
        NodeGene(1, NodeKind.BIAS),
        NodeGene(2, NodeKind.OUTPUT),
        NodeGene(4, NodeKind.HIDDEN),
    )
    b = Genome(
        nodes=nodes_b,
        connections=(
            ConnectionGene(0, 2, 0.5, True, 1),
            ConnectionGene(1, 2, -0.25, True, 2),
            ConnectionGene(0, 4, 0.75, True, 4),
            ConnectionGene(4, 2, -0.5, True, 5),
        ),
    )
    return a, b


def xor_window():
    """The four Boolean cases with label = a XOR b."""
    return make_window(
        [
            (0, (0.0, 0.0)),
            (1, (0.0, 1.0)),
            (1, (1.0, 0.0)),
            (0, (1.0, 1.0)),
        ]
    )


def random_grown_genome(seed, n_features=4, splits=4, links=4):
    """A genome grown by real operators from a minimal one."""
    from neatstream.genome import (
        GenomeConfig,
        InnovationRegistry,
        minimal_genome,
        mutate_add_connection,
        mutate_add_node,
        mutate_weights,
    )

    rng = Random(seed)
    registry = InnovationRegistry()
    cfg = GenomeConfig()
    g = minimal_genome(n_features, registry, rng, cfg)
    for _ in range(splits):
        g = mutate_add_node(g, registry, rng)
    for _ in range(links):
        g = mutate_add_connection(g, registry, rng, cfg)
    g = mutate_weights(g, rng, cfg)
    return g
