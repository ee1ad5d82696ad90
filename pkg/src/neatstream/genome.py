"""NEAT genetic encoding.

A genome is a list of node genes plus a list of connection genes, each
connection carrying an innovation number (historical marking) so genomes
with different topologies can be aligned gene-by-gene for crossover and
similarity scoring. Genomes are immutable values: every operator returns a
new genome. The only shared mutable object is the InnovationRegistry, which
hands out markings and deduplicates identical structural mutations within a
generation.

Networks are restricted to feed-forward: the digraph over enabled
connections is kept acyclic by every operator.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from random import Random
from typing import NamedTuple

from neatstream.errors import (
    CorruptGenomeError,
    IncompatibleGenomeError,
    InvalidDimensionError,
    ParseError,
)


class NodeKind(Enum):
    INPUT = "input"
    BIAS = "bias"
    HIDDEN = "hidden"
    OUTPUT = "output"


class NodeGene(NamedTuple):
    id: int
    kind: NodeKind


class ConnectionGene(NamedTuple):
    in_node: int
    out_node: int
    weight: float
    enabled: bool
    innovation: int


@dataclass
class GenomeConfig:
    """Mutation rates, weight ranges, and distance coefficients.

    Defaults are the canonical NEAT values; everything is overridable.
    """

    p_weight_mutate: float = 0.8
    p_perturb: float = 0.9
    perturb_std: float = 0.5
    p_add_connection: float = 0.05
    p_add_node: float = 0.03
    p_keep_disabled: float = 0.75
    weight_init_range: tuple[float, float] = (-1.0, 1.0)
    weight_clamp: tuple[float, float] = (-8.0, 8.0)
    c_excess: float = 1.0
    c_disjoint: float = 1.0
    c_weight: float = 0.4
    # below this many connection genes (in both genomes) the distance
    # normalizer N is fixed to 1
    small_genome_size: int = 20


@dataclass
class Genome:
    """Immutable-by-convention network encoding.

    ``nodes`` is sorted by id, ``connections`` by innovation number.
    ``historical_fitness`` carries the previous window's fitness for the
    history-discounted fitness variant; ``species_id`` is bookkeeping set by
    speciation. The underscore fields are lazily built caches of derived
    data; none of the bookkeeping participates in value equality.
    """

    nodes: tuple[NodeGene, ...]
    connections: tuple[ConnectionGene, ...]
    historical_fitness: float = 0.0
    species_id: int | None = field(default=None, compare=False)
    _network: object = field(default=None, compare=False, repr=False, init=False)
    _weight_index: dict | None = field(default=None, compare=False, repr=False, init=False)

    @property
    def n_inputs(self) -> int:
        return sum(1 for n in self.nodes if n.kind is NodeKind.INPUT)

    def input_ids(self) -> list[int]:
        return sorted(n.id for n in self.nodes if n.kind is NodeKind.INPUT)

    def bias_id(self) -> int:
        return next(n.id for n in self.nodes if n.kind is NodeKind.BIAS)

    def output_id(self) -> int:
        return next(n.id for n in self.nodes if n.kind is NodeKind.OUTPUT)

    def node_ids(self) -> set[int]:
        return {n.id for n in self.nodes}

    def innovations(self) -> set[int]:
        return {c.innovation for c in self.connections}

    def weight_index(self) -> dict[int, float]:
        idx = self._weight_index
        if idx is None:
            idx = {c.innovation: c.weight for c in self.connections}
            self._weight_index = idx
        return idx

    def copy(self) -> "Genome":
        """Value-identical copy that keeps the derived-data caches."""
        twin = replace(self)
        twin._network = self._network
        twin._weight_index = self._weight_index
        return twin


class InnovationRegistry:
    """Allocates node ids and innovation numbers.

    Identical structural mutations within one generation must receive
    identical markings, so both allocation paths are memoized; the memos
    are cleared by ``begin_generation``. All structural mutation calls in a
    generation must be serialized through one registry instance.
    """

    def __init__(self) -> None:
        self.next_innovation = 1
        self.next_node_id = 0
        self.connection_memo: dict[tuple[int, int], int] = {}
        self.split_memo: dict[int, tuple[int, int, int]] = {}

    def begin_generation(self) -> None:
        self.connection_memo.clear()
        self.split_memo.clear()

    def reserve_node_ids(self, floor: int) -> None:
        if floor > self.next_node_id:
            self.next_node_id = floor

    def connection_innovation(self, in_node: int, out_node: int) -> int:
        key = (in_node, out_node)
        hit = self.connection_memo.get(key)
        if hit is not None:
            return hit
        marking = self.next_innovation
        self.next_innovation += 1
        self.connection_memo[key] = marking
        return marking

    def split_innovations(
        self, innovation: int, in_node: int, out_node: int
    ) -> tuple[int, int, int]:
        """Return (new node id, in-connection marking, out-connection marking)
        for splitting the connection identified by ``innovation``."""
        hit = self.split_memo.get(innovation)
        if hit is not None:
            return hit
        node_id = self.next_node_id
        self.next_node_id += 1
        entry = (
            node_id,
            self.connection_innovation(in_node, node_id),
            self.connection_innovation(node_id, out_node),
        )
        self.split_memo[innovation] = entry
        return entry


# ---------------------------------------------------------------------------
# graph helpers

def _path_exists(adjacency: dict[int, list[int]], start: int, target: int) -> bool:
    if start == target:
        return True
    seen = set()
    stack = [start]
    while stack:
        node = stack.pop()
        if node == target:
            return True
        if node in seen:
            continue
        seen.add(node)
        stack.extend(adjacency.get(node, ()))
    return False


def _reachable_from(adjacency: dict[int, list[int]], start: int) -> set[int]:
    seen: set[int] = set()
    stack = list(adjacency.get(start, ()))
    while stack:
        node = stack.pop()
        if node in seen:
            continue
        seen.add(node)
        stack.extend(adjacency.get(node, ()))
    return seen


def _enabled_adjacency(connections) -> dict[int, list[int]]:
    adjacency: dict[int, list[int]] = {}
    for c in connections:
        if c.enabled:
            adjacency.setdefault(c.in_node, []).append(c.out_node)
    return adjacency


def _enabled_is_acyclic(genes) -> bool:
    """Kahn's algorithm over the enabled subgraph."""
    indegree: dict[int, int] = {}
    successors: dict[int, list[int]] = {}
    for g in genes:
        if g.enabled:
            successors.setdefault(g.in_node, []).append(g.out_node)
            indegree[g.out_node] = indegree.get(g.out_node, 0) + 1
            indegree.setdefault(g.in_node, 0)
    ready = [nid for nid, d in indegree.items() if d == 0]
    seen = 0
    while ready:
        nid = ready.pop()
        seen += 1
        for succ in successors.get(nid, ()):
            indegree[succ] -= 1
            if indegree[succ] == 0:
                ready.append(succ)
    return seen == len(indegree)


def _enforce_acyclic(genes: list[ConnectionGene]) -> list[ConnectionGene]:
    """Disable any gene that would close a cycle among enabled connections.

    Genes are checked in innovation order, so when two genes conflict the
    later marking loses; the result is deterministic. The quadratic repair
    walk only runs when a fast whole-graph check fails.
    """
    if _enabled_is_acyclic(genes):
        return genes
    adjacency: dict[int, list[int]] = {}
    out = []
    for gene in genes:
        if gene.enabled and _path_exists(adjacency, gene.out_node, gene.in_node):
            gene = gene._replace(enabled=False)
        if gene.enabled:
            adjacency.setdefault(gene.in_node, []).append(gene.out_node)
        out.append(gene)
    return out


def validate_genome(genome: Genome) -> None:
    """Raise CorruptGenomeError on any structural invariant violation."""
    ids = [n.id for n in genome.nodes]
    if len(ids) != len(set(ids)):
        raise CorruptGenomeError("duplicate node ids")
    kinds = [n.kind for n in genome.nodes]
    if kinds.count(NodeKind.BIAS) != 1 or kinds.count(NodeKind.OUTPUT) != 1:
        raise CorruptGenomeError("genome must have exactly one bias and one output node")
    if kinds.count(NodeKind.INPUT) < 1:
        raise CorruptGenomeError("genome has no input nodes")
    id_set = set(ids)
    non_targets = {
        n.id for n in genome.nodes if n.kind in (NodeKind.INPUT, NodeKind.BIAS)
    }
    innovations = [c.innovation for c in genome.connections]
    if len(innovations) != len(set(innovations)):
        raise CorruptGenomeError("duplicate innovation numbers")
    if innovations != sorted(innovations):
        raise CorruptGenomeError("connections not sorted by innovation")
    pairs = [(c.in_node, c.out_node) for c in genome.connections]
    if len(pairs) != len(set(pairs)):
        raise CorruptGenomeError("duplicate (in, out) connection pair")
    for c in genome.connections:
        if c.in_node not in id_set or c.out_node not in id_set:
            raise CorruptGenomeError(f"connection {c.innovation} references a missing node")
        if c.out_node in non_targets:
            raise CorruptGenomeError(f"connection {c.innovation} targets an input or bias node")
    if not _enabled_is_acyclic(genome.connections):
        raise CorruptGenomeError("enabled connections form a cycle")


# ---------------------------------------------------------------------------
# constructors and operators

def minimal_genome(
    n_features: int,
    registry: InnovationRegistry,
    rng: Random,
    config: GenomeConfig | None = None,
) -> Genome:
    """Fully-connected perceptron genome: inputs and bias wired to the output.

    Node ids are 0..n_features-1 for inputs, n_features for the bias, and
    n_features+1 for the output; hidden ids are allocated later by the
    registry.
    """
    if n_features < 1:
        raise InvalidDimensionError(f"n_features must be >= 1, got {n_features}")
    config = config or GenomeConfig()
    bias_id = n_features
    output_id = n_features + 1
    registry.reserve_node_ids(n_features + 2)
    nodes = tuple(
        [NodeGene(i, NodeKind.INPUT) for i in range(n_features)]
        + [NodeGene(bias_id, NodeKind.BIAS), NodeGene(output_id, NodeKind.OUTPUT)]
    )
    lo, hi = config.weight_init_range
    connections = []
    for src in list(range(n_features)) + [bias_id]:
        marking = registry.connection_innovation(src, output_id)
        connections.append(
            ConnectionGene(src, output_id, rng.uniform(lo, hi), True, marking)
        )
    connections.sort(key=lambda c: c.innovation)
    return Genome(nodes=nodes, connections=tuple(connections))


def mutate_weights(genome: Genome, rng: Random, config: GenomeConfig) -> Genome:
    """Perturb or replace connection weights; topology is untouched."""
    clamp_lo, clamp_hi = config.weight_clamp
    init_lo, init_hi = config.weight_init_range
    p_mutate = config.p_weight_mutate
    p_perturb = config.p_perturb
    std = config.perturb_std
    random_ = rng.random
    out = []
    touched = False
    for c in genome.connections:
        if random_() < p_mutate:
            if random_() < p_perturb:
                w = c.weight + rng.gauss(0.0, std)
            else:
                w = rng.uniform(init_lo, init_hi)
            if w > clamp_hi:
                w = clamp_hi
            elif w < clamp_lo:
                w = clamp_lo
            out.append(ConnectionGene(c.in_node, c.out_node, w, c.enabled, c.innovation))
            touched = True
        else:
            out.append(c)
    if not touched:
        return genome
    return Genome(
        nodes=genome.nodes,
        connections=tuple(out),
        historical_fitness=genome.historical_fitness,
    )


def mutate_add_connection(
    genome: Genome,
    registry: InnovationRegistry,
    rng: Random,
    config: GenomeConfig,
) -> Genome:
    """Add one enabled connection between previously unconnected nodes.

    Candidates targeting input/bias nodes or closing a directed cycle are
    excluded; if no legal candidate exists the genome is returned unchanged.
    """
    existing = {(c.in_node, c.out_node) for c in genome.connections}
    adjacency = _enabled_adjacency(genome.connections)
    targets = sorted(
        n.id for n in genome.nodes if n.kind in (NodeKind.HIDDEN, NodeKind.OUTPUT)
    )
    sources = sorted(n.id for n in genome.nodes)
    # src -> dst cycles iff src is already reachable from dst
    reach = {dst: _reachable_from(adjacency, dst) for dst in targets}
    candidates = [
        (src, dst)
        for src in sources
        for dst in targets
        if src != dst and (src, dst) not in existing and src not in reach[dst]
    ]
    if not candidates:
        return genome
    src, dst = rng.choice(candidates)
    marking = registry.connection_innovation(src, dst)
    gene = ConnectionGene(
        src, dst, rng.uniform(*config.weight_init_range), True, marking
    )
    connections = tuple(
        sorted(genome.connections + (gene,), key=lambda c: c.innovation)
    )
    return Genome(
        nodes=genome.nodes,
        connections=connections,
        historical_fitness=genome.historical_fitness,
    )


def mutate_add_node(
    genome: Genome, registry: InnovationRegistry, rng: Random
) -> Genome:
    """Split a uniformly chosen enabled connection with a new hidden node.

    The old connection is disabled; the in-connection gets weight 1.0 and
    the out-connection inherits the old weight, so the composed path starts
    close to the original function. Repeated splits of the same connection
    within a generation reuse the memoized node id and markings; if those
    genes already exist in this genome they are re-enabled instead of
    duplicated.
    """
    enabled = [c for c in genome.connections if c.enabled]
    if not enabled:
        return genome
    target = rng.choice(enabled)
    node_id, marking_in, marking_out = registry.split_innovations(
        target.innovation, target.in_node, target.out_node
    )
    by_marking = {c.innovation: c for c in genome.connections}
    by_marking[target.innovation] = target._replace(enabled=False)
    held_in = by_marking.get(marking_in)
    by_marking[marking_in] = (
        held_in._replace(enabled=True)
        if held_in is not None
        else ConnectionGene(target.in_node, node_id, 1.0, True, marking_in)
    )
    held_out = by_marking.get(marking_out)
    by_marking[marking_out] = (
        held_out._replace(enabled=True)
        if held_out is not None
        else ConnectionGene(node_id, target.out_node, target.weight, True, marking_out)
    )
    genes = _enforce_acyclic([by_marking[k] for k in sorted(by_marking)])
    nodes = genome.nodes
    if node_id not in genome.node_ids():
        nodes = tuple(
            sorted(nodes + (NodeGene(node_id, NodeKind.HIDDEN),), key=lambda n: n.id)
        )
    return Genome(
        nodes=nodes,
        connections=tuple(genes),
        historical_fitness=genome.historical_fitness,
    )


def crossover(
    parent_a: Genome,
    parent_b: Genome,
    fitness_a: float,
    fitness_b: float,
    rng: Random,
    config: GenomeConfig,
) -> Genome:
    """Align parents by innovation number and recombine.

    Matching genes are inherited from a random parent; disjoint and excess
    genes come from the fitter parent (from both, once each, on a fitness
    tie). A gene disabled in either parent stays disabled in the child with
    probability ``p_keep_disabled``. The child inherits the fitter parent's
    historical fitness (parent_a on ties) and is kept acyclic.
    """
    if parent_a.n_inputs != parent_b.n_inputs:
        raise IncompatibleGenomeError(
            f"parents have {parent_a.n_inputs} and {parent_b.n_inputs} inputs"
        )
    genes_a = {c.innovation: c for c in parent_a.connections}
    genes_b = {c.innovation: c for c in parent_b.connections}
    take_a = fitness_a >= fitness_b
    take_b = fitness_b >= fitness_a
    random_ = rng.random

    child_genes = []
    for marking in sorted(genes_a.keys() | genes_b.keys()):
        gene_a = genes_a.get(marking)
        gene_b = genes_b.get(marking)
        if gene_a is not None and gene_b is not None:
            gene = gene_a if random_() < 0.5 else gene_b
            disabled_somewhere = not (gene_a.enabled and gene_b.enabled)
        elif gene_a is not None:
            if not take_a:
                continue
            gene = gene_a
            disabled_somewhere = not gene.enabled
        else:
            if not take_b:
                continue
            gene = gene_b
            disabled_somewhere = not gene.enabled
        enabled = True
        if disabled_somewhere:
            enabled = random_() >= config.p_keep_disabled
        if gene.enabled != enabled:
            gene = gene._replace(enabled=enabled)
        child_genes.append(gene)
    child_genes = _enforce_acyclic(child_genes)

    node_table = {n.id: n for n in parent_b.nodes}
    node_table.update({n.id: n for n in parent_a.nodes})
    needed = {
        n.id
        for n in parent_a.nodes
        if n.kind is not NodeKind.HIDDEN
    }
    for gene in child_genes:
        needed.add(gene.in_node)
        needed.add(gene.out_node)
    nodes = tuple(node_table[nid] for nid in sorted(needed))
    inherited = (
        parent_b.historical_fitness
        if fitness_b > fitness_a
        else parent_a.historical_fitness
    )
    return Genome(
        nodes=nodes,
        connections=tuple(child_genes),
        historical_fitness=inherited,
    )


def compatibility_distance(
    a: Genome, b: Genome, config: GenomeConfig | None = None
) -> float:
    """Weighted sum of excess genes, disjoint genes, and mean weight gap.

    Gene counts are divided by the larger genome's connection count, except
    that the normalizer is 1 when both genomes are small.
    """
    config = config or GenomeConfig()
    weights_a = a.weight_index()
    weights_b = b.weight_index()
    if not weights_a and not weights_b:
        return 0.0
    cutoff = min(
        max(weights_a) if weights_a else 0,
        max(weights_b) if weights_b else 0,
    )
    excess = disjoint = 0
    for marking in weights_a.keys() ^ weights_b.keys():
        if marking > cutoff:
            excess += 1
        else:
            disjoint += 1
    matching = sorted(weights_a.keys() & weights_b.keys())
    mean_gap = (
        sum(abs(weights_a[m] - weights_b[m]) for m in matching) / len(matching)
        if matching
        else 0.0
    )
    normalizer = max(len(weights_a), len(weights_b))
    if (
        len(weights_a) < config.small_genome_size
        and len(weights_b) < config.small_genome_size
    ):
        normalizer = 1
    return (
        config.c_excess * excess / normalizer
        + config.c_disjoint * disjoint / normalizer
        + config.c_weight * mean_gap
    )


# ---------------------------------------------------------------------------
# serialization (line-oriented text; round-trips exactly)

_KIND_BY_NAME = {k.value: k for k in NodeKind}


def genome_to_text(genome: Genome) -> str:
    lines = [
        f"genome {len(genome.nodes)} {len(genome.connections)} "
        f"{genome.historical_fitness:.17g}"
    ]
    for n in sorted(genome.nodes, key=lambda n: n.id):
        lines.append(f"node {n.id} {n.kind.value}")
    for c in genome.connections:
        lines.append(
            f"conn {c.in_node} {c.out_node} {c.weight:.17g} "
            f"{1 if c.enabled else 0} {c.innovation}"
        )
    return "\n".join(lines) + "\n"


def genome_from_text(text: str) -> Genome:
    lines = text.splitlines()
    if not lines:
        raise ParseError("empty genome text", 1)
    head = lines[0].split()
    if len(head) != 4 or head[0] != "genome":
        raise ParseError("expected header 'genome <n_nodes> <n_conns> <fitness>'", 1)
    try:
        n_nodes, n_conns = int(head[1]), int(head[2])
        historical = float(head[3])
    except ValueError:
        raise ParseError("malformed genome header", 1) from None
    if len(lines) < 1 + n_nodes + n_conns:
        raise ParseError(
            f"expected {n_nodes} node and {n_conns} conn lines", len(lines)
        )
    nodes = []
    for i in range(n_nodes):
        lineno = 2 + i
        parts = lines[1 + i].split()
        if len(parts) != 3 or parts[0] != "node":
            raise ParseError("expected 'node <id> <kind>'", lineno)
        kind = _KIND_BY_NAME.get(parts[2])
        if kind is None:
            raise ParseError(f"unknown node kind {parts[2]!r}", lineno)
        try:
            nodes.append(NodeGene(int(parts[1]), kind))
        except ValueError:
            raise ParseError("node id must be an integer", lineno) from None
    connections = []
    for i in range(n_conns):
        lineno = 2 + n_nodes + i
        parts = lines[1 + n_nodes + i].split()
        if len(parts) != 6 or parts[0] != "conn":
            raise ParseError(
                "expected 'conn <in> <out> <weight> <enabled> <innovation>'", lineno
            )
        try:
            connections.append(
                ConnectionGene(
                    int(parts[1]),
                    int(parts[2]),
                    float(parts[3]),
                    parts[4] == "1",
                    int(parts[5]),
                )
            )
        except ValueError:
            raise ParseError("malformed connection gene", lineno) from None
    genome = Genome(
        nodes=tuple(sorted(nodes, key=lambda n: n.id)),
        connections=tuple(sorted(connections, key=lambda c: c.innovation)),
        historical_fitness=historical,
    )
    validate_genome(genome)
    return genome


def save_genome(genome: Genome, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(genome_to_text(genome))


def load_genome(path) -> Genome:
    with open(path, "r", encoding="utf-8") as fh:
        return genome_from_text(fh.read())
