"""Compile a genome into an executable feed-forward network.

Compilation resolves the enabled subgraph to a topological evaluation order
and flat arrays the scoring kernels can walk without touching genome
objects. Networks are immutable after compilation and safe to share across
threads.
"""

from __future__ import annotations

import heapq
import math

import numpy as np

from neatstream.errors import CorruptGenomeError, InvalidInputError
from neatstream.genome import Genome, NodeKind

# slope of the steepened sigmoid applied at every non-input node
SIGMOID_SLOPE = 4.9
# pre-activation clamp keeping scores strictly inside (0, 1) in float64
PREACT_LIMIT = 35.0

DEFAULT_THRESHOLD = 0.5


class Network:
    """Executable phenotype: evaluation order plus per-node incoming lists.

    ``evaluation_order`` lists hidden and output node ids so that every node
    appears after all of its sources; ``incoming`` maps those ids to
    (source id, weight) pairs over enabled connections only. The flat
    ``offsets``/``sources``/``weights`` arrays are the same data in dense
    slot indexing for the batch kernels: inputs occupy slots 0..n_inputs-1
    (in ascending node-id order), the bias sits at slot n_inputs, and
    evaluated nodes follow in evaluation order.
    """

    __slots__ = (
        "n_inputs",
        "evaluation_order",
        "incoming",
        "output_node",
        "offsets",
        "sources",
        "weights",
        "output_slot",
        "n_slots",
    )

    def __init__(self, n_inputs, evaluation_order, incoming, output_node,
                 offsets, sources, weights, output_slot, n_slots):
        self.n_inputs = n_inputs
        self.evaluation_order = evaluation_order
        self.incoming = incoming
        self.output_node = output_node
        self.offsets = offsets
        self.sources = sources
        self.weights = weights
        self.output_slot = output_slot
        self.n_slots = n_slots


def _topological_order(genome: Genome) -> list[int]:
    """Kahn's algorithm over enabled connections, smallest-id-first so the
    order is canonical; raises if a cycle survives."""
    ids = sorted(genome.node_ids())
    indegree = {nid: 0 for nid in ids}
    successors: dict[int, list[int]] = {nid: [] for nid in ids}
    for c in genome.connections:
        if c.enabled:
            successors[c.in_node].append(c.out_node)
            indegree[c.out_node] += 1
    ready = [nid for nid in ids if indegree[nid] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        nid = heapq.heappop(ready)
        order.append(nid)
        for succ in sorted(successors[nid]):
            indegree[succ] -= 1
            if indegree[succ] == 0:
                heapq.heappush(ready, succ)
    if len(order) != len(ids):
        raise CorruptGenomeError("cycle detected in enabled connections")
    return order


def compile_network(genome: Genome) -> Network:
    """Build the executable network for the enabled subgraph of ``genome``."""
    kind_of = {n.id: n.kind for n in genome.nodes}
    order = _topological_order(genome)
    evaluation_order = [
        nid for nid in order if kind_of[nid] in (NodeKind.HIDDEN, NodeKind.OUTPUT)
    ]
    incoming: dict[int, list[tuple[int, float]]] = {nid: [] for nid in evaluation_order}
    for c in genome.connections:
        if c.enabled:
            incoming[c.out_node].append((c.in_node, c.weight))

    input_ids = genome.input_ids()
    n_inputs = len(input_ids)
    slot = {nid: i for i, nid in enumerate(input_ids)}
    slot[genome.bias_id()] = n_inputs
    for k, nid in enumerate(evaluation_order):
        slot[nid] = n_inputs + 1 + k

    offsets = np.zeros(len(evaluation_order) + 1, dtype=np.int32)
    sources = []
    weights = []
    for k, nid in enumerate(evaluation_order):
        for src, w in incoming[nid]:
            sources.append(slot[src])
            weights.append(w)
        offsets[k + 1] = len(sources)
    return Network(
        n_inputs=n_inputs,
        evaluation_order=evaluation_order,
        incoming=incoming,
        output_node=genome.output_id(),
        offsets=offsets,
        sources=np.asarray(sources, dtype=np.int32),
        weights=np.asarray(weights, dtype=np.float64),
        output_slot=slot[genome.output_id()],
        n_slots=n_inputs + 1 + len(evaluation_order),
    )


def network_for(genome: Genome) -> Network:
    """Compiled network for ``genome``, cached on the genome object."""
    net = genome._network
    if net is None:
        net = compile_network(genome)
        genome._network = net
    return net


def activate(network: Network, features) -> float:
    """Score one feature vector; returns the output-node value in (0, 1).

    Reference implementation of the node update: weighted sum of incoming
    values, scaled by SIGMOID_SLOPE, clamped, then the logistic function.
    The batch kernels follow the identical operation order.
    """
    if len(features) != network.n_inputs:
        raise InvalidInputError(
            f"expected {network.n_inputs} features, got {len(features)}"
        )
    values = [0.0] * network.n_slots
    for i, x in enumerate(features):
        x = float(x)
        if not math.isfinite(x):
            raise InvalidInputError(f"feature {i} is not finite")
        values[i] = x
    values[network.n_inputs] = 1.0
    offsets = network.offsets
    sources = network.sources
    weights = network.weights
    base = network.n_inputs + 1
    for k in range(len(network.evaluation_order)):
        total = 0.0
        for e in range(offsets[k], offsets[k + 1]):
            total += values[sources[e]] * weights[e]
        z = SIGMOID_SLOPE * total
        if z > PREACT_LIMIT:
            z = PREACT_LIMIT
        elif z < -PREACT_LIMIT:
            z = -PREACT_LIMIT
        values[base + k] = 1.0 / (1.0 + math.exp(-z))
    return values[network.output_slot]


def classify(score: float, threshold: float = DEFAULT_THRESHOLD) -> int:
    """Map a score to a class label: 1 (positive) iff score >= threshold."""
    if not 0.0 <= threshold <= 1.0:
        raise InvalidInputError(f"threshold must be in [0, 1], got {threshold}")
    return 1 if score >= threshold else 0
