"""Compare the compiled scoring kernel against the pure-Python fallback.

Builds a realistically-sized evolved genome, scores a synthetic window with
both backends, verifies they agree bit-for-bit, and reports throughput.

    python3 benchmarks/benchmark_kernels.py [--records 20000] [--repeats 5]
"""

import argparse
import time
from random import Random

import numpy as np

from neatstream import _kernels_py
from neatstream.genome import (
    GenomeConfig,
    InnovationRegistry,
    minimal_genome,
    mutate_add_connection,
    mutate_add_node,
    mutate_weights,
)
from neatstream.network import compile_network

try:
    from neatstream import _kernels
except ImportError:
    _kernels = None


def grown_network(n_features, splits, links, seed=0):
    rng = Random(seed)
    registry = InnovationRegistry()
    cfg = GenomeConfig()
    genome = minimal_genome(n_features, registry, rng, cfg)
    for _ in range(splits):
        genome = mutate_add_node(genome, registry, rng)
    for _ in range(links):
        genome = mutate_add_connection(genome, registry, rng, cfg)
    genome = mutate_weights(genome, rng, cfg)
    return genome, compile_network(genome)


def bench(impl, net, features, labels, loans, interests, repeats):
    args = (
        net.offsets, net.sources, net.weights,
        net.n_inputs, net.output_slot, net.n_slots,
    )
    best = float("inf")
    result = None
    for _ in range(repeats):
        start = time.perf_counter()
        result = impl.confusion_profit(*args, features, labels, loans, interests, 0.5)
        best = min(best, time.perf_counter() - start)
    return best, result


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--records", type=int, default=20_000)
    parser.add_argument("--features", type=int, default=8)
    parser.add_argument("--splits", type=int, default=10)
    parser.add_argument("--links", type=int, default=10)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    genome, net = grown_network(args.features, args.splits, args.links)
    gen = np.random.default_rng(0)
    features = np.ascontiguousarray(gen.uniform(0, 1, size=(args.records, args.features)))
    labels = gen.integers(0, 2, size=args.records).astype(np.int8)
    loans = gen.uniform(1000, 40_000, size=args.records)
    interests = gen.uniform(50, 12_000, size=args.records)

    print(f"genome: {len(genome.nodes)} nodes, {len(genome.connections)} connections "
          f"({sum(1 for c in genome.connections if c.enabled)} enabled)")
    print(f"window: {args.records} records x {args.features} features\n")

    py_time, py_result = bench(
        _kernels_py, net, features, labels, loans, interests, args.repeats
    )
    rate = args.records / py_time
    print(f"python backend: {py_time * 1e3:9.2f} ms  ({rate:,.0f} records/s)")

    if _kernels is None:
        print("cython backend: not built (pip install -e . rebuilds it)")
        return

    cy_time, cy_result = bench(
        _kernels, net, features, labels, loans, interests, args.repeats
    )
    rate = args.records / cy_time
    print(f"cython backend: {cy_time * 1e3:9.2f} ms  ({rate:,.0f} records/s)")
    print(f"\nspeedup: {py_time / cy_time:.1f}x")

    assert py_result[:4] == cy_result[:4], "backends disagree on counts"
    assert py_result[4] == cy_result[4], "backends disagree on profit"
    print("backends agree bit-for-bit on counts and profit")


if __name__ == "__main__":
    main()
