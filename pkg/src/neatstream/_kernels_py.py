"""Pure-Python scoring kernels, the fallback when the compiled module is
unavailable. Must stay in lockstep with _kernels.pyx: same slope, same
clamp, same accumulation order, so both backends give bit-identical scores.
"""

from __future__ import annotations

import math

import numpy as np

_SLOPE = 4.9
_LIMIT = 35.0


def _forward(offsets, sources, weights, values, n_inputs, n_eval, output_slot):
    for k in range(n_eval):
        total = 0.0
        lo, hi = offsets[k], offsets[k + 1]
        for e in range(lo, hi):
            total += values[sources[e]] * weights[e]
        z = _SLOPE * total
        if z > _LIMIT:
            z = _LIMIT
        elif z < -_LIMIT:
            z = -_LIMIT
        values[n_inputs + 1 + k] = 1.0 / (1.0 + math.exp(-z))
    return values[output_slot]


def score_batch(offsets, sources, weights, n_inputs, output_slot, n_slots, features):
    offsets = offsets.tolist()
    sources = sources.tolist()
    weights = weights.tolist()
    rows = features.tolist()
    n_eval = len(offsets) - 1
    values = [0.0] * n_slots
    values[n_inputs] = 1.0
    out = np.empty(len(rows), dtype=np.float64)
    for r, row in enumerate(rows):
        values[:n_inputs] = row
        out[r] = _forward(offsets, sources, weights, values, n_inputs, n_eval, output_slot)
    return out


def confusion_profit(offsets, sources, weights, n_inputs, output_slot, n_slots,
                     features, labels, loans, interests, threshold):
    offsets = offsets.tolist()
    sources = sources.tolist()
    weights = weights.tolist()
    rows = features.tolist()
    labels = labels.tolist()
    loans = loans.tolist()
    interests = interests.tolist()
    n_eval = len(offsets) - 1
    values = [0.0] * n_slots
    values[n_inputs] = 1.0
    tp = fn = fp = tn = 0
    profit = 0.0
    for r, row in enumerate(rows):
        values[:n_inputs] = row
        score = _forward(offsets, sources, weights, values, n_inputs, n_eval, output_slot)
        pred = score >= threshold
        if labels[r]:
            if pred:
                tp += 1
                profit += interests[r]
            else:
                fn += 1
                profit -= interests[r]
        else:
            if pred:
                fp += 1
                profit -= loans[r]
            else:
                tn += 1
                profit += loans[r]
    return tp, fn, fp, tn, profit
