# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled scoring kernels.

Semantics must stay in lockstep with _kernels_py.py and network.activate:
same slope, same pre-activation clamp, same accumulation order, so both
backends produce bit-identical scores.
"""

from libc.math cimport exp

import numpy as np

DEF SLOPE = 4.9
DEF LIMIT = 35.0


cdef inline double _forward(const int[:] offsets, const int[:] sources,
                            const double[:] weights, double[::1] values,
                            int n_inputs, int n_eval, int output_slot) noexcept nogil:
    cdef int k, e
    cdef double total, z
    for k in range(n_eval):
        total = 0.0
        for e in range(offsets[k], offsets[k + 1]):
            total += values[sources[e]] * weights[e]
        z = SLOPE * total
        if z > LIMIT:
            z = LIMIT
        elif z < -LIMIT:
            z = -LIMIT
        values[n_inputs + 1 + k] = 1.0 / (1.0 + exp(-z))
    return values[output_slot]


def score_batch(const int[:] offsets, const int[:] sources, const double[:] weights,
                int n_inputs, int output_slot, int n_slots,
                const double[:, :] features):
    """Score every row of ``features``; returns a float64 array."""
    cdef int n = features.shape[0]
    cdef int n_eval = offsets.shape[0] - 1
    out_arr = np.empty(n, dtype=np.float64)
    scratch = np.zeros(n_slots, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double[::1] values = scratch
    cdef int r, j
    with nogil:
        for r in range(n):
            for j in range(n_inputs):
                values[j] = features[r, j]
            values[n_inputs] = 1.0
            out[r] = _forward(offsets, sources, weights, values,
                              n_inputs, n_eval, output_slot)
    return out_arr


def confusion_profit(const int[:] offsets, const int[:] sources, const double[:] weights,
                     int n_inputs, int output_slot, int n_slots,
                     const double[:, :] features, const signed char[:] labels,
                     const double[:] loans, const double[:] interests,
                     double threshold):
    """Tally TP/FN/FP/TN and summed loan profit in one pass.

    Positive prediction iff score >= threshold. Profit per record: +interest
    for a correctly approved good loan, -interest for a rejected good loan,
    -loan for an approved default, +loan for a rejected default.
    """
    cdef int n = features.shape[0]
    cdef int n_eval = offsets.shape[0] - 1
    scratch = np.zeros(n_slots, dtype=np.float64)
    cdef double[::1] values = scratch
    cdef long tp = 0, fn = 0, fp = 0, tn = 0
    cdef double profit = 0.0, score
    cdef int r, j
    cdef bint pred
    with nogil:
        for r in range(n):
            for j in range(n_inputs):
                values[j] = features[r, j]
            values[n_inputs] = 1.0
            score = _forward(offsets, sources, weights, values,
                             n_inputs, n_eval, output_slot)
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
