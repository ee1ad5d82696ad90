"""Backend selection for the hot scoring kernels.

The compiled Cython module is preferred; the pure-Python twin is used when
the extension is missing or when NEATSTREAM_PURE_PYTHON is set in the
environment. Both implement identical semantics (see the parity tests), so
the choice affects speed only.
"""

from __future__ import annotations

import os

import numpy as np

if os.environ.get("NEATSTREAM_PURE_PYTHON"):
    from neatstream import _kernels_py as _impl

    BACKEND = "python"
else:
    try:
        from neatstream import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        from neatstream import _kernels_py as _impl

        BACKEND = "python"


def backend_name() -> str:
    return BACKEND


def score_batch(network, features: np.ndarray) -> np.ndarray:
    """Score every row of ``features`` (n_records x n_inputs float64)."""
    features = np.ascontiguousarray(features, dtype=np.float64)
    return _impl.score_batch(
        network.offsets,
        network.sources,
        network.weights,
        network.n_inputs,
        network.output_slot,
        network.n_slots,
        features,
    )


def confusion_profit(
    network,
    features: np.ndarray,
    labels: np.ndarray,
    loans: np.ndarray,
    interests: np.ndarray,
    threshold: float,
) -> tuple[int, int, int, int, float]:
    """One evaluation pass: (tp, fn, fp, tn, summed profit)."""
    features = np.ascontiguousarray(features, dtype=np.float64)
    tp, fn, fp, tn, profit = _impl.confusion_profit(
        network.offsets,
        network.sources,
        network.weights,
        network.n_inputs,
        network.output_slot,
        network.n_slots,
        features,
        labels,
        loans,
        interests,
        threshold,
    )
    return int(tp), int(fn), int(fp), int(tn), float(profit)
