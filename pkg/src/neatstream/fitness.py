"""Confusion-matrix metrics and the four fitness functions.

Positive class = fully-paid loan, negative class = default. The four
fitness variants are:

  acc  overall accuracy
  pan  recall + specificity (per-class accuracies summed, range [0, 2])
  pro  summed loan profit over the window
  pap  alpha * profit(current window) + beta * previous-window fitness

Denominator conventions: recall is 1.0 when the window has no positives,
specificity is 1.0 when it has no negatives (no phantom errors on an absent
class). Pure-class windows do occur in practice, so both conventions are
load-bearing.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from neatstream import kernels
from neatstream.errors import (
    ConfigError,
    InvalidInputError,
    InvalidRecordError,
    NoDataError,
)
from neatstream.genome import Genome
from neatstream.network import DEFAULT_THRESHOLD, network_for


class FitnessKind(str, Enum):
    ACC = "acc"
    PAN = "pan"
    PRO = "pro"
    PAP = "pap"


@dataclass(frozen=True)
class FitnessSpec:
    kind: FitnessKind
    alpha: float = 1e-6
    beta: float = 0.0

    def __post_init__(self):
        if self.kind is FitnessKind.PAP and self.alpha <= 0:
            raise ConfigError("alpha must be positive for the pap fitness")


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fn: int
    fp: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fn + self.fp + self.tn


@dataclass(frozen=True)
class Metrics:
    accuracy: float
    recall: float
    specificity: float
    profit: float = 0.0


def _window_pass(genome: Genome, window, threshold: float):
    if len(window.records) == 0:
        raise NoDataError(f"window {window.index} is empty")
    network = network_for(genome)
    if network.n_inputs != window.n_features:
        raise InvalidInputError(
            f"genome expects {network.n_inputs} features, "
            f"window has {window.n_features}"
        )
    return kernels.confusion_profit(
        network,
        window.features,
        window.labels,
        window.loans,
        window.interests,
        threshold,
    )


def confusion(genome: Genome, window, threshold: float = DEFAULT_THRESHOLD) -> ConfusionCounts:
    """Tally the genome's predictions on every record of the window."""
    tp, fn, fp, tn, _ = _window_pass(genome, window, threshold)
    return ConfusionCounts(tp, fn, fp, tn)


def classification_metrics(counts: ConfusionCounts) -> Metrics:
    """Accuracy, recall, and specificity from raw counts."""
    if counts.total == 0:
        raise NoDataError("confusion counts are all zero")
    accuracy = (counts.tp + counts.tn) / counts.total
    recall = counts.tp / (counts.tp + counts.fn) if counts.tp + counts.fn else 1.0
    specificity = counts.tn / (counts.tn + counts.fp) if counts.tn + counts.fp else 1.0
    return Metrics(accuracy=accuracy, recall=recall, specificity=specificity)


def record_profit(label: int, prediction: int, loan_amount: float, total_interest: float) -> float:
    """Profit of one lending decision.

    Approving a good loan earns the interest, rejecting it forfeits the
    interest; approving a default loses the principal, rejecting it saves
    the principal.
    """
    if loan_amount < 0 or total_interest < 0:
        raise InvalidRecordError("loan_amount and total_interest must be nonnegative")
    if label == 1:
        return total_interest if prediction == 1 else -total_interest
    return -loan_amount if prediction == 1 else loan_amount


def window_profit(genome: Genome, window, threshold: float = DEFAULT_THRESHOLD) -> float:
    """Summed profit of the genome's decisions over the window."""
    _, _, _, _, profit = _window_pass(genome, window, threshold)
    return profit


def evaluate_metrics(genome: Genome, window, threshold: float = DEFAULT_THRESHOLD) -> Metrics:
    """All ratio metrics plus profit in a single evaluation pass."""
    tp, fn, fp, tn, profit = _window_pass(genome, window, threshold)
    ratios = classification_metrics(ConfusionCounts(tp, fn, fp, tn))
    return Metrics(
        accuracy=ratios.accuracy,
        recall=ratios.recall,
        specificity=ratios.specificity,
        profit=profit,
    )


def fitness_value(
    genome: Genome,
    window,
    spec: FitnessSpec,
    threshold: float = DEFAULT_THRESHOLD,
) -> float:
    """Raw fitness of one genome on one window under the chosen variant.

    For the history-discounted variant (pap) the previous-window term is
    read from ``genome.historical_fitness``; the orchestration layer stores
    the returned value back into the genome at window end.
    """
    tp, fn, fp, tn, profit = _window_pass(genome, window, threshold)
    kind = spec.kind
    if kind is FitnessKind.ACC:
        return (tp + tn) / (tp + fn + fp + tn)
    if kind is FitnessKind.PAN:
        recall = tp / (tp + fn) if tp + fn else 1.0
        specificity = tn / (tn + fp) if tn + fp else 1.0
        return recall + specificity
    if kind is FitnessKind.PRO:
        return profit
    if kind is FitnessKind.PAP:
        return spec.alpha * profit + spec.beta * genome.historical_fitness
    raise ConfigError(f"unknown fitness kind {kind!r}")
