"""Record ingestion, causal feature normalization, and a synthetic stream
generator with controllable drift and class imbalance.

File schema (UTF-8, comma-delimited, header line first):

    id,label,loan_amount,total_interest,f1,...,fk

label is 1 for a fully-paid (positive) loan and 0 for a default; rows are
in ascending time order. Empty feature cells mean "missing" and are imputed
during normalization.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from random import Random

from neatstream.errors import (
    ConfigError,
    InvalidDimensionError,
    ParseError,
)

FIXED_COLUMNS = ("id", "label", "loan_amount", "total_interest")


@dataclass(frozen=True)
class LoanRecord:
    id: str
    label: int  # 1 = fully paid (positive), 0 = default (negative)
    loan_amount: float
    total_interest: float
    features: tuple  # float per feature, or None when missing


class Normalizer:
    """Running per-feature min/max/mean statistics, updated record by record.

    Statistics used for record k depend only on records 1..k-1 plus k's own
    update afterwards, so normalization never looks ahead in the stream.
    """

    def __init__(self, n_features: int):
        if n_features < 1:
            raise InvalidDimensionError("need at least one feature")
        self.n_features = n_features
        self.count = [0] * n_features
        self.minimum = [0.0] * n_features
        self.maximum = [0.0] * n_features
        self.total = [0.0] * n_features

    def _scale(self, j: int, x: float) -> float:
        lo, hi = self.minimum[j], self.maximum[j]
        if self.count[j] == 0 or lo == hi:
            return 0.5
        v = (x - lo) / (hi - lo)
        return min(1.0, max(0.0, v))

    def _observe(self, j: int, x: float) -> None:
        if self.count[j] == 0:
            self.minimum[j] = self.maximum[j] = x
        else:
            if x < self.minimum[j]:
                self.minimum[j] = x
            if x > self.maximum[j]:
                self.maximum[j] = x
        self.total[j] += x
        self.count[j] += 1


def normalize(record: LoanRecord, normalizer: Normalizer) -> tuple[LoanRecord, Normalizer]:
    """Map features into [0, 1] with statistics seen so far, then update them.

    First occurrence of a feature (or a constant one) maps to 0.5; missing
    cells are imputed with the normalized running mean.
    """
    if len(record.features) != normalizer.n_features:
        raise InvalidDimensionError(
            f"record {record.id!r} has {len(record.features)} features, "
            f"normalizer expects {normalizer.n_features}"
        )
    scaled = []
    for j, x in enumerate(record.features):
        if x is None:
            if normalizer.count[j] == 0:
                scaled.append(0.5)
            else:
                mean = normalizer.total[j] / normalizer.count[j]
                scaled.append(normalizer._scale(j, mean))
        else:
            scaled.append(normalizer._scale(j, x))
    for j, x in enumerate(record.features):
        if x is not None:
            normalizer._observe(j, x)
    return replace(record, features=tuple(scaled)), normalizer


def normalize_stream(records) -> list[LoanRecord]:
    """Causally normalize a whole stream with a fresh Normalizer."""
    records = list(records)
    if not records:
        return []
    normalizer = Normalizer(len(records[0].features))
    out = []
    for record in records:
        scaled, normalizer = normalize(record, normalizer)
        out.append(scaled)
    return out


# ---------------------------------------------------------------------------
# delimited-text I/O

def load_stream(path) -> list[LoanRecord]:
    """Read records in file order; raises ParseError naming the bad line."""
    try:
        fh = open(path, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror or exc}") from None
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file, expected a header line", 1) from None
        if tuple(header[:4]) != FIXED_COLUMNS or len(header) < 5:
            raise ParseError(
                "header must start with 'id,label,loan_amount,total_interest' "
                "followed by at least one feature column",
                1,
            )
        n_features = len(header) - 4
        records = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ParseError(
                    f"expected {len(header)} fields, got {len(row)}", lineno
                )
            if row[1] not in ("0", "1"):
                raise ParseError(f"label must be 0 or 1, got {row[1]!r}", lineno)
            try:
                loan = float(row[2])
            except ValueError:
                raise ParseError(f"non-numeric loan_amount {row[2]!r}", lineno) from None
            try:
                interest = float(row[3])
            except ValueError:
                raise ParseError(
                    f"non-numeric total_interest {row[3]!r}", lineno
                ) from None
            if not (math.isfinite(loan) and math.isfinite(interest)):
                raise ParseError("loan_amount and total_interest must be finite", lineno)
            if loan < 0 or interest < 0:
                raise ParseError(
                    "loan_amount and total_interest must be nonnegative", lineno
                )
            features = []
            for j, cell in enumerate(row[4:]):
                if cell == "":
                    features.append(None)
                    continue
                try:
                    x = float(cell)
                except ValueError:
                    raise ParseError(
                        f"non-numeric value {cell!r} in feature column {j + 1}", lineno
                    ) from None
                if not math.isfinite(x):
                    raise ParseError(
                        f"non-finite value in feature column {j + 1}", lineno
                    )
                features.append(x)
            records.append(
                LoanRecord(row[0], int(row[1]), loan, interest, tuple(features))
            )
    dims = {len(r.features) for r in records}
    if len(dims) > 1:
        raise InvalidDimensionError(f"inconsistent feature dimensions {sorted(dims)}")
    return records


def write_stream(records, path) -> None:
    records = list(records)
    n_features = len(records[0].features) if records else 1
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(FIXED_COLUMNS) + [f"f{j + 1}" for j in range(n_features)])
        for r in records:
            writer.writerow(
                [r.id, r.label, repr(r.loan_amount), repr(r.total_interest)]
                + ["" if x is None else repr(x) for x in r.features]
            )


# ---------------------------------------------------------------------------
# synthetic streams

DRIFT_KINDS = ("label_flip", "boundary_rotation")


@dataclass
class SynthConfig:
    """Generator settings; fully determined by ``seed``.

    ``drift_at`` is a record index: records at positions >= drift_at follow
    the post-drift concept. ``boundary_sharpness`` controls label noise near
    the class boundary (None = hard labels, perfectly separable).
    """

    n_records: int
    n_features: int = 8
    positive_fraction: float = 0.75
    drift_at: int | None = None
    drift_kind: str = "label_flip"
    loan_range: tuple[float, float] = (1000.0, 40000.0)
    rate_range: tuple[float, float] = (0.05, 0.30)
    boundary_sharpness: float | None = 10.0
    seed: int = 0

    def validate(self) -> None:
        if self.n_records < 1:
            raise ConfigError("n_records must be positive")
        if self.n_features < 1:
            raise ConfigError("n_features must be positive")
        if not 0.0 < self.positive_fraction < 1.0:
            raise ConfigError(
                f"positive_fraction must be in (0, 1), got {self.positive_fraction}"
            )
        if self.drift_kind not in DRIFT_KINDS:
            raise ConfigError(f"drift_kind must be one of {DRIFT_KINDS}")
        if self.drift_at is not None and not 0 < self.drift_at < self.n_records:
            raise ConfigError("drift_at must lie strictly inside the stream")
        for name, (lo, hi) in (("loan_range", self.loan_range),
                               ("rate_range", self.rate_range)):
            if lo < 0 or hi < lo:
                raise ConfigError(f"{name} must satisfy 0 <= lo <= hi")
        if self.boundary_sharpness is not None and self.boundary_sharpness <= 0:
            raise ConfigError("boundary_sharpness must be positive or None")


def _unit_vector(rng: Random, dim: int) -> list[float]:
    while True:
        v = [rng.gauss(0.0, 1.0) for _ in range(dim)]
        norm = math.sqrt(sum(x * x for x in v))
        if norm > 1e-9:
            return [x / norm for x in v]


def _orthogonal_unit(rng: Random, w: list[float]) -> list[float]:
    """Unit vector orthogonal to w (the 90-degree rotation of the boundary)."""
    while True:
        r = _unit_vector(rng, len(w))
        dot = sum(a * b for a, b in zip(r, w))
        u = [a - dot * b for a, b in zip(r, w)]
        norm = math.sqrt(sum(x * x for x in u))
        if norm > 1e-6:
            return [x / norm for x in u]


def _segment_labels(margins, positive_fraction, sharpness, rng):
    ranked = sorted(margins)
    cut = ranked[min(len(ranked) - 1, int((1.0 - positive_fraction) * len(ranked)))]
    labels = []
    for m in margins:
        if sharpness is None:
            labels.append(1 if m > cut else 0)
        else:
            p = 1.0 / (1.0 + math.exp(-sharpness * (m - cut)))
            labels.append(1 if rng.random() < p else 0)
    return labels


def synthesize(cfg: SynthConfig) -> list[LoanRecord]:
    """Generate a schema-valid stream from a hyperplane ground truth.

    Labels come from the sign of the margin against a random unit weight
    vector, thresholded at the empirical quantile that yields the requested
    positive fraction, with optional logistic label noise near the boundary.
    At ``drift_at`` the concept changes: boundary_rotation swaps the weight
    vector for an orthogonal one, label_flip inverts the labels.
    """
    cfg.validate()
    rng = Random(cfg.seed)
    rows = [
        [rng.uniform(-1.0, 1.0) for _ in range(cfg.n_features)]
        for _ in range(cfg.n_records)
    ]
    w = _unit_vector(rng, cfg.n_features)

    if cfg.drift_at is not None and cfg.drift_kind == "boundary_rotation":
        # post-drift records are labeled against a rotated hyperplane, with
        # the quantile cut recomputed so the class ratio carries over
        rotated = _orthogonal_unit(rng, w)
        labels: list[int] = []
        for lo, hi, seg_w in (
            (0, cfg.drift_at, w),
            (cfg.drift_at, cfg.n_records, rotated),
        ):
            margins = [sum(a * b for a, b in zip(row, seg_w)) for row in rows[lo:hi]]
            labels.extend(
                _segment_labels(margins, cfg.positive_fraction, cfg.boundary_sharpness, rng)
            )
    else:
        # stationary ground truth over the whole stream; label_flip then
        # inverts the tail, leaving the pre-drift prefix untouched
        margins = [sum(a * b for a, b in zip(row, w)) for row in rows]
        labels = _segment_labels(
            margins, cfg.positive_fraction, cfg.boundary_sharpness, rng
        )
        if cfg.drift_at is not None:
            labels = labels[: cfg.drift_at] + [1 - y for y in labels[cfg.drift_at:]]

    records = []
    for i, (row, y) in enumerate(zip(rows, labels)):
        loan = rng.uniform(*cfg.loan_range)
        rate = rng.uniform(*cfg.rate_range)
        records.append(
            LoanRecord(
                id=f"r{i + 1:06d}",
                label=y,
                loan_amount=loan,
                total_interest=loan * rate,
                features=tuple(row),
            )
        )
    return records
