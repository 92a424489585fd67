"""Pixel-level skin segmentation and the CDR / FAR / FRR metrics.

All three rates are percentages of the *total* number of test pixels, so
they always add up to 100.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .color import features_from_rgb
from .data import load_rgb
from .mlp import Network, forward

REPORT_COLUMNS = ("classifier", "CDR", "FAR", "FRR", "correct", "false_accepts", "false_rejects", "total")


@dataclass(frozen=True)
class EvalResult:
    total: int
    correct: int
    false_accepts: int  # non-skin predicted as skin
    false_rejects: int  # skin predicted as non-skin

    def __post_init__(self):
        if self.correct + self.false_accepts + self.false_rejects != self.total:
            raise ValueError("correct + false accepts + false rejects must equal total")

    @property
    def cdr(self) -> float:
        return 100.0 * self.correct / self.total

    @property
    def far(self) -> float:
        return 100.0 * self.false_accepts / self.total

    @property
    def frr(self) -> float:
        return 100.0 * self.false_rejects / self.total

    def exact(self) -> tuple[Fraction, Fraction, Fraction]:
        """(CDR, FAR, FRR) as exact percentages."""
        return tuple(Fraction(100 * c, self.total) for c in
                     (self.correct, self.false_accepts, self.false_rejects))

    def __add__(self, other: "EvalResult") -> "EvalResult":
        return EvalResult(
            self.total + other.total,
            self.correct + other.correct,
            self.false_accepts + other.false_accepts,
            self.false_rejects + other.false_rejects,
        )


def threshold(output, t: float = 0.5):
    """1 where ``output > t`` (strictly), else 0."""
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"threshold must be in [0, 1], got {t}")
    out = np.asarray(output) > t
    return int(out) if out.ndim == 0 else out.astype(np.uint8)


def raw_output_map(net: Network, image) -> np.ndarray:
    """Pre-threshold network output for every pixel, shaped like the image."""
    if net.feature_kinds is None:
        raise ValueError("network has no feature kinds; it cannot read pixels directly")
    img = load_rgb(image) if isinstance(image, (str, Path)) else np.asarray(image, dtype=np.uint8)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) image, got shape {img.shape}")
    x = features_from_rgb(img, net.feature_kinds)
    return forward(net, x).reshape(img.shape[:2])


def segment(net: Network, image, t: float = 0.5) -> tuple[np.ndarray, np.ndarray]:
    """(binary mask, raw output map) for one image."""
    raw = raw_output_map(net, image)
    return threshold(raw, t), raw


def count(pred: np.ndarray, truth: np.ndarray) -> EvalResult:
    pred = np.asarray(pred).astype(bool)
    truth = np.asarray(truth).astype(bool)
    if pred.shape != truth.shape:
        raise ValueError(f"prediction {pred.shape} and truth {truth.shape} differ in shape")
    fa = int(np.count_nonzero(pred & ~truth))
    fr = int(np.count_nonzero(~pred & truth))
    return EvalResult(pred.size, pred.size - fa - fr, fa, fr)


def metrics(preds: Sequence[np.ndarray], truths: Sequence[np.ndarray]) -> EvalResult:
    if len(preds) != len(truths):
        raise ValueError(f"{len(preds)} predictions for {len(truths)} truth masks")
    if not preds:
        raise ValueError("empty test set")
    result = EvalResult(0, 0, 0, 0)
    for p, t in zip(preds, truths):
        result = result + count(p, t)
    if result.total == 0:
        raise ValueError("empty test set")
    return result


# -- reports ------------------------------------------------------------------


def write_report(rows: Iterable[tuple[str, EvalResult]], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REPORT_COLUMNS)
        for name, r in rows:
            w.writerow((name, f"{r.cdr:.2f}", f"{r.far:.2f}", f"{r.frr:.2f}",
                        r.correct, r.false_accepts, r.false_rejects, r.total))


def read_report(path) -> list[tuple[str, EvalResult]]:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"report not found: {path}")
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != REPORT_COLUMNS:
            raise ValueError(f"{path}: malformed report header {reader.fieldnames}")
        rows = []
        for rec in reader:
            try:
                rows.append((rec["classifier"], EvalResult(
                    int(rec["total"]), int(rec["correct"]),
                    int(rec["false_accepts"]), int(rec["false_rejects"]),
                )))
            except (TypeError, ValueError) as exc:
                raise ValueError(f"{path}: malformed report row {rec}") from exc
    return rows
