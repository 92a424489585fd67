"""YCbCr conversion and the chrominance features fed to the skin MLPs.

The conversion is full-range BT.601 (the JFIF matrix)::

    Y  =       0.299    R + 0.587    G + 0.114    B
    Cb = 128 - 0.168736 R - 0.331264 G + 0.5      B
    Cr = 128 + 0.5      R - 0.418688 G - 0.081312 B

Every component is clamped to [0, 255]. Features are computed in floating
point and then mapped affinely onto [0, 1] so they sit in the unsaturated
part of the sigmoid.
"""

from __future__ import annotations

import enum
from typing import NamedTuple, Sequence

import numpy as np

RATIO_EPS = 1.0
RATIO_CAP = 255.0


class FeatureKind(str, enum.Enum):
    CB = "cb"
    CR = "cr"
    CB_OVER_CR = "cb_over_cr"
    CB_TIMES_CR = "cb_times_cr"
    CB_MINUS_CR = "cb_minus_cr"

    @property
    def label(self) -> str:
        return _LABELS[self]

    @classmethod
    def parse(cls, text: str) -> "FeatureKind":
        """Accept either the enum value (``cb_over_cr``) or the short label (``Cb/Cr``)."""
        key = text.strip()
        for kind in cls:
            if key.lower() == kind.value or key == kind.label:
                return kind
        raise ValueError(f"unknown feature kind: {text!r}")


_LABELS = {
    FeatureKind.CB: "Cb",
    FeatureKind.CR: "Cr",
    FeatureKind.CB_OVER_CR: "Cb/Cr",
    FeatureKind.CB_TIMES_CR: "Cb.Cr",
    FeatureKind.CB_MINUS_CR: "Cb-Cr",
}

# (low, high) of the raw value each kind is scaled from.
FEATURE_RANGES: dict[FeatureKind, tuple[float, float]] = {
    FeatureKind.CB: (0.0, 255.0),
    FeatureKind.CR: (0.0, 255.0),
    FeatureKind.CB_OVER_CR: (0.0, RATIO_CAP),
    FeatureKind.CB_TIMES_CR: (0.0, 255.0 * 255.0),
    FeatureKind.CB_MINUS_CR: (-255.0, 255.0),
}


class Ycbcr(NamedTuple):
    y: float
    cb: float
    cr: float


def rgb_to_ycbcr(r, g, b):
    """Convert RGB to full-range YCbCr.

    Works on scalars (returns a :class:`Ycbcr`) or on equally shaped arrays
    (returns a ``Ycbcr`` of float64 arrays).
    """
    scalar = np.ndim(r) == 0 and np.ndim(g) == 0 and np.ndim(b) == 0
    r = np.asarray(r, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    # rows rewritten as differences (luma weights sum to 1, chroma weights to 0)
    # so that r=g=b maps exactly onto the grey axis
    y = g + 0.299 * (r - g) + 0.114 * (b - g)
    cb = 128.0 - 0.168736 * (r - b) - 0.331264 * (g - b)
    cr = 128.0 + 0.418688 * (r - g) + 0.081312 * (r - b)
    y, cb, cr = (np.clip(c, 0.0, 255.0) for c in (y, cb, cr))
    if scalar:
        return Ycbcr(float(y), float(cb), float(cr))
    return Ycbcr(y, cb, cr)


def ycbcr_to_rgb(y, cb, cr) -> np.ndarray:
    """Inverse of :func:`rgb_to_ycbcr`, rounded and clipped to uint8. Returns ``(..., 3)``."""
    y = np.asarray(y, dtype=np.float64)
    cb = np.asarray(cb, dtype=np.float64) - 128.0
    cr = np.asarray(cr, dtype=np.float64) - 128.0
    r = y + 1.402 * cr
    g = y - 0.344136 * cb - 0.714136 * cr
    b = y + 1.772 * cb
    rgb = np.stack([r, g, b], axis=-1)
    return np.clip(np.rint(rgb), 0, 255).astype(np.uint8)


def extract_feature(p: Ycbcr, kind: FeatureKind):
    """Raw chrominance feature for ``kind``. Array-valued ``p`` is supported."""
    kind = FeatureKind(kind)
    cb, cr = p.cb, p.cr
    if kind is FeatureKind.CB:
        return cb
    if kind is FeatureKind.CR:
        return cr
    if kind is FeatureKind.CB_OVER_CR:
        return cb / np.maximum(cr, RATIO_EPS)
    if kind is FeatureKind.CB_TIMES_CR:
        return cb * cr
    return cb - cr


def normalize_feature(raw, kind: FeatureKind):
    kind = FeatureKind(kind)
    lo, hi = FEATURE_RANGES[kind]
    if kind is FeatureKind.CB_OVER_CR:
        raw = np.minimum(raw, RATIO_CAP)
    out = (np.asarray(raw, dtype=np.float64) - lo) / (hi - lo)
    out = np.clip(out, 0.0, 1.0)
    return float(out) if np.ndim(out) == 0 else out


def features_from_rgb(rgb: np.ndarray, kinds: Sequence[FeatureKind]) -> np.ndarray:
    """Normalized feature matrix of shape ``(N, len(kinds))`` from ``(..., 3)`` RGB."""
    rgb = np.asarray(rgb).reshape(-1, 3)
    p = rgb_to_ycbcr(rgb[:, 0], rgb[:, 1], rgb[:, 2])
    cols = [normalize_feature(extract_feature(p, k), k) for k in kinds]
    return np.column_stack(cols) if cols else np.empty((rgb.shape[0], 0))
