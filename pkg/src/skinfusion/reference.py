"""Published CDR / FAR / FRR figures on the Compaq skin database.

They cannot be reproduced without that corpus; they are kept for side-by-side
reports and for consistency audits (each row should add up to 100).
"""

from __future__ import annotations

from typing import NamedTuple


class ReferenceRow(NamedTuple):
    group: str
    classifier: str
    cdr: float
    far: float
    frr: float


SINGLE_FEATURE = [
    ReferenceRow("single", "Cb", 70.81, 28.34, 0.85),
    ReferenceRow("single", "Cr", 76.18, 23.48, 0.34),
    ReferenceRow("single", "Cb/Cr", 78.63, 20.50, 0.86),
    ReferenceRow("single", "Cb.Cr", 59.66, 35.02, 5.31),
    ReferenceRow("single", "Cb-Cr", 79.60, 19.55, 0.85),
]

COMBINED_FEATURES = [
    ReferenceRow("features", "Cb-Cr & Cb/Cr", 79.03, 20.15, 0.82),
    ReferenceRow("features", "Cb-Cr & Cr", 63.86, 33.97, 2.16),
    ReferenceRow("features", "Cb/Cr & Cr", 82.61, 14.66, 2.73),
    ReferenceRow("features", "Cb-Cr, Cb/Cr & Cr", 73.61, 25.67, 0.72),
]

COMBINED_CLASSIFIERS = [
    ReferenceRow("classifiers", "AND Cb-Cr & Cb/Cr", 79.77, 19.35, 0.89),
    ReferenceRow("classifiers", "AND Cb-Cr & Cr", 82.21, 16.90, 0.89),
    ReferenceRow("classifiers", "AND Cb/Cr & Cr", 82.29, 16.80, 0.91),
    ReferenceRow("classifiers", "OR Cb-Cr & Cb/Cr", 78.46, 20.17, 0.83),
    ReferenceRow("classifiers", "OR Cb-Cr & Cr", 73.56, 26.13, 0.31),
    ReferenceRow("classifiers", "OR Cb/Cr & Cr", 72.53, 27.18, 0.30),
    ReferenceRow("classifiers", "AND Cb-Cr, Cb/Cr & Cr", 82.38, 16.69, 0.92),
    ReferenceRow("classifiers", "OR Cb-Cr, Cb/Cr & Cr", 72.53, 27.18, 0.30),
    ReferenceRow("classifiers", "Voting", 79.50, 19.66, 0.84),
    ReferenceRow("classifiers", "Sum of Weights", 83.98, 14.90, 1.12),
    # identical to the second AND row in the source table; kept verbatim
    ReferenceRow("classifiers", "3-126-1 stacker", 82.21, 16.90, 0.89),
]

ALL_ROWS = SINGLE_FEATURE + COMBINED_FEATURES + COMBINED_CLASSIFIERS

# selected hidden-layer sizes per input set
HIDDEN_SIZES = {
    "Cb": 91,
    "Cr": 96,
    "Cb/Cr": 128,
    "Cb.Cr": 96,
    "Cb-Cr": 112,
    "Cb-Cr & Cb/Cr": 17,
    "Cb-Cr & Cr": 114,
    "Cb/Cr & Cr": 123,
    "Cb-Cr, Cb/Cr & Cr": 5,
    "stacker": 126,
}


def headline_gain() -> float:
    """Best classifier-fusion CDR minus best single-feature CDR, in points."""
    best_fused = max(r.cdr for r in COMBINED_CLASSIFIERS)
    best_single = max(r.cdr for r in SINGLE_FEATURE)
    return round(best_fused - best_single, 2)
