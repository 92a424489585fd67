"""Fusing several skin classifiers: AND / OR, majority vote, CDR-weighted sum, stacking."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .color import features_from_rgb
from .data import PixelPool
from .evaluate import raw_output_map, threshold
from .mlp import Network, TrainConfig, Topology, forward, init_network, train_lm
from .search import SearchReport, SearchSettings, Split, coarse_to_fine

RULES = ("and", "or", "vote", "sow", "stack")
SPEC_FORMAT = "skinfusion-ensemble"
SPEC_VERSION = 1
GRID_STEP = 0.01


@dataclass(frozen=True)
class WeightSet:
    weights: tuple[float, ...]
    cdrs: tuple[float, ...]

    def __post_init__(self):
        if len(self.weights) != len(self.cdrs):
            raise ValueError("one weight per classifier")
        if any(w < 0 for w in self.weights) or abs(sum(self.weights) - 1.0) > 1e-12:
            raise ValueError("weights must be non-negative and sum to 1")


@dataclass
class EnsembleSpec:
    rule: str
    members: list[str]  # member model files, relative to this ensemble file
    weights: Optional[WeightSet] = None
    threshold: float = 0.5
    stacker: Optional[str] = None
    notes: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.rule not in RULES:
            raise ValueError(f"unknown rule {self.rule!r}; expected one of {RULES}")
        n = len(self.members)
        if self.rule in ("and", "or") and n not in (2, 3):
            raise ValueError(f"{self.rule} combines 2 or 3 classifiers, got {n}")
        if self.rule in ("vote", "sow", "stack") and n != 3:
            raise ValueError(f"{self.rule} combines exactly 3 classifiers, got {n}")
        if self.rule == "sow" and self.weights is None:
            raise ValueError("sum-of-weights needs a weight set")
        if self.rule == "stack" and self.stacker is None:
            raise ValueError("stacking needs a stacker model")

    def to_dict(self) -> dict:
        return {
            "format": SPEC_FORMAT,
            "format_version": SPEC_VERSION,
            "rule": self.rule,
            "members": list(self.members),
            "weights": list(self.weights.weights) if self.weights else None,
            "weight_cdrs": list(self.weights.cdrs) if self.weights else None,
            "threshold": self.threshold,
            "stacker": self.stacker,
            "notes": self.notes,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "EnsembleSpec":
        if doc.get("format") != SPEC_FORMAT:
            raise ValueError(f"not a {SPEC_FORMAT} document")
        if doc.get("format_version") != SPEC_VERSION:
            raise ValueError(f"unsupported ensemble format version {doc.get('format_version')!r}")
        ws = None
        if doc.get("weights") is not None:
            ws = WeightSet(tuple(doc["weights"]), tuple(doc["weight_cdrs"]))
        return cls(doc["rule"], list(doc["members"]), ws, float(doc["threshold"]),
                   doc.get("stacker"), dict(doc.get("notes") or {}))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1) + "\n")

    @classmethod
    def load(cls, path) -> "EnsembleSpec":
        return cls.from_dict(json.loads(Path(path).read_text()))


def _stack_masks(masks: Sequence[np.ndarray]) -> np.ndarray:
    arrs = [np.asarray(m) for m in masks]
    if any(a.shape != arrs[0].shape for a in arrs):
        raise ValueError("member masks differ in shape")
    return np.stack(arrs).astype(bool)


def combine_binary(rule: str, masks: Sequence[np.ndarray]) -> np.ndarray:
    """Pixelwise AND / OR of two or three binary masks."""
    if len(masks) not in (2, 3):
        raise ValueError(f"AND/OR combine 2 or 3 masks, got {len(masks)}")
    m = _stack_masks(masks)
    rule = rule.lower()
    if rule == "and":
        return m.all(axis=0).astype(np.uint8)
    if rule == "or":
        return m.any(axis=0).astype(np.uint8)
    raise ValueError(f"unknown binary rule {rule!r}")


def vote(masks: Sequence[np.ndarray]) -> np.ndarray:
    """Skin where at least two of the three members say skin."""
    if len(masks) != 3:
        raise ValueError(f"vote needs exactly 3 members, got {len(masks)}")
    return (_stack_masks(masks).sum(axis=0) >= 2).astype(np.uint8)


def compute_weights(cdrs: Sequence[float]) -> WeightSet:
    """Weights proportional to each member's correct detection rate."""
    cdrs = tuple(float(c) for c in cdrs)
    if not cdrs or any(not c > 0 for c in cdrs):
        raise ValueError("correct detection rates must all be positive")
    total = sum(cdrs)
    return WeightSet(tuple(c / total for c in cdrs), cdrs)


def weighted_sum(raw_outputs: Sequence[np.ndarray], ws: WeightSet) -> np.ndarray:
    arrs = [np.asarray(r, dtype=np.float64) for r in raw_outputs]
    if len(arrs) != len(ws.weights):
        raise ValueError(f"{len(arrs)} outputs for {len(ws.weights)} weights")
    if any(a.shape != arrs[0].shape for a in arrs):
        raise ValueError("member outputs differ in shape")
    total = np.zeros_like(arrs[0])
    for w, a in zip(ws.weights, arrs):
        total += w * a
    return total


def sum_of_weights(raw_outputs: Sequence[np.ndarray], ws: WeightSet, t: float = 0.5) -> np.ndarray:
    return threshold(weighted_sum(raw_outputs, ws), t)


def calibrate_threshold(sums, truths, step: float = GRID_STEP) -> float:
    """Grid threshold in [0, 1] that maximizes CDR on a calibration set; ties go low."""
    if not isinstance(sums, (list, tuple)):
        sums, truths = [sums], [truths]
    s = np.concatenate([np.ravel(np.asarray(a, dtype=np.float64)) for a in sums] or [[]])
    y = np.concatenate([np.ravel(np.asarray(a)).astype(bool) for a in truths] or [[]]).astype(bool)
    if s.size == 0:
        raise ValueError("empty calibration set")
    if s.shape != y.shape:
        raise ValueError("calibration sums and truth differ in size")
    n_steps = int(round(1.0 / step))
    grid = np.arange(n_steps + 1) / n_steps
    skin = np.sort(s[y])
    bg = np.sort(s[~y])
    # predicted skin iff sum > t
    skin_hits = len(skin) - np.searchsorted(skin, grid, side="right")
    bg_hits = np.searchsorted(bg, grid, side="right")
    correct = skin_hits + bg_hits
    return float(grid[int(np.argmax(correct))])


# -- stacking -----------------------------------------------------------------


def member_outputs(nets: Sequence[Network], rgb: np.ndarray) -> np.ndarray:
    """``(N, len(nets))`` raw outputs of each base network on ``(N, 3)`` pixels."""
    return np.column_stack([forward(n, features_from_rgb(rgb, n.feature_kinds)) for n in nets])


def build_stacker_dataset(nets: Sequence[Network], pool: PixelPool) -> tuple[np.ndarray, np.ndarray]:
    """Inputs = raw base outputs per pixel, targets = mask labels."""
    for n in nets:
        if n.feature_kinds is None or "epochs" not in n.provenance:
            raise ValueError("stacker inputs must come from trained feature networks")
    return member_outputs(nets, pool.rgb), pool.label.astype(np.float64)


def train_stacker(
    files: Sequence[Split],
    final_train: tuple[np.ndarray, np.ndarray],
    final_val: tuple[np.ndarray, np.ndarray],
    cfg: TrainConfig = TrainConfig(),
    settings: SearchSettings = SearchSettings(),
    seed: int = 0,
) -> tuple[Network, SearchReport]:
    """Coarse-to-fine sizing of a 3-HN-1 network on member outputs, then a final fit."""
    report = coarse_to_fine(None, files, cfg, settings)
    n_inputs = np.asarray(final_train[0]).shape[1]
    net = init_network(Topology(n_inputs, report.hn_star), None, seed)
    res = train_lm(net, final_train, final_val, cfg)
    return res.network.with_params(res.network.params, data="pooled", role="stacker"), report


def stack_predict(stacker: Network, member_raw: Sequence[np.ndarray], t: float = 0.5):
    """Binary mask (and raw map) from the stacker applied to member output maps."""
    arrs = [np.asarray(r, dtype=np.float64) for r in member_raw]
    shape = arrs[0].shape
    x = np.column_stack([a.ravel() for a in arrs])
    raw = forward(stacker, x).reshape(shape)
    return threshold(raw, t), raw


def fuse(
    spec: EnsembleSpec,
    member_raw: Sequence[np.ndarray],
    stacker: Optional[Network] = None,
    member_threshold: float = 0.5,
) -> np.ndarray:
    """Fused binary mask from the members' raw output maps."""
    if spec.rule in ("and", "or"):
        return combine_binary(spec.rule, [threshold(r, member_threshold) for r in member_raw])
    if spec.rule == "vote":
        return vote([threshold(r, member_threshold) for r in member_raw])
    if spec.rule == "sow":
        return sum_of_weights(member_raw, spec.weights, spec.threshold)
    if stacker is None:
        raise ValueError("stacking rule needs the stacker network")
    return stack_predict(stacker, member_raw, spec.threshold)[0]


def apply_ensemble(
    spec: EnsembleSpec,
    members: Sequence[Network],
    image,
    stacker: Optional[Network] = None,
    member_threshold: float = 0.5,
) -> tuple[np.ndarray, list[np.ndarray]]:
    """(fused mask, member raw maps) for one image."""
    raws = [raw_output_map(n, image) for n in members]
    return fuse(spec, raws, stacker, member_threshold), raws
