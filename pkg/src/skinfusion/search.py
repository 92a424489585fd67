"""Coarse-to-fine selection of the hidden-layer size.

The coarse phase tries the powers of two 1..128. The fine phase walks every
integer between the midpoints to the coarse winner's neighbours. In both
phases the winner is the smallest size attaining the lowest mean
validation MSE over the training runs.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .color import FeatureKind
from .mlp import TrainConfig, Topology, init_network, train_lm

COARSE_CANDIDATES = (1, 2, 4, 8, 16, 32, 64, 128)

# one training run: ((x_train, t_train), (x_val, t_val))
Split = tuple[tuple[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]


@dataclass(frozen=True)
class SearchSettings:
    runs: int = 30
    min_files: int = 30
    base_seed: int = 0

    def __post_init__(self):
        if self.runs < 1 or self.min_files < 1:
            raise ValueError("runs and min_files must be >= 1")


@dataclass
class SearchReport:
    coarse: dict[int, float]
    hn_b: int
    fine_range: tuple[int, int]
    fine: dict[int, float]
    hn_star: int
    runs_per_candidate: int
    feature_kinds: Optional[tuple[FeatureKind, ...]] = None
    # per-run validation MSEs, keyed by HN
    run_mse: dict[int, list[float]] = field(default_factory=dict)

    @property
    def trainings(self) -> int:
        return (len(self.coarse) + len(self.fine)) * self.runs_per_candidate

    def to_dict(self) -> dict:
        return {
            "feature_kinds": (
                [k.value for k in self.feature_kinds] if self.feature_kinds is not None else None
            ),
            "runs_per_candidate": self.runs_per_candidate,
            "coarse": {str(k): v for k, v in self.coarse.items()},
            "hn_b": self.hn_b,
            "fine_range": list(self.fine_range),
            "fine": {str(k): v for k, v in self.fine.items()},
            "hn_star": self.hn_star,
            "trainings": self.trainings,
            "run_mse": {str(k): v for k, v in sorted(self.run_mse.items())},
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "SearchReport":
        kinds = doc.get("feature_kinds")
        return cls(
            coarse={int(k): float(v) for k, v in doc["coarse"].items()},
            hn_b=int(doc["hn_b"]),
            fine_range=tuple(doc["fine_range"]),
            fine={int(k): float(v) for k, v in doc["fine"].items()},
            hn_star=int(doc["hn_star"]),
            runs_per_candidate=int(doc["runs_per_candidate"]),
            feature_kinds=tuple(FeatureKind(k) for k in kinds) if kinds is not None else None,
            run_mse={int(k): list(v) for k, v in doc.get("run_mse", {}).items()},
        )

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1) + "\n")

    @classmethod
    def load(cls, path) -> "SearchReport":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_csv(self) -> str:
        """MSE-vs-HN curves for both phases, one row per evaluated size."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("phase", "hn", "mean_mse", "runs"))
        for phase, res in (("coarse", self.coarse), ("fine", self.fine)):
            for hn in sorted(res):
                w.writerow((phase, hn, repr(res[hn]), self.runs_per_candidate))
        return buf.getvalue()


def fine_range(hn_b: int) -> tuple[int, int]:
    """Inclusive fine-search interval around the coarse winner.

    >>> fine_range(64)
    (48, 96)
    """
    if hn_b not in COARSE_CANDIDATES:
        raise ValueError(f"{hn_b} is not a coarse candidate {COARSE_CANDIDATES}")
    if hn_b == 1:
        # (2 - 1) / 2 is fractional; the interval degenerates to the winner itself
        return (1, 1)
    i = COARSE_CANDIDATES.index(hn_b)
    lower = COARSE_CANDIDATES[i - 1]
    low = lower if hn_b == 2 else lower + (hn_b - lower) // 2
    if hn_b == COARSE_CANDIDATES[-1]:
        high = hn_b
    else:
        upper = COARSE_CANDIDATES[i + 1]
        high = hn_b + (upper - hn_b) // 2
    return (low, high)


def run_seed(base_seed: int, hn: int, run: int) -> int:
    """Seed for one training run; identical for a given HN in both phases."""
    ss = np.random.SeedSequence([int(base_seed), int(hn), int(run)])
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def pick_smallest_min(results: dict[int, float]) -> int:
    best = min(results.values())
    return min(hn for hn, v in results.items() if v == best)


class RunEvaluator:
    """Mean validation MSE of ``settings.runs`` trainings at a given HN, memoized."""

    def __init__(self, kinds, files: Sequence[Split], cfg: TrainConfig, settings: SearchSettings):
        if len(files) < settings.min_files:
            raise ValueError(
                f"search needs at least {settings.min_files} data files, got {len(files)}"
            )
        self.kinds = tuple(kinds) if kinds is not None else None
        self.files = files
        self.cfg = cfg
        self.settings = settings
        x0 = np.asarray(files[0][0][0])
        self.n_inputs = 1 if x0.ndim == 1 else x0.shape[1]
        self.cache: dict[int, list[float]] = {}

    def __call__(self, hn: int) -> float:
        if hn not in self.cache:
            topo = Topology(self.n_inputs, hn)
            scores = []
            for run in range(self.settings.runs):
                train, val = self.files[run % len(self.files)]
                net = init_network(topo, self.kinds, run_seed(self.settings.base_seed, hn, run))
                res = train_lm(net, train, val, self.cfg)
                scores.append(res.network.provenance["val_mse"])
            self.cache[hn] = scores
        # fixed accumulation order keeps exact ties reproducible
        return float(np.mean(self.cache[hn]))


def coarse_search(
    kinds,
    files: Sequence[Split],
    cfg: TrainConfig = TrainConfig(),
    settings: SearchSettings = SearchSettings(),
    evaluate: Optional[Callable[[int], float]] = None,
) -> tuple[int, dict[int, float]]:
    ev = evaluate or RunEvaluator(kinds, files, cfg, settings)
    results = {hn: ev(hn) for hn in COARSE_CANDIDATES}
    return pick_smallest_min(results), results


def fine_search(
    rng: tuple[int, int],
    kinds,
    files: Sequence[Split],
    cfg: TrainConfig = TrainConfig(),
    settings: SearchSettings = SearchSettings(),
    evaluate: Optional[Callable[[int], float]] = None,
) -> tuple[int, dict[int, float]]:
    low, high = rng
    if not 1 <= low <= high:
        raise ValueError(f"invalid fine range {rng}")
    ev = evaluate or RunEvaluator(kinds, files, cfg, settings)
    results = {hn: ev(hn) for hn in range(low, high + 1)}
    return pick_smallest_min(results), results


def coarse_to_fine(
    kinds,
    files: Sequence[Split],
    cfg: TrainConfig = TrainConfig(),
    settings: SearchSettings = SearchSettings(),
    evaluate: Optional[Callable[[int], float]] = None,
) -> SearchReport:
    """Both phases; pass ``evaluate`` (HN -> mean MSE) to replace the training runs."""
    ev = evaluate or RunEvaluator(kinds, files, cfg, settings)
    hn_b, coarse = coarse_search(kinds, files, cfg, settings, evaluate=ev)
    rng = fine_range(hn_b)
    hn_star, fine = fine_search(rng, kinds, files, cfg, settings, evaluate=ev)
    return SearchReport(
        coarse=coarse,
        hn_b=hn_b,
        fine_range=rng,
        fine=fine,
        hn_star=hn_star,
        runs_per_candidate=settings.runs,
        feature_kinds=tuple(kinds) if kinds is not None else None,
        run_mse=dict(getattr(ev, "cache", {})),
    )
