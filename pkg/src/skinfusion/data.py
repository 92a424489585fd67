"""Labelled pixel corpora: manifest parsing, ingestion, pool sampling and data files."""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np
from PIL import Image

MASK_THRESHOLD = 128
LOSSY_FORMATS = {"JPEG", "MPO", "WEBP", "JPEG2000"}

DATAFILE_COLUMNS = ("split", "image_id", "row", "col", "r", "g", "b", "label")


class DataError(ValueError):
    """Bad corpus input: missing files, size mismatches, insufficient pools."""


@dataclass(frozen=True)
class PixelSample:
    r: int
    g: int
    b: int
    label: int
    image_id: int
    row: int
    col: int


@dataclass
class PixelPool:
    """Column-oriented collection of :class:`PixelSample` records."""

    image_id: np.ndarray
    row: np.ndarray
    col: np.ndarray
    rgb: np.ndarray  # (N, 3) uint8
    label: np.ndarray  # (N,) uint8, 1 = skin

    def __post_init__(self):
        self.image_id = np.asarray(self.image_id, dtype=np.int64)
        self.row = np.asarray(self.row, dtype=np.int64)
        self.col = np.asarray(self.col, dtype=np.int64)
        self.rgb = np.asarray(self.rgb, dtype=np.uint8).reshape(-1, 3)
        self.label = np.asarray(self.label, dtype=np.uint8)
        n = len(self.label)
        if not all(len(a) == n for a in (self.image_id, self.row, self.col, self.rgb)):
            raise ValueError("pool columns differ in length")

    def __len__(self) -> int:
        return len(self.label)

    def __getitem__(self, i: int) -> PixelSample:
        r, g, b = (int(v) for v in self.rgb[i])
        return PixelSample(
            r, g, b, int(self.label[i]), int(self.image_id[i]), int(self.row[i]), int(self.col[i])
        )

    def take(self, idx) -> "PixelPool":
        idx = np.asarray(idx, dtype=np.int64)
        return PixelPool(
            self.image_id[idx], self.row[idx], self.col[idx], self.rgb[idx], self.label[idx]
        )

    def keys(self) -> np.ndarray:
        """One int64 per pixel identifying (image id, row, col); for uniqueness checks."""
        return (self.image_id << 40) | (self.row << 20) | self.col

    @classmethod
    def concat(cls, pools: Sequence["PixelPool"]) -> "PixelPool":
        if not pools:
            return cls.empty()
        return cls(
            np.concatenate([p.image_id for p in pools]),
            np.concatenate([p.row for p in pools]),
            np.concatenate([p.col for p in pools]),
            np.concatenate([p.rgb for p in pools]),
            np.concatenate([p.label for p in pools]),
        )

    @classmethod
    def empty(cls) -> "PixelPool":
        z = np.zeros(0, dtype=np.int64)
        return cls(z, z, z, np.zeros((0, 3), dtype=np.uint8), z)

    @property
    def skin_fraction(self) -> float:
        return float(self.label.mean()) if len(self) else 0.0


@dataclass
class DataFile:
    index: int  # 1-based
    train: PixelPool
    val: PixelPool


@dataclass
class CorpusManifest:
    entries: list[tuple[Path, Path]]
    polarity: str = "nonzero-is-skin"

    def __len__(self) -> int:
        return len(self.entries)

    def subset(self, ids: Iterable[int]) -> "CorpusManifest":
        return CorpusManifest([self.entries[i] for i in ids], self.polarity)


def read_manifest(path) -> CorpusManifest:
    """Parse ``image<TAB>mask`` lines; relative paths resolve against the manifest's folder."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"manifest not found: {path}")
    base = path.parent
    entries = []
    for lineno, line in enumerate(path.read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise DataError(f"{path}:{lineno}: expected 'image<TAB>mask'")
        entries.append(tuple(base / p for p in parts))
    return CorpusManifest(entries)


def write_manifest(manifest: CorpusManifest, path, relative_to=None) -> None:
    path = Path(path)
    root = Path(relative_to) if relative_to is not None else path.parent
    lines = ["# image\tmask"]
    for img, mask in manifest.entries:
        lines.append(f"{_rel(img, root)}\t{_rel(mask, root)}")
    path.write_text("\n".join(lines) + "\n")


def _rel(p: Path, root: Path) -> str:
    return Path(os.path.relpath(Path(p).resolve(), Path(root).resolve())).as_posix()


def load_rgb(path) -> np.ndarray:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"image not found: {path}")
    try:
        with Image.open(path) as im:
            return np.asarray(im.convert("RGB"), dtype=np.uint8)
    except OSError as exc:
        raise DataError(f"unreadable image {path}: {exc}") from exc


def load_mask(path) -> np.ndarray:
    """Binary mask (uint8 0/1). Grey levels >= 128 are skin."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"mask not found: {path}")
    try:
        with Image.open(path) as im:
            if im.format in LOSSY_FORMATS:
                raise DataError(f"mask {path} uses lossy format {im.format}")
            grey = np.asarray(im.convert("L"), dtype=np.uint8)
    except OSError as exc:
        raise DataError(f"unreadable mask {path}: {exc}") from exc
    return (grey >= MASK_THRESHOLD).astype(np.uint8)


def save_mask(mask: np.ndarray, path) -> None:
    Image.fromarray((np.asarray(mask, dtype=np.uint8) * 255)).save(path, format="PNG")


def load_pair(manifest: CorpusManifest, image_id: int) -> tuple[np.ndarray, np.ndarray]:
    img_path, mask_path = manifest.entries[image_id]
    img = load_rgb(img_path)
    mask = load_mask(mask_path)
    if img.shape[:2] != mask.shape:
        raise DataError(
            f"mask {mask_path} is {mask.shape[1]}x{mask.shape[0]}, "
            f"image {img_path} is {img.shape[1]}x{img.shape[0]}"
        )
    return img, mask


def ingest(manifest: CorpusManifest, ids: Optional[Iterable[int]] = None) -> PixelPool:
    """Every pixel of the selected images (default: all) as a labelled sample.

    ``image_id`` is the image's position in ``manifest``.
    """
    ids = range(len(manifest)) if ids is None else ids
    parts = []
    for image_id in ids:
        img, mask = load_pair(manifest, image_id)
        h, w = mask.shape
        rows, cols = np.divmod(np.arange(h * w, dtype=np.int64), w)
        parts.append(
            PixelPool(
                np.full(h * w, image_id), rows, cols, img.reshape(-1, 3), mask.ravel()
            )
        )
    return PixelPool.concat(parts)


def _draw(rng: np.random.Generator, pool: PixelPool, avail: np.ndarray, n: int, balanced: bool):
    """Pick ``n`` indices from ``avail`` (positions into ``pool``) without replacement."""
    if not balanced:
        if len(avail) < n:
            raise DataError(f"insufficient pool: need {n}, have {len(avail)}")
        return avail[rng.permutation(len(avail))[:n]]
    n_skin = n // 2
    n_bg = n - n_skin
    skin = avail[pool.label[avail] == 1]
    bg = avail[pool.label[avail] == 0]
    if len(skin) < n_skin or len(bg) < n_bg:
        raise DataError(
            f"insufficient pool for balanced sampling: need {n_skin} skin + {n_bg} non-skin, "
            f"have {len(skin)} + {len(bg)}"
        )
    picked = np.concatenate(
        [skin[rng.permutation(len(skin))[:n_skin]], bg[rng.permutation(len(bg))[:n_bg]]]
    )
    return picked[rng.permutation(len(picked))]


def sample_indices(
    pool: PixelPool,
    n_train: int,
    n_val: int,
    seed,
    balanced: bool = False,
    exclude: Optional[np.ndarray] = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Index form of :func:`sample_pools`; ``exclude`` lists positions already used."""
    if n_train < 0 or n_val < 0:
        raise ValueError("sample sizes must be non-negative")
    avail = np.arange(len(pool), dtype=np.int64)
    if exclude is not None and len(exclude):
        avail = np.setdiff1d(avail, exclude, assume_unique=True)
    if len(avail) < n_train + n_val:
        raise DataError(
            f"insufficient pool: need {n_train + n_val} pixels, have {len(avail)}"
        )
    rng = np.random.default_rng(seed)
    if not balanced:
        perm = avail[rng.permutation(len(avail))]
        return perm[:n_train], perm[n_train : n_train + n_val]
    train = _draw(rng, pool, avail, n_train, True)
    avail = np.setdiff1d(avail, train, assume_unique=True)
    val = _draw(rng, pool, avail, n_val, True)
    return train, val


def sample_pools(
    pool: PixelPool,
    n_train: int = 420_000,
    n_val: int = 420_000,
    seed=0,
    balanced: bool = False,
) -> tuple[PixelPool, PixelPool]:
    """Disjoint training and validation samples, each pixel drawn at most once."""
    tr, va = sample_indices(pool, n_train, n_val, seed, balanced)
    return pool.take(tr), pool.take(va)


def split_files(
    train: PixelPool,
    val: PixelPool,
    n_files: int = 30,
    per_file: int = 14_000,
    seed=0,
) -> list[DataFile]:
    expected = n_files * per_file
    if len(train) != expected or len(val) != expected:
        raise DataError(
            f"split needs {n_files} x {per_file} = {expected} samples per side, "
            f"got {len(train)} training and {len(val)} validation"
        )
    rng = np.random.default_rng(seed)
    tp = rng.permutation(len(train))
    vp = rng.permutation(len(val))
    files = []
    for i in range(n_files):
        sl = slice(i * per_file, (i + 1) * per_file)
        files.append(DataFile(i + 1, train.take(tp[sl]), val.take(vp[sl])))
    return files


def select_test_images(
    n_images: int,
    n: int = 100,
    seed=0,
    exclusion: Iterable[int] = (),
) -> list[int]:
    """Random ids from ``range(n_images)`` minus ``exclusion``, in selection order."""
    excluded = set(int(i) for i in exclusion)
    eligible = np.array([i for i in range(n_images) if i not in excluded], dtype=np.int64)
    if n < 0:
        raise ValueError("n must be non-negative")
    if len(eligible) < n:
        raise DataError(f"insufficient images: need {n} test images, {len(eligible)} eligible")
    rng = np.random.default_rng(seed)
    return [int(i) for i in eligible[rng.permutation(len(eligible))[:n]]]


# -- persistence --------------------------------------------------------------


def write_data_file(df: DataFile, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(DATAFILE_COLUMNS)
        for split, pool in (("train", df.train), ("val", df.val)):
            for i in range(len(pool)):
                r, g, b = pool.rgb[i]
                w.writerow(
                    (split, pool.image_id[i], pool.row[i], pool.col[i], r, g, b, pool.label[i])
                )


def read_data_file(path, index: int) -> DataFile:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"data file not found: {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if tuple(header or ()) != DATAFILE_COLUMNS:
            raise DataError(f"{path}: unexpected header {header}")
        rows = {"train": [], "val": []}
        for rec in reader:
            try:
                rows[rec[0]].append([int(v) for v in rec[1:]])
            except (KeyError, ValueError, IndexError) as exc:
                raise DataError(f"{path}: bad row {rec}") from exc

    def to_pool(rs):
        if not rs:
            return PixelPool.empty()
        a = np.array(rs, dtype=np.int64)
        return PixelPool(a[:, 0], a[:, 1], a[:, 2], a[:, 3:6], a[:, 6])

    return DataFile(index, to_pool(rows["train"]), to_pool(rows["val"]))


def data_file_name(index: int) -> str:
    return f"datafile_{index:02d}.csv"


def read_data_files(folder) -> list[DataFile]:
    folder = Path(folder)
    paths = sorted(folder.glob("datafile_*.csv"))
    if not paths:
        raise FileNotFoundError(f"no data files in {folder}")
    return [read_data_file(p, i + 1) for i, p in enumerate(paths)]
