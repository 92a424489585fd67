"""Synthetic image/mask corpus for exercising the pipeline without the real database.

Skin pixels are drawn around chroma (Cb, Cr) = (100, 155); background pixels
come from a broad distribution around the grey point. ``separation`` slides
the skin distribution from identical-to-background (0) to fully distinct (1).
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .color import ycbcr_to_rgb
from .data import CorpusManifest, save_mask, write_manifest

SKIN_CHROMA = (100.0, 155.0)
SKIN_CHROMA_SD = 7.0
BACKGROUND_CHROMA = (128.0, 128.0)
BACKGROUND_CHROMA_SD = 40.0


@dataclass(frozen=True)
class FixtureParams:
    n_images: int = 30
    width: int = 64
    height: int = 64
    separation: float = 1.0
    seed: int = 1
    max_blobs: int = 3

    def __post_init__(self):
        if self.n_images < 1 or self.width < 1 or self.height < 1:
            raise ValueError("image count and size must be >= 1")
        if not 0.0 <= self.separation <= 1.0:
            raise ValueError("separation must be in [0, 1]")


def _chroma(rng, n: int, mean, sd: float) -> tuple[np.ndarray, np.ndarray]:
    cb = rng.normal(mean[0], sd, n)
    cr = rng.normal(mean[1], sd, n)
    return np.clip(cb, 16, 240), np.clip(cr, 16, 240)


def _blob_mask(rng, h: int, w: int, max_blobs: int) -> np.ndarray:
    yy, xx = np.mgrid[0:h, 0:w]
    mask = np.zeros((h, w), dtype=bool)
    for _ in range(rng.integers(1, max_blobs + 1)):
        cy, cx = rng.uniform(0, h), rng.uniform(0, w)
        ay, ax = rng.uniform(0.1, 0.3) * h, rng.uniform(0.1, 0.3) * w
        mask |= ((yy - cy) / ay) ** 2 + ((xx - cx) / ax) ** 2 <= 1.0
    return mask


def render_image(rng: np.random.Generator, p: FixtureParams) -> tuple[np.ndarray, np.ndarray]:
    """One (RGB uint8 image, 0/1 mask) pair."""
    h, w = p.height, p.width
    mask = _blob_mask(rng, h, w, p.max_blobs)
    n = h * w
    y = rng.uniform(60, 200, n)
    cb, cr = _chroma(rng, n, BACKGROUND_CHROMA, BACKGROUND_CHROMA_SD)
    s = p.separation
    skin_mean = tuple(b + s * (k - b) for b, k in zip(BACKGROUND_CHROMA, SKIN_CHROMA))
    skin_sd = BACKGROUND_CHROMA_SD + s * (SKIN_CHROMA_SD - BACKGROUND_CHROMA_SD)
    flat = mask.ravel()
    scb, scr = _chroma(rng, int(flat.sum()), skin_mean, skin_sd)
    cb[flat], cr[flat] = scb, scr
    rgb = ycbcr_to_rgb(y, cb, cr).reshape(h, w, 3)
    return rgb, mask.astype(np.uint8)


def make_fixture(out, params: FixtureParams = FixtureParams()) -> CorpusManifest:
    """Write images/, masks/, manifest.tsv and fixture.json under ``out``."""
    out = Path(out)
    (out / "images").mkdir(parents=True, exist_ok=True)
    (out / "masks").mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(params.seed)
    entries = []
    for i in range(params.n_images):
        rgb, mask = render_image(rng, params)
        img_path = out / "images" / f"img_{i:04d}.png"
        mask_path = out / "masks" / f"img_{i:04d}.png"
        Image.fromarray(rgb).save(img_path, format="PNG")
        save_mask(mask, mask_path)
        entries.append((img_path, mask_path))
    manifest = CorpusManifest(entries)
    write_manifest(manifest, out / "manifest.tsv")
    meta = {
        **asdict(params),
        "skin_chroma": SKIN_CHROMA,
        "skin_chroma_sd": SKIN_CHROMA_SD,
        "background_chroma": BACKGROUND_CHROMA,
        "background_chroma_sd": BACKGROUND_CHROMA_SD,
    }
    (out / "fixture.json").write_text(json.dumps(meta, indent=1) + "\n")
    return manifest
