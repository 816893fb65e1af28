"""Synthetic corpora with known symmetries.

Two generators:

* `synth_rotation_corpus` -- a binary corpus whose positive class
  (concentric rings) is rotation invariant by construction and whose
  negative class (oriented bars) is not.  Used as the oracle corpus for
  learned-generator recovery.

* `synth_style_corpus` -- 3 "movements" x 4 "artists" x 20 paintings.
  Movement `panels` is made of flat, soft-edged full-height vertical
  panels (axis-aligned rectangles; invariant under vertical translation
  and vertical scaling, pointwise).  Movement `stripes` mirrors the same
  construction horizontally (invariant under horizontal translation /
  scaling).  Movement `blobs` is an isotropic field of thin concentric
  rings (rotation symmetric, high-frequency texture).  Panels and
  stripes deliberately share palette and layout statistics except for a
  coverage offset, so texture features confuse them while their exact
  symmetry null spaces are mutually orthogonal; within a movement,
  artists differ by palette statistics only.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .images import ImageTensor, save_ppm
from .manifest import CorpusManifest, ManifestEntry, write_manifest

MOVEMENTS = ("panels", "blobs", "stripes")
ARTISTS_PER_MOVEMENT = 4
IMAGES_PER_ARTIST = 20


def _coords(size: int):
    """Half-pixel-centered normalized coordinates in (-1, 1)."""
    c = (2.0 * (np.arange(size) + 0.5) - size) / size
    return c, c.copy()


def _rings_field(rng, size: int, n_lo: int, n_hi: int, width_lo: float, width_hi: float):
    px, py = _coords(size)
    rr = np.hypot(px[np.newaxis, :], py[:, np.newaxis])
    field = np.zeros((size, size))
    for _ in range(int(rng.integers(n_lo, n_hi + 1))):
        r0 = rng.uniform(0.08, 1.2)
        sigma = rng.uniform(width_lo, width_hi)
        amp = rng.uniform(0.5, 1.0)
        field += amp * np.exp(-((rr - r0) ** 2) / (2.0 * sigma * sigma))
    return np.clip(field, 0.0, 1.0)


def _bars_field(rng, size: int):
    px, py = _coords(size)
    phi = rng.uniform(0.0, np.pi)
    u = px[np.newaxis, :] * np.cos(phi) + py[:, np.newaxis] * np.sin(phi)
    field = np.zeros((size, size))
    for _ in range(int(rng.integers(2, 5))):
        c = rng.uniform(-0.7, 0.7)
        sigma = rng.uniform(0.05, 0.14)
        amp = rng.uniform(0.5, 1.0)
        field += amp * np.exp(-((u - c) ** 2) / (2.0 * sigma * sigma))
    return np.clip(field, 0.0, 1.0)


def synth_rotation_corpus(seed: int, n_per_class: int, size: int):
    """Rotation-oracle corpus: rings (label 1) vs oriented bars (label 0).

    Args:
        seed: RNG seed; same seed reproduces the corpus exactly.
        n_per_class: images per class (0 gives an empty corpus).
        size: square image side, at least 8.

    Returns:
        (images, labels): list of grayscale ImageTensors and an int array.
    """
    if size < 8:
        raise ValueError(f"size must be >= 8, got {size}")
    rng = np.random.default_rng(seed)
    images = []
    labels = []
    for _ in range(n_per_class):
        field = _rings_field(rng, size, 2, 4, 0.05, 0.12)
        images.append(ImageTensor(field[np.newaxis]))
        labels.append(1)
    for _ in range(n_per_class):
        images.append(ImageTensor(_bars_field(rng, size)[np.newaxis]))
        labels.append(0)
    return images, np.asarray(labels, dtype=np.int64)


# ---------------------------------------------------------------------------
# Style corpus
# ---------------------------------------------------------------------------


def _soft_interval(u: np.ndarray, center: float, halfwidth: float, edge: float):
    """Trapezoid bump: 1 inside the interval, linear ramp of width `edge`."""
    return np.clip((halfwidth - np.abs(u - center)) / edge, 0.0, 1.0)


@dataclass(frozen=True)
class _Palette:
    bg: np.ndarray        # (3,) background color
    fg_center: np.ndarray  # (3,) center of the foreground color cloud
    fg_jitter: float


def _draw_fg(rng, pal: _Palette) -> np.ndarray:
    return np.clip(
        pal.fg_center + rng.uniform(-pal.fg_jitter, pal.fg_jitter, 3), 0.0, 1.0
    )


def _blend(color: np.ndarray, fg: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    return color * (1.0 - alpha) + fg[:, np.newaxis, np.newaxis] * alpha


def _panels_image(rng, size: int, pal: _Palette, axis: str, n_lo: int, n_hi: int):
    """Soft-edged full-extent panels along one axis; flat interiors."""
    px, py = _coords(size)
    u = px[np.newaxis, :] if axis == "x" else py[:, np.newaxis]
    color = np.broadcast_to(pal.bg[:, np.newaxis, np.newaxis], (3, size, size)).copy()
    for _ in range(int(rng.integers(n_lo, n_hi + 1))):
        center = rng.uniform(-0.85, 0.85)
        halfwidth = rng.uniform(0.05, 0.13)
        alpha = _soft_interval(u, center, halfwidth, 0.02)
        color = _blend(color, _draw_fg(rng, pal), alpha)
    return ImageTensor(np.clip(color, 0.0, 1.0))


def _blobs_image(rng, size: int, pal: _Palette):
    """Isotropic thin-ring field: rotation symmetric, high-frequency."""
    px, py = _coords(size)
    rr = np.hypot(px[np.newaxis, :], py[:, np.newaxis])
    color = np.broadcast_to(pal.bg[:, np.newaxis, np.newaxis], (3, size, size)).copy()
    for _ in range(int(rng.integers(8, 13))):
        r0 = rng.uniform(0.06, 1.2)
        sigma = rng.uniform(0.035, 0.06)
        alpha = np.exp(-((rr - r0) ** 2) / (2.0 * sigma * sigma))
        color = _blend(color, _draw_fg(rng, pal), alpha)
    return ImageTensor(np.clip(color, 0.0, 1.0))


@dataclass
class SynthStyleCorpus:
    """In-memory corpus: manifest entries aligned with `images`."""

    manifest: CorpusManifest
    images: list

    def image_for(self, entry: ManifestEntry) -> ImageTensor:
        return self.images[self.manifest.entries.index(entry)]


def synth_style_corpus(
    seed: int,
    size: int = 224,
    images_per_artist: int = IMAGES_PER_ARTIST,
) -> SynthStyleCorpus:
    """Deterministic 3-movement x 4-artist x 20-image style corpus.

    Panels and stripes share the foreground/background palette ranges and
    panel-width statistics (they differ in orientation and in coverage:
    stripes lay down more intervals), so their Gram textures overlap;
    their pointwise symmetries are orthogonal, which is what the
    generator metric picks up.  Blobs get a brighter palette and much
    finer structure.  Mean intensity separates as panels < stripes <
    blobs by the coverage/background construction.
    """
    rng = np.random.default_rng(seed)
    entries = []
    images = []
    for movement in MOVEMENTS:
        for artist_i in range(1, ARTISTS_PER_MOVEMENT + 1):
            artist = f"{movement}-{artist_i}"
            if movement == "blobs":
                pal = _Palette(
                    bg=rng.uniform(0.45, 0.70, 3),
                    fg_center=rng.uniform(0.72, 0.95, 3),
                    fg_jitter=0.10,
                )
            else:
                # Overlapping background ranges with a structural offset:
                # stripes sit a shade brighter than panels, but any given
                # pair of artists can land on the same palette.
                lo = 0.15 if movement == "panels" else 0.25
                pal = _Palette(
                    bg=rng.uniform(lo, lo + 0.30, 3),
                    fg_center=rng.uniform(0.55, 0.95, 3),
                    fg_jitter=0.12,
                )
            for img_i in range(images_per_artist):
                if movement == "panels":
                    img = _panels_image(rng, size, pal, "x", 2, 3)
                elif movement == "stripes":
                    img = _panels_image(rng, size, pal, "y", 6, 8)
                else:
                    img = _blobs_image(rng, size, pal)
                rel = f"images/{artist}_{img_i:02d}.ppm"
                entries.append(
                    ManifestEntry(path=rel, artist=artist, movement=movement)
                )
                images.append(img)
    manifest = CorpusManifest(entries=entries, root=Path("."))
    return SynthStyleCorpus(manifest=manifest, images=images)


def write_style_corpus(corpus: SynthStyleCorpus, directory) -> Path:
    """Materialize a synthetic corpus: PPM files plus manifest.csv.

    Returns the manifest path; entry paths stay relative to `directory`.
    """
    root = Path(directory)
    (root / "images").mkdir(parents=True, exist_ok=True)
    for entry, img in zip(corpus.manifest.entries, corpus.images):
        save_ppm(img, root / entry.path)
    manifest_path = root / "manifest.csv"
    rooted = CorpusManifest(entries=corpus.manifest.entries, root=root)
    write_manifest(rooted, manifest_path)
    return manifest_path
