"""Stage runners wiring corpus -> models -> generators -> distances -> reports.

Every stage reads its inputs from, and writes its artifacts into, a
fixed work-directory layout::

    checkpoints/   one .bin per artist + metrics.csv
    generators/    generators.csv, spectra.json, polar_<slug>.npy
    grams/         <slug>_<layer>.npy stacks + layers.json
    distances/     global.csv, texture.csv, combined.csv
    reports/       purity.json, dendrogram.newick, bootstrap.json, mantel.json
    renders/       dendrogram.svg, flow strips

Determinism: per-artist seeds are master seed + artist index (manifest
first-occurrence order); all floats serialize via repr; reruns with the
same config and seed are byte-identical.
"""

from __future__ import annotations

import json
import re
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .analysis import (
    ArtistFeatures,
    average_linkage,
    bootstrap_confidence,
    ground_truth_distance,
    mantel,
    nn_purity,
    write_bootstrap_json,
    write_mantel_json,
    write_newick,
    write_svg,
)
from .config import RANDOM_FALLBACK, RunConfig
from .data.images import ImageTensor, load_image, resize_bilinear, save_png, to_grayscale
from .data.manifest import CorpusManifest, load_manifest
from .errors import ConfigError, DataError
from .liegg import (
    Affine2D,
    PixelLinear,
    extract_generators,
    generator_flow,
    polarization,
    read_generator_csv,
    write_generator_csv,
)
from .mlp import (
    TrainConfig,
    balanced_negatives,
    init_mlp,
    input_gradient,
    load_checkpoint,
    save_checkpoint,
    train_binary,
)
from .styledist import (
    combine,
    normalize_offdiag,
    read_distance_csv,
    symmetry_distances,
    texture_distances,
    write_distance_csv,
)
from .texture import (
    GramSignature,
    artist_average_gram,
    load_extractor,
    random_extractor,
    signature,
)

#: Seed of the shared fallback filters; fixed so the texture route plays
#: the role of one pretrained network common to every run.
FALLBACK_FILTER_SEED = 7


def artist_slug(artist: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "_", artist).strip("_") or "artist"


def slug_map(artists) -> dict:
    out = {}
    for artist in artists:
        slug = artist_slug(artist)
        if slug in out.values():
            raise DataError(f"artist name {artist!r} collides with another slug")
        out[artist] = slug
    return out


def load_corpus(cfg: RunConfig, strict: bool = False) -> CorpusManifest:
    cfg.validate_paths()
    return load_manifest(cfg.manifest, strict=strict)


def _require(path: Path, producer: str) -> Path:
    if not path.exists():
        raise DataError(
            f"missing {path.name} under {path.parent}; run `stylesym {producer}` first"
        )
    return path


def _gray_plane(manifest: CorpusManifest, entry, size: int) -> np.ndarray:
    img = load_image(manifest.resolve(entry))
    return resize_bilinear(to_grayscale(img), size, size).plane()


def _rgb_image(manifest: CorpusManifest, entry, size: int) -> ImageTensor:
    img = load_image(manifest.resolve(entry))
    img = resize_bilinear(img, size, size)
    if img.channels == 1:
        return ImageTensor(pixels=np.repeat(img.pixels, 3, axis=0))
    return img


# ---------------------------------------------------------------------------
# train
# ---------------------------------------------------------------------------


def run_train(cfg: RunConfig, strict: bool = False, jobs: int = 1) -> list:
    """Fit one binary artist-vs-rest classifier per artist.

    Returns metrics rows (artist, final loss, final accuracy); writes
    checkpoints/<slug>.bin and checkpoints/metrics.csv.
    """
    manifest = load_corpus(cfg, strict)
    artists = manifest.artists()
    if len(artists) < 2:
        raise DataError("training needs at least two artists")
    slugs = slug_map(artists)
    size = cfg.mlp_image_size
    grays = {
        artist: np.stack(
            [_gray_plane(manifest, e, size).ravel() for e in manifest.entries_for(artist)]
        )
        for artist in artists
    }

    def fit(index_artist):
        index, artist = index_artist
        seed = cfg.seed + index
        positives = grays[artist]
        pool = np.concatenate([grays[a] for a in artists if a != artist])
        rng = np.random.default_rng(seed)
        negatives = pool[balanced_negatives(rng, len(positives), len(pool))]
        xs = np.concatenate([positives, negatives])
        ys = np.concatenate([np.ones(len(positives)), np.zeros(len(negatives))])
        model = init_mlp(
            size * size, hidden=(cfg.mlp_width,) * cfg.mlp_depth, seed=seed
        )
        try:
            trained, history = train_binary(
                model,
                xs,
                ys,
                TrainConfig(
                    learning_rate=cfg.mlp_learning_rate,
                    epochs=cfg.mlp_epochs,
                    batch_size=cfg.mlp_batch_size,
                    seed=seed,
                    weight_decay=cfg.mlp_weight_decay,
                ),
            )
        except Exception as exc:
            raise type(exc)(f"artist {artist!r}: {exc}") from exc
        return artist, trained, history

    work = list(enumerate(artists))
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(fit, work))
    else:
        results = [fit(item) for item in work]

    ckpt_dir = cfg.workdir / "checkpoints"
    ckpt_dir.mkdir(parents=True, exist_ok=True)
    metrics = []
    for artist, trained, history in results:
        save_checkpoint(trained, ckpt_dir / f"{slugs[artist]}.bin")
        metrics.append((artist, history.loss[-1], history.final_accuracy))
    with open(ckpt_dir / "metrics.csv", "w", newline="") as fh:
        fh.write("artist,final_loss,final_accuracy\n")
        for artist, loss, acc in metrics:
            fh.write(f"{artist},{repr(float(loss))},{repr(float(acc))}\n")
    return metrics


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------


def _algebra_param(cfg: RunConfig):
    if cfg.algebra == "affine2d":
        return Affine2D()
    return PixelLinear(cfg.mlp_image_size * cfg.mlp_image_size)


def run_generators(cfg: RunConfig, strict: bool = False) -> dict:
    """Polarization rows + generator extraction for every artist.

    Writes generators/generators.csv, generators/spectra.json, and the
    per-artist painting-level rows generators/polar_<slug>.npy (consumed
    by the bootstrap stage).
    """
    manifest = load_corpus(cfg, strict)
    artists = manifest.artists()
    slugs = slug_map(artists)
    param = _algebra_param(cfg)
    ckpt_dir = cfg.workdir / "checkpoints"
    gen_dir = cfg.workdir / "generators"
    gen_dir.mkdir(parents=True, exist_ok=True)
    size = cfg.mlp_image_size
    sets, spectra = {}, {}
    for artist in artists:
        ckpt = _require(ckpt_dir / f"{slugs[artist]}.bin", "train")
        model = load_checkpoint(ckpt)
        if model.weights[0].shape[1] != size * size:
            raise DataError(
                f"artist {artist!r}: checkpoint expects input "
                f"{model.weights[0].shape[1]}, config image size gives {size * size}"
            )
        planes = [
            _gray_plane(manifest, e, size) for e in manifest.entries_for(artist)
        ]
        rows = polarization(lambda x: input_gradient(model, x), planes, param)
        np.save(gen_dir / f"polar_{slugs[artist]}.npy", rows)
        gset = extract_generators(rows, cfg.generator_count)
        sets[artist] = gset
        spectra[artist] = [float(v) for v in gset.spectrum]
    write_generator_csv(sets, gen_dir / "generators.csv")
    (gen_dir / "spectra.json").write_text(
        json.dumps(spectra, sort_keys=True, indent=2) + "\n"
    )
    return sets


# ---------------------------------------------------------------------------
# gram
# ---------------------------------------------------------------------------


def _texture_extractor(cfg: RunConfig):
    if cfg.texture_container == RANDOM_FALLBACK:
        return random_extractor(seed=FALLBACK_FILTER_SEED)
    return load_extractor(cfg.texture_container)


def run_gram(cfg: RunConfig, strict: bool = False) -> None:
    """Per-painting Gram stacks per artist: grams/<slug>_<layer>.npy."""
    manifest = load_corpus(cfg, strict)
    artists = manifest.artists()
    slugs = slug_map(artists)
    extractor = _texture_extractor(cfg)
    gram_dir = cfg.workdir / "grams"
    gram_dir.mkdir(parents=True, exist_ok=True)
    for artist in artists:
        per_layer = {name: [] for name in cfg.texture_layers}
        for entry in manifest.entries_for(artist):
            img = _rgb_image(manifest, entry, cfg.texture_image_size)
            sig = signature(extractor, img, cfg.texture_layers)
            for name in cfg.texture_layers:
                per_layer[name].append(sig.layers[name])
        for name in cfg.texture_layers:
            np.save(
                gram_dir / f"{slugs[artist]}_{name}.npy", np.stack(per_layer[name])
            )
    (gram_dir / "layers.json").write_text(
        json.dumps(
            {
                "selection": list(cfg.texture_layers),
                "artists": [[artist, slugs[artist]] for artist in artists],
            },
            sort_keys=True,
            indent=2,
        )
        + "\n"
    )


def _load_gram_signatures(cfg: RunConfig, artists, slugs) -> dict:
    """artist -> list of per-painting GramSignature, from the gram stage."""
    gram_dir = cfg.workdir / "grams"
    _require(gram_dir / "layers.json", "gram")
    meta = json.loads((gram_dir / "layers.json").read_text())
    if tuple(meta.get("selection", ())) != cfg.texture_layers:
        raise ConfigError(
            f"gram artifacts were built for layers {meta.get('selection')}, "
            f"config selects {list(cfg.texture_layers)}"
        )
    out = {}
    for artist in artists:
        stacks = {}
        for name in cfg.texture_layers:
            path = _require(gram_dir / f"{slugs[artist]}_{name}.npy", "gram")
            stacks[name] = np.load(path)
        counts = {arr.shape[0] for arr in stacks.values()}
        if len(counts) != 1:
            raise DataError(f"artist {artist!r}: gram stacks disagree on count")
        count = counts.pop()
        out[artist] = [
            GramSignature(
                layers={name: stacks[name][i] for name in cfg.texture_layers},
                selection=cfg.texture_layers,
            )
            for i in range(count)
        ]
    return out


# ---------------------------------------------------------------------------
# distances
# ---------------------------------------------------------------------------


def run_distances(cfg: RunConfig, strict: bool = False) -> dict:
    """Three artist-level matrices (global, texture, combined) + purity."""
    manifest = load_corpus(cfg, strict)
    artists = manifest.artists()
    slugs = slug_map(artists)
    gen_dir = cfg.workdir / "generators"
    sets = read_generator_csv(_require(gen_dir / "generators.csv", "generators"))
    if tuple(sets) != artists:
        raise DataError(
            "artist set mismatch between generators.csv and the manifest; "
            "re-run `stylesym generators`"
        )
    signatures = _load_gram_signatures(cfg, artists, slugs)
    averaged = {
        artist: artist_average_gram(signatures[artist]) for artist in artists
    }
    sym = symmetry_distances(artists, [sets[a].vectors for a in artists])
    tex = texture_distances(artists, [averaged[a] for a in artists])
    combined = combine(sym, tex, cfg.lam)
    dist_dir = cfg.workdir / "distances"
    write_distance_csv(dist_dir / "global.csv", normalize_offdiag(sym))
    write_distance_csv(dist_dir / "texture.csv", normalize_offdiag(tex))
    write_distance_csv(dist_dir / "combined.csv", combined)
    table = manifest.movement_table()
    purity = {
        "global": nn_purity(normalize_offdiag(sym), table),
        "texture": nn_purity(normalize_offdiag(tex), table),
        "combined": nn_purity(combined, table),
    }
    report_dir = cfg.workdir / "reports"
    report_dir.mkdir(parents=True, exist_ok=True)
    (report_dir / "purity.json").write_text(
        json.dumps(purity, sort_keys=True, indent=2) + "\n"
    )
    return purity


# ---------------------------------------------------------------------------
# cluster / bootstrap / mantel / flow
# ---------------------------------------------------------------------------


def run_cluster(cfg: RunConfig, strict: bool = False):
    manifest = load_corpus(cfg, strict)
    combined = read_distance_csv(
        _require(cfg.workdir / "distances" / "combined.csv", "distances")
    )
    dend = average_linkage(combined)
    write_newick(cfg.workdir / "reports" / "dendrogram.newick", dend)
    write_svg(
        cfg.workdir / "renders" / "dendrogram.svg", dend, manifest.movement_table()
    )
    return dend


def run_bootstrap(cfg: RunConfig, strict: bool = False, jobs: int = 1):
    manifest = load_corpus(cfg, strict)
    artists = manifest.artists()
    slugs = slug_map(artists)
    gen_dir = cfg.workdir / "generators"
    signatures = _load_gram_signatures(cfg, artists, slugs)
    features = []
    for artist in artists:
        rows = np.load(_require(gen_dir / f"polar_{slugs[artist]}.npy", "generators"))
        sigs = signatures[artist]
        if rows.shape[0] != len(sigs):
            raise DataError(
                f"artist {artist!r}: {rows.shape[0]} polarization rows vs "
                f"{len(sigs)} gram signatures; re-run `stylesym generators` "
                "and `stylesym gram` on the same manifest"
            )
        features.append(
            ArtistFeatures(label=artist, polarization=rows, signatures=tuple(sigs))
        )
    reference, report = bootstrap_confidence(
        features,
        trials=cfg.bootstrap_b,
        seed=cfg.seed,
        lam=cfg.lam,
        generator_count=cfg.generator_count,
        threshold=cfg.bootstrap_threshold,
        jobs=jobs,
    )
    write_bootstrap_json(cfg.workdir / "reports" / "bootstrap.json", report)
    return reference, report


def run_mantel(cfg: RunConfig, strict: bool = False):
    manifest = load_corpus(cfg, strict)
    combined = read_distance_csv(
        _require(cfg.workdir / "distances" / "combined.csv", "distances")
    )
    gt = ground_truth_distance(
        cfg.ground_truth, combined.labels, manifest.movement_table()
    )
    result = mantel(
        combined, gt, permutations=cfg.mantel_permutations, seed=cfg.seed
    )
    write_mantel_json(
        cfg.workdir / "reports" / "mantel.json", result, cfg.ground_truth
    )
    return result


def run_flow(cfg: RunConfig, image_path, artist: str, rank: int = 0) -> Path:
    """Render the five-panel strip t in {-2d, -d, 0, d, 2d} for one image."""
    cfg.validate_paths()
    sets = read_generator_csv(
        _require(cfg.workdir / "generators" / "generators.csv", "generators")
    )
    if artist not in sets:
        raise DataError(
            f"no generators for artist {artist!r}; known: {', '.join(sets)}"
        )
    gset = sets[artist]
    if not 0 <= rank < gset.vectors.shape[0]:
        raise DataError(
            f"rank {rank} out of range; artist has {gset.vectors.shape[0]} generators"
        )
    gen = gset.vectors[rank]
    img = load_image(image_path)
    delta = cfg.flow_delta
    panels = [
        generator_flow(img, gen, t)
        for t in (-2 * delta, -delta, 0.0, delta, 2 * delta)
    ]
    gap = np.ones((img.channels, img.height, 2))
    parts = []
    for i, panel in enumerate(panels):
        if i:
            parts.append(gap)
        parts.append(panel.pixels)
    strip = ImageTensor(pixels=np.concatenate(parts, axis=2))
    render_dir = cfg.workdir / "renders"
    render_dir.mkdir(parents=True, exist_ok=True)
    out = render_dir / f"flow_{artist_slug(artist)}_r{rank}.png"
    save_png(strip, out)
    return out
