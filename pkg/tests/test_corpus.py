"""Movement table, manifest and synthetic corpus tests."""

import numpy as np
import pytest

from stylesym.data import (
    builtin_movements,
    load_image,
    load_manifest,
    synth_rotation_corpus,
    synth_style_corpus,
    to_grayscale,
    write_manifest,
    write_style_corpus,
)
from stylesym.errors import DataError, ManifestError


# ---------------------------------------------------------------------------
# builtin movements
# ---------------------------------------------------------------------------


def test_builtin_table_counts():
    table = builtin_movements()
    assert len(table) == 50
    assert len(table.movements()) == 14


def test_builtin_table_spot_checks():
    table = builtin_movements()
    assert table.movement_of("Claude Monet") == "Impressionism"
    assert table.movement_of("Andy Warhol") == "Pop Art"
    assert table.movement_of("Vincent van Gogh") == "Post-Impressionism"
    assert table.movement_of("Caravaggio") == "Baroque"
    assert table.movement_of("Raphael") == "Renaissance"
    assert table.movement_of("Edvard Munch") == "Expressionism"
    assert table.movement_of("Andrei Rublev") == "Byzantine Art"


def test_unknown_artist_lookup():
    with pytest.raises(DataError, match="Bob Ross"):
        builtin_movements().movement_of("Bob Ross")


# ---------------------------------------------------------------------------
# manifests
# ---------------------------------------------------------------------------


def write(tmp_path, text, name="manifest.csv"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


def test_manifest_accepts_repeat_artist_same_movement(tmp_path):
    p = write(
        tmp_path,
        "path,artist,movement\na.pgm,Claude Monet,Impressionism\n"
        "b.pgm,Claude Monet,Impressionism\n",
    )
    m = load_manifest(p)
    assert len(m) == 2
    assert m.artists() == ("Claude Monet",)
    assert m.resolve(m.entries[0]) == tmp_path / "a.pgm"


def test_manifest_rejects_artist_with_two_movements(tmp_path):
    p = write(
        tmp_path,
        "path,artist,movement\na.pgm,X,M1\nb.pgm,X,M2\n",
    )
    with pytest.raises(ManifestError, match="both"):
        load_manifest(p)


def test_manifest_rejects_duplicate_path(tmp_path):
    p = write(tmp_path, "path,artist,movement\na.pgm,X,M\na.pgm,Y,M\n")
    with pytest.raises(ManifestError, match="duplicate"):
        load_manifest(p)


def test_manifest_rejects_bad_header(tmp_path):
    p = write(tmp_path, "file,painter,school\na.pgm,X,M\n")
    with pytest.raises(ManifestError, match="header"):
        load_manifest(p)


def test_manifest_strict_unknown_artist(tmp_path):
    p = write(tmp_path, "path,artist,movement\na.pgm,Nobody Real,Impressionism\n")
    with pytest.raises(ManifestError, match="Nobody Real"):
        load_manifest(p, strict=True)


def test_manifest_strict_movement_mismatch(tmp_path):
    p = write(tmp_path, "path,artist,movement\na.pgm,Claude Monet,Baroque\n")
    with pytest.raises(ManifestError, match="Claude Monet"):
        load_manifest(p, strict=True)


def test_manifest_strict_accepts_builtin(tmp_path):
    p = write(tmp_path, "path,artist,movement\na.pgm,Claude Monet,Impressionism\n")
    m = load_manifest(p, strict=True)
    assert m.movement_table().movement_of("Claude Monet") == "Impressionism"


def test_manifest_write_round_trip(tmp_path):
    p = write(
        tmp_path,
        "path,artist,movement\na.pgm,X,M\nb.pgm,Y,N\n",
    )
    m = load_manifest(p)
    out = tmp_path / "copy.csv"
    write_manifest(m, out)
    again = load_manifest(out)
    assert again.entries == m.entries


# ---------------------------------------------------------------------------
# rotation corpus
# ---------------------------------------------------------------------------


def test_rotation_corpus_deterministic():
    a_imgs, a_labels = synth_rotation_corpus(7, 5, 16)
    b_imgs, b_labels = synth_rotation_corpus(7, 5, 16)
    assert np.array_equal(a_labels, b_labels)
    for x, y in zip(a_imgs, b_imgs):
        assert np.array_equal(x.pixels, y.pixels)


def test_rotation_corpus_empty():
    imgs, labels = synth_rotation_corpus(0, 0, 16)
    assert imgs == [] and labels.size == 0


def test_rotation_corpus_shapes_and_labels():
    imgs, labels = synth_rotation_corpus(3, 4, 24)
    assert len(imgs) == 8
    assert labels.tolist() == [1, 1, 1, 1, 0, 0, 0, 0]
    assert all(i.channels == 1 and i.width == 24 for i in imgs)


def test_rotation_corpus_positives_rotation_invariant():
    imgs, labels = synth_rotation_corpus(11, 6, 24)
    for img, lab in zip(imgs, labels):
        if lab != 1:
            continue
        plane = img.plane(0)
        mae = np.mean(np.abs(np.rot90(plane) - plane))
        assert mae < 2e-2


def test_rotation_corpus_rejects_tiny_size():
    with pytest.raises(ValueError):
        synth_rotation_corpus(0, 1, 4)


# ---------------------------------------------------------------------------
# style corpus
# ---------------------------------------------------------------------------


def test_style_corpus_structure():
    corpus = synth_style_corpus(0, size=48, images_per_artist=3)
    movements = {e.movement for e in corpus.manifest.entries}
    artists = corpus.manifest.artists()
    assert movements == {"panels", "blobs", "stripes"}
    assert len(artists) == 12
    assert len(corpus.manifest) == 36
    assert len(corpus.images) == 36


def test_style_corpus_deterministic():
    a = synth_style_corpus(5, size=32, images_per_artist=2)
    b = synth_style_corpus(5, size=32, images_per_artist=2)
    assert a.manifest.entries == b.manifest.entries
    for x, y in zip(a.images, b.images):
        assert np.array_equal(x.pixels, y.pixels)


def test_style_corpus_mean_intensity_separates_movements():
    # The coverage/background construction orders the movement means
    # as panels < stripes < blobs; checked on grayscale intensity.
    corpus = synth_style_corpus(1, size=64, images_per_artist=10)
    means = {}
    for entry, img in zip(corpus.manifest.entries, corpus.images):
        means.setdefault(entry.movement, []).append(
            float(np.mean(to_grayscale(img).pixels))
        )
    avg = {m: float(np.mean(v)) for m, v in means.items()}
    assert avg["panels"] + 0.03 < avg["stripes"]
    assert avg["stripes"] + 0.03 < avg["blobs"]


def test_style_corpus_panel_images_constant_along_y():
    corpus = synth_style_corpus(2, size=32, images_per_artist=1)
    for entry, img in zip(corpus.manifest.entries, corpus.images):
        plane = img.pixels
        if entry.movement == "panels":
            # every column is constant: vertical translation symmetry
            assert np.max(np.abs(plane - plane[:, :1, :])) == 0.0
        elif entry.movement == "stripes":
            assert np.max(np.abs(plane - plane[:, :, :1])) == 0.0


def test_write_style_corpus_round_trip(tmp_path):
    corpus = synth_style_corpus(3, size=16, images_per_artist=2)
    manifest_path = write_style_corpus(corpus, tmp_path)
    m = load_manifest(manifest_path)
    assert len(m) == 24
    img = load_image(m.resolve(m.entries[0]))
    assert img.channels == 3 and img.width == 16
    # quantization to 8-bit is the only loss
    assert np.max(np.abs(img.pixels - corpus.images[0].pixels)) <= 0.5 / 255 + 1e-12
