"""Corpus manifests: which image belongs to which artist and movement.

A manifest is a CSV file with the exact header ``path,artist,movement``.
Relative image paths are resolved against the directory containing the
manifest file, which keeps corpora relocatable.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

from ..errors import ManifestError
from .movements import ArtistMovementTable, builtin_movements

_HEADER = ["path", "artist", "movement"]


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    artist: str
    movement: str


@dataclass
class CorpusManifest:
    """Ordered list of manifest entries plus the directory they resolve in."""

    entries: list
    root: Path

    def artists(self) -> tuple:
        """Artist names in first-occurrence order."""
        seen = {}
        for e in self.entries:
            seen.setdefault(e.artist, None)
        return tuple(seen)

    def movement_table(self) -> ArtistMovementTable:
        mapping = {}
        for e in self.entries:
            mapping.setdefault(e.artist, e.movement)
        return ArtistMovementTable(mapping=mapping)

    def entries_for(self, artist: str) -> list:
        return [e for e in self.entries if e.artist == artist]

    def resolve(self, entry: ManifestEntry) -> Path:
        p = Path(entry.path)
        return p if p.is_absolute() else self.root / p

    def __len__(self) -> int:
        return len(self.entries)


def load_manifest(path, strict: bool = False) -> CorpusManifest:
    """Parse and validate a manifest CSV.

    Args:
        path: manifest file location.
        strict: additionally require every artist to appear in the builtin
            movement table with a matching movement name.

    Raises:
        ManifestError: missing/bad header, empty fields, duplicate paths,
            an artist listed under two movements, or (strict) unknown
            artists / movement mismatches -- always naming the offender.
    """
    p = Path(path)
    if not p.is_file():
        raise ManifestError(f"manifest not found: {p}")
    with open(p, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ManifestError(f"{p}: empty manifest") from None
        if header != _HEADER:
            raise ManifestError(
                f"{p}: bad header {header!r}, expected {_HEADER!r}"
            )
        entries = []
        seen_paths = set()
        artist_movement = {}
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise ManifestError(f"{p}:{lineno}: expected 3 fields, got {len(row)}")
            rel, artist, movement = (field.strip() for field in row)
            if not rel or not artist or not movement:
                raise ManifestError(f"{p}:{lineno}: empty field")
            if rel in seen_paths:
                raise ManifestError(f"{p}:{lineno}: duplicate path {rel!r}")
            seen_paths.add(rel)
            prior = artist_movement.setdefault(artist, movement)
            if prior != movement:
                raise ManifestError(
                    f"{p}:{lineno}: artist {artist!r} listed under both "
                    f"{prior!r} and {movement!r}"
                )
            entries.append(ManifestEntry(path=rel, artist=artist, movement=movement))
    if not entries:
        raise ManifestError(f"{p}: manifest has no entries")
    if strict:
        table = builtin_movements()
        for artist, movement in artist_movement.items():
            if artist not in table:
                raise ManifestError(f"{p}: unknown artist in strict mode: {artist!r}")
            expected = table.movement_of(artist)
            if movement != expected:
                raise ManifestError(
                    f"{p}: artist {artist!r} tagged {movement!r}, "
                    f"builtin table says {expected!r}"
                )
    return CorpusManifest(entries=entries, root=p.parent)


def write_manifest(manifest: CorpusManifest, path) -> None:
    """Write entries back out with the canonical header, no quoting games."""
    p = Path(path)
    with open(p, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_HEADER)
        for e in manifest.entries:
            writer.writerow([e.path, e.artist, e.movement])
