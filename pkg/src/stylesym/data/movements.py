"""Builtin artist-to-movement assignments.

Fifty canonical painters across fourteen movements; every artist maps to
exactly one movement.  This table backs the ground-truth matrices and
the ``--strict`` manifest cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import DataError

_TABLE = (
    ("Piet Mondrian", "Abstract Art"),
    ("Kazimir Malevich", "Abstract Art"),
    ("Jackson Pollock", "Abstract Art"),
    ("Peter Paul Rubens", "Baroque"),
    ("Caravaggio", "Baroque"),
    ("Diego Velazquez", "Baroque"),
    ("Rembrandt", "Baroque"),
    ("Andrei Rublev", "Byzantine Art"),
    ("Pablo Picasso", "Cubism"),
    ("Amedeo Modigliani", "Expressionism"),
    ("Vasiliy Kandinsky", "Expressionism"),
    ("Edvard Munch", "Expressionism"),
    ("Paul Klee", "Expressionism"),
    ("Claude Monet", "Impressionism"),
    ("Edouard Manet", "Impressionism"),
    ("Pierre-Auguste Renoir", "Impressionism"),
    ("Alfred Sisley", "Impressionism"),
    ("Edgar Degas", "Impressionism"),
    ("Camille Pissarro", "Impressionism"),
    ("Hieronymus Bosch", "Northern Renaissance"),
    ("Albrecht Dürer", "Northern Renaissance"),
    ("Pieter Bruegel", "Northern Renaissance"),
    ("Jan van Eyck", "Northern Renaissance"),
    ("Andy Warhol", "Pop Art"),
    ("Vincent van Gogh", "Post-Impressionism"),
    ("Henri Matisse", "Post-Impressionism"),
    ("Henri de Toulouse-Lautrec", "Post-Impressionism"),
    ("Paul Cézanne", "Post-Impressionism"),
    ("Georges Seurat", "Post-Impressionism"),
    ("Diego Rivera", "Post-Impressionism"),
    ("Marc Chagall", "Primitivism"),
    ("Henri Rousseau", "Primitivism"),
    ("Paul Gauguin", "Primitivism"),
    ("Giotto di Bondone", "Renaissance"),
    ("Sandro Botticelli", "Renaissance"),
    ("Leonardo da Vinci", "Renaissance"),
    ("Raphael", "Renaissance"),
    ("Michelangelo", "Renaissance"),
    ("Titian", "Renaissance"),
    ("El Greco", "Renaissance"),
    ("Francisco Goya", "Romanticism"),
    ("William Turner", "Romanticism"),
    ("Eugène Delacroix", "Romanticism"),
    ("Gustave Courbet", "Romanticism"),
    ("René Magritte", "Surrealism"),
    ("Salvador Dalí", "Surrealism"),
    ("Frida Kahlo", "Surrealism"),
    ("Joan Miró", "Surrealism"),
    ("Gustav Klimt", "Symbolism"),
    ("Mikhail Vrubel", "Symbolism"),
)


@dataclass(frozen=True)
class ArtistMovementTable:
    """Immutable artist -> movement mapping with the usual lookups."""

    mapping: dict = field(default_factory=dict)

    def __post_init__(self):
        for artist, movement in self.mapping.items():
            if not artist or not movement:
                raise DataError("empty artist or movement name in table")

    def movement_of(self, artist: str) -> str:
        try:
            return self.mapping[artist]
        except KeyError:
            raise DataError(f"unknown artist: {artist!r}") from None

    def __contains__(self, artist: str) -> bool:
        return artist in self.mapping

    def artists(self) -> tuple:
        """Artist names in table insertion order."""
        return tuple(self.mapping)

    def movements(self) -> tuple:
        """Distinct movement names in first-appearance order."""
        seen = {}
        for movement in self.mapping.values():
            seen.setdefault(movement, None)
        return tuple(seen)

    def __len__(self) -> int:
        return len(self.mapping)


def builtin_movements() -> ArtistMovementTable:
    """The builtin 50-artist / 14-movement table."""
    return ArtistMovementTable(mapping=dict(_TABLE))
