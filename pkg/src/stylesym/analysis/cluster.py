"""Average-linkage hierarchical clustering and dendrogram exports.

Node ids follow the usual convention: leaves are 0..n-1 in label order,
merge i creates node n+i.  Average linkage (UPGMA) keeps merge heights
non-decreasing, which the Dendrogram constructor enforces.  Ties between
candidate pairs are broken by the lexicographically smallest pair of
cluster representative labels (the smallest leaf label in each cluster),
so clustering is deterministic for any input.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import DataError
from ..styledist import DistanceMatrix

_PLAIN_LABEL = re.compile(r"[A-Za-z0-9_.|-]+")


@dataclass(frozen=True)
class Dendrogram:
    """Binary merge tree over labeled leaves."""

    labels: tuple
    merges: tuple  # (left_id, right_id, height) per merge

    def __post_init__(self):
        labels = tuple(str(x) for x in self.labels)
        merges = tuple((int(a), int(b), float(h)) for a, b, h in self.merges)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "merges", merges)
        n = len(labels)
        if n < 2:
            raise DataError("dendrogram needs at least two leaves")
        if len(set(labels)) != n:
            raise DataError("dendrogram leaf labels are not unique")
        if len(merges) != n - 1:
            raise DataError(f"{n} leaves require {n - 1} merges, got {len(merges)}")
        used = set()
        for step, (a, b, h) in enumerate(merges):
            top = n + step
            for child in (a, b):
                if not (0 <= child < top):
                    raise DataError(f"merge {step}: child id {child} out of range")
                if child in used:
                    raise DataError(f"merge {step}: node {child} already consumed")
                used.add(child)
            if h < 0:
                raise DataError(f"merge {step}: negative height {h!r}")
            if step and h < merges[step - 1][2] - 1e-9:
                raise DataError(
                    f"merge {step}: height {h!r} decreases below previous "
                    f"{merges[step - 1][2]!r}"
                )

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def root(self) -> int:
        return self.n + len(self.merges) - 1

    def node_height(self, node: int) -> float:
        return 0.0 if node < self.n else self.merges[node - self.n][2]

    def leaves_under(self, node: int) -> tuple:
        """Sorted leaf labels of a node's subtree."""
        stack, out = [node], []
        while stack:
            cur = stack.pop()
            if cur < self.n:
                out.append(self.labels[cur])
            else:
                a, b, _ = self.merges[cur - self.n]
                stack.extend((a, b))
        return tuple(sorted(out))


def clades(dend: Dendrogram, include_root: bool = False) -> tuple:
    """Leaf sets of internal nodes, in merge order; root excluded by default."""
    out = []
    for step in range(len(dend.merges)):
        node = dend.n + step
        if node == dend.root and not include_root:
            continue
        out.append(dend.leaves_under(node))
    return tuple(out)


def clade_set(dend: Dendrogram) -> frozenset:
    """All internal leaf sets (root included) for containment queries."""
    return frozenset(clades(dend, include_root=True))


def average_linkage(d: DistanceMatrix) -> Dendrogram:
    """UPGMA clustering of a distance matrix.

    The inter-cluster distance after a merge is the size-weighted mean
    of the parts, equal to the mean pairwise leaf distance.  Candidate
    pairs are compared by (distance, sorted representative labels), so
    exact ties resolve to the lexicographically smallest label pair.
    """
    n = d.n
    if n < 2:
        raise DataError("clustering needs at least two labels")
    m = 2 * n - 1
    dist = np.full((m, m), np.inf)
    dist[:n, :n] = d.values
    size = {i: 1 for i in range(n)}
    rep = {i: d.labels[i] for i in range(n)}
    active = sorted(range(n))
    merges = []
    for step in range(n - 1):
        best_key, best_pair = None, None
        for ai, i in enumerate(active):
            for j in active[ai + 1 :]:
                pair_labels = (rep[i], rep[j]) if rep[i] <= rep[j] else (rep[j], rep[i])
                key = (dist[i, j], pair_labels)
                if best_key is None or key < best_key:
                    best_key, best_pair = key, (i, j)
        i, j = best_pair
        height = float(best_key[0])
        new = n + step
        for k in active:
            if k in (i, j):
                continue
            merged = (size[i] * dist[i, k] + size[j] * dist[j, k]) / (size[i] + size[j])
            dist[new, k] = dist[k, new] = merged
        left, right = (i, j) if rep[i] <= rep[j] else (j, i)
        merges.append((left, right, height))
        size[new] = size[i] + size[j]
        rep[new] = min(rep[i], rep[j])
        active = [k for k in active if k not in (i, j)] + [new]
    return Dendrogram(labels=d.labels, merges=tuple(merges))


# ---------------------------------------------------------------------------
# Newick
# ---------------------------------------------------------------------------


def _fmt_len(x: float) -> str:
    return str(int(x)) if x == int(x) else repr(float(x))


def _escape_label(label: str) -> str:
    if _PLAIN_LABEL.fullmatch(label):
        return label
    return "'" + label.replace("'", "''") + "'"


def export_newick(dend: Dendrogram) -> str:
    """Newick text; branch length = parent height minus child height."""

    def emit(node: int, parent_height) -> str:
        if node < dend.n:
            body = _escape_label(dend.labels[node])
        else:
            a, b, h = dend.merges[node - dend.n]
            body = f"({emit(a, h)},{emit(b, h)})"
        if parent_height is None:
            return body
        return f"{body}:{_fmt_len(parent_height - dend.node_height(node))}"

    return emit(dend.root, None) + ";"


def write_newick(path, dend: Dendrogram) -> None:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(export_newick(dend) + "\n")


class _NewickScanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def peek(self) -> str:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take(self, ch: str) -> None:
        if self.peek() != ch:
            raise DataError(
                f"newick parse error at offset {self.pos}: expected {ch!r}"
            )
        self.pos += 1

    def label(self) -> str:
        if self.peek() == "'":
            self.pos += 1
            out = []
            while True:
                if self.pos >= len(self.text):
                    raise DataError("newick parse error: unterminated quoted label")
                c = self.text[self.pos]
                if c == "'":
                    if self.text[self.pos : self.pos + 2] == "''":
                        out.append("'")
                        self.pos += 2
                        continue
                    self.pos += 1
                    return "".join(out)
                out.append(c)
                self.pos += 1
        match = _PLAIN_LABEL.match(self.text, self.pos)
        if not match:
            raise DataError(f"newick parse error at offset {self.pos}: expected label")
        self.pos = match.end()
        return match.group()

    def number(self) -> float:
        match = re.match(r"[-+0-9.eE]+", self.text[self.pos :])
        if not match:
            raise DataError(f"newick parse error at offset {self.pos}: expected number")
        self.pos += match.end()
        return float(match.group())


def parse_newick(text: str) -> Dendrogram:
    """Rebuild a Dendrogram from binary Newick text (internal reader)."""
    scanner = _NewickScanner(text)

    def node():
        # returns (leaf label | (child, child), branch length to parent)
        if scanner.peek() == "(":
            scanner.take("(")
            first = node()
            scanner.take(",")
            second = node()
            if scanner.peek() == ",":
                raise DataError("newick parse error: only binary trees supported")
            scanner.take(")")
            payload = (first, second)
        else:
            payload = scanner.label()
        length = 0.0
        if scanner.peek() == ":":
            scanner.take(":")
            length = scanner.number()
        return payload, length

    tree, _ = node()
    scanner.take(";")
    if isinstance(tree, str):
        raise DataError("newick parse error: single-leaf tree is not a dendrogram")

    labels, internals = [], []

    def walk(payload):
        # returns (height, leaf set, key) and records internal nodes
        if isinstance(payload, str):
            labels.append(payload)
            return 0.0, frozenset([payload])
        (left, llen), (right, rlen) = payload
        lh, lset = walk(left)
        rh, rset = walk(right)
        height = max(lh + llen, rh + rlen)
        leaves = lset | rset
        internals.append((height, len(leaves), leaves, lset, rset))
        return height, leaves

    walk(tree)
    internals.sort(key=lambda item: (item[0], item[1], tuple(sorted(item[2]))))
    index = {frozenset([lab]): i for i, lab in enumerate(labels)}
    merges = []
    for step, (height, _, leaves, lset, rset) in enumerate(internals):
        merges.append((index[lset], index[rset], height))
        index[leaves] = len(labels) + step
    return Dendrogram(labels=tuple(labels), merges=tuple(merges))


# ---------------------------------------------------------------------------
# SVG rendering
# ---------------------------------------------------------------------------

_PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
    "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#aec7e8", "#ffbb78",
    "#98df8a", "#ff9896", "#c5b0d5", "#c49c94",
)


def render_svg(dend: Dendrogram, table=None) -> str:
    """Vertical dendrogram as SVG text, heights drawn to scale.

    Leaf labels are colored by movement when an artist-movement table is
    given; unknown labels fall back to black.
    """
    n = dend.n
    span_x, plot_h = 34.0 * n, 360.0
    margin_left, margin_top, label_h = 40.0, 20.0, 150.0
    width = margin_left + span_x + 20.0
    height = margin_top + plot_h + label_h
    hmax = max(dend.node_height(dend.root), 1e-300)

    def y_of(h: float) -> float:
        return margin_top + (1.0 - h / hmax) * plot_h

    order = []

    def traverse(node: int) -> None:
        if node < n:
            order.append(node)
            return
        a, b, _ = dend.merges[node - n]
        traverse(a)
        traverse(b)

    traverse(dend.root)
    x = {}
    for pos, leaf in enumerate(order):
        x[leaf] = margin_left + (pos + 0.5) * span_x / n
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" '
        f'height="{height:.0f}" viewBox="0 0 {width:.0f} {height:.0f}">',
        '<g stroke="#333" stroke-width="1.2" fill="none">',
    ]
    for step, (a, b, h) in enumerate(dend.merges):
        node = n + step
        xa, xb = x[a], x[b]
        ya, yb, yp = y_of(dend.node_height(a)), y_of(dend.node_height(b)), y_of(h)
        parts.append(f'<path d="M {xa:.2f} {ya:.2f} V {yp:.2f} H {xb:.2f} V {yb:.2f}"/>')
        x[node] = 0.5 * (xa + xb)
    parts.append("</g>")
    movement_color = {}
    if table is not None:
        movements = sorted({table.movement_of(lab) for lab in dend.labels})
        for i, movement in enumerate(movements):
            movement_color[movement] = _PALETTE[i % len(_PALETTE)]
    parts.append('<g font-family="sans-serif" font-size="11">')
    base_y = margin_top + plot_h + 12.0
    for leaf in order:
        label = dend.labels[leaf]
        color = "#000"
        if table is not None:
            color = movement_color[table.movement_of(label)]
        xt = x[leaf]
        parts.append(
            f'<text x="{xt:.2f}" y="{base_y:.2f}" fill="{color}" '
            f'transform="rotate(45 {xt:.2f} {base_y:.2f})">{_xml_escape(label)}</text>'
        )
    parts.append("</g>")
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _xml_escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def write_svg(path, dend: Dendrogram, table=None) -> None:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(render_svg(dend, table))
