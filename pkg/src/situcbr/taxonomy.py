"""Concept taxonomies and depth-based concept similarity.

Each context dimension (location, time, social) is described by one rooted
tree of concepts. Depth counts the nodes on the root-to-concept path, so the
root sits at depth 1. Similarity between two concepts is the Wu-Palmer ratio

    sim(a, b) = 2 * depth(lcs(a, b)) / (depth(a) + depth(b))

returned as an exact :class:`fractions.Fraction`.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from types import MappingProxyType
from typing import Any, Iterable, Iterator, Mapping, NamedTuple

DIMENSIONS = ("location", "time", "social")

_ID_RE = re.compile(r"^[a-z0-9_]+$")


class TaxonomyError(ValueError):
    """Raised when a taxonomy document is malformed or a concept is unknown."""

    def __init__(self, message: str, node_id: str | None = None):
        super().__init__(message)
        self.node_id = node_id


class UnknownConceptError(TaxonomyError, KeyError):
    def __str__(self) -> str:
        return self.args[0]


@dataclass(frozen=True)
class ConceptNode:
    id: str
    label: str
    parent: str | None
    dimension: str


class Taxonomy:
    """An immutable, validated concept tree for one dimension.

    Build instances with :func:`load_taxonomy` (or :meth:`from_nodes`);
    the constructor assumes its input has already been validated.
    """

    __slots__ = ("dimension", "_nodes", "_depth", "root")

    def __init__(self, dimension: str, nodes: Mapping[str, ConceptNode], depth: Mapping[str, int], root: str):
        self.dimension = dimension
        self._nodes = MappingProxyType(dict(nodes))
        self._depth = MappingProxyType(dict(depth))
        self.root = root

    @classmethod
    def from_nodes(cls, dimension: str, nodes: Iterable[ConceptNode | Mapping[str, Any]]) -> "Taxonomy":
        return _build(dimension, list(nodes))

    def __contains__(self, concept_id: object) -> bool:
        return concept_id in self._nodes

    def __len__(self) -> int:
        return len(self._nodes)

    def __iter__(self) -> Iterator[ConceptNode]:
        return iter(self._nodes.values())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Taxonomy):
            return NotImplemented
        return self.dimension == other.dimension and dict(self._nodes) == dict(other._nodes)

    def __repr__(self) -> str:
        return f"Taxonomy({self.dimension!r}, root={self.root!r}, nodes={len(self)})"

    @property
    def nodes(self) -> Mapping[str, ConceptNode]:
        return self._nodes

    def node(self, concept_id: str) -> ConceptNode:
        try:
            return self._nodes[concept_id]
        except KeyError:
            raise UnknownConceptError(
                f"unknown {self.dimension} concept {concept_id!r}", concept_id
            ) from None

    def parent(self, concept_id: str) -> str | None:
        return self.node(concept_id).parent

    def children(self, concept_id: str) -> list[str]:
        self.node(concept_id)
        return sorted(n.id for n in self._nodes.values() if n.parent == concept_id)

    def depth(self, concept_id: str) -> int:
        self.node(concept_id)
        return self._depth[concept_id]

    def ancestors(self, concept_id: str) -> list[str]:
        """Return the path from ``concept_id`` up to the root, inclusive."""
        path = [self.node(concept_id).id]
        parent = self._nodes[concept_id].parent
        while parent is not None:
            path.append(parent)
            parent = self._nodes[parent].parent
        return path

    def lcs(self, a: str, b: str) -> str:
        """Least common subsumer: the deepest ancestor-or-self shared by a and b."""
        da, db = self.depth(a), self.depth(b)
        nodes = self._nodes
        while da > db:
            a, da = nodes[a].parent, da - 1
        while db > da:
            b, db = nodes[b].parent, db - 1
        while a != b:
            a, b = nodes[a].parent, nodes[b].parent
        return a

    def similarity(self, a: str, b: str) -> Fraction:
        subsumer = self.lcs(a, b)
        return Fraction(2 * self._depth[subsumer], self._depth[a] + self._depth[b])

    def to_dict(self) -> dict[str, Any]:
        # parents before children, siblings by id, so dumps are stable
        ordered = sorted(self._nodes.values(), key=lambda n: (self._depth[n.id], n.id))
        return {
            "dimension": self.dimension,
            "nodes": [{"id": n.id, "label": n.label, "parent": n.parent} for n in ordered],
        }


class Taxonomies(NamedTuple):
    """The three dimension taxonomies a situation is expressed over."""

    location: Taxonomy
    time: Taxonomy
    social: Taxonomy

    def for_dimension(self, dimension: str) -> Taxonomy:
        if dimension not in DIMENSIONS:
            raise ValueError(f"unknown dimension {dimension!r}; expected one of {DIMENSIONS}")
        return getattr(self, dimension)


def depth(t: Taxonomy, c: str) -> int:
    return t.depth(c)


def lcs(t: Taxonomy, a: str, b: str) -> str:
    return t.lcs(a, b)


def concept_similarity(t: Taxonomy, a: str, b: str) -> Fraction:
    """Depth-based similarity of two concepts of the same taxonomy, in (0, 1]."""
    return t.similarity(a, b)


def load_taxonomy(source: str | bytes | Mapping[str, Any]) -> Taxonomy:
    """Parse and validate a taxonomy document.

    Args:
        source: JSON text, or an already-decoded mapping, with a
            ``dimension`` string and a ``nodes`` list of
            ``{"id", "label", "parent"}`` records. The root has a null or
            missing ``parent``.

    Raises:
        TaxonomyError: on parse failure, bad ids, duplicate ids, dangling
            parents, zero or several roots, or cycles. ``node_id`` names
            the offending node where there is one.
    """
    if isinstance(source, (str, bytes)):
        try:
            doc = json.loads(source)
        except json.JSONDecodeError as exc:
            raise TaxonomyError(f"taxonomy is not valid JSON: {exc}") from exc
    else:
        doc = source
    if not isinstance(doc, Mapping):
        raise TaxonomyError("taxonomy document must be an object")
    dimension = doc.get("dimension")
    if dimension not in DIMENSIONS:
        raise TaxonomyError(f"taxonomy dimension must be one of {DIMENSIONS}, got {dimension!r}")
    nodes = doc.get("nodes")
    if not isinstance(nodes, list):
        raise TaxonomyError("taxonomy 'nodes' must be a list")
    return _build(dimension, nodes)


def read_taxonomy(path: str | Path) -> Taxonomy:
    return load_taxonomy(Path(path).read_text(encoding="utf-8"))


def _build(dimension: str, raw_nodes: list) -> Taxonomy:
    nodes: dict[str, ConceptNode] = {}
    for raw in raw_nodes:
        node = _coerce_node(dimension, raw)
        if node.id in nodes:
            raise TaxonomyError(f"duplicate concept id {node.id!r}", node.id)
        nodes[node.id] = node

    for node in nodes.values():
        if node.parent is not None and node.parent not in nodes:
            raise TaxonomyError(
                f"concept {node.id!r} has unknown parent {node.parent!r}", node.id
            )

    roots = sorted(n.id for n in nodes.values() if n.parent is None)
    if not roots:
        raise TaxonomyError(f"{dimension} taxonomy has no root")
    if len(roots) > 1:
        raise TaxonomyError(f"{dimension} taxonomy has several roots: {roots}", roots[1])
    root = roots[0]

    children: dict[str, list[str]] = {}
    for node in nodes.values():
        if node.parent is not None:
            children.setdefault(node.parent, []).append(node.id)
    depth_of = {root: 1}
    stack = [root]
    while stack:
        current = stack.pop()
        for child in children.get(current, ()):
            depth_of[child] = depth_of[current] + 1
            stack.append(child)

    if len(depth_of) != len(nodes):
        unreachable = sorted(set(nodes) - set(depth_of))
        raise TaxonomyError(
            f"cycle detected in {dimension} taxonomy at {_cycle_member(nodes, unreachable[0])!r}",
            _cycle_member(nodes, unreachable[0]),
        )
    return Taxonomy(dimension, nodes, depth_of, root)


def _coerce_node(dimension: str, raw: Any) -> ConceptNode:
    if isinstance(raw, ConceptNode):
        raw = {"id": raw.id, "label": raw.label, "parent": raw.parent}
    if not isinstance(raw, Mapping):
        raise TaxonomyError(f"taxonomy node must be an object, got {raw!r}")
    node_id = raw.get("id")
    if not isinstance(node_id, str) or not _ID_RE.match(node_id):
        raise TaxonomyError(f"invalid concept id {node_id!r}; ids must match [a-z0-9_]+", node_id if isinstance(node_id, str) else None)
    parent = raw.get("parent")
    if isinstance(parent, list):
        raise TaxonomyError(f"concept {node_id!r} lists several parents; taxonomies must be trees", node_id)
    if parent is not None and not isinstance(parent, str):
        raise TaxonomyError(f"concept {node_id!r} has a non-string parent {parent!r}", node_id)
    label = raw.get("label", node_id)
    if not isinstance(label, str):
        raise TaxonomyError(f"concept {node_id!r} has a non-string label", node_id)
    return ConceptNode(id=node_id, label=label, parent=parent, dimension=dimension)


def _cycle_member(nodes: Mapping[str, ConceptNode], start: str) -> str:
    seen: set[str] = set()
    current = start
    while current not in seen:
        seen.add(current)
        current = nodes[current].parent
    return current
