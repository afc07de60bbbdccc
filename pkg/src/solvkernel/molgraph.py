"""Labeled, weighted molecular graphs and the walk structure derived from them."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import ElementMissingFromTable, GraphError, IsolatedVertex

ELEMENTS = ("C", "H", "O", "N", "P", "S", "F", "Cl", "Br", "I")
HYBRIDIZATIONS = ("none", "sp", "sp2", "sp3")
BOND_ORDERS = (1.0, 1.5, 2.0, 3.0)

DEFAULT_RADII = {
    "C": 0.76, "H": 0.31, "O": 0.66, "N": 0.71, "P": 1.07,
    "S": 1.05, "F": 0.57, "Cl": 1.02, "Br": 1.20, "I": 1.39,
}
DEFAULT_ORDER_FACTORS = {1.0: 1.00, 1.5: 0.93, 2.0: 0.87, 3.0: 0.78}

ADJACENCY_CONVENTIONS = ("squared", "unsquared")


@dataclass(frozen=True)
class VertexLabel:
    element: str
    charge: int = 0
    hybridization: str = "sp3"
    aromatic: bool = False
    conjugated: bool = False
    hcount: int = 0

    def __post_init__(self):
        if self.element not in ELEMENTS:
            raise GraphError(f"unsupported element {self.element!r}")
        if self.hybridization not in HYBRIDIZATIONS:
            raise GraphError(f"unknown hybridization {self.hybridization!r}")
        if not 0 <= self.hcount <= 4:
            raise GraphError(f"hydrogen count {self.hcount} outside [0, 4]")

    def code(self) -> int:
        """Pack the label tuple into one integer; equal labels give equal codes."""
        c = ELEMENTS.index(self.element)
        c = c * 32 + (self.charge + 16)
        c = c * 4 + HYBRIDIZATIONS.index(self.hybridization)
        c = c * 2 + int(self.aromatic)
        c = c * 2 + int(self.conjugated)
        return c * 8 + self.hcount


@dataclass(frozen=True)
class EdgeLabel:
    order: float
    aromatic: bool
    conjugated: bool
    ring: bool
    length: float

    def __post_init__(self):
        if self.order not in BOND_ORDERS:
            raise GraphError(f"bond order {self.order} not in {BOND_ORDERS}")
        if not self.length > 0:
            raise GraphError("bond length must be positive")
        if self.aromatic and not self.ring:
            raise GraphError("aromatic bond outside a ring")

    def discrete(self) -> tuple:
        return (self.order, self.aromatic, self.conjugated, self.ring)

    def code(self) -> int:
        c = BOND_ORDERS.index(self.order)
        c = c * 2 + int(self.aromatic)
        c = c * 2 + int(self.conjugated)
        return c * 2 + int(self.ring)


@dataclass(frozen=True)
class RadiiTable:
    """Covalent radii (Angstrom) and bond-order length factors."""

    radii: Mapping[str, float] = field(default_factory=lambda: dict(DEFAULT_RADII))
    order_factors: Mapping[float, float] = field(
        default_factory=lambda: dict(DEFAULT_ORDER_FACTORS))

    def __post_init__(self):
        for el, r in self.radii.items():
            if not 0.2 < r < 2.0:
                raise GraphError(f"radius of {el} = {r} outside (0.2, 2.0) A")
        for order in BOND_ORDERS:
            if order not in self.order_factors:
                raise GraphError(f"missing order factor for bond order {order}")

    def radius(self, element: str) -> float:
        try:
            return self.radii[element]
        except KeyError:
            raise ElementMissingFromTable(f"no covalent radius for {element!r}") from None

    @classmethod
    def from_config(cls, obj: Mapping) -> "RadiiTable":
        """Build from ``{"radii": {...}, "order_factors": {...}}``.

        Order-factor keys may be numeric strings or the names
        ``single``, ``aromatic``, ``double`` and ``triple``.
        """
        names = {"single": 1.0, "aromatic": 1.5, "double": 2.0, "triple": 3.0}
        radii = dict(DEFAULT_RADII)
        radii.update({k: float(v) for k, v in obj.get("radii", {}).items()})
        factors = dict(DEFAULT_ORDER_FACTORS)
        for k, v in obj.get("order_factors", {}).items():
            key = names[k] if k in names else float(k)
            factors[key] = float(v)
        return cls(radii, factors)

    @classmethod
    def from_json(cls, path) -> "RadiiTable":
        with open(path, encoding="utf-8") as fh:
            return cls.from_config(json.load(fh))

    def to_config(self) -> dict:
        names = {1.0: "single", 1.5: "aromatic", 2.0: "double", 3.0: "triple"}
        return {
            "radii": dict(self.radii),
            "order_factors": {names[k]: v for k, v in self.order_factors.items()},
        }


@dataclass(frozen=True)
class MolecularGraph:
    """Heavy-atom molecular graph; edges stored once with ``i < j``."""

    vertices: tuple[VertexLabel, ...]
    edges: tuple[tuple[int, int, EdgeLabel], ...]
    source_id: str = field(default="", compare=False)

    def __post_init__(self):
        n = len(self.vertices)
        if n == 0:
            raise GraphError("graph has no vertices")
        seen = set()
        for i, j, _ in self.edges:
            if not 0 <= i < j < n:
                raise GraphError(f"edge ({i}, {j}) must satisfy 0 <= i < j < {n}")
            if (i, j) in seen:
                raise GraphError(f"duplicate edge ({i}, {j})")
            seen.add((i, j))
        if not self._connected():
            raise GraphError("molecular graph must be connected")

    def _connected(self) -> bool:
        n = len(self.vertices)
        nbrs = self.neighbors()
        stack, seen = [0], {0}
        while stack:
            for k in nbrs[stack.pop()]:
                if k not in seen:
                    seen.add(k)
                    stack.append(k)
        return len(seen) == n

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    def neighbors(self) -> list[list[int]]:
        nbrs: list[list[int]] = [[] for _ in self.vertices]
        for i, j, _ in self.edges:
            nbrs[i].append(j)
            nbrs[j].append(i)
        return nbrs

    def edge_map(self) -> dict[tuple[int, int], EdgeLabel]:
        """Edge labels keyed by both orientations."""
        out = {}
        for i, j, e in self.edges:
            out[i, j] = e
            out[j, i] = e
        return out

    def elements(self) -> set[str]:
        """Element symbols present, including H when any atom carries hydrogens."""
        els = {v.element for v in self.vertices}
        if any(v.hcount for v in self.vertices):
            els.add("H")
        return els

    def permuted(self, perm: Sequence[int]) -> "MolecularGraph":
        """Relabel vertices so that old vertex ``k`` becomes ``perm[k]``."""
        n = self.n_vertices
        if sorted(perm) != list(range(n)):
            raise GraphError("not a permutation")
        verts: list = [None] * n
        for old, new in enumerate(perm):
            verts[new] = self.vertices[old]
        edges = []
        for i, j, e in self.edges:
            a, b = perm[i], perm[j]
            edges.append((min(a, b), max(a, b), e))
        edges.sort(key=lambda t: (t[0], t[1]))
        return MolecularGraph(tuple(verts), tuple(edges), self.source_id)

    def to_dict(self, adjacency: np.ndarray | None = None) -> dict:
        out = {
            "id": self.source_id,
            "vertices": [
                {"element": v.element, "charge": v.charge,
                 "hybridization": v.hybridization, "aromatic": v.aromatic,
                 "conjugated": v.conjugated, "hcount": v.hcount}
                for v in self.vertices
            ],
            "edges": [
                {"i": i, "j": j, "order": e.order, "aromatic": e.aromatic,
                 "conjugated": e.conjugated, "ring": e.ring, "length": e.length}
                for i, j, e in self.edges
            ],
        }
        if adjacency is not None:
            for rec in out["edges"]:
                rec["weight"] = float(adjacency[rec["i"], rec["j"]])
        return out


def edge_length(order: float, elem_i: str, elem_j: str,
                radii: RadiiTable | None = None) -> float:
    """Tabulated bond length: order factor times the covalent-radius sum."""
    radii = radii or RadiiTable()
    try:
        factor = radii.order_factors[order]
    except KeyError:
        raise GraphError(f"no order factor for bond order {order}") from None
    return factor * (radii.radius(elem_i) + radii.radius(elem_j))


def build_adjacency(graph: MolecularGraph, zeta: float,
                    radii: RadiiTable | None = None,
                    convention: str = "squared") -> np.ndarray:
    """Symmetric edge-weight matrix from the Gaussian adjacency rule.

    ``convention="squared"`` divides the squared bond length by
    ``(zeta * sigma_ij)**2``; ``"unsquared"`` divides by ``zeta * sigma_ij``
    as the rule is sometimes printed.
    """
    if not zeta > 0:
        raise GraphError("zeta must be positive")
    if convention not in ADJACENCY_CONVENTIONS:
        raise GraphError(f"unknown adjacency convention {convention!r}")
    radii = radii or RadiiTable()
    n = graph.n_vertices
    A = np.zeros((n, n))
    for i, j, e in graph.edges:
        sigma = radii.radius(graph.vertices[i].element) + radii.radius(graph.vertices[j].element)
        scale = (zeta * sigma) ** 2 if convention == "squared" else zeta * sigma
        A[i, j] = A[j, i] = math.exp(-0.5 * e.length ** 2 / scale)
    return A


def transition_matrix(A: np.ndarray, q: float) -> np.ndarray:
    """Row-normalized walk probabilities scaled by the continuation mass ``1 - q``.

    A single-vertex graph has no moves and gets the 1x1 zero matrix.
    """
    if not 0 < q < 1:
        raise GraphError("stopping probability must lie in (0, 1)")
    A = np.asarray(A, dtype=float)
    if A.shape == (1, 1):
        return np.zeros((1, 1))
    d = A.sum(axis=1)
    if np.any(d <= 0):
        raise IsolatedVertex(f"vertex {int(np.argmin(d))} has no incident edges")
    return (1.0 - q) * A / d[:, None]
