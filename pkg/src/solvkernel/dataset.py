from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Sequence

import numpy as np

from .molgraph import MolecularGraph, RadiiTable
from .smiles import from_smiles


@dataclass(frozen=True)
class Record:
    id: str
    smiles: str
    target: float  # kcal/mol


@dataclass(frozen=True)
class Dataset:
    records: tuple[Record, ...]
    provenance: str = ""

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, idx):
        return self.records[idx]

    @property
    def ids(self) -> list[str]:
        return [r.id for r in self.records]

    @property
    def smiles(self) -> list[str]:
        return [r.smiles for r in self.records]

    @property
    def targets(self) -> np.ndarray:
        return np.array([r.target for r in self.records], dtype=float)

    def sorted_by_id(self) -> "Dataset":
        return Dataset(tuple(sorted(self.records, key=lambda r: r.id.encode("utf-8"))),
                       self.provenance)

    def subset(self, indices: Sequence[int], tag: str = "") -> "Dataset":
        return Dataset(tuple(self.records[i] for i in indices),
                       f"{self.provenance}{tag}")

    def graphs(self, radii: RadiiTable | None = None) -> list[MolecularGraph]:
        return [_graph(r.smiles, r.id, radii or RadiiTable()) for r in self.records]


@lru_cache(maxsize=65536)
def _graph_cached(smiles: str, source_id: str, radii_key: tuple) -> MolecularGraph:
    radii, factors = radii_key
    return from_smiles(smiles, RadiiTable(dict(radii), dict(factors)), source_id)


def _graph(smiles: str, source_id: str, radii: RadiiTable) -> MolecularGraph:
    key = (tuple(sorted(radii.radii.items())), tuple(sorted(radii.order_factors.items())))
    return _graph_cached(smiles, source_id, key)


def bundled_freesolv_path():
    """Path of the bundled FreeSolv export (non-stereo rows, InChIKey ids)."""
    return resources.files("solvkernel") / "data" / "freesolv_nonstereo.csv"
