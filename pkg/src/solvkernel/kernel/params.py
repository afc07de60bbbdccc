from __future__ import annotations

from dataclasses import dataclass, field, replace

from ..errors import ConfigError
from ..molgraph import ADJACENCY_CONVENTIONS, RadiiTable

SOLVERS = ("auto", "dense", "fixed-point")


@dataclass(frozen=True)
class KernelHyperparameters:
    """Everything the marginalized graph kernel needs.

    Parameters
    ----------
    nu : float
        Vertex mismatch similarity, in (0, 1).
    lam : float
        Edge length scale in Angstrom.
    zeta : float
        Adjacency length-scale multiplier.
    q : float
        Stopping probability of the random walks, in (0, 1).
    epsilon : float
        Extra factor applied to edge pairs whose discrete labels differ.
        The default 1.0 compares edges by length only.
    solver : {"auto", "dense", "fixed-point"}
        ``auto`` factorizes product systems up to ``dense_max`` unknowns and
        iterates above that.
    """

    nu: float = 0.3
    lam: float = 0.1
    zeta: float = 1.0
    q: float = 0.05
    epsilon: float = 1.0
    solver: str = "auto"
    tol: float = 1e-12
    max_iter: int = 10000
    dense_max: int = 64
    radii: RadiiTable = field(default_factory=RadiiTable, compare=False)
    adjacency_convention: str = "squared"

    def __post_init__(self):
        if not 0 < self.nu < 1:
            raise ConfigError(f"nu={self.nu} must lie in (0, 1)")
        if not self.lam > 0:
            raise ConfigError(f"lambda={self.lam} must be positive")
        if not self.zeta > 0:
            raise ConfigError(f"zeta={self.zeta} must be positive")
        if not 0 < self.q < 1:
            raise ConfigError(f"q={self.q} must lie in (0, 1)")
        if not 0 < self.epsilon <= 1:
            raise ConfigError(f"epsilon={self.epsilon} must lie in (0, 1]")
        if self.solver not in SOLVERS:
            raise ConfigError(f"solver must be one of {SOLVERS}")
        if not self.tol > 0 or self.max_iter < 1 or self.dense_max < 1:
            raise ConfigError("tol, max_iter and dense_max must be positive")
        if self.adjacency_convention not in ADJACENCY_CONVENTIONS:
            raise ConfigError(f"adjacency_convention must be one of {ADJACENCY_CONVENTIONS}")

    def with_(self, **changes) -> "KernelHyperparameters":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return {
            "nu": self.nu, "lambda": self.lam, "zeta": self.zeta, "q": self.q,
            "epsilon": self.epsilon, "solver": self.solver, "tol": self.tol,
            "max_iter": self.max_iter, "dense_max": self.dense_max,
            "adjacency_convention": self.adjacency_convention,
        }

    @classmethod
    def from_dict(cls, d: dict, radii: RadiiTable | None = None) -> "KernelHyperparameters":
        known = {"nu", "lambda", "zeta", "q", "epsilon", "solver", "tol", "max_iter",
                 "dense_max", "adjacency_convention"}
        d = dict(d)
        if "adjacency_exponent_convention" in d:
            d["adjacency_convention"] = d.pop("adjacency_exponent_convention")
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown kernel settings: {sorted(unknown)}")
        kw = {("lam" if k == "lambda" else k): v for k, v in d.items()}
        if radii is not None:
            kw["radii"] = radii
        return cls(**kw)
