from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class RunRecord:
    """Per-generation best-individual series of one (algorithm, Hamiltonian, seed) run.

    Index 0 holds the initial population; ``len(best_energy) == generations + 1``.
    """

    algorithm: str
    hamiltonian_id: str
    seed: int
    best_energy: np.ndarray
    best_fidelity: np.ndarray

    def __post_init__(self):
        self.best_energy = np.asarray(self.best_energy, dtype=float)
        self.best_fidelity = np.asarray(self.best_fidelity, dtype=float)
        if self.best_energy.shape != self.best_fidelity.shape or self.best_energy.ndim != 1:
            raise ValueError("energy and fidelity series must be 1-d and equally long")

    @property
    def generations(self) -> int:
        return len(self.best_energy) - 1

    @property
    def final_energy(self) -> float:
        return float(self.best_energy[-1])

    @property
    def final_fidelity(self) -> float:
        return float(self.best_fidelity[-1])
