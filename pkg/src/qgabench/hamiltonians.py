"""Problem Hamiltonians: the fixed-spectrum random ensemble, H_C and H_H2."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .tensor import (SPECTRAL_TOL, STRUCTURAL_TOL, ValidationError, canonical_phase, eigh,
                     haar_random_unitary, is_hermitian)

DEFAULT_SPECTRUM = (0.0, 1.0, 2.0, 3.0)
HAMILTONIAN_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class ProblemHamiltonian:
    """Hermitian matrix with its ascending eigensystem.

    ``eigenvectors[:, i]`` is the eigenstate with energy ``eigenvalues[i]``.
    """

    matrix: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    unit_label: str = "a.u."
    name: str = ""
    seed: int | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.complex128)
        if not is_hermitian(m, STRUCTURAL_TOL):
            raise ValidationError("Hamiltonian matrix is not Hermitian")
        w = np.asarray(self.eigenvalues, dtype=float)
        v = np.asarray(self.eigenvectors, dtype=np.complex128)
        if np.any(np.diff(w) < 0):
            raise ValidationError("eigenvalues must be ascending")
        resid = np.max(np.abs(m @ v - v * w))
        if resid > SPECTRAL_TOL:
            raise ValidationError(f"stored eigensystem does not reproduce the matrix (residual {resid:.3g})")
        for name, val in (("matrix", m), ("eigenvalues", w), ("eigenvectors", v)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)

    @classmethod
    def from_matrix(cls, matrix, **kwargs) -> "ProblemHamiltonian":
        w, v = eigh(matrix)
        return cls(np.asarray(matrix, dtype=np.complex128), w, v, **kwargs)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def ground_state(self) -> np.ndarray:
        return self.eigenvectors[:, 0]

    @property
    def ground_energy(self) -> float:
        return float(self.eigenvalues[0])

    def is_diagonal(self, atol: float = STRUCTURAL_TOL) -> bool:
        off = self.matrix - np.diag(np.diag(self.matrix))
        return bool(np.max(np.abs(off)) <= atol)

    def energy(self, v: np.ndarray) -> float:
        return float(np.real(np.vdot(v, self.matrix @ v)))

    # JSON round trip: complex entries as [re, im] pairs
    def to_dict(self) -> dict:
        return {
            "schema_version": HAMILTONIAN_SCHEMA_VERSION,
            "name": self.name,
            "unit_label": self.unit_label,
            "seed": self.seed,
            "matrix": [[[z.real, z.imag] for z in row] for row in self.matrix.tolist()],
            "eigenvalues": self.eigenvalues.tolist(),
            "eigenvectors": [[[z.real, z.imag] for z in row] for row in self.eigenvectors.tolist()],
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ProblemHamiltonian":
        if data.get("schema_version") != HAMILTONIAN_SCHEMA_VERSION:
            raise ValidationError(f"unsupported Hamiltonian schema version {data.get('schema_version')!r}")

        def cplx(rows):
            return np.array([[complex(re, im) for re, im in row] for row in rows], dtype=np.complex128)

        return cls(cplx(data["matrix"]), np.array(data["eigenvalues"], dtype=float), cplx(data["eigenvectors"]),
                   unit_label=data["unit_label"], name=data.get("name", ""), seed=data.get("seed"),
                   meta=data.get("meta", {}))


def dump_hamiltonians(hams: Sequence[ProblemHamiltonian], path) -> None:
    with open(path, "w") as fh:
        json.dump({"schema_version": HAMILTONIAN_SCHEMA_VERSION,
                   "hamiltonians": [h.to_dict() for h in hams]}, fh, indent=1)


def load_hamiltonians(path) -> list[ProblemHamiltonian]:
    with open(path) as fh:
        data = json.load(fh)
    return [ProblemHamiltonian.from_dict(d) for d in data["hamiltonians"]]


def make_hc() -> ProblemHamiltonian:
    """Diagonal two-qubit Hamiltonian diag(0, 1, 2, 3) in arbitrary units."""
    w = np.array(DEFAULT_SPECTRUM)
    return ProblemHamiltonian(np.diag(w).astype(np.complex128), w, np.eye(4, dtype=np.complex128),
                              unit_label="a.u.", name="H_C")


def make_h2() -> ProblemHamiltonian:
    """Hydrogen-molecule Hamiltonian (Bravyi-Kitaev, two qubits), in Hartree."""
    m = np.zeros((4, 4), dtype=np.complex128)
    m[0, 0] = 0.469
    m[1, 1] = 0.216
    m[1, 2] = m[2, 1] = 0.181
    m[2, 2] = -1.361
    m[3, 3] = 0.676
    return ProblemHamiltonian.from_matrix(m, unit_label="Eh", name="H_H2")


def sample_random_hamiltonian(spectrum: Sequence[float], rng: np.random.Generator, *,
                              name: str = "", seed: int | None = None) -> ProblemHamiltonian:
    """``U diag(spectrum) U^dagger`` with a Haar-random eigenbasis ``U``."""
    w = np.asarray(spectrum, dtype=float)
    if np.any(np.diff(w) < 0):
        raise ValidationError("spectrum must be ascending")
    u = canonical_phase(haar_random_unitary(len(w), rng))
    m = (u * w) @ u.conj().T
    m = (m + m.conj().T) / 2
    return ProblemHamiltonian(m, w, u, unit_label="a.u.", name=name, seed=seed,
                              meta={"spectrum": w.tolist()})


def sample_ensemble(size: int, spectrum: Sequence[float], seed_sequences) -> list[ProblemHamiltonian]:
    """One Hamiltonian per entry of ``seed_sequences`` (``numpy.random.SeedSequence``)."""
    hams = []
    for i, ss in enumerate(seed_sequences[:size]):
        rng = np.random.default_rng(ss)
        hams.append(sample_random_hamiltonian(spectrum, rng, name=f"ensemble-{i:03d}",
                                              seed=int(ss.generate_state(1, np.uint64)[0])))
    return hams
