"""Dense complex linear algebra over register-structured qubit systems.

Qubits are ordered register-major, qubit-minor, with qubit 0 the most
significant bit of a computational-basis index (the usual Kronecker order).
Density matrices and operators are plain ``numpy`` arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels

STRUCTURAL_TOL = 1e-10
SPECTRAL_TOL = 1e-9
PSD_TOL = 1e-9
MATRIX_EQ_TOL = 1e-12
NORM_TOL = 1e-12


class ValidationError(ValueError):
    """An input violates a structural contract (dimension, hermiticity, ...)."""


@dataclass(frozen=True)
class RegisterLayout:
    """``n_registers`` registers of ``qubits_per_register`` qubits each."""

    n_registers: int
    qubits_per_register: int

    def __post_init__(self):
        if self.n_registers < 4 or self.n_registers % 4:
            raise ValidationError(f"number of registers must be a positive multiple of 4, got {self.n_registers}")
        if self.qubits_per_register < 2 or self.qubits_per_register % 2:
            raise ValidationError(f"qubits per register must be a positive even number, got {self.qubits_per_register}")

    @property
    def n_qubits(self) -> int:
        return self.n_registers * self.qubits_per_register

    @property
    def dim(self) -> int:
        return 2 ** self.n_qubits

    @property
    def register_dim(self) -> int:
        return 2 ** self.qubits_per_register

    def qubits(self, register: int) -> list[int]:
        if not 0 <= register < self.n_registers:
            raise ValidationError(f"register index {register} out of range 0..{self.n_registers - 1}")
        c = self.qubits_per_register
        return list(range(register * c, (register + 1) * c))


@dataclass(frozen=True)
class KrausChannel:
    """A CPTP map given by its Kraus operators (all ``dim x dim``)."""

    operators: tuple

    def __post_init__(self):
        ops = tuple(np.asarray(k, dtype=np.complex128) for k in self.operators)
        if not ops:
            raise ValidationError("a channel needs at least one Kraus operator")
        dim = ops[0].shape[0]
        for k in ops:
            if k.shape != (dim, dim):
                raise ValidationError(f"Kraus operator shape {k.shape} differs from ({dim}, {dim})")
        object.__setattr__(self, "operators", ops)

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0]

    def completeness_error(self) -> float:
        s = sum(k.conj().T @ k for k in self.operators)
        return float(np.max(np.abs(s - np.eye(self.dim))))

    def is_trace_preserving(self, atol: float = STRUCTURAL_TOL) -> bool:
        return self.completeness_error() <= atol


# --------------------------------------------------------------------------
# validation helpers
# --------------------------------------------------------------------------

def is_hermitian(m: np.ndarray, atol: float = STRUCTURAL_TOL) -> bool:
    m = np.asarray(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and bool(np.max(np.abs(m - m.conj().T), initial=0.0) <= atol)


def check_density_matrix(rho: np.ndarray, atol: float = STRUCTURAL_TOL, psd_tol: float = PSD_TOL) -> None:
    """Raise ``ValidationError`` unless ``rho`` is a valid density matrix."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValidationError(f"density matrix must be square, got shape {rho.shape}")
    dim = rho.shape[0]
    if dim & (dim - 1):
        raise ValidationError(f"density matrix dimension {dim} is not a power of two")
    if not is_hermitian(rho, atol):
        raise ValidationError("density matrix is not Hermitian")
    tr = np.trace(rho)
    if abs(tr - 1.0) > atol:
        raise ValidationError(f"density matrix trace is {tr}, expected 1")
    lam_min = np.linalg.eigvalsh((rho + rho.conj().T) / 2).min()
    if lam_min < -psd_tol:
        raise ValidationError(f"density matrix has negative eigenvalue {lam_min}")


def _n_qubits(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if 2 ** n != dim:
        raise ValidationError(f"dimension {dim} is not a power of two")
    return n


# --------------------------------------------------------------------------
# products, traces, embeddings
# --------------------------------------------------------------------------

def tensor_product(*mats: np.ndarray) -> np.ndarray:
    out = np.asarray(mats[0], dtype=np.complex128)
    for m in mats[1:]:
        out = np.kron(out, np.asarray(m, dtype=np.complex128))
    return out


def partial_trace(rho: np.ndarray, keep: Sequence[int], n_qubits: int | None = None) -> np.ndarray:
    """Reduced density matrix on ``keep``; kept qubits retain their relative order."""
    rho = np.asarray(rho, dtype=np.complex128)
    n = _n_qubits(rho.shape[0]) if n_qubits is None else n_qubits
    keep = sorted(set(int(q) for q in keep))
    if any(q < 0 or q >= n for q in keep):
        raise ValidationError(f"qubit indices {keep} out of range for {n} qubits")
    traced = [q for q in range(n) if q not in keep]
    t = rho.reshape((2,) * (2 * n))
    t = t.transpose(keep + traced + [n + q for q in keep] + [n + q for q in traced])
    k, r = 2 ** len(keep), 2 ** len(traced)
    return np.einsum("aibi->ab", t.reshape(k, r, k, r))


def register_marginal(rho: np.ndarray, layout: RegisterLayout, register: int) -> np.ndarray:
    """Reduced state of one register."""
    d = layout.register_dim
    before = d ** register
    after = d ** (layout.n_registers - register - 1)
    t = np.asarray(rho).reshape(before, d, after, before, d, after)
    return np.einsum("iajibj->ab", t)


def _check_targets(targets: Sequence[int], n_qubits: int) -> list[int]:
    targets = [int(q) for q in targets]
    if len(set(targets)) != len(targets):
        raise ValidationError(f"target qubits {targets} are not distinct")
    if any(q < 0 or q >= n_qubits for q in targets):
        raise ValidationError(f"target qubits {targets} out of range for {n_qubits} qubits")
    return targets


def embed_operator(op: np.ndarray, targets: Sequence[int], n_qubits: int) -> np.ndarray:
    """Full-space operator acting as ``op`` on ``targets`` (in listed order)."""
    op = np.asarray(op, dtype=np.complex128)
    targets = _check_targets(targets, n_qubits)
    t = len(targets)
    if op.shape != (2 ** t, 2 ** t):
        raise ValidationError(f"operator shape {op.shape} does not match {t} target qubits")
    rest = [q for q in range(n_qubits) if q not in targets]
    perm = targets + rest
    full = np.kron(op, np.eye(2 ** len(rest)))
    # full acts on qubits ordered as ``perm``; conjugate back to natural order
    inv = np.argsort(perm)
    f = full.reshape((2,) * (2 * n_qubits))
    f = f.transpose(list(inv) + [n_qubits + i for i in inv])
    return f.reshape(2 ** n_qubits, 2 ** n_qubits)


def apply_local_channel(rho: np.ndarray, ops: Sequence[np.ndarray], targets: Sequence[int],
                        n_qubits: int | None = None) -> np.ndarray:
    """``sum_k K_k rho K_k^dagger`` with each ``K_k`` acting on ``targets`` only."""
    rho = np.asarray(rho, dtype=np.complex128)
    n = _n_qubits(rho.shape[0]) if n_qubits is None else n_qubits
    targets = _check_targets(targets, n)
    t = len(targets)
    rest = [q for q in range(n) if q not in targets]
    perm = targets + rest
    a, r = 2 ** t, 2 ** (n - t)
    tens = rho.reshape((2,) * (2 * n)).transpose(perm + [n + q for q in perm]).reshape(a, r, a, r)
    out = np.zeros((a, r, r, a), dtype=np.complex128)
    for k in ops:
        k = np.asarray(k, dtype=np.complex128)
        if k.shape != (a, a):
            raise ValidationError(f"Kraus operator shape {k.shape} does not match {t} target qubits")
        left = np.tensordot(k, tens, axes=(1, 0))
        out += np.tensordot(left, k.conj(), axes=(2, 1))
    inv = list(np.argsort(perm))
    out = out.transpose(0, 1, 3, 2).reshape((2,) * (2 * n))
    return out.transpose(inv + [n + i for i in inv]).reshape(2 ** n, 2 ** n)


def apply_channel(rho: np.ndarray, channel: KrausChannel, atol: float = STRUCTURAL_TOL) -> np.ndarray:
    rho = np.asarray(rho, dtype=np.complex128)
    if rho.shape != (channel.dim, channel.dim):
        raise ValidationError(f"state shape {rho.shape} does not match channel dimension {channel.dim}")
    err = channel.completeness_error()
    if err > atol:
        raise ValidationError(f"channel is not trace preserving (completeness error {err:.3g})")
    out = np.zeros_like(rho)
    for k in channel.operators:
        out += k @ rho @ k.conj().T
    return out


# --------------------------------------------------------------------------
# random states and unitaries
# --------------------------------------------------------------------------

def haar_random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary from QR of a complex Ginibre matrix."""
    if dim < 1:
        raise ValidationError("dimension must be >= 1")
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def haar_random_pure_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    if dim < 1:
        raise ValidationError("dimension must be >= 1")
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


# --------------------------------------------------------------------------
# spectra and figures of merit
# --------------------------------------------------------------------------

def canonical_phase(vecs: np.ndarray) -> np.ndarray:
    """Rotate each column so its largest-magnitude entry is real and positive.

    Near-ties in magnitude go to the lowest index, so the convention is
    stable under rounding.
    """
    vecs = np.array(vecs, dtype=np.complex128, copy=True)
    for j in range(vecs.shape[1]):
        mags = np.abs(vecs[:, j])
        i = int(np.flatnonzero(mags >= mags.max() - SPECTRAL_TOL)[0])
        vecs[:, j] *= np.conj(vecs[i, j]) / mags[i]
    return vecs


def eigh(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and phase-fixed orthonormal eigenvectors (columns)."""
    h = np.asarray(h, dtype=np.complex128)
    if not is_hermitian(h, STRUCTURAL_TOL):
        raise ValidationError("eigh requires a Hermitian matrix")
    w, v = kernels.jacobi_eigh((h + h.conj().T) / 2)
    order = np.argsort(w, kind="stable")
    return w[order], canonical_phase(v[:, order])


def fidelity_to_pure(rho: np.ndarray, u: np.ndarray) -> float:
    """``<u|rho|u>`` for a normalized ``u``."""
    rho = np.asarray(rho)
    u = np.asarray(u)
    if rho.shape != (u.shape[0], u.shape[0]):
        raise ValidationError(f"state shape {rho.shape} does not match vector length {u.shape[0]}")
    return float(np.real(np.vdot(u, rho @ u)))


def expectation(rho: np.ndarray, h: np.ndarray) -> float:
    rho = np.asarray(rho)
    h = np.asarray(h)
    if rho.shape != h.shape:
        raise ValidationError(f"state shape {rho.shape} does not match operator shape {h.shape}")
    return float(np.real(np.sum(h * rho.T)))


def pure_density(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=np.complex128)
    return np.outer(u, u.conj())
