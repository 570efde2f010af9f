"""Quantum genetic algorithm as a composition of exact channels on the population state.

One generation is: sort all registers by energy with a comparator network,
reset the worse half, clone each kept register into a blank one, swap the
trailing half of the qubits between pairs of new registers, and optionally
apply per-qubit Pauli mutation.  Registers are 0-indexed here.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from . import kernels
from .hamiltonians import ProblemHamiltonian
from .records import RunRecord
from .tensor import (KrausChannel, RegisterLayout, ValidationError, apply_local_channel, embed_operator,
                     expectation, fidelity_to_pure, register_marginal, tensor_product)

CLONERS = ("uqcm", "bcqo")
UQCM_GRANULARITIES = ("register", "qubit")
CLONING_BASES = ("computational", "hamiltonian")
READOUTS = ("sorted_top", "register_extrema")
BLANK_TOL = 1e-8

PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)


def default_network(n: int) -> tuple[tuple[int, int], ...]:
    """Comparator pairs (0-indexed) of a sorting network on ``n`` inputs."""
    if n == 4:
        return ((0, 1), (2, 3), (0, 2), (1, 3), (1, 2))
    # odd-even transposition sort is correct for every n
    pairs = []
    for rnd in range(n):
        pairs.extend((i, i + 1) for i in range(rnd % 2, n - 1, 2))
    return tuple(pairs)


@dataclass(frozen=True)
class QgaConfig:
    cloner: str = "uqcm"
    mutation_enabled: bool = False
    p_m: float = 1 / 24
    generations: int = 10
    layout: RegisterLayout = field(default_factory=lambda: RegisterLayout(4, 2))
    uqcm_granularity: str = "register"
    cloning_basis: str = "computational"
    readout: str = "sorted_top"
    network: tuple | None = None

    def __post_init__(self):
        if self.cloner not in CLONERS:
            raise ValidationError(f"cloner must be one of {CLONERS}, got {self.cloner!r}")
        if self.uqcm_granularity not in UQCM_GRANULARITIES:
            raise ValidationError(f"uqcm_granularity must be one of {UQCM_GRANULARITIES}")
        if self.cloning_basis not in CLONING_BASES:
            raise ValidationError(f"cloning_basis must be one of {CLONING_BASES}")
        if self.readout not in READOUTS:
            raise ValidationError(f"readout must be one of {READOUTS}")
        if not 0.0 <= self.p_m <= 1.0:
            raise ValidationError(f"mutation probability {self.p_m} outside [0, 1]")
        if self.generations < 0:
            raise ValidationError("generations must be >= 0")
        if self.network is None:
            object.__setattr__(self, "network", default_network(self.layout.n_registers))
        else:
            object.__setattr__(self, "network", tuple(tuple(pair) for pair in self.network))


@dataclass(frozen=True)
class QuantumPopulation:
    layout: RegisterLayout
    rho: np.ndarray

    def __post_init__(self):
        if self.rho.shape != (self.layout.dim, self.layout.dim):
            raise ValidationError(f"state shape {self.rho.shape} does not fit layout of dimension {self.layout.dim}")

    def marginal(self, register: int) -> np.ndarray:
        return register_marginal(self.rho, self.layout, register)


def product_population(states: Sequence[np.ndarray], layout: RegisterLayout) -> QuantumPopulation:
    """Population whose registers are the given pure states (or density matrices)."""
    if len(states) != layout.n_registers:
        raise ValidationError(f"need {layout.n_registers} register states, got {len(states)}")
    mats = []
    for s in states:
        s = np.asarray(s, dtype=np.complex128)
        mats.append(np.outer(s, s.conj()) if s.ndim == 1 else s)
    return QuantumPopulation(layout, tensor_product(*mats))


# --------------------------------------------------------------------------
# selection: comparators and the sorting network
# --------------------------------------------------------------------------

def comparator_kraus(h: ProblemHamiltonian) -> tuple[np.ndarray, np.ndarray]:
    """The two Kraus operators of one comparator on a register pair (d^2 x d^2).

    K0 keeps |u_i u_j> when lambda_i <= lambda_j (ties included); K1 maps
    |u_i u_j> to |u_j u_i> when lambda_j < lambda_i.
    """
    d = h.dim
    lam = h.eigenvalues
    k0 = np.zeros((d * d, d * d), dtype=np.complex128)
    k1 = np.zeros_like(k0)
    for i in range(d):
        for j in range(d):
            if lam[i] <= lam[j]:
                k0[i * d + j, i * d + j] = 1.0
            else:
                k1[j * d + i, i * d + j] = 1.0
    uu = np.kron(h.eigenvectors, h.eigenvectors)
    return uu @ k0 @ uu.conj().T, uu @ k1 @ uu.conj().T


def comparator_channel(h: ProblemHamiltonian, reg_a: int, reg_b: int, layout: RegisterLayout) -> KrausChannel:
    """Comparator between two registers, embedded into the full population space."""
    if reg_a == reg_b:
        raise ValidationError("comparator needs two distinct registers")
    if h.dim != layout.register_dim:
        raise ValidationError(f"Hamiltonian dimension {h.dim} does not match register dimension {layout.register_dim}")
    targets = layout.qubits(reg_a) + layout.qubits(reg_b)
    return KrausChannel(tuple(embed_operator(k, targets, layout.n_qubits) for k in comparator_kraus(h)))


@dataclass(frozen=True)
class SortPlan:
    """Label-level description of a sorting network for one spectrum.

    ``dest[x]`` is the product-eigenbasis index that basis state ``x`` is
    sorted into and ``record[x]`` packs the comparator outcomes (the
    discarded ancilla bits).
    """

    dest: np.ndarray
    record: np.ndarray


@lru_cache(maxsize=64)
def _sort_plan(eigenvalues: tuple, n_registers: int, network: tuple) -> SortPlan:
    d = len(eigenvalues)
    lam = np.asarray(eigenvalues)
    labels = np.array(np.unravel_index(np.arange(d ** n_registers), (d,) * n_registers)).T.copy()
    record = np.zeros(len(labels), dtype=np.int64)
    for bit, (a, b) in enumerate(network):
        li, lj = labels[:, a].copy(), labels[:, b].copy()
        swap = lam[lj] < lam[li]
        labels[swap, a], labels[swap, b] = lj[swap], li[swap]
        record |= swap.astype(np.int64) << bit
    dest = np.ravel_multi_index(labels.T, (d,) * n_registers)
    return SortPlan(dest.astype(np.int64), record)


def sort_plan(h: ProblemHamiltonian, layout: RegisterLayout, network=None) -> SortPlan:
    network = default_network(layout.n_registers) if network is None else tuple(tuple(p) for p in network)
    return _sort_plan(tuple(float(x) for x in h.eigenvalues), layout.n_registers, network)


def _half_operator(layout: RegisterLayout, u: np.ndarray) -> np.ndarray:
    """``u`` on every register of one half of the population."""
    return tensor_product(*([u] * (layout.n_registers // 2)))


def _rotate_halves(rho: np.ndarray, a: np.ndarray) -> np.ndarray:
    """``(a (x) a) rho (a (x) a)^dagger`` for a square ``rho`` of size ``len(a)**2``."""
    k = a.shape[0]
    dim = rho.shape[0]
    out = np.matmul(a, np.ascontiguousarray(rho).reshape(k, k * dim))
    out = np.matmul(a, out.reshape(k, k, dim))
    out = np.matmul(a.conj(), out.reshape(dim, k, k))
    out = np.matmul(out, a.conj().T)
    return out.reshape(dim, dim)


def _is_identity(u: np.ndarray) -> bool:
    return bool(np.array_equal(u, np.eye(u.shape[0])))


def sort_channel(pop: QuantumPopulation, h: ProblemHamiltonian, network=None) -> QuantumPopulation:
    """Apply the whole comparator network at once.

    In the product eigenbasis every comparator permutes labels, so the
    network reduces to a scatter of matrix entries, keeping coherences only
    between basis states with the same comparator record.
    """
    layout = pop.layout
    if h.dim != layout.register_dim:
        raise ValidationError(f"Hamiltonian dimension {h.dim} does not match register dimension {layout.register_dim}")
    plan = sort_plan(h, layout, network)
    u = h.eigenvectors
    if _is_identity(u):
        return QuantumPopulation(layout, kernels.sort_scatter(pop.rho, plan.dest, plan.record))
    a = _half_operator(layout, u)
    out = kernels.sort_scatter(_rotate_halves(pop.rho, a.conj().T), plan.dest, plan.record)
    return QuantumPopulation(layout, _rotate_halves(out, a))


def sort_channel_sequential(pop: QuantumPopulation, h: ProblemHamiltonian, network=None) -> QuantumPopulation:
    """Reference path: apply the comparator channels one by one."""
    layout = pop.layout
    network = default_network(layout.n_registers) if network is None else network
    ops = comparator_kraus(h)
    rho = pop.rho
    for a, b in network:
        rho = apply_local_channel(rho, ops, layout.qubits(a) + layout.qubits(b), layout.n_qubits)
    return QuantumPopulation(layout, rho)


# --------------------------------------------------------------------------
# reset, cloning, crossover, mutation
# --------------------------------------------------------------------------

def reset_discarded(pop: QuantumPopulation) -> QuantumPopulation:
    """Trace out the second half of the registers and re-prepare them in |0...0>."""
    layout = pop.layout
    keep_dim = layout.register_dim ** (layout.n_registers // 2)
    drop_dim = layout.dim // keep_dim
    kept = np.einsum("aibi->ab", pop.rho.reshape(keep_dim, drop_dim, keep_dim, drop_dim))
    blank = np.zeros((drop_dim, drop_dim), dtype=np.complex128)
    blank[0, 0] = 1.0
    return QuantumPopulation(layout, np.kron(kept, blank))


def _check_blank(pop: QuantumPopulation, dst: int) -> None:
    m = pop.marginal(dst)
    if abs(m[0, 0].real - 1.0) > BLANK_TOL:
        raise ValidationError(f"destination register {dst} is not blank (fidelity to |0...0> = {m[0, 0].real:.6f})")


def bcqo_unitary(c: int, basis: np.ndarray | None = None) -> np.ndarray:
    """Transversal CNOTs from a c-qubit source register onto a c-qubit target.

    Maps |b>|0> to |b>|b> for every computational basis state, or for every
    column of ``basis`` when one is given.
    """
    d = 2 ** c
    u = np.zeros((d * d, d * d), dtype=np.complex128)
    for s in range(d):
        for t in range(d):
            u[s * d + (t ^ s), s * d + t] = 1.0
    if basis is not None:
        bb = np.kron(basis, basis)
        u = bb @ u @ bb.conj().T
    return u


def uqcm_kraus(d: int) -> list[np.ndarray]:
    """Kraus operators of the symmetric universal 1->2 cloner on a pair of d-level systems.

    On inputs whose second system is |0> the map is
    rho (x) |0><0|  ->  2/(d+1) P_sym (rho (x) I) P_sym.
    The final operator completes the set on the non-blank subspace (identity
    there) so the channel is trace preserving on the whole pair space.
    """
    eye = np.eye(d)
    swap = np.zeros((d * d, d * d))
    for a in range(d):
        for b in range(d):
            swap[a * d + b, b * d + a] = 1.0
    p_sym = (np.eye(d * d) + swap) / 2
    scale = np.sqrt(2.0 / (d + 1))
    ops = [scale * p_sym @ np.kron(eye, np.outer(eye[k], eye[0])) for k in range(d)]
    ops.append(np.kron(eye, eye - np.outer(eye[0], eye[0])))
    return [o.astype(np.complex128) for o in ops]


@lru_cache(maxsize=16)
def _bcqo_permutation(layout: RegisterLayout, src: int, dst: int) -> np.ndarray:
    """Basis permutation of the full space induced by CNOT(src qubit k -> dst qubit k)."""
    n = layout.n_qubits
    idx = np.arange(layout.dim)
    out = idx.copy()
    for qs, qd in zip(layout.qubits(src), layout.qubits(dst)):
        bs = 1 << (n - 1 - qs)
        bd = 1 << (n - 1 - qd)
        out = np.where(idx & bs, out ^ bd, out)
    return out


def _bcqo_array(rho: np.ndarray, layout: RegisterLayout, src: int, dst: int,
                basis: np.ndarray | None) -> np.ndarray:
    if basis is None or _is_identity(basis):
        perm = _bcqo_permutation(layout, src, dst)
        out = np.empty_like(rho)
        out[np.ix_(perm, perm)] = rho
        return out
    u = bcqo_unitary(layout.qubits_per_register, basis)
    return apply_local_channel(rho, [u], layout.qubits(src) + layout.qubits(dst), layout.n_qubits)


def clone_bcqo(pop: QuantumPopulation, src: int, dst: int, basis: np.ndarray | None = None) -> QuantumPopulation:
    _check_blank(pop, dst)
    return QuantumPopulation(pop.layout, _bcqo_array(pop.rho, pop.layout, src, dst, basis))


@lru_cache(maxsize=64)
def _clone_indices(src: tuple, dst: tuple, n_qubits: int) -> tuple:
    idx = np.arange(2 ** n_qubits)
    clear = idx.copy()
    field = np.zeros_like(idx)
    swap = idx.copy()
    for qs, qd in zip(src, dst):
        bs, bd = 1 << (n_qubits - 1 - qs), 1 << (n_qubits - 1 - qd)
        clear &= ~bd
        field |= idx & bd
        differ = ((idx & bs) != 0) != ((idx & bd) != 0)
        swap = np.where(differ, swap ^ (bs | bd), swap)
    return clear, field, swap


def _symmetric_clone(rho: np.ndarray, src: Sequence[int], dst: Sequence[int], n_qubits: int) -> np.ndarray:
    """Universal cloner from qubits ``src`` onto blank qubits ``dst``.

    Uses ``2/(d+1) P_sym (sigma (x) I) P_sym`` with ``P_sym = (1 + SWAP)/2``,
    where ``sigma`` is the state with the blank qubits projected out.
    """
    d = 2 ** len(src)
    clear, field, swap = _clone_indices(tuple(src), tuple(dst), n_qubits)
    return kernels.symmetric_clone(rho, clear, field, swap, 1.0 / (2.0 * (d + 1)))


def _uqcm_array(rho: np.ndarray, layout: RegisterLayout, src: int, dst: int, granularity: str) -> np.ndarray:
    if granularity == "register":
        return _symmetric_clone(rho, layout.qubits(src), layout.qubits(dst), layout.n_qubits)
    if granularity == "qubit":
        for qs, qd in zip(layout.qubits(src), layout.qubits(dst)):
            rho = _symmetric_clone(rho, [qs], [qd], layout.n_qubits)
        return rho
    raise ValidationError(f"unknown UQCM granularity {granularity!r}")


def clone_uqcm(pop: QuantumPopulation, src: int, dst: int, granularity: str = "register") -> QuantumPopulation:
    _check_blank(pop, dst)
    return QuantumPopulation(pop.layout, _uqcm_array(pop.rho, pop.layout, src, dst, granularity))


def clone_uqcm_kraus(pop: QuantumPopulation, src: int, dst: int, granularity: str = "register") -> QuantumPopulation:
    """Reference path for :func:`clone_uqcm` through the explicit Kraus operators."""
    _check_blank(pop, dst)
    layout = pop.layout
    if granularity == "register":
        rho = apply_local_channel(pop.rho, _uqcm_ops(layout.register_dim),
                                  layout.qubits(src) + layout.qubits(dst), layout.n_qubits)
    else:
        rho = pop.rho
        for qs, qd in zip(layout.qubits(src), layout.qubits(dst)):
            rho = apply_local_channel(rho, _uqcm_ops(2), [qs, qd], layout.n_qubits)
    return QuantumPopulation(layout, rho)


@lru_cache(maxsize=8)
def _uqcm_ops(d: int) -> tuple:
    return tuple(uqcm_kraus(d))


def permute_qubits(rho: np.ndarray, perm: Sequence[int]) -> np.ndarray:
    """State after moving qubit ``perm[k]`` into position ``k``."""
    n = len(perm)
    t = rho.reshape((2,) * (2 * n)).transpose(list(perm) + [n + q for q in perm])
    return t.reshape(rho.shape)


def crossover_pairs(layout: RegisterLayout) -> list[tuple[int, int]]:
    """Qubit pairs exchanged by the crossover swap."""
    n, c = layout.n_registers, layout.qubits_per_register
    pairs = []
    for i in range(n // 4):
        a, b = n // 2 + 2 * i, n // 2 + 2 * i + 1
        pairs.extend(zip(layout.qubits(a)[c // 2:], layout.qubits(b)[c // 2:]))
    return pairs


def _crossover_perm(layout: RegisterLayout) -> list[int]:
    perm = list(range(layout.n_qubits))
    for qa, qb in crossover_pairs(layout):
        perm[qa], perm[qb] = perm[qb], perm[qa]
    return perm


def crossover_swap(pop: QuantumPopulation) -> QuantumPopulation:
    return QuantumPopulation(pop.layout, permute_qubits(pop.rho, _crossover_perm(pop.layout)))


def mutation_kraus(p_m: float) -> list[np.ndarray]:
    """Single-qubit Kraus operators of the Pauli mutation."""
    if not 0.0 <= p_m <= 1.0:
        raise ValidationError(f"mutation probability {p_m} outside [0, 1]")
    return [np.sqrt(1 - p_m) * np.eye(2, dtype=np.complex128),
            np.sqrt(p_m / 3) * PAULI_X, np.sqrt(p_m / 3) * PAULI_Y, np.sqrt(p_m / 3) * PAULI_Z]


def mutation_channel(pop: QuantumPopulation, p_m: float) -> QuantumPopulation:
    if not 0.0 <= p_m <= 1.0:
        raise ValidationError(f"mutation probability {p_m} outside [0, 1]")
    return QuantumPopulation(pop.layout, kernels.pauli_mutation(pop.rho, p_m, pop.layout.n_qubits))


# --------------------------------------------------------------------------
# generations and runs
# --------------------------------------------------------------------------

def _breed_array(rho: np.ndarray, h: ProblemHamiltonian, cfg: QgaConfig) -> np.ndarray:
    """Cloning, crossover and mutation on a state whose second half is blank.

    No validity checks, so it also acts linearly on non-physical inputs
    (used to build the transfer matrix).
    """
    layout = cfg.layout
    half = layout.n_registers // 2
    basis = h.eigenvectors if cfg.cloning_basis == "hamiltonian" else None
    for r in range(half):
        if cfg.cloner == "bcqo":
            rho = _bcqo_array(rho, layout, r, half + r, basis)
        else:
            rho = _uqcm_array(rho, layout, r, half + r, cfg.uqcm_granularity)
    rho = permute_qubits(rho, _crossover_perm(layout))
    if cfg.mutation_enabled and cfg.p_m > 0:
        rho = kernels.pauli_mutation(rho, cfg.p_m, layout.n_qubits)
    return rho


def _breed(pop: QuantumPopulation, h: ProblemHamiltonian, cfg: QgaConfig) -> QuantumPopulation:
    """Everything in a generation after the sort."""
    pop = reset_discarded(pop)
    return QuantumPopulation(pop.layout, _breed_array(pop.rho, h, cfg))


def qga_generation(pop: QuantumPopulation, h: ProblemHamiltonian, cfg: QgaConfig) -> QuantumPopulation:
    if pop.layout != cfg.layout:
        raise ValidationError("population layout differs from the configured layout")
    return _breed(sort_channel(pop, h, cfg.network), h, cfg)


def _keep_dims(layout: RegisterLayout) -> tuple[int, int]:
    keep = layout.register_dim ** (layout.n_registers // 2)
    return keep, layout.dim // keep


def _expand_kept(kept: np.ndarray, layout: RegisterLayout) -> np.ndarray:
    """``kept (x) |0...0><0...0|`` on the full population space."""
    k, dd = _keep_dims(layout)
    out = np.zeros((k, dd, k, dd), dtype=np.complex128)
    out[:, 0, :, 0] = kept
    return out.reshape(layout.dim, layout.dim)


def sort_reduced(rho: np.ndarray, h: ProblemHamiltonian, cfg: QgaConfig) -> np.ndarray:
    """State of the kept (first) half of the registers after the sort."""
    layout = cfg.layout
    plan = sort_plan(h, layout, cfg.network)
    _, dd = _keep_dims(layout)
    u = h.eigenvectors
    if _is_identity(u):
        return kernels.sort_reduce(rho, plan.dest, plan.record, dd)
    a = _half_operator(layout, u)
    kept = kernels.sort_reduce(_rotate_halves(rho, a.conj().T), plan.dest, plan.record, dd)
    return a @ kept @ a.conj().T


def kept_generation(kept: np.ndarray, h: ProblemHamiltonian, cfg: QgaConfig) -> np.ndarray:
    """One generation as a linear map on the kept-half state.

    Starting from ``kept (x) blank`` it breeds a full population, sorts it
    and returns the new kept half.
    """
    return sort_reduced(_breed_array(_expand_kept(kept, cfg.layout), h, cfg), h, cfg)


def transfer_matrix(h: ProblemHamiltonian, cfg: QgaConfig) -> np.ndarray:
    """Matrix ``T`` with ``vec(kept_generation(k)) = T @ vec(k)`` (row-major vec)."""
    k, _ = _keep_dims(cfg.layout)
    t = np.empty((k * k, k * k), dtype=np.complex128)
    unit = np.zeros((k, k), dtype=np.complex128)
    for col in range(k * k):
        unit.flat[col] = 1.0
        t[:, col] = kept_generation(unit, h, cfg).reshape(-1)
        unit.flat[col] = 0.0
    return t


def register_metrics(pop: QuantumPopulation, h: ProblemHamiltonian) -> tuple[np.ndarray, np.ndarray]:
    """Energy and ground-state fidelity of every register marginal."""
    energies, fids = [], []
    for r in range(pop.layout.n_registers):
        m = pop.marginal(r)
        energies.append(expectation(m, h.matrix))
        fids.append(fidelity_to_pure(m, h.ground_state))
    return np.array(energies), np.array(fids)


def top_register_metrics(sorted_pop: QuantumPopulation, h: ProblemHamiltonian) -> tuple[float, float]:
    m = sorted_pop.marginal(0)
    return expectation(m, h.matrix), fidelity_to_pure(m, h.ground_state)


def _kept_top_metrics(kept: np.ndarray, h: ProblemHamiltonian) -> tuple[float, float]:
    d = h.dim
    m = np.einsum("aibi->ab", kept.reshape(d, kept.shape[0] // d, d, kept.shape[0] // d))
    return expectation(m, h.matrix), fidelity_to_pure(m, h.ground_state)


RUN_METHODS = ("auto", "direct", "transfer")


def _resolve_method(method: str, cfg: QgaConfig, n_runs: int, hook) -> str:
    if method not in RUN_METHODS:
        raise ValidationError(f"method must be one of {RUN_METHODS}, got {method!r}")
    needs_full = hook is not None or cfg.readout != "sorted_top"
    if method == "transfer" and needs_full:
        raise ValidationError("the transfer path supports only the sorted_top readout without hooks")
    if method == "auto":
        k, _ = _keep_dims(cfg.layout)
        # building T costs k*k generations; use it when runs need more than that
        cheap = k * k < n_runs * cfg.generations
        return "transfer" if cheap and not needs_full else "direct"
    return method


def run_qga(h: ProblemHamiltonian, cfg: QgaConfig, initial: Sequence[np.ndarray],
            metrics_hook: Callable[[int, QuantumPopulation], None] | None = None, *,
            algorithm: str = "QGA", hamiltonian_id: str = "", seed: int = -1,
            method: str = "direct") -> RunRecord:
    """Evolve a product of register states for ``cfg.generations`` generations.

    With the default ``sorted_top`` readout the best individual of a
    generation is register 0 after sorting, i.e. the state the next
    generation selects from.  ``register_extrema`` instead reports the lowest
    energy and highest fidelity among the raw register marginals.
    ``metrics_hook(g, population)`` sees the full population of generation g
    before it is sorted.
    """
    return run_qga_batch(h, cfg, [initial], metrics_hook, algorithm=algorithm,
                         hamiltonian_id=hamiltonian_id, seeds=[seed], method=method)[0]


def run_qga_batch(h: ProblemHamiltonian, cfg: QgaConfig, initials: Sequence[Sequence[np.ndarray]],
                  metrics_hook: Callable[[int, QuantumPopulation], None] | None = None, *,
                  algorithm: str = "QGA", hamiltonian_id: str = "", seeds: Sequence[int] | None = None,
                  method: str = "auto") -> list[RunRecord]:
    """Several runs sharing one Hamiltonian and configuration.

    The ``transfer`` method builds the kept-half transfer matrix once and
    reuses it for every run and generation; ``direct`` applies the channels
    generation by generation.  Both compute the same exact channel.
    """
    if h.dim != cfg.layout.register_dim:
        raise ValidationError(f"Hamiltonian dimension {h.dim} does not match register dimension "
                              f"{cfg.layout.register_dim}")
    seeds = list(range(len(initials))) if seeds is None else list(seeds)
    if len(seeds) != len(initials):
        raise ValidationError("need one seed label per initial population")
    method = _resolve_method(method, cfg, len(initials), metrics_hook)
    t = transfer_matrix(h, cfg) if method == "transfer" and cfg.generations else None
    k, _ = _keep_dims(cfg.layout)
    records = []
    for initial, seed in zip(initials, seeds):
        pop = product_population(initial, cfg.layout)
        energies = np.empty(cfg.generations + 1)
        fids = np.empty(cfg.generations + 1)
        for g in range(cfg.generations + 1):
            if cfg.readout == "register_extrema":
                e, f = register_metrics(pop, h)
                energies[g], fids[g] = e.min(), f.max()
            if metrics_hook is not None:
                metrics_hook(g, pop)
            if g == 0 or t is None:
                kept = sort_reduced(pop.rho, h, cfg)
            if cfg.readout == "sorted_top":
                energies[g], fids[g] = _kept_top_metrics(kept, h)
            if g == cfg.generations:
                break
            if t is None:
                pop = QuantumPopulation(cfg.layout, _breed_array(_expand_kept(kept, cfg.layout), h, cfg))
            else:
                kept = (t @ kept.reshape(-1)).reshape(k, k)
        records.append(RunRecord(algorithm, hamiltonian_id, seed, energies, fids))
    return records


def population_to_dict(pop: QuantumPopulation, generation: int | None = None) -> dict:
    return {
        "schema_version": 1,
        "generation": generation,
        "n_registers": pop.layout.n_registers,
        "qubits_per_register": pop.layout.qubits_per_register,
        "rho": [[[z.real, z.imag] for z in row] for row in pop.rho.tolist()],
    }


def json_snapshot_hook(directory, prefix: str = "population") -> Callable[[int, QuantumPopulation], None]:
    """Metrics hook that writes each generation's population to a JSON file."""
    os.makedirs(directory, exist_ok=True)

    def hook(generation: int, pop: QuantumPopulation) -> None:
        path = os.path.join(directory, f"{prefix}-g{generation:03d}.json")
        with open(path, "w") as fh:
            json.dump(population_to_dict(pop, generation), fh)

    return hook
