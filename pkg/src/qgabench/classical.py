"""Classical baselines: a bit-string GA (BGA) and four complex-vector GAs (CGAs).

CGA variants are named by crossover (``a`` linear combination, ``b``
coefficient splice) and mutation (``i`` Gaussian, ``ii`` random Paulis).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import kernels
from .hamiltonians import ProblemHamiltonian
from .records import RunRecord
from .tensor import NORM_TOL, ValidationError

CROSSOVERS = {"A": kernels.CROSSOVER_LINEAR, "B": kernels.CROSSOVER_COEFF_SWAP}
MUTATIONS = {"i": kernels.MUTATION_GAUSSIAN, "ii": kernels.MUTATION_PAULI}
CGA_VARIANTS = {
    "CGAai": ("A", "i"),
    "CGAaii": ("A", "ii"),
    "CGAbi": ("B", "i"),
    "CGAbii": ("B", "ii"),
}
PAULI_NAMES = ("X", "Y", "Z")


def _check_prob(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise ValidationError(f"{name} = {value} is not a probability")


def normalize(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=np.complex128)
    nrm = np.linalg.norm(v)
    if nrm <= kernels.DEGENERATE_NORM:
        raise ValidationError("cannot normalize a zero vector")
    return v / nrm


def vector_energy(v: np.ndarray, h: ProblemHamiltonian) -> float:
    return h.energy(v)


def vector_fidelity(v: np.ndarray, h: ProblemHamiltonian) -> float:
    return float(abs(np.vdot(h.ground_state, v)) ** 2)


# --------------------------------------------------------------------------
# bit strings
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class BitIndividual:
    bits: str

    def __post_init__(self):
        if not self.bits or set(self.bits) - {"0", "1"}:
            raise ValidationError(f"not a bit string: {self.bits!r}")

    @property
    def index(self) -> int:
        return int(self.bits, 2)


def _require_diagonal(h: ProblemHamiltonian) -> None:
    if not h.is_diagonal():
        raise ValidationError("the bit-string GA only handles Hamiltonians diagonal in the computational basis")


def bit_energy(ind: BitIndividual, h: ProblemHamiltonian) -> float:
    return float(h.matrix[ind.index, ind.index].real)


def bit_fidelity(ind: BitIndividual, h: ProblemHamiltonian) -> float:
    """1 when the string labels the ground eigenstate, else 0."""
    return float(abs(h.ground_state[ind.index]) ** 2)


# --------------------------------------------------------------------------
# operators
# --------------------------------------------------------------------------

def select_halve(pop: Sequence, h: ProblemHamiltonian) -> list:
    """Stable ascending sort by energy, keeping the better half."""
    if len(pop) % 2:
        raise ValidationError(f"population size must be even, got {len(pop)}")
    energy = bit_energy if pop and isinstance(pop[0], BitIndividual) else vector_energy
    es = np.array([energy(ind, h) for ind in pop])
    order = np.argsort(es, kind="stable")
    return [pop[i] for i in order[: len(pop) // 2]]


def _renorm_or(child: np.ndarray, fallback: np.ndarray) -> np.ndarray:
    nrm = np.linalg.norm(child)
    return child / nrm if nrm > kernels.DEGENERATE_NORM else np.asarray(fallback, dtype=np.complex128)


def crossover_linear(v1: np.ndarray, v2: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Children ``2 v1 + v2`` and ``v1 + 2 v2``, renormalized; a zero child falls back to its parent."""
    v1 = np.asarray(v1, dtype=np.complex128)
    v2 = np.asarray(v2, dtype=np.complex128)
    return _renorm_or(2 * v1 + v2, v1), _renorm_or(v1 + 2 * v2, v2)


def crossover_coeff_swap(v1: np.ndarray, v2: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Exchange the trailing half of the coefficients."""
    v1 = np.asarray(v1, dtype=np.complex128)
    v2 = np.asarray(v2, dtype=np.complex128)
    h = len(v1) // 2
    c1 = np.concatenate([v1[:h], v2[h:]])
    c2 = np.concatenate([v2[:h], v1[h:]])
    return _renorm_or(c1, v1), _renorm_or(c2, v2)


def gaussian_perturbation(shape, q: float, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """Complex noise ``sigma * (g_re + i g_im)`` on a Bernoulli(q) mask, zero elsewhere."""
    _check_prob("q", q)
    if sigma < 0:
        raise ValidationError("sigma must be >= 0")
    shape = tuple(int(s) for s in np.atleast_1d(shape))
    mask = rng.random(shape) < q
    g = rng.standard_normal(shape + (2,))
    return np.where(mask, sigma * (g[..., 0] + 1j * g[..., 1]), 0.0)


def mutate_gaussian(v: np.ndarray, q: float, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """Add complex Gaussian noise to each coefficient with probability ``q``, then renormalize.

    A perturbation that cancels the vector is redrawn once; if that also
    fails the input is returned unchanged.
    """
    v = np.asarray(v, dtype=np.complex128)
    for _ in range(2):
        w = v + gaussian_perturbation(v.shape, q, sigma, rng)
        nrm = np.linalg.norm(w)
        if nrm > kernels.DEGENERATE_NORM:
            return w / nrm
    return v.copy()


def mutate_pauli(v: np.ndarray, p: float, rng: np.random.Generator | None = None, *,
                 forced: Sequence[str | None] | None = None) -> np.ndarray:
    """Apply a uniformly random X, Y or Z to each qubit with probability ``p``.

    ``forced`` fixes the gate per qubit (``None`` skips that qubit) and
    bypasses the random draws; it exists for deterministic checks.
    """
    _check_prob("p", p)
    v = np.asarray(v, dtype=np.complex128)
    nq = int(np.log2(len(v)))
    if forced is not None:
        choices = [None if f is None else PAULI_NAMES.index(f) for f in forced]
    else:
        hit = rng.random(nq) < p
        which = rng.integers(0, 3, nq)
        choices = [int(w) if h else None for h, w in zip(hit, which)]
    for k, which in enumerate(choices):
        if which is not None:
            v = kernels.apply_pauli_numpy(v, k, which, nq)
    return v


# --------------------------------------------------------------------------
# BGA
# --------------------------------------------------------------------------

def bga_step(pop: Sequence[BitIndividual], h: ProblemHamiltonian, p: float,
             rng: np.random.Generator | None = None, flips: np.ndarray | None = None) -> list[BitIndividual]:
    """Select, duplicate, swap bit tails inside consecutive copy pairs, flip bits.

    ``flips`` (shape ``(n, c)`` of uniforms) may replace the draws from ``rng``.
    """
    _require_diagonal(h)
    _check_prob("p", p)
    n = len(pop)
    c = len(pop[0].bits)
    surv = select_halve(list(pop), h)
    copies = [s.bits for s in surv]
    k = c // 2
    for i in range(0, len(copies) - 1, 2):
        a, b = copies[i], copies[i + 1]
        copies[i], copies[i + 1] = a[: c - k] + b[c - k:], b[: c - k] + a[c - k:]
    strings = [s.bits for s in surv] + copies
    u = rng.random((n, c)) if flips is None else np.asarray(flips)
    out = []
    for s, row in zip(strings, u):
        out.append(BitIndividual("".join(("1" if ch == "0" else "0") if r < p else ch for ch, r in zip(s, row))))
    return out


def run_bga(h: ProblemHamiltonian, p: float, generations: int, initial: Sequence[BitIndividual],
            rng: np.random.Generator, metrics_hook: Callable[[int, list], None] | None = None, *,
            algorithm: str = "BGA", hamiltonian_id: str = "", seed: int = -1) -> RunRecord:
    _require_diagonal(h)
    pop = [ind if isinstance(ind, BitIndividual) else BitIndividual(ind) for ind in initial]
    energies = np.empty(generations + 1)
    fids = np.empty(generations + 1)
    for g in range(generations + 1):
        es = [bit_energy(ind, h) for ind in pop]
        best = int(np.argmin(es))
        energies[g], fids[g] = es[best], bit_fidelity(pop[best], h)
        if metrics_hook is not None:
            metrics_hook(g, pop)
        if g < generations:
            pop = bga_step(pop, h, p, rng)
    return RunRecord(algorithm, hamiltonian_id, seed, energies, fids)


# --------------------------------------------------------------------------
# CGA
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class CgaConfig:
    crossover: str = "A"
    mutation: str = "i"
    p: float = 1 / 24
    q: float = 1 / 24
    sigma: float = 0.228
    generations: int = 10
    n: int = 4
    c: int = 2

    def __post_init__(self):
        if self.crossover not in CROSSOVERS:
            raise ValidationError(f"crossover must be one of {tuple(CROSSOVERS)}, got {self.crossover!r}")
        if self.mutation not in MUTATIONS:
            raise ValidationError(f"mutation must be one of {tuple(MUTATIONS)}, got {self.mutation!r}")
        _check_prob("p", self.p)
        _check_prob("q", self.q)
        if self.sigma < 0:
            raise ValidationError("sigma must be >= 0")
        if self.generations < 0:
            raise ValidationError("generations must be >= 0")
        if self.n < 4 or self.n % 4:
            raise ValidationError(f"population size must be a positive multiple of 4, got {self.n}")
        if self.c < 2 or self.c % 2:
            raise ValidationError(f"qubits per individual must be a positive even number, got {self.c}")

    @classmethod
    def variant(cls, name: str, **kwargs) -> "CgaConfig":
        try:
            cx, mu = CGA_VARIANTS[name]
        except KeyError:
            raise ValidationError(f"unknown CGA variant {name!r}; expected one of {tuple(CGA_VARIANTS)}") from None
        return cls(crossover=cx, mutation=mu, **kwargs)


def draw_cga_randomness(cfg: CgaConfig, rng: np.random.Generator, generations: int | None = None) -> tuple:
    """Pre-draw every random number a CGA run consumes, generation by generation."""
    gens = cfg.generations if generations is None else generations
    n, c = cfg.n, cfg.c
    d = 2 ** c
    mask = np.zeros((gens, n, d))
    noise = np.zeros((gens, n, d, 2))
    hit = np.ones((gens, n, c))
    choice = np.zeros((gens, n, c), dtype=np.int64)
    for g in range(gens):
        if cfg.mutation == "i":
            mask[g] = rng.random((n, d))
            noise[g] = rng.standard_normal((n, d, 2))
        else:
            hit[g] = rng.random((n, c))
            choice[g] = rng.integers(0, 3, (n, c))
    return mask, noise, hit, choice


def _as_population(pop, cfg: CgaConfig) -> np.ndarray:
    arr = np.array([np.asarray(v, dtype=np.complex128) for v in pop])
    if arr.shape != (cfg.n, 2 ** cfg.c):
        raise ValidationError(f"population shape {arr.shape} differs from ({cfg.n}, {2 ** cfg.c})")
    if np.max(np.abs(np.linalg.norm(arr, axis=1) - 1.0)) > NORM_TOL * 1e2:
        raise ValidationError("CGA individuals must be unit vectors")
    return arr


def _evolve(pop: np.ndarray, h: ProblemHamiltonian, cfg: CgaConfig, draws: tuple):
    mask, noise, hit, choice = draws
    return kernels.cga_evolve(pop, h.matrix, h.ground_state, CROSSOVERS[cfg.crossover], MUTATIONS[cfg.mutation],
                              cfg.p, cfg.q, cfg.sigma, mask, noise, hit, choice, cfg.c)


def cga_step(pop, h: ProblemHamiltonian, cfg: CgaConfig, rng: np.random.Generator) -> np.ndarray:
    """One generation: select, duplicate, cross consecutive copies, mutate everyone."""
    arr = _as_population(pop, cfg)
    _, _, out = _evolve(arr, h, cfg, draw_cga_randomness(cfg, rng, 1))
    return out


def run_cga(h: ProblemHamiltonian, cfg: CgaConfig, initial, rng: np.random.Generator,
            metrics_hook: Callable[[int, np.ndarray], None] | None = None, *,
            algorithm: str = "CGA", hamiltonian_id: str = "", seed: int = -1) -> RunRecord:
    if h.dim != 2 ** cfg.c:
        raise ValidationError(f"Hamiltonian dimension {h.dim} does not match 2^{cfg.c}")
    pop = _as_population(initial, cfg)
    if metrics_hook is None:
        best_e, best_f, _ = _evolve(pop, h, cfg, draw_cga_randomness(cfg, rng))
        return RunRecord(algorithm, hamiltonian_id, seed, best_e, best_f)
    # with a hook, step generation by generation (same draws, same result)
    best_e = np.empty(cfg.generations + 1)
    best_f = np.empty(cfg.generations + 1)
    for g in range(cfg.generations + 1):
        metrics_hook(g, pop)
        if g == cfg.generations:
            e, f, _ = _evolve(pop, h, cfg, draw_cga_randomness(cfg, rng, 0))
            best_e[g], best_f[g] = e[0], f[0]
            break
        e, f, pop = _evolve(pop, h, cfg, draw_cga_randomness(cfg, rng, 1))
        best_e[g], best_f[g] = e[0], f[0]
    return RunRecord(algorithm, hamiltonian_id, seed, best_e, best_f)
