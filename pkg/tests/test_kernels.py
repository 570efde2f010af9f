"""Backend agreement: compiled loops, pure-python loops and numpy paths."""

import os
import subprocess
import sys

import numpy as np
import pytest

from qgabench import classical, kernels, qga
from qgabench.hamiltonians import make_h2, sample_random_hamiltonian
from qgabench.tensor import RegisterLayout, embed_operator

import oracles

VARIANTS = ["_loops", "_numpy"] + (["_numba"] if kernels.USE_NUMBA else [])


def impl(name, variant):
    return getattr(kernels, f"_{name}{variant}")


def random_density(dim, rng):
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = g @ g.conj().T
    return rho / np.trace(rho)


def test_backend_flag():
    assert kernels.BACKEND in ("numba", "numpy")
    env = dict(os.environ, QGABENCH_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", "from qgabench import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"


@pytest.mark.parametrize("variant", VARIANTS)
def test_jacobi(variant):
    rng = np.random.default_rng(0)
    for _ in range(20):
        g = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        h = g + g.conj().T
        w, v = impl("jacobi_eigh", variant)(h, 1e-15, 100)
        assert np.allclose(np.sort(w), np.linalg.eigvalsh(h), atol=1e-12)
        assert np.allclose(h @ v, v * w, atol=1e-12)


def sort_inputs(rng):
    h = sample_random_hamiltonian((0, 1, 2, 3), rng)
    layout = RegisterLayout(4, 2)
    plan = qga.sort_plan(h, layout, None)
    return random_density(256, rng), plan


@pytest.mark.parametrize("variant", VARIANTS)
def test_sort_scatter(variant):
    rng = np.random.default_rng(1)
    rho, plan = sort_inputs(rng)
    dest, record = plan.dest, plan.record
    ref = kernels._sort_scatter_numpy(rho, dest, record)
    assert np.allclose(impl("sort_scatter", variant)(rho, dest, record), ref, atol=1e-14)
    assert abs(np.trace(ref) - 1) < 1e-12


@pytest.mark.parametrize("variant", VARIANTS)
def test_sort_reduce(variant):
    rng = np.random.default_rng(2)
    rho, plan = sort_inputs(rng)
    full = kernels._sort_scatter_numpy(rho, plan.dest, plan.record)
    ref = np.einsum("aibi->ab", full.reshape(16, 16, 16, 16))
    assert np.allclose(impl("sort_reduce", variant)(rho, plan.dest, plan.record, 16), ref, atol=1e-14)


@pytest.mark.parametrize("variant", VARIANTS)
def test_symmetric_clone(variant):
    rng = np.random.default_rng(3)
    n = 4
    # clone qubit 1 onto blank qubit 3 of sigma (x) |0><0|
    sigma = random_density(8, rng)
    rho = np.kron(sigma, np.diag([1.0, 0.0])).astype(complex)
    clear, field, swap = qga._clone_indices((1,), (3,), n)
    out = impl("symmetric_clone", variant)(rho, clear, field, swap, 1 / 6)
    p_sym = embed_operator(oracles.symmetric_projector(2), [1, 3], n)
    ref = (2 / 3) * p_sym @ np.kron(sigma, np.eye(2)) @ p_sym
    assert np.allclose(out, ref, atol=1e-14)


@pytest.mark.parametrize("variant", VARIANTS)
def test_pauli_mutation_against_kraus(variant):
    rng = np.random.default_rng(4)
    n, p = 3, 0.3
    rho = random_density(8, rng)
    paulis = [np.eye(2), qga.PAULI_X, qga.PAULI_Y, qga.PAULI_Z]
    weights = [1 - p, p / 3, p / 3, p / 3]
    ref = rho
    for qb in range(n):
        ref = sum(w * embed_operator(s, [qb], n) @ ref @ embed_operator(s, [qb], n).conj().T
                  for w, s in zip(weights, paulis))
    assert np.allclose(impl("pauli_mutation", variant)(rho.copy(), p, n), ref, atol=1e-14)


def test_pauli_mutation_full_size_agrees():
    rng = np.random.default_rng(5)
    rho = random_density(256, rng)
    a = kernels._pauli_mutation_numpy(rho, 1 / 24, 8)
    b = kernels.pauli_mutation(rho, 1 / 24, 8)
    assert np.allclose(a, b, atol=1e-15)
    assert np.array_equal(kernels.pauli_mutation(rho, 0.0, 8), rho)


@pytest.mark.parametrize("variant", VARIANTS)
@pytest.mark.parametrize("name", list(classical.CGA_VARIANTS))
def test_cga_evolve(variant, name):
    rng = np.random.default_rng(6)
    h = make_h2()
    cfg = classical.CgaConfig.variant(name, p=0.2, q=0.2, generations=15)
    pop = np.array([classical.normalize(rng.standard_normal(4) + 1j * rng.standard_normal(4)) for _ in range(4)])
    draws = classical.draw_cga_randomness(cfg, rng)
    args = (pop, h.matrix.astype(complex), h.ground_state.astype(complex), classical.CROSSOVERS[cfg.crossover],
            classical.MUTATIONS[cfg.mutation], cfg.p, cfg.q, cfg.sigma) + draws + (cfg.c,)
    ref = kernels._cga_evolve_numpy(*args)
    got = impl("cga_evolve", variant)(*args)
    for a, b in zip(got, ref):
        # selection can amplify last-bit differences, so the comparison is loose
        assert np.allclose(a, b, atol=1e-6)


def test_apply_pauli_numpy():
    v = np.arange(8, dtype=complex)
    for qb in range(3):
        for which, s in enumerate((qga.PAULI_X, qga.PAULI_Y, qga.PAULI_Z)):
            assert np.allclose(kernels.apply_pauli_numpy(v, qb, which, 3), embed_operator(s, [qb], 3) @ v)
