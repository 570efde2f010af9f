"""Randomized property checks driven by hypothesis."""

import numpy as np
from hypothesis import given, settings, strategies as st

from qgabench import classical as C
from qgabench import qga
from qgabench.hamiltonians import sample_random_hamiltonian
from qgabench.stats import quantile, wilcoxon_signed_rank, win_rate_series
from qgabench.tensor import RegisterLayout, haar_random_pure_state, partial_trace

seeds = st.integers(0, 2 ** 32 - 1)
finite = st.floats(-1e3, 1e3, allow_nan=False)
LAYOUT = RegisterLayout(4, 2)


def rng_of(seed):
    return np.random.default_rng(seed)


def is_density(rho, tol=1e-9):
    herm = np.max(np.abs(rho - rho.conj().T)) < 1e-10
    return herm and abs(np.trace(rho) - 1) < 1e-10 and np.linalg.eigvalsh(rho).min() >= -tol


@settings(max_examples=50, deadline=None)
@given(seeds, st.lists(st.integers(0, 3), min_size=1, max_size=3, unique=True))
def test_partial_trace_preserves_trace(seed, keep):
    rng = rng_of(seed)
    g = rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16))
    rho = g @ g.conj().T
    rho /= np.trace(rho)
    assert is_density(partial_trace(rho, sorted(keep), 4))


@settings(max_examples=40, deadline=None)
@given(st.lists(finite, min_size=1, max_size=30), st.floats(0.01, 0.49), st.floats(0.51, 0.99))
def test_quantile_monotone_and_bounded(values, lo, hi):
    a, b = quantile(values, lo), quantile(values, hi)
    assert min(values) <= a <= b <= max(values)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(finite, finite), min_size=5, max_size=40))
def test_wilcoxon_p_in_unit_interval(pairs):
    a, b = map(np.array, zip(*pairs))
    if np.sum(a != b) < 5:
        return
    stat, p = wilcoxon_signed_rank(a, b)
    n = np.sum(a != b)
    assert 0 <= stat <= n * (n + 1) / 4 and 0 < p <= 1
    assert wilcoxon_signed_rank(b, a) == (stat, p)


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(1, 4), st.integers(1, 6), st.integers(1, 5))
def test_win_rate_bounds(seed, hams, seeds_, gens):
    rng = rng_of(seed)
    w = win_rate_series(rng.random((hams, 2, gens)), rng.random((hams, seeds_, gens)))
    assert w.shape == (gens,) and np.all((0 <= w) & (w <= 1))


@settings(max_examples=50, deadline=None)
@given(seeds, st.sampled_from(["linear", "swap"]))
def test_crossover_children_are_unit(seed, kind):
    rng = rng_of(seed)
    v1, v2 = haar_random_pure_state(4, rng), haar_random_pure_state(4, rng)
    op = C.crossover_linear if kind == "linear" else C.crossover_coeff_swap
    for child in op(v1, v2):
        assert abs(np.linalg.norm(child) - 1) < 1e-12


@settings(max_examples=50, deadline=None)
@given(seeds, st.floats(0, 1), st.floats(0, 2))
def test_mutations_preserve_norm(seed, q, sigma):
    rng = rng_of(seed)
    v = haar_random_pure_state(4, rng)
    assert abs(np.linalg.norm(C.mutate_gaussian(v, q, sigma, rng)) - 1) < 1e-12
    assert abs(np.linalg.norm(C.mutate_pauli(v, q, rng)) - 1) < 1e-12


@settings(max_examples=15, deadline=None)
@given(seeds, st.sampled_from(["uqcm", "bcqo"]), st.booleans())
def test_generation_keeps_density(seed, cloner, mutate):
    rng = rng_of(seed)
    h = sample_random_hamiltonian((0, 1, 2, 3), rng)
    pop = qga.product_population([haar_random_pure_state(4, rng) for _ in range(4)], LAYOUT)
    cfg = qga.QgaConfig(cloner=cloner, mutation_enabled=mutate, p_m=float(rng.random()))
    out = qga.qga_generation(pop, h, cfg)
    assert is_density(out.rho)


@settings(max_examples=15, deadline=None)
@given(seeds)
def test_sort_lowers_top_energy_on_products(seed):
    rng = rng_of(seed)
    h = sample_random_hamiltonian((0, 1, 2, 3), rng)
    labels = rng.integers(0, 4, 4)
    vecs = [h.eigenvectors[:, k] for k in labels]
    out = qga.sort_channel(qga.product_population(vecs, LAYOUT), h)
    e, _ = qga.register_metrics(out, h)
    assert np.allclose(e, np.sort(labels), atol=1e-9)


@settings(max_examples=20, deadline=None)
@given(seeds, st.sampled_from(list(C.CGA_VARIANTS)))
def test_cga_best_energy_within_spectrum(seed, name):
    rng = rng_of(seed)
    h = sample_random_hamiltonian((0, 1, 2, 3), rng)
    rec = C.run_cga(h, C.CgaConfig.variant(name, generations=5), [haar_random_pure_state(4, rng) for _ in range(4)],
                    rng)
    assert np.all(rec.best_energy >= -1e-9) and np.all(rec.best_energy <= 3 + 1e-9)
    assert np.all((rec.best_fidelity >= -1e-12) & (rec.best_fidelity <= 1 + 1e-12))
