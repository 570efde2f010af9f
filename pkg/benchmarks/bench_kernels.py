"""Time the compiled and pure-numpy kernel paths and check that they agree.

    python benchmarks/bench_kernels.py [--repeat 5] [--json out.json]

Both paths are called directly, so the QGABENCH_DISABLE_NUMBA flag is not
needed here.  Also times one QGA generation and one CGA run end to end
under whichever backend the environment selects.
"""

from __future__ import annotations

import argparse
import json
import sys
import timeit

import numpy as np

from qgabench import classical, kernels, qga
from qgabench.hamiltonians import sample_random_hamiltonian
from qgabench.tensor import RegisterLayout, haar_random_pure_state


def _density(dim, rng):
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = g @ g.conj().T
    return rho / np.trace(rho)


def kernel_cases(rng):
    layout = RegisterLayout(4, 2)
    h = sample_random_hamiltonian((0, 1, 2, 3), rng)
    plan = qga.sort_plan(h, layout)
    rho = _density(layout.dim, rng)
    clear, field, swap = qga._clone_indices((0, 1), (4, 5), layout.n_qubits)
    g = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    cfg = classical.CgaConfig.variant("CGAai", generations=50)
    pop = np.array([haar_random_pure_state(4, rng) for _ in range(4)])
    draws = classical.draw_cga_randomness(cfg, rng)
    cga_args = (pop, h.matrix.astype(complex), h.ground_state.astype(complex), 0, 0,
                cfg.p, cfg.q, cfg.sigma) + draws + (2,)
    return {
        "jacobi_eigh (4x4)": ("jacobi_eigh", (g + g.conj().T, 1e-15, 100)),
        "sort_scatter (256)": ("sort_scatter", (rho, plan.dest, plan.record)),
        "sort_reduce (256 -> 16)": ("sort_reduce", (rho, plan.dest, plan.record, 16)),
        "symmetric_clone (256)": ("symmetric_clone", (rho, clear, field, swap, 1 / 10)),
        "pauli_mutation (8 qubits)": ("pauli_mutation", (rho, 1 / 24, 8)),
        "cga_evolve (50 generations)": ("cga_evolve", cga_args),
    }


def _max_diff(a, b):
    if isinstance(a, tuple):
        if isinstance(a[0], np.ndarray) and a[0].ndim == 1 and len(a) == 2 and a[1].ndim == 2:
            # eigenpairs come unordered; compare sorted eigenvalues only
            return float(np.max(np.abs(np.sort(a[0]) - np.sort(b[0]))))
        return max(_max_diff(x, y) for x, y in zip(a, b))
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def best_time(fn, repeat):
    number = 1
    while timeit.timeit(fn, number=number) < 0.05:
        number *= 4
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--json", help="also write results to this file")
    args = ap.parse_args(argv)
    rng = np.random.default_rng(args.seed)

    if not kernels.HAVE_NUMBA:
        print("numba unavailable (or disabled); timing the numpy path only", file=sys.stderr)
    rows = []
    for label, (name, call_args) in kernel_cases(rng).items():
        numpy_fn = getattr(kernels, f"_{name}_numpy")
        row = {"kernel": label, "numpy_s": best_time(lambda: numpy_fn(*call_args), args.repeat)}
        if kernels.HAVE_NUMBA:
            numba_fn = getattr(kernels, f"_{name}_numba")
            numba_fn(*call_args)  # compile outside the timed region
            row["numba_s"] = best_time(lambda: numba_fn(*call_args), args.repeat)
            row["speedup"] = row["numpy_s"] / row["numba_s"]
            row["max_abs_diff"] = _max_diff(numba_fn(*call_args), numpy_fn(*call_args))
        rows.append(row)

    h = sample_random_hamiltonian((0, 1, 2, 3), rng)
    layout = RegisterLayout(4, 2)
    pop = qga.product_population([haar_random_pure_state(4, rng) for _ in range(4)], layout)
    cfg = qga.QgaConfig(cloner="uqcm", mutation_enabled=True)
    end_to_end = {
        "backend": kernels.BACKEND,
        "qga_generation_s": best_time(lambda: qga.qga_generation(pop, h, cfg), args.repeat),
        "transfer_matrix_s": min(timeit.repeat(lambda: qga.transfer_matrix(h, cfg), number=1, repeat=1)),
    }

    print(f"{'kernel':30s} {'numpy ms':>10s} {'numba ms':>10s} {'speedup':>8s} {'max |diff|':>11s}")
    for r in rows:
        nb = f"{r['numba_s'] * 1e3:10.3f}" if "numba_s" in r else f"{'-':>10s}"
        sp = f"{r['speedup']:8.1f}" if "speedup" in r else f"{'-':>8s}"
        df = f"{r['max_abs_diff']:11.1e}" if "max_abs_diff" in r else f"{'-':>11s}"
        print(f"{r['kernel']:30s} {r['numpy_s'] * 1e3:10.3f} {nb} {sp} {df}")
    print(f"\nend to end ({end_to_end['backend']}): one QGA generation "
          f"{end_to_end['qga_generation_s'] * 1e3:.1f} ms, transfer matrix {end_to_end['transfer_matrix_s']:.2f} s")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump({"kernels": rows, "end_to_end": end_to_end}, fh, indent=1)
    return 0


if __name__ == "__main__":
    sys.exit(main())
