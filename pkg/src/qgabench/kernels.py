"""Hot numeric kernels with a numba path and a pure-numpy path.

The numba versions are used when numba imports cleanly and the environment
variable ``QGABENCH_DISABLE_NUMBA`` is unset (or ``0``).  Both paths consume
exactly the same inputs, including any pre-drawn random numbers, so they
agree to floating point rounding.  ``benchmarks/bench_kernels.py`` times one
against the other.
"""

from __future__ import annotations

import os

import numpy as np

_DISABLE = os.environ.get("QGABENCH_DISABLE_NUMBA", "0").strip().lower() not in ("", "0", "false", "no")

try:
    if _DISABLE:
        raise ImportError("numba disabled by QGABENCH_DISABLE_NUMBA")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA
BACKEND = "numba" if USE_NUMBA else "numpy"

CROSSOVER_LINEAR = 0
CROSSOVER_COEFF_SWAP = 1
MUTATION_GAUSSIAN = 0
MUTATION_PAULI = 1

# Below this norm a crossover child or mutated vector counts as degenerate.
DEGENERATE_NORM = 1e-12


# --------------------------------------------------------------------------
# Hermitian eigensolver (cyclic Jacobi)
# --------------------------------------------------------------------------

def _jacobi_eigh_loops(h, tol, max_sweeps):
    n = h.shape[0]
    a = h.copy()
    v = np.eye(n, dtype=np.complex128)
    scale = 0.0
    for i in range(n):
        for j in range(n):
            scale += a[i, j].real ** 2 + a[i, j].imag ** 2
    scale = np.sqrt(scale)
    if scale == 0.0:
        return np.zeros(n), v
    for _ in range(max_sweeps):
        off = 0.0
        for i in range(n):
            for j in range(i + 1, n):
                off += a[i, j].real ** 2 + a[i, j].imag ** 2
        if np.sqrt(off) <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                b = abs(apq)
                if b <= 1e-300:
                    continue
                ph = apq / b
                app = a[p, p].real
                aqq = a[q, q].real
                tau = (aqq - app) / (2.0 * b)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                # J = diag(1, conj(ph)) @ [[c, s], [-s, c]] in the (p, q) plane
                jpp = c + 0j
                jpq = s + 0j
                jqp = -s * np.conj(ph)
                jqq = c * np.conj(ph)
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = akp * jpp + akq * jqp
                    a[k, q] = akp * jpq + akq * jqq
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = np.conj(jpp) * apk + np.conj(jqp) * aqk
                    a[q, k] = np.conj(jpq) * apk + np.conj(jqq) * aqk
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                for k in range(n):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = vkp * jpp + vkq * jqp
                    v[k, q] = vkp * jpq + vkq * jqq
    w = np.empty(n)
    for i in range(n):
        w[i] = a[i, i].real
    return w, v


def _jacobi_eigh_numpy(h, tol, max_sweeps):
    n = h.shape[0]
    a = np.array(h, dtype=np.complex128, copy=True)
    v = np.eye(n, dtype=np.complex128)
    scale = np.linalg.norm(a)
    if scale == 0.0:
        return np.zeros(n), v
    upper = np.triu_indices(n, 1)
    for _ in range(max_sweeps):
        if np.linalg.norm(a[upper]) <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                b = abs(apq)
                if b <= 1e-300:
                    continue
                ph = apq / b
                tau = (a[q, q].real - a[p, p].real) / (2.0 * b)
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                j = np.array([[c, s], [-s * np.conj(ph), c * np.conj(ph)]])
                cols = a[:, [p, q]] @ j
                a[:, p], a[:, q] = cols[:, 0], cols[:, 1]
                rows = j.conj().T @ a[[p, q], :]
                a[p, :], a[q, :] = rows[0], rows[1]
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                vc = v[:, [p, q]] @ j
                v[:, p], v[:, q] = vc[:, 0], vc[:, 1]
    return np.diag(a).real.copy(), v


# --------------------------------------------------------------------------
# Sorting-network scatter in the product eigenbasis
# --------------------------------------------------------------------------

def _sort_scatter_loops(rho_e, dest, record):
    dim = rho_e.shape[0]
    out = np.zeros_like(rho_e)
    for x in range(dim):
        rx = record[x]
        dx = dest[x]
        for y in range(dim):
            if record[y] == rx:
                out[dx, dest[y]] += rho_e[x, y]
    return out


def _sort_scatter_numpy(rho_e, dest, record):
    out = np.zeros_like(rho_e)
    for r in np.unique(record):
        idx = np.flatnonzero(record == r)
        tgt = dest[idx]
        # dest is injective inside one branch record, so plain assignment-add is safe
        out[np.ix_(tgt, tgt)] += rho_e[np.ix_(idx, idx)]
    return out


def _sort_reduce_loops(rho_e, dest, record, drop_dim):
    dim = rho_e.shape[0]
    keep_dim = dim // drop_dim
    out = np.zeros((keep_dim, keep_dim), dtype=rho_e.dtype)
    for x in range(dim):
        rx = record[x]
        kx = dest[x] // drop_dim
        dx = dest[x] % drop_dim
        for y in range(dim):
            if record[y] == rx and dest[y] % drop_dim == dx:
                out[kx, dest[y] // drop_dim] += rho_e[x, y]
    return out


def _sort_reduce_numpy(rho_e, dest, record, drop_dim):
    keep_dim = rho_e.shape[0] // drop_dim
    out = np.zeros((keep_dim, keep_dim), dtype=rho_e.dtype)
    key = record * drop_dim + dest % drop_dim
    for k in np.unique(key):
        idx = np.flatnonzero(key == k)
        tgt = dest[idx] // drop_dim
        out[np.ix_(tgt, tgt)] += rho_e[np.ix_(idx, idx)]
    return out


# --------------------------------------------------------------------------
# Symmetric universal cloning onto blank qubits, as an index gather:
# out[x, y] = scale * sum over (x or swap(x), y or swap(y)) of B, where
# B[x, y] = rho[clear[x], clear[y]] when x and y agree on the target bits.
# --------------------------------------------------------------------------

def _symmetric_clone_loops(rho, clear, field, swap, scale):
    dim = rho.shape[0]
    out = np.empty_like(rho)
    for x in range(dim):
        sx = swap[x]
        for y in range(dim):
            sy = swap[y]
            acc = 0j
            if field[x] == field[y]:
                acc += rho[clear[x], clear[y]]
            if field[sx] == field[y]:
                acc += rho[clear[sx], clear[y]]
            if field[x] == field[sy]:
                acc += rho[clear[x], clear[sy]]
            if field[sx] == field[sy]:
                acc += rho[clear[sx], clear[sy]]
            out[x, y] = scale * acc
    return out


def _symmetric_clone_numpy(rho, clear, field, swap, scale):
    b = rho[np.ix_(clear, clear)] * (field[:, None] == field[None, :])
    bs = b[swap]
    return scale * (b + bs + b[:, swap] + bs[:, swap])


# --------------------------------------------------------------------------
# Per-qubit Pauli mutation: rho -> (1-p) rho + p/3 (X rho X + Y rho Y + Z rho Z)
# which for one qubit q equals (1 - 4p/3) rho + (2p/3) Tr_q(rho) (x) I_q.
# --------------------------------------------------------------------------

def _pauli_mutation_loops(rho, p, nqubits):
    dim = rho.shape[0]
    cur = rho.copy()
    keep = 1.0 - 4.0 * p / 3.0
    mix = 2.0 * p / 3.0
    for q in range(nqubits):
        bit = 1 << (nqubits - 1 - q)
        # 2x2 blocks in qubit q are independent, so update in place
        for x0 in range(dim):
            if x0 & bit:
                continue
            x1 = x0 | bit
            for y0 in range(dim):
                if y0 & bit:
                    continue
                y1 = y0 | bit
                a = cur[x0, y0]
                b = cur[x1, y1]
                t = mix * (a + b)
                cur[x0, y0] = keep * a + t
                cur[x1, y1] = keep * b + t
                cur[x0, y1] *= keep
                cur[x1, y0] *= keep
    return cur


def _pauli_mutation_numpy(rho, p, nqubits):
    cur = np.asarray(rho, dtype=np.complex128)
    dim = cur.shape[0]
    keep = 1.0 - 4.0 * p / 3.0
    mix = 2.0 * p / 3.0
    for q in range(nqubits):
        lo = 2 ** q
        hi = dim // (2 * lo)
        t = cur.reshape(lo, 2, hi, lo, 2, hi)
        traced = t[:, 0, :, :, 0, :] + t[:, 1, :, :, 1, :]
        out = keep * t
        out[:, 0, :, :, 0, :] += mix * traced
        out[:, 1, :, :, 1, :] += mix * traced
        cur = out.reshape(dim, dim)
    return cur


# --------------------------------------------------------------------------
# Complex-vector GA evolution, driven by pre-drawn random numbers
# --------------------------------------------------------------------------

def _cga_evolve_loops(pop0, h, u0, crossover, mutation, p, q, sigma,
                      mask_u, noise, hit_u, pauli_choice, nqubits):
    gens = mask_u.shape[0]
    n, d = pop0.shape
    half = n // 2
    pop = pop0.copy()
    best_e = np.empty(gens + 1)
    best_f = np.empty(gens + 1)
    energies = np.empty(n)
    for g in range(gens + 1):
        for i in range(n):
            acc = 0.0
            for a in range(d):
                hv = 0j
                for b in range(d):
                    hv += h[a, b] * pop[i, b]
                acc += (np.conj(pop[i, a]) * hv).real
            energies[i] = acc
        ib = 0
        for i in range(1, n):
            if energies[i] < energies[ib]:
                ib = i
        ov = 0j
        for a in range(d):
            ov += np.conj(u0[a]) * pop[ib, a]
        best_e[g] = energies[ib]
        best_f[g] = ov.real ** 2 + ov.imag ** 2
        if g == gens:
            break
        order = np.argsort(energies, kind="mergesort")
        new = np.empty_like(pop)
        for i in range(half):
            new[i] = pop[order[i]]
        for k in range(0, half - 1, 2):
            v1 = new[k]
            v2 = new[k + 1]
            if crossover == 0:
                c1 = 2.0 * v1 + v2
                c2 = v1 + 2.0 * v2
            else:
                c1 = v1.copy()
                c2 = v2.copy()
                for a in range(d // 2, d):
                    c1[a] = v2[a]
                    c2[a] = v1[a]
            n1 = np.sqrt(np.sum(c1.real ** 2 + c1.imag ** 2))
            n2 = np.sqrt(np.sum(c2.real ** 2 + c2.imag ** 2))
            new[half + k] = c1 / n1 if n1 > DEGENERATE_NORM else v1
            new[half + k + 1] = c2 / n2 if n2 > DEGENERATE_NORM else v2
        for i in range(n):
            v = new[i].copy()
            if mutation == 0:
                w = v.copy()
                for a in range(d):
                    if mask_u[g, i, a] < q:
                        w[a] += sigma * (noise[g, i, a, 0] + 1j * noise[g, i, a, 1])
                nw = np.sqrt(np.sum(w.real ** 2 + w.imag ** 2))
                if nw > DEGENERATE_NORM:
                    v = w / nw
            else:
                for k in range(nqubits):
                    if hit_u[g, i, k] < p:
                        which = pauli_choice[g, i, k]
                        bit = 1 << (nqubits - 1 - k)
                        w = np.empty_like(v)
                        for j in range(d):
                            is_set = (j & bit) != 0
                            if which == 0:
                                w[j ^ bit] = v[j]
                            elif which == 1:
                                # Y|0> = i|1>, Y|1> = -i|0>
                                w[j ^ bit] = (-1j if is_set else 1j) * v[j]
                            else:
                                w[j] = -v[j] if is_set else v[j]
                        v = w
            pop[i] = v
    return best_e, best_f, pop


def apply_pauli_numpy(v, qubit, which, nqubits):
    """Apply X (0), Y (1) or Z (2) to ``qubit`` of a state vector."""
    t = np.asarray(v, dtype=np.complex128).reshape((2,) * nqubits)
    t = np.moveaxis(t, qubit, 0)
    if which == 0:
        t = t[::-1]
    elif which == 1:
        t = np.stack([-1j * t[1], 1j * t[0]])
    else:
        t = np.stack([t[0], -t[1]])
    return np.moveaxis(t, 0, qubit).reshape(-1)


def _cga_evolve_numpy(pop0, h, u0, crossover, mutation, p, q, sigma,
                      mask_u, noise, hit_u, pauli_choice, nqubits):
    gens = mask_u.shape[0]
    n, d = pop0.shape
    half = n // 2
    pop = np.array(pop0, dtype=np.complex128, copy=True)
    best_e = np.empty(gens + 1)
    best_f = np.empty(gens + 1)
    for g in range(gens + 1):
        energies = np.einsum("ia,ab,ib->i", pop.conj(), h, pop).real
        ib = int(np.argmin(energies))
        best_e[g] = energies[ib]
        best_f[g] = abs(np.vdot(u0, pop[ib])) ** 2
        if g == gens:
            break
        surv = pop[np.argsort(energies, kind="stable")[:half]]
        v1, v2 = surv[0::2], surv[1::2]
        if crossover == CROSSOVER_LINEAR:
            c1, c2 = 2.0 * v1 + v2, v1 + 2.0 * v2
        else:
            c1 = np.concatenate([v1[:, : d // 2], v2[:, d // 2:]], axis=1)
            c2 = np.concatenate([v2[:, : d // 2], v1[:, d // 2:]], axis=1)
        n1 = np.linalg.norm(c1, axis=1, keepdims=True)
        n2 = np.linalg.norm(c2, axis=1, keepdims=True)
        c1 = np.where(n1 > DEGENERATE_NORM, c1 / np.where(n1 > 0, n1, 1.0), v1)
        c2 = np.where(n2 > DEGENERATE_NORM, c2 / np.where(n2 > 0, n2, 1.0), v2)
        kids = np.empty((half, d), dtype=np.complex128)
        kids[0::2], kids[1::2] = c1, c2
        new = np.concatenate([surv, kids])
        if mutation == MUTATION_GAUSSIAN:
            delta = sigma * (noise[g, :, :, 0] + 1j * noise[g, :, :, 1])
            w = new + np.where(mask_u[g] < q, delta, 0.0)
            nw = np.linalg.norm(w, axis=1, keepdims=True)
            new = np.where(nw > DEGENERATE_NORM, w / np.where(nw > 0, nw, 1.0), new)
        else:
            for i in range(n):
                for k in range(nqubits):
                    if hit_u[g, i, k] < p:
                        new[i] = apply_pauli_numpy(new[i], k, pauli_choice[g, i, k], nqubits)
        pop = new
    return best_e, best_f, pop


if USE_NUMBA:
    _jacobi_eigh_numba = njit(cache=True)(_jacobi_eigh_loops)
    _sort_scatter_numba = njit(cache=True)(_sort_scatter_loops)
    _pauli_mutation_numba = njit(cache=True)(_pauli_mutation_loops)
    _sort_reduce_numba = njit(cache=True)(_sort_reduce_loops)
    _symmetric_clone_numba = njit(cache=True)(_symmetric_clone_loops)
    _cga_evolve_numba = njit(cache=True)(_cga_evolve_loops)


def jacobi_eigh(h, tol=1e-15, max_sweeps=100):
    """Unordered eigenpairs of a Hermitian matrix by cyclic Jacobi rotations."""
    h = np.ascontiguousarray(h, dtype=np.complex128)
    if USE_NUMBA:
        return _jacobi_eigh_numba(h, tol, max_sweeps)
    return _jacobi_eigh_numpy(h, tol, max_sweeps)


def sort_scatter(rho_e, dest, record):
    """Apply a classical-on-labels sorting network to a density matrix.

    ``rho_e`` is expressed in the product eigenbasis.  Basis state ``x`` is
    sent to ``dest[x]`` and ``record[x]`` identifies the comparator branch
    sequence it took; coherences survive only between equal records.
    """
    rho_e = np.ascontiguousarray(rho_e, dtype=np.complex128)
    dest = np.ascontiguousarray(dest, dtype=np.int64)
    record = np.ascontiguousarray(record, dtype=np.int64)
    if USE_NUMBA:
        return _sort_scatter_numba(rho_e, dest, record)
    return _sort_scatter_numpy(rho_e, dest, record)


def sort_reduce(rho_e, dest, record, drop_dim):
    """Sorting network followed by tracing out the trailing ``drop_dim`` factor.

    Same label semantics as :func:`sort_scatter`; the result is the reduced
    state of the leading factor, still in the product eigenbasis.
    """
    rho_e = np.ascontiguousarray(rho_e, dtype=np.complex128)
    dest = np.ascontiguousarray(dest, dtype=np.int64)
    record = np.ascontiguousarray(record, dtype=np.int64)
    if USE_NUMBA:
        return _sort_reduce_numba(rho_e, dest, record, int(drop_dim))
    return _sort_reduce_numpy(rho_e, dest, record, int(drop_dim))


def symmetric_clone(rho, clear, field, swap, scale):
    """Gather form of ``scale * (B + S B + B S + S B S)``; see the loop version."""
    rho = np.ascontiguousarray(rho, dtype=np.complex128)
    clear = np.ascontiguousarray(clear, dtype=np.int64)
    field = np.ascontiguousarray(field, dtype=np.int64)
    swap = np.ascontiguousarray(swap, dtype=np.int64)
    if USE_NUMBA:
        return _symmetric_clone_numba(rho, clear, field, swap, float(scale))
    return _symmetric_clone_numpy(rho, clear, field, swap, float(scale))


def pauli_mutation(rho, p, nqubits):
    """Exact independent Pauli mutation channel on every qubit."""
    rho = np.ascontiguousarray(rho, dtype=np.complex128)
    if p == 0.0:
        return rho.copy()
    if USE_NUMBA:
        return _pauli_mutation_numba(rho, float(p), int(nqubits))
    return _pauli_mutation_numpy(rho, float(p), int(nqubits))


def cga_evolve(pop0, h, u0, crossover, mutation, p, q, sigma,
               mask_u, noise, hit_u, pauli_choice, nqubits):
    """Run a complex-vector GA for ``mask_u.shape[0]`` generations.

    Returns per-generation best energy, best fidelity and the final
    population.  All randomness comes from the pre-drawn arrays.
    """
    args = (
        np.ascontiguousarray(pop0, dtype=np.complex128),
        np.ascontiguousarray(h, dtype=np.complex128),
        np.ascontiguousarray(u0, dtype=np.complex128),
        int(crossover), int(mutation), float(p), float(q), float(sigma),
        np.ascontiguousarray(mask_u, dtype=np.float64),
        np.ascontiguousarray(noise, dtype=np.float64),
        np.ascontiguousarray(hit_u, dtype=np.float64),
        np.ascontiguousarray(pauli_choice, dtype=np.int64),
        int(nqubits),
    )
    if USE_NUMBA:
        return _cga_evolve_numba(*args)
    return _cga_evolve_numpy(*args)
