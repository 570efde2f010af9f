"""Experiment orchestration: seeding, run fan-out, aggregation and export."""

from __future__ import annotations

import csv
import io
import itertools
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from . import classical, qga
from .hamiltonians import DEFAULT_SPECTRUM, ProblemHamiltonian, make_h2, make_hc, sample_ensemble
from .records import RunRecord
from .stats import quantile, wilcoxon_signed_rank, win_rate_series
from .tensor import RegisterLayout, ValidationError, haar_random_pure_state

SCHEMA_VERSION = 1
REFERENCE_ALGORITHM = "QGAunm"
QGA_VARIANTS = {
    "QGAunm": ("uqcm", False),
    "QGAuwm": ("uqcm", True),
    "QGAbnm": ("bcqo", False),
    "QGAbwm": ("bcqo", True),
}
# fixed order; an algorithm's position is part of its seed key
ALGORITHMS = tuple(QGA_VARIANTS) + ("BGA",) + tuple(classical.CGA_VARIANTS)
NAMED_HAMILTONIANS = {"H_C": make_hc, "H_H2": make_h2}
CSV_COLUMNS = ("algorithm", "hamiltonian_id", "seed", "generation", "best_energy", "best_fidelity")

# spawn-key prefixes for the three independent random streams
_INIT, _EVOLVE, _ENSEMBLE = 0, 1, 2


def is_quantum(algorithm: str) -> bool:
    return algorithm in QGA_VARIANTS


@dataclass(frozen=True)
class ExperimentSpec:
    """Everything needed to reproduce an experiment exactly.

    ``hamiltonians`` is either ``("ensemble",)`` (with ``ensemble_size`` and
    ``spectrum``) or a tuple of names from ``NAMED_HAMILTONIANS``.
    """

    algorithms: tuple = ALGORITHMS
    hamiltonians: tuple = ("ensemble",)
    ensemble_size: int = 200
    spectrum: tuple = DEFAULT_SPECTRUM
    qga_seeds: int = 10
    classical_seeds: int = 100
    generations: int = 10
    p: float = 1 / 24
    q: float = 1 / 24
    sigma: float = 0.228
    p_m: float = 1 / 24
    n: int = 4
    c: int = 2
    uqcm_granularity: str = "register"
    cloning_basis: str = "computational"
    qga_readout: str = "sorted_top"
    classical_aggregate: str = "quantile"
    fidelity_quantile: float = 0.90
    energy_quantile: float = 0.10
    paired_win_rate: bool = False
    master_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "algorithms", tuple(self.algorithms))
        object.__setattr__(self, "hamiltonians", tuple(self.hamiltonians))
        object.__setattr__(self, "spectrum", tuple(float(x) for x in self.spectrum))
        unknown = [a for a in self.algorithms if a not in ALGORITHMS]
        if unknown or not self.algorithms:
            raise ValidationError(f"unknown algorithms {unknown}; choose from {ALGORITHMS}")
        if len(set(self.algorithms)) != len(self.algorithms):
            raise ValidationError("algorithms must be distinct")
        if self.hamiltonians != ("ensemble",):
            bad = [h for h in self.hamiltonians if h not in NAMED_HAMILTONIANS]
            if bad or not self.hamiltonians:
                raise ValidationError(f"unknown Hamiltonians {bad}; use 'ensemble' or {tuple(NAMED_HAMILTONIANS)}")
        for name in ("ensemble_size", "qga_seeds", "classical_seeds"):
            if getattr(self, name) < 1:
                raise ValidationError(f"{name} must be >= 1")
        if self.generations < 0:
            raise ValidationError("generations must be >= 0")
        if len(self.spectrum) != 2 ** self.c:
            raise ValidationError(f"spectrum needs {2 ** self.c} values for c = {self.c}, got {len(self.spectrum)}")
        if self.classical_aggregate not in ("quantile", "mean"):
            raise ValidationError("classical_aggregate must be 'quantile' or 'mean'")
        for name in ("fidelity_quantile", "energy_quantile"):
            if not 0.0 < getattr(self, name) < 1.0:
                raise ValidationError(f"{name} must lie in (0, 1)")
        if self.master_seed < 0:
            raise ValidationError("master_seed must be >= 0")
        # the component configs validate the rest
        self.qga_config("QGAunm")
        self.cga_config("CGAai")

    @property
    def layout(self) -> RegisterLayout:
        return RegisterLayout(self.n, self.c)

    def qga_config(self, algorithm: str) -> qga.QgaConfig:
        cloner, mutate = QGA_VARIANTS[algorithm]
        return qga.QgaConfig(cloner=cloner, mutation_enabled=mutate, p_m=self.p_m, generations=self.generations,
                             layout=self.layout, uqcm_granularity=self.uqcm_granularity,
                             cloning_basis=self.cloning_basis, readout=self.qga_readout)

    def cga_config(self, algorithm: str) -> classical.CgaConfig:
        return classical.CgaConfig.variant(algorithm, p=self.p, q=self.q, sigma=self.sigma,
                                           generations=self.generations, n=self.n, c=self.c)

    def seeds_for(self, algorithm: str) -> int:
        return self.qga_seeds if is_quantum(algorithm) else self.classical_seeds

    def to_dict(self) -> dict:
        d = asdict(self)
        d["algorithms"] = list(self.algorithms)
        d["hamiltonians"] = list(self.hamiltonians)
        d["spectrum"] = list(self.spectrum)
        return d


# --------------------------------------------------------------------------
# seeding
# --------------------------------------------------------------------------

def seed_sequence(master: int, *key: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(master, spawn_key=tuple(int(k) for k in key))


def build_hamiltonians(spec: ExperimentSpec) -> list[ProblemHamiltonian]:
    if spec.hamiltonians == ("ensemble",):
        seqs = [seed_sequence(spec.master_seed, _ENSEMBLE, i) for i in range(spec.ensemble_size)]
        return sample_ensemble(spec.ensemble_size, spec.spectrum, seqs)
    return [NAMED_HAMILTONIANS[name]() for name in spec.hamiltonians]


def run_keys(spec: ExperimentSpec, hams: Sequence[ProblemHamiltonian]) -> list[tuple]:
    """Every random-stream key the experiment consumes."""
    keys = []
    max_seeds = max(spec.seeds_for(a) for a in spec.algorithms)
    for hi in range(len(hams)):
        keys.extend((_INIT, hi, rep) for rep in range(max_seeds))
        for a in spec.algorithms:
            if not is_quantum(a):
                keys.extend((_EVOLVE, ALGORITHMS.index(a), hi, rep) for rep in range(spec.seeds_for(a)))
    if spec.hamiltonians == ("ensemble",):
        keys.extend((_ENSEMBLE, i) for i in range(len(hams)))
    return keys


def check_seed_collisions(spec: ExperimentSpec, hams: Sequence[ProblemHamiltonian]) -> None:
    """Raise if two random streams of the run set would start from the same state."""
    states = [tuple(seed_sequence(spec.master_seed, *k).generate_state(4, np.uint64)) for k in run_keys(spec, hams)]
    if len(set(states)) != len(states):
        raise ValidationError("seed fan-out produced colliding random streams")


def initial_vectors(spec: ExperimentSpec, ham_index: int, replicate: int) -> tuple[list[np.ndarray], np.random.Generator]:
    """Initial individuals for one replicate, shared by every algorithm."""
    rng = np.random.default_rng(seed_sequence(spec.master_seed, _INIT, ham_index, replicate))
    d = 2 ** spec.c
    return [haar_random_pure_state(d, rng) for _ in range(spec.n)], rng


def initial_bits(spec: ExperimentSpec, ham_index: int, replicate: int) -> list[classical.BitIndividual]:
    """Bit strings obtained by measuring the shared initial vectors in the computational basis."""
    vecs, rng = initial_vectors(spec, ham_index, replicate)
    out = []
    for v in vecs:
        probs = np.abs(v) ** 2
        k = int(rng.choice(len(v), p=probs / probs.sum()))
        out.append(classical.BitIndividual(format(k, f"0{spec.c}b")))
    return out


# --------------------------------------------------------------------------
# metrics
# --------------------------------------------------------------------------

def best_individual_metrics(state, h: ProblemHamiltonian) -> tuple[float, float]:
    """(energy, fidelity) of the best individual.

    Quantum populations report the lowest register energy and the highest
    register fidelity; classical ones the lowest-energy individual.
    """
    if isinstance(state, qga.QuantumPopulation):
        e, f = qga.register_metrics(state, h)
        return float(e.min()), float(f.max())
    pop = list(state)
    if not pop:
        raise ValidationError("empty population")
    if isinstance(pop[0], classical.BitIndividual):
        es = [classical.bit_energy(b, h) for b in pop]
        i = int(np.argmin(es))
        return es[i], classical.bit_fidelity(pop[i], h)
    es = [classical.vector_energy(v, h) for v in pop]
    i = int(np.argmin(es))
    return es[i], classical.vector_fidelity(pop[i], h)


# --------------------------------------------------------------------------
# running
# --------------------------------------------------------------------------

def applicable(algorithm: str, h: ProblemHamiltonian) -> bool:
    return algorithm != "BGA" or h.is_diagonal()


def _run_job(spec: ExperimentSpec, algorithm: str, ham_index: int, h: ProblemHamiltonian) -> list[RunRecord]:
    """All replicates of one (algorithm, Hamiltonian) cell."""
    hid = h.name
    seeds = range(spec.seeds_for(algorithm))
    if is_quantum(algorithm):
        initials = [initial_vectors(spec, ham_index, rep)[0] for rep in seeds]
        return qga.run_qga_batch(h, spec.qga_config(algorithm), initials, algorithm=algorithm,
                                 hamiltonian_id=hid, seeds=list(seeds), method="auto")
    code = ALGORITHMS.index(algorithm)
    records = []
    for rep in seeds:
        rng = np.random.default_rng(seed_sequence(spec.master_seed, _EVOLVE, code, ham_index, rep))
        if algorithm == "BGA":
            rec = classical.run_bga(h, spec.p, spec.generations, initial_bits(spec, ham_index, rep), rng,
                                    algorithm=algorithm, hamiltonian_id=hid, seed=rep)
        else:
            rec = classical.run_cga(h, spec.cga_config(algorithm), initial_vectors(spec, ham_index, rep)[0], rng,
                                    algorithm=algorithm, hamiltonian_id=hid, seed=rep)
        records.append(rec)
    return records


def run_experiment(spec: ExperimentSpec, workers: int = 1) -> tuple[list[RunRecord], "SummaryStats"]:
    """Run every applicable (algorithm, Hamiltonian, seed) triple and summarize.

    Records come back in a canonical order regardless of ``workers``.
    """
    hams = build_hamiltonians(spec)
    check_seed_collisions(spec, hams)
    jobs = [(a, i, h) for i, h in enumerate(hams) for a in spec.algorithms if applicable(a, h)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_job, spec, a, i, h) for a, i, h in jobs]
            results = [f.result() for f in futures]
    else:
        results = [_run_job(spec, a, i, h) for a, i, h in jobs]
    records = list(itertools.chain.from_iterable(results))
    order = {a: k for k, a in enumerate(spec.algorithms)}
    ham_order = {h.name: k for k, h in enumerate(hams)}
    records.sort(key=lambda r: (ham_order[r.hamiltonian_id], order[r.algorithm], r.seed))
    return records, summarize(spec, records, [h.name for h in hams])


# --------------------------------------------------------------------------
# aggregation
# --------------------------------------------------------------------------

@dataclass
class SummaryStats:
    cells: dict = field(default_factory=dict)
    algorithms: dict = field(default_factory=dict)
    series: dict = field(default_factory=dict)
    dominance: dict = field(default_factory=dict)
    wilcoxon: dict = field(default_factory=dict)
    win_rate: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"schema_version": SCHEMA_VERSION, "cells": self.cells, "algorithms": self.algorithms,
                "series": self.series, "dominance": self.dominance, "wilcoxon": self.wilcoxon,
                "win_rate": self.win_rate}


def _aggregate(spec: ExperimentSpec, algorithm: str, fid: np.ndarray, energy: np.ndarray) -> tuple[float, float]:
    """Cross-seed aggregate of one cell (arrays over seeds)."""
    if is_quantum(algorithm) or spec.classical_aggregate == "mean":
        return float(np.mean(fid)), float(np.mean(energy))
    return quantile(fid, spec.fidelity_quantile), quantile(energy, spec.energy_quantile)


def summarize(spec: ExperimentSpec, records: Sequence[RunRecord], ham_ids: Sequence[str]) -> SummaryStats:
    by_cell: dict = {}
    for r in records:
        by_cell.setdefault((r.algorithm, r.hamiltonian_id), []).append(r)
    stats = SummaryStats()
    per_alg: dict = {}
    for alg in spec.algorithms:
        fids, ens, f_series, e_series, hids = [], [], [], [], []
        for hid in ham_ids:
            recs = by_cell.get((alg, hid))
            if not recs:
                continue
            recs = sorted(recs, key=lambda r: r.seed)
            f = np.array([r.best_fidelity for r in recs])
            e = np.array([r.best_energy for r in recs])
            fa, ea = _aggregate(spec, alg, f[:, -1], e[:, -1])
            stats.cells[f"{alg}|{hid}"] = {
                "algorithm": alg, "hamiltonian_id": hid, "n_seeds": len(recs),
                "fidelity_mean": float(f[:, -1].mean()), "fidelity_std": float(f[:, -1].std()),
                "energy_mean": float(e[:, -1].mean()), "energy_std": float(e[:, -1].std()),
                "fidelity_aggregate": fa, "energy_aggregate": ea,
            }
            fids.append(fa)
            ens.append(ea)
            hids.append(hid)
            f_series.append([_aggregate(spec, alg, f[:, g], e[:, g])[0] for g in range(f.shape[1])])
            e_series.append([_aggregate(spec, alg, f[:, g], e[:, g])[1] for g in range(f.shape[1])])
        if not hids:
            continue
        per_alg[alg] = (hids, np.array(fids), np.array(ens))
        stats.algorithms[alg] = {
            "n_hamiltonians": len(hids),
            "fidelity_mean": float(np.mean(fids)), "fidelity_std": float(np.std(fids)),
            "energy_mean": float(np.mean(ens)), "energy_std": float(np.std(ens)),
        }
        stats.series[alg] = {"fidelity": np.mean(f_series, axis=0).tolist(),
                             "energy": np.mean(e_series, axis=0).tolist()}

    ref = per_alg.get(REFERENCE_ALGORITHM)
    for alg, (hids, fids, ens) in per_alg.items():
        if ref is None or alg == REFERENCE_ALGORITHM:
            continue
        idx = [ref[0].index(h) for h in hids]
        stats.dominance[alg] = {
            "energy": float(np.mean(ref[2][idx] < ens)),
            "fidelity": float(np.mean(ref[1][idx] > fids)),
        }

    for a, b in itertools.combinations(per_alg, 2):
        ha, hb = per_alg[a][0], per_alg[b][0]
        common = [h for h in ha if h in hb]
        fa = np.array([per_alg[a][1][ha.index(h)] for h in common])
        fb = np.array([per_alg[b][1][hb.index(h)] for h in common])
        try:
            stat, p = wilcoxon_signed_rank(fa, fb)
            stats.wilcoxon[f"{a}|{b}"] = {"n": len(common), "statistic": stat, "p_value": p}
        except ValueError as exc:
            stats.wilcoxon[f"{a}|{b}"] = {"n": len(common), "statistic": None, "p_value": None, "note": str(exc)}

    if ref is not None:
        for alg in per_alg:
            if alg == REFERENCE_ALGORITHM:
                continue
            common = [h for h in per_alg[alg][0] if h in ref[0]]
            qf = np.array([[r.best_fidelity for r in sorted(by_cell[(REFERENCE_ALGORITHM, h)], key=lambda r: r.seed)]
                           for h in common])
            cf = np.array([[r.best_fidelity for r in sorted(by_cell[(alg, h)], key=lambda r: r.seed)]
                           for h in common])
            stats.win_rate[alg] = win_rate_series(qf, cf, paired=spec.paired_win_rate).tolist()
    return stats


# --------------------------------------------------------------------------
# export
# --------------------------------------------------------------------------

def records_to_csv(records: Sequence[RunRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in records:
        for g in range(len(r.best_energy)):
            writer.writerow((r.algorithm, r.hamiltonian_id, r.seed, g,
                             repr(float(r.best_energy[g])), repr(float(r.best_fidelity[g]))))
    return buf.getvalue()


def read_records_csv(text: str) -> list[RunRecord]:
    rows = list(csv.DictReader(io.StringIO(text)))
    if rows and tuple(rows[0].keys()) != CSV_COLUMNS:
        raise ValidationError(f"unexpected CSV columns {tuple(rows[0].keys())}")
    grouped: dict = {}
    for row in rows:
        key = (row["algorithm"], row["hamiltonian_id"], int(row["seed"]))
        grouped.setdefault(key, []).append((int(row["generation"]), float(row["best_energy"]),
                                            float(row["best_fidelity"])))
    out = []
    for (alg, hid, seed), rows_ in grouped.items():
        rows_.sort()
        out.append(RunRecord(alg, hid, seed, [r[1] for r in rows_], [r[2] for r in rows_]))
    return out


def summary_to_json(stats: SummaryStats) -> str:
    return json.dumps(stats.to_dict(), indent=1, sort_keys=True) + "\n"
