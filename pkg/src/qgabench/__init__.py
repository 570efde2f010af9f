"""Exact density-matrix simulation of quantum genetic algorithms, classical
GA baselines, and the benchmark statistics that compare them."""

from .kernels import BACKEND
from .hamiltonians import ProblemHamiltonian, make_h2, make_hc, sample_random_hamiltonian
from .qga import QgaConfig, QuantumPopulation, run_qga, run_qga_batch
from .classical import CgaConfig, run_bga, run_cga
from .records import RunRecord
from .harness import ExperimentSpec, SummaryStats, run_experiment
from .presets import PRESETS, preset
from .tensor import RegisterLayout, ValidationError

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "PRESETS", "CgaConfig", "ExperimentSpec", "ProblemHamiltonian", "QgaConfig", "QuantumPopulation",
    "RegisterLayout", "RunRecord", "SummaryStats", "ValidationError", "make_h2", "make_hc", "preset", "run_bga",
    "run_cga", "run_experiment", "run_qga", "run_qga_batch", "sample_random_hamiltonian",
]
