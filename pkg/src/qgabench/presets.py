"""Named experiment presets.

The full-scale presets reproduce the published protocols; ``-desk``
variants shrink the ensemble or seed counts to laptop scale.
"""

from __future__ import annotations

from .classical import CGA_VARIANTS
from .harness import ALGORITHMS, REFERENCE_ALGORITHM
from .tensor import ValidationError

_WIN_RATE_ALGS = (REFERENCE_ALGORITHM,) + tuple(CGA_VARIANTS)
_COMMON = {"p": 1 / 24, "q": 1 / 24, "sigma": 0.228, "p_m": 1 / 24, "n": 4, "c": 2}

PRESETS = {
    "fig1-table1": dict(_COMMON, algorithms=ALGORITHMS, hamiltonians=("ensemble",), ensemble_size=200,
                        generations=10, qga_seeds=10, classical_seeds=100),
    "fig2": dict(_COMMON, algorithms=_WIN_RATE_ALGS, hamiltonians=("ensemble",), ensemble_size=200,
                 generations=10, qga_seeds=10, classical_seeds=100),
    "fig3-table2": dict(_COMMON, algorithms=ALGORITHMS, hamiltonians=("H_C", "H_H2"), generations=50,
                        qga_seeds=50, classical_seeds=50, classical_aggregate="mean"),
    "fig4": dict(_COMMON, algorithms=_WIN_RATE_ALGS + ("BGA",), hamiltonians=("H_C", "H_H2"), generations=50,
                 qga_seeds=50, classical_seeds=50, classical_aggregate="mean"),
}
PRESETS["fig1-table1-desk"] = dict(PRESETS["fig1-table1"], ensemble_size=20)
PRESETS["fig2-desk"] = dict(PRESETS["fig2"], ensemble_size=20)
PRESETS["fig3-table2-desk"] = dict(PRESETS["fig3-table2"], qga_seeds=10, classical_seeds=10)
PRESETS["fig4-desk"] = dict(PRESETS["fig4"], qga_seeds=10, classical_seeds=10)


def preset(name: str) -> dict:
    """Keyword arguments of :class:`ExperimentSpec` for a named preset."""
    try:
        return dict(PRESETS[name])
    except KeyError:
        raise ValidationError(f"unknown preset {name!r}; valid presets: {', '.join(sorted(PRESETS))}") from None
