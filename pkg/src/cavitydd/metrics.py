"""Figure observables: worst-case qubit fidelity and oscillator heating over
a grid of initial qubit states, plus the CSV emission used by the CLI.

The ideal sequence action is the identity, so the fidelity of initial state
|psi> at sample time t_k is F = <psi| rho_q(t_k) |psi> with rho_q the
oscillator-traced state.  Worst case over a finite grid approximates the true
extremum; the six cardinal states are always included and capture the exact
extremum for Pauli-axis-aligned error channels.
"""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass

import numpy as np

from .propagate import EvolutionTrace

_SQ2 = 1 / np.sqrt(2)
CARDINAL_STATES = (
    (1.0, 0.0),            # +z
    (0.0, 1.0),            # -z
    (_SQ2, _SQ2),          # +x
    (_SQ2, -_SQ2),         # -x
    (_SQ2, _SQ2 * 1j),     # +y
    (_SQ2, -_SQ2 * 1j),    # -y
)


@dataclass(frozen=True)
class BlochGrid:
    """Pure qubit states: the 6 cardinal states plus a quasi-uniform
    (Fibonacci) sphere sampling."""

    states: tuple

    @classmethod
    def build(cls, n_sphere: int = 50) -> "BlochGrid":
        pts = [np.array(v, dtype=complex) for v in CARDINAL_STATES]
        golden = np.pi * (3 - np.sqrt(5))
        for i in range(n_sphere):
            cos_th = 1 - 2 * (i + 0.5) / n_sphere
            th = np.arccos(cos_th)
            ph = golden * i
            pts.append(np.array([np.cos(th / 2),
                                 np.exp(1j * ph) * np.sin(th / 2)]))
        return cls(states=tuple(tuple(p) for p in pts))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.states, dtype=complex)

    def __len__(self) -> int:
        return len(self.states)


def default_grid() -> BlochGrid:
    return BlochGrid.build(50)


def _check(trace: EvolutionTrace, grid: BlochGrid) -> np.ndarray:
    if trace.rho_q is None or trace.rho_q.size == 0:
        raise ValueError("trace carries no reduced qubit states")
    qs = grid.as_array()
    if qs.shape != trace.initial_states.shape or \
            not np.allclose(qs, trace.initial_states, atol=1e-12):
        raise ValueError("grid does not match the trace's initial states")
    return qs


def fidelity_min(trace: EvolutionTrace, grid: BlochGrid) -> np.ndarray:
    """min over the grid of <psi| rho_q(t_k) |psi>, one value per sample."""
    qs = _check(trace, grid)
    f = np.einsum("si,ksij,sj->ks", qs.conj(), trace.rho_q, qs).real
    return f.min(axis=1)


def quanta_max(trace: EvolutionTrace, grid: BlochGrid) -> np.ndarray:
    """max over the grid of the oscillator occupation <b'b>(t_k)."""
    _check(trace, grid)
    if trace.n_exp is None or trace.n_exp.size == 0:
        raise ValueError("trace carries no oscillator occupations")
    return trace.n_exp.max(axis=1)


def leakage_max(trace: EvolutionTrace, grid: BlochGrid) -> np.ndarray:
    """max over the grid of the top-two-level population."""
    _check(trace, grid)
    return trace.leakage.max(axis=1)


CSV_HEADER = "period_index,time_over_taup,fidelity_min,n_mean_max,leakage_max"


def csv_lines(trace: EvolutionTrace, grid: BlochGrid, taup: float = 1.0):
    """CSV rows of the stroboscopic worst-case observables."""
    fmin = fidelity_min(trace, grid)
    nmax = quanta_max(trace, grid)
    lmax = leakage_max(trace, grid)
    lines = [CSV_HEADER]
    for k in range(len(trace.times)):
        lines.append(f"{k},{trace.times[k] / taup:.12g},{fmin[k]:.12g},"
                     f"{nmax[k]:.12g},{lmax[k]:.12g}")
    return lines


def write_csv(path: str, trace: EvolutionTrace, grid: BlochGrid,
              taup: float = 1.0) -> None:
    """Atomically write the trace CSV (temp file + rename)."""
    lines = csv_lines(trace, grid, taup)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write("\n".join(lines) + "\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
