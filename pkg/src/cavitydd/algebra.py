"""Dense complex operator algebra on the joint qubit (x) oscillator space.

Tensor ordering is fixed throughout the package as qubit (x) rest: a joint
operator is ``np.kron(qubit_part, rest_part)``.  All frequencies passed in
``ModelParams`` are in units of 2*pi/tau_p and converted to absolute angular
frequencies by the Hamiltonian builders.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)
PAULI = {"x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z}

HERMITICITY_TOL = 1e-12


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.kron(a, b)


def comm(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Commutator [a, b]."""
    return a @ b - b @ a


def anticomm(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Anticommutator {a, b}."""
    return a @ b + b @ a


def op_norm(a: np.ndarray) -> float:
    """Spectral (2-) norm."""
    return float(np.linalg.norm(a, 2))


def is_hermitian(a: np.ndarray, tol: float = HERMITICITY_TOL) -> bool:
    return op_norm(a - a.conj().T) < tol * max(1.0, op_norm(a))


def expm_herm(h: np.ndarray, t: float = 1.0) -> np.ndarray:
    """Unitary exp(-i*h*t) for Hermitian h, via eigendecomposition.

    Raises
    ------
    ValueError
        If ``h`` is not Hermitian.
    """
    if not is_hermitian(h):
        raise ValueError("expm_herm requires a Hermitian matrix")
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def partial_trace_rest(rho: np.ndarray, dim_rest: int) -> np.ndarray:
    """Reduced qubit state: trace out the rest factor of a joint density matrix."""
    if rho.shape != (2 * dim_rest, 2 * dim_rest):
        raise ValueError("density matrix does not match dim_rest")
    r = rho.reshape(2, dim_rest, 2, dim_rest)
    return np.einsum("injn->ij", r)


def partial_trace_qubit(rho: np.ndarray, dim_rest: int) -> np.ndarray:
    """Reduced oscillator state: trace out the qubit factor."""
    if rho.shape != (2 * dim_rest, 2 * dim_rest):
        raise ValueError("density matrix does not match dim_rest")
    r = rho.reshape(2, dim_rest, 2, dim_rest)
    return np.einsum("inim->nm", r)


def lowering(dim: int) -> np.ndarray:
    """Oscillator annihilation operator b truncated to ``dim`` levels."""
    b = np.zeros((dim, dim), dtype=complex)
    for n in range(1, dim):
        b[n - 1, n] = np.sqrt(n)
    return b


def number_op(dim: int) -> np.ndarray:
    return np.diag(np.arange(dim, dtype=float)).astype(complex)


@dataclass(frozen=True)
class CouplingSet:
    """Operator quadruple (A0, Ax, Ay, Az) acting on the non-qubit factor.

    Each entry is a dense Hermitian matrix of the same dimension (dimension 1
    for a bare qubit).  The joint system Hamiltonian is assembled as
    sigma_x Ax + sigma_y Ay + sigma_z Az + A0.
    """

    a0: np.ndarray
    ax: np.ndarray
    ay: np.ndarray
    az: np.ndarray

    def __post_init__(self):
        dims = {m.shape for m in (self.a0, self.ax, self.ay, self.az)}
        if len(dims) != 1:
            raise ValueError(f"coupling operators have mismatched shapes: {dims}")
        d = self.a0.shape
        if len(d) != 2 or d[0] != d[1]:
            raise ValueError("coupling operators must be square matrices")
        for name, m in self.items():
            if not is_hermitian(m, tol=1e-10):
                raise ValueError(f"coupling operator {name} is not Hermitian")

    @property
    def dim(self) -> int:
        return self.a0.shape[0]

    def items(self):
        return [("A0", self.a0), ("Ax", self.ax), ("Ay", self.ay), ("Az", self.az)]

    def scaled(self, factor: float) -> "CouplingSet":
        """Uniformly rescaled couplings (used by order checks)."""
        return CouplingSet(factor * self.a0, factor * self.ax,
                           factor * self.ay, factor * self.az)

    def norm(self) -> float:
        """J = ||Hs||, spectral norm of the assembled Hamiltonian."""
        return op_norm(assemble(self))


@dataclass(frozen=True)
class ModelParams:
    """Jaynes-Cummings model parameters.

    omega_r, omega_0 and g are in units of 2*pi/tau_p (the paper-style figure
    labeling); ``n_max`` is the highest retained oscillator level, so the
    oscillator factor has dimension n_max + 1.
    """

    omega_r: float = 0.0
    omega_0: float = 0.0
    g: float = 0.0002
    n_max: int = 8
    delta_shift: float = 0.0

    def __post_init__(self):
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")
        for name in ("omega_r", "omega_0", "g", "delta_shift"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")


def jaynes_cummings(params: ModelParams, taup: float = 1.0) -> CouplingSet:
    """Coupling set for a qubit exchange-coupled to a single cavity mode.

    Builds A0 = omega_r b'b, Ax = -g (b + b')/2, Ay = i g (b' - b)/2,
    Az = (omega_0/2) 1, all truncated to n_max + 1 levels, with frequencies
    converted from 2*pi/tau_p units to absolute angular frequency.
    """
    unit = 2 * np.pi / taup
    dim = params.n_max + 1
    b = lowering(dim)
    bd = b.conj().T
    omr = params.omega_r * unit
    om0 = params.omega_0 * unit
    g = params.g * unit
    return CouplingSet(
        a0=omr * (bd @ b),
        ax=-g * (b + bd) / 2,
        ay=1j * g * (bd - b) / 2,
        az=(om0 / 2) * np.eye(dim, dtype=complex),
    )


def chemical_shift(delta: float) -> CouplingSet:
    """Scalar coupling set with Az = delta/2 (single-qubit NMR test model).

    ``delta`` is an absolute angular frequency; the non-qubit factor is
    one-dimensional.
    """
    one = np.eye(1, dtype=complex)
    zero = np.zeros((1, 1), dtype=complex)
    return CouplingSet(a0=zero, ax=zero, ay=zero, az=(delta / 2) * one)


def assemble(couplings: CouplingSet) -> np.ndarray:
    """Full system Hamiltonian sigma_x Ax + sigma_y Ay + sigma_z Az + A0."""
    d = couplings.dim
    return (kron(SIGMA_X, couplings.ax) + kron(SIGMA_Y, couplings.ay)
            + kron(SIGMA_Z, couplings.az) + kron(IDENTITY_2, couplings.a0))


def qubit_op(axis: str, dim_rest: int) -> np.ndarray:
    """sigma_axis (x) identity on the joint space."""
    return kron(PAULI[axis], np.eye(dim_rest, dtype=complex))


def dump_matrix(op: np.ndarray, digits: int = 6) -> str:
    """Plain-text rendering of a complex matrix (debugging aid)."""
    rows = []
    for row in np.atleast_2d(op):
        rows.append("  ".join(f"{z.real:+.{digits}e}{z.imag:+.{digits}e}j"
                              for z in row))
    return "\n".join(rows)
