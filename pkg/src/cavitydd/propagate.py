"""High-accuracy time-ordered propagation of H(t) = Hc(t) + Hs over pulse
sequences, with stroboscopic sampling at period boundaries.

The integrator is the 4th-order commutator-free Magnus scheme: per step of
size h, with H evaluated at the two Gauss-Legendre nodes t + (1/2 -+
sqrt(3)/6) h,

    U_step = exp(-i h (w2 H1 + w1 H2)) exp(-i h (w1 H1 + w2 H2)),
    w1 = 1/4 + sqrt(3)/6,  w2 = 1/4 - sqrt(3)/6,

each factor an exact Hermitian exponential.  The expansion parameters tested
elsewhere in this package never enter here: the propagator integrates the
lab-frame Hamiltonian directly, so it is an independent oracle for them.

Delta pulses are applied as exact -i sigma rotations between integration
segments; free-evolution delays are exact exponentials of Hs.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .algebra import (CouplingSet, PAULI, assemble, expm_herm, kron, op_norm)
from .errors import ConvergenceError
from .sequences import Delay, PulseSpec, Sequence
from .shapes import PulseShape, amplitude

# Gauss-Legendre nodes (offsets in units of the step) and the CF4 weights
_GL_NODE_1 = 0.5 - np.sqrt(3) / 6
_GL_NODE_2 = 0.5 + np.sqrt(3) / 6
_CF4_W1 = 0.25 + np.sqrt(3) / 6
_CF4_W2 = 0.25 - np.sqrt(3) / 6

MIN_STEPS_PER_PULSE = 16
SELF_CHECK_TOL = 1e-8
LEAK_THRESHOLD = 1e-6


@dataclass(frozen=True)
class PulseSegment:
    axis: str
    sign: int
    t0: float
    duration: float


@dataclass(frozen=True)
class DelaySegment:
    t0: float
    duration: float


@dataclass(frozen=True)
class ControlSchedule:
    """Piecewise control layout of one sequence period.

    Within each pulse only one axis is active; ``field`` evaluates the
    per-axis drive V_axis(t) (zero outside that axis's pulses).
    """

    shape: PulseShape
    segments: tuple
    period: float

    def field(self, axis: str, t: float) -> float:
        if axis not in PAULI:
            raise ValueError(f"bad axis {axis!r}")
        if self.shape.is_delta:
            raise ValueError("delta-pulse schedule has no pointwise field")
        for seg in self.segments:
            if (isinstance(seg, PulseSegment) and seg.axis == axis
                    and seg.t0 <= t <= seg.t0 + seg.duration):
                return seg.sign * amplitude(self.shape, t - seg.t0)
        return 0.0


def build_schedule(seq: Sequence, shape: PulseShape) -> ControlSchedule:
    """Assemble the control schedule of one period from a sequence and shape.

    Pulses are contiguous (duration tau_p each, zero for delta pulses);
    delays are in units of tau_p.
    """
    t = 0.0
    segments = []
    pulse_len = 0.0 if shape.is_delta else shape.taup
    for e in seq.elements:
        if isinstance(e, PulseSpec):
            segments.append(PulseSegment(axis=e.axis, sign=e.sign, t0=t,
                                         duration=pulse_len))
            t += pulse_len
        elif isinstance(e, Delay):
            segments.append(DelaySegment(t0=t, duration=e.duration * shape.taup))
            t += e.duration * shape.taup
        else:
            raise ValueError(f"unknown sequence element {e!r}")
    return ControlSchedule(shape=shape, segments=tuple(segments), period=t)


def _pulse_unitary(hs: np.ndarray, k_op: np.ndarray, shape: PulseShape,
                   sign: int, steps: int) -> np.ndarray:
    h = shape.taup / steps
    u = np.eye(hs.shape[0], dtype=complex)
    for k in range(steps):
        t0 = k * h
        v1 = sign * amplitude(shape, t0 + _GL_NODE_1 * h)
        v2 = sign * amplitude(shape, t0 + _GL_NODE_2 * h)
        ha = hs + v1 * k_op
        hb = hs + v2 * k_op
        u = expm_herm(_CF4_W2 * ha + _CF4_W1 * hb, h) \
            @ expm_herm(_CF4_W1 * ha + _CF4_W2 * hb, h) @ u
    return u


def _period_unitary(couplings: CouplingSet, schedule: ControlSchedule,
                    steps: int) -> np.ndarray:
    hs = assemble(couplings)
    d = couplings.dim
    dim = 2 * d
    u = np.eye(dim, dtype=complex)
    cache: dict = {}
    for seg in schedule.segments:
        if isinstance(seg, DelaySegment):
            key = ("delay", seg.duration)
            if key not in cache:
                cache[key] = expm_herm(hs, seg.duration)
            u = cache[key] @ u
            continue
        key = (seg.axis, seg.sign)
        if key not in cache:
            if schedule.shape.is_delta:
                cache[key] = kron(-1j * seg.sign * PAULI[seg.axis],
                                  np.eye(d, dtype=complex))
            else:
                k_op = kron(PAULI[seg.axis] / 2, np.eye(d, dtype=complex))
                cache[key] = _pulse_unitary(hs, k_op, schedule.shape,
                                            seg.sign, steps)
        u = cache[key] @ u
    return u


def propagate_period(couplings: CouplingSet, schedule: ControlSchedule,
                     steps_per_pulse: int = 256,
                     self_check: bool = True) -> np.ndarray:
    """One-period propagator U(T).

    With ``self_check`` the integration is repeated at half the step count
    and the two answers must agree to SELF_CHECK_TOL (Richardson check);
    otherwise a ConvergenceError asks for more steps.  Delta-pulse schedules
    are exact and skip the check.
    """
    if steps_per_pulse < MIN_STEPS_PER_PULSE:
        raise ValueError(f"steps_per_pulse must be >= {MIN_STEPS_PER_PULSE}")
    u = _period_unitary(couplings, schedule, steps_per_pulse)
    if self_check and not schedule.shape.is_delta:
        if steps_per_pulse // 2 < MIN_STEPS_PER_PULSE:
            raise ValueError("self_check needs steps_per_pulse >= "
                             f"{2 * MIN_STEPS_PER_PULSE}")
        u_half = _period_unitary(couplings, schedule, steps_per_pulse // 2)
        diff = op_norm(u - u_half)
        if diff > SELF_CHECK_TOL:
            raise ConvergenceError(
                f"step-halving check failed: |U - U_half| = {diff:.3e} > "
                f"{SELF_CHECK_TOL:g}; increase steps_per_pulse")
    return u


def step_halving_difference(couplings: CouplingSet, schedule: ControlSchedule,
                            steps_per_pulse: int = 256) -> float:
    """|U(steps) - U(steps/2)|, the Richardson self-consistency measure."""
    u = _period_unitary(couplings, schedule, steps_per_pulse)
    u_half = _period_unitary(couplings, schedule, steps_per_pulse // 2)
    return op_norm(u - u_half)


@dataclass
class EvolutionTrace:
    """Stroboscopic record over n periods.

    times[k] = k * period; propagators[k] = U(times[k]); rho_q[k, i] is the
    reduced qubit state of initial state i at sample k; n_exp and leakage
    hold the oscillator occupation and top-two-level population.
    """

    times: np.ndarray
    period: float
    propagators: list
    initial_states: np.ndarray
    rho_q: np.ndarray
    n_exp: np.ndarray
    leakage: np.ndarray
    halving_diff: float
    unitarity_drift: float

    @property
    def n_periods(self) -> int:
        return len(self.times) - 1


def run_trace(couplings: CouplingSet, schedule: ControlSchedule,
              n_periods: int, initial_states, oscillator_level: int = 0,
              steps_per_pulse: int = 256, self_check: bool = True,
              leak_threshold: float = LEAK_THRESHOLD) -> EvolutionTrace:
    """Propagate initial product states |psi_q> (x) |k_osc> stroboscopically.

    The one-period propagator is computed once and reused (the schedule is
    periodic, so U(nT) = [U(T)]^n).  Emits a warning when the top two
    oscillator levels accumulate more than ``leak_threshold`` population.
    """
    if n_periods < 0:
        raise ValueError("n_periods must be >= 0")
    d = couplings.dim
    if not (0 <= oscillator_level < d):
        raise ValueError("oscillator_level outside the truncated space")
    qs = np.asarray(initial_states, dtype=complex)
    if qs.ndim != 2 or qs.shape[1] != 2:
        raise ValueError("initial_states must be a list of qubit 2-vectors")
    norms = np.linalg.norm(qs, axis=1)
    if np.any(np.abs(norms - 1) > 1e-10):
        raise ValueError("initial qubit states must be normalized")

    if schedule.shape.is_delta:
        halving = 0.0
        u = propagate_period(couplings, schedule, steps_per_pulse,
                             self_check=False)
    else:
        u = _period_unitary(couplings, schedule, steps_per_pulse)
        halving = 0.0
        if self_check:
            u_half = _period_unitary(couplings, schedule, steps_per_pulse // 2)
            halving = op_norm(u - u_half)
            if halving > SELF_CHECK_TOL:
                raise ConvergenceError(
                    f"step-halving check failed: {halving:.3e}; "
                    "increase steps_per_pulse")

    ns = qs.shape[0]
    dim = 2 * d
    osc0 = np.zeros(d, dtype=complex)
    osc0[oscillator_level] = 1.0
    psi = np.einsum("si,n->sin", qs, osc0).reshape(ns, dim)

    times = np.arange(n_periods + 1) * schedule.period
    propagators = [np.eye(dim, dtype=complex)]
    rho_q = np.empty((n_periods + 1, ns, 2, 2), dtype=complex)
    n_exp = np.empty((n_periods + 1, ns))
    leak = np.empty((n_periods + 1, ns))
    nvec = np.arange(d, dtype=float)

    def record(k, states):
        m = states.reshape(ns, 2, d)
        rho_q[k] = np.einsum("sin,sjn->sij", m, m.conj())
        w = np.abs(m) ** 2
        n_exp[k] = np.einsum("sin,n->s", w, nvec)
        leak[k] = w[:, :, max(0, d - 2):].sum(axis=(1, 2))

    record(0, psi)
    cur = psi
    u_power = np.eye(dim, dtype=complex)
    for k in range(1, n_periods + 1):
        cur = cur @ u.T
        u_power = u @ u_power
        propagators.append(u_power)
        record(k, cur)

    drift = op_norm(u_power @ u_power.conj().T - np.eye(dim))
    max_leak = float(leak.max()) if leak.size else 0.0
    if max_leak > leak_threshold:
        warnings.warn(
            f"oscillator truncation leakage {max_leak:.2e} exceeds "
            f"{leak_threshold:g}; rerun with n_max >= {d + 3}",
            RuntimeWarning, stacklevel=2)

    return EvolutionTrace(times=times, period=schedule.period,
                          propagators=propagators, initial_states=qs,
                          rho_q=rho_q, n_exp=n_exp, leakage=leak,
                          halving_diff=halving, unitarity_drift=drift)
