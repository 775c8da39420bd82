"""Pulse sequences, the single-pulse operator expansion, and analytic
effective Hamiltonians for the named sequences.

Sequence strings are written in TIME ORDER (first token acts first).  The
named library entries are quoted in the literature as operator products
(rightmost factor acts first); the definitions below store them already
reversed into time order, e.g. the product X Ybar X Y executes as
Y, X, Ybar, X.

Two sign conventions are exposed for the expansion and the effective
Hamiltonians:

* ``convention="matched"`` (default): the form validated against the exact
  numerical propagator.  Relative to the printed equations this flips the
  sign of every s- and alpha-proportional term, and for the 4p sequence
  additionally the [A0, .] commutator term (see the order-check tests, which
  fit the truncation exponents).
* ``convention="printed"``: the equations verbatim.  Kept so the two variants
  can be compared against the propagator without silently altering either.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .algebra import (CouplingSet, ModelParams, IDENTITY_2, PAULI, anticomm,
                      comm, expm_herm, is_hermitian, kron, lowering)
from .shapes import PulseShape, ShapeParams

_CYCLIC = {"x": ("x", "y", "z"), "y": ("y", "z", "x"), "z": ("z", "x", "y")}
_CONVENTIONS = ("matched", "printed")


@dataclass(frozen=True)
class PulseSpec:
    """One pi pulse: axis in {x, y, z}, sign +1 or -1 (negative pulse has
    the field V -> -V)."""

    axis: str
    sign: int = 1

    def __post_init__(self):
        if self.axis not in ("x", "y", "z"):
            raise ValueError(f"bad axis {self.axis!r}")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")

    def label(self) -> str:
        return ("-" if self.sign < 0 else "") + self.axis.upper()


@dataclass(frozen=True)
class Delay:
    """Free evolution for ``duration`` multiples of tau_p."""

    duration: float

    def __post_init__(self):
        if not (self.duration >= 0 and np.isfinite(self.duration)):
            raise ValueError("delay duration must be a finite nonnegative number")


@dataclass(frozen=True)
class Sequence:
    """Time-ordered list of pulses and delays."""

    elements: tuple
    name: str | None = None

    @property
    def pulses(self) -> list[PulseSpec]:
        return [e for e in self.elements if isinstance(e, PulseSpec)]

    @property
    def pulse_count(self) -> int:
        return len(self.pulses)

    @property
    def delay_total(self) -> float:
        """Total free evolution in tau_p units."""
        return float(sum(e.duration for e in self.elements if isinstance(e, Delay)))

    def label(self) -> str:
        toks = [e.label() if isinstance(e, PulseSpec) else f"d({e.duration:g})"
                for e in self.elements]
        return " ".join(toks)


def _p(axis: str, sign: int = 1) -> PulseSpec:
    return PulseSpec(axis=axis, sign=sign)


# Named sequences in time order (products reversed): e.g. 8a is the product
# Ybar Xbar Y Xbar X Ybar X Y, so Y acts first.
BUILTIN_SEQUENCES = {
    "xbarx": (_p("x"), _p("x", -1)),
    "x4": (_p("x"), _p("x", -1), _p("x", -1), _p("x")),
    "4p": (_p("y"), _p("x"), _p("y", -1), _p("x")),
    "4pxz": (_p("z"), _p("x"), _p("z", -1), _p("x")),
    "8s": (_p("y"), _p("x"), _p("y", -1), _p("x"),
           _p("x"), _p("y", -1), _p("x"), _p("y")),
    "8a": (_p("y"), _p("x"), _p("y", -1), _p("x"),
           _p("x", -1), _p("y"), _p("x", -1), _p("y", -1)),
}
_ALIASES = {"4pxy": "4p"}

_TOKEN_PULSE = re.compile(r"^(-?)([xyzXYZ])$")
_TOKEN_DELAY = re.compile(r"^d\((.*)\)$")


def parse_sequence(text: str) -> Sequence:
    """Parse a sequence string.

    Built-in names (xbarx, x4, 4p, 4pxy, 4pxz, 8s, 8a) resolve to their
    library definitions.  Otherwise whitespace-separated tokens are read in
    time order: ``X``, ``Y``, ``Z`` with an optional leading ``-`` for a
    negative pulse, and ``d(<float>)`` for a delay in units of tau_p.
    """
    text = text.strip()
    if not text:
        raise ValueError("empty sequence")
    key = _ALIASES.get(text.lower(), text.lower())
    if key in BUILTIN_SEQUENCES:
        return Sequence(elements=BUILTIN_SEQUENCES[key], name=key)
    elements = []
    for tok in text.split():
        m = _TOKEN_PULSE.match(tok)
        if m:
            elements.append(_p(m.group(2).lower(), -1 if m.group(1) else 1))
            continue
        m = _TOKEN_DELAY.match(tok)
        if m:
            try:
                dur = float(m.group(1))
            except ValueError:
                raise ValueError(f"malformed delay token {tok!r}") from None
            elements.append(Delay(duration=dur))
            continue
        raise ValueError(f"unknown sequence token {tok!r}")
    return Sequence(elements=tuple(elements), name=None)


def control_unitary(seq: Sequence) -> np.ndarray:
    """Zeroth-order (control-only) propagator over one period, a 2x2 unitary.

    Every built-in sequence gives the identity up to global phase.
    """
    u = np.eye(2, dtype=complex)
    for e in seq.elements:
        if isinstance(e, PulseSpec):
            u = (-1j * e.sign * PAULI[e.axis]) @ u
    return u


# ---------------------------------------------------------------------------
# single-pulse expansion  X = X0 + taup X1 + taup^2 X2 + O((J taup)^3)
# ---------------------------------------------------------------------------

def expand_pulse(couplings: CouplingSet, params: ShapeParams, pulse: PulseSpec,
                 taup: float = 1.0, convention: str = "matched"):
    """Operator triple (X0, X1, X2) of the pulse propagator expansion.

    Matrices act on the joint qubit (x) rest space.  ``params`` must describe
    a symmetric pi shape.  A negative pulse is the positive one with
    s -> -s, alpha -> -alpha and an overall factor of -1 on all orders
    (property verified against direct propagation in the tests).
    """
    if convention not in _CONVENTIONS:
        raise ValueError(f"unknown convention {convention!r}")
    if abs(abs(params.area) - np.pi) > 1e-8:
        raise ValueError("expand_pulse requires inversion-pulse parameters "
                         f"(area = +-pi, got {params.area})")
    if pulse.sign < 0:
        flipped = ShapeParams(s=-params.s, alpha=-params.alpha,
                              zeta=params.zeta, area=-params.area)
        pos = expand_pulse(couplings, flipped, _p(pulse.axis), taup, convention)
        return tuple(-m for m in pos)

    s, alpha, zeta = params.s, params.alpha, params.zeta
    if convention == "matched":
        s, alpha = -s, -alpha
    mu, nu, rho = _CYCLIC[pulse.axis]
    amap = {"x": couplings.ax, "y": couplings.ay, "z": couplings.az}
    a0, am, an, ar = couplings.a0, amap[mu], amap[nu], amap[rho]
    d = couplings.dim
    idd = np.eye(d, dtype=complex)

    def on(axis_or_none, m):
        q = PAULI[axis_or_none] if axis_or_none else IDENTITY_2
        return kron(q, m)

    x0 = kron(-1j * PAULI[mu], idd)
    x1 = (-on(None, am) - on(mu, a0)
          + 1j * s * (on(nu, an) + on(rho, ar)))
    x2 = (0.5j * (on(None, anticomm(a0, am)) + on(mu, a0 @ a0 + am @ am))
          + zeta * (comm(on(None, a0), on(nu, ar) - on(rho, an))
                    + 1j * anticomm(on(None, am), on(nu, an) + on(rho, ar)))
          + (s / 2) * (anticomm(on(None, a0), on(nu, an) + on(rho, ar))
                       - 1j * comm(on(None, am), on(nu, ar) - on(rho, an)))
          + alpha * (on(None, an @ an + ar @ ar) + 1j * on(mu, comm(an, ar)))
          + (s ** 2 / 2) * (on(None, comm(ar, an)) + 1j * on(mu, an @ an + ar @ ar)))
    return x0, x1, x2


def expansion_sum(couplings: CouplingSet, params: ShapeParams, pulse: PulseSpec,
                  taup: float = 1.0, convention: str = "matched") -> np.ndarray:
    x0, x1, x2 = expand_pulse(couplings, params, pulse, taup, convention)
    return x0 + taup * x1 + taup ** 2 * x2


# ---------------------------------------------------------------------------
# analytic effective Hamiltonians for the named sequences
# ---------------------------------------------------------------------------

EFFECTIVE_SEQUENCES = ("xbarx", "x4", "4p", "8s", "8a")

_ANNOTATIONS = {
    "xbarx": "O(taup^2)",
    "x4": "O(taup^2)",
    "4p": "O(taup^2, s*taup)",
    "8s": "O(taup^2)",
    "8a": "O(taup^2)",
}


def effective_hamiltonian(seq: Sequence, couplings: CouplingSet,
                          params: ShapeParams, taup: float = 1.0,
                          convention: str = "matched"):
    """Analytic H_eff of a named sequence, with its remainder annotation.

    The stroboscopic propagator over one period T approximates
    exp(-i T H_eff) with the annotated remainder.  Returns (H, annotation).

    Raises
    ------
    ValueError
        For custom sequences (no analytic form; use the propagator), or a
        sequence containing delays.
    """
    if convention not in _CONVENTIONS:
        raise ValueError(f"unknown convention {convention!r}")
    if seq.name not in EFFECTIVE_SEQUENCES:
        raise ValueError(
            f"no analytic effective Hamiltonian for sequence {seq.name or seq.label()!r}")
    s, alpha, zeta = params.s, params.alpha, params.zeta
    comm_sign = 1.0
    if convention == "matched":
        s, alpha = -s, -alpha
        comm_sign = -1.0
    a0, ax, ay, az = couplings.a0, couplings.ax, couplings.ay, couplings.az
    d = couplings.dim

    def on(axis_or_none, m):
        q = PAULI[axis_or_none] if axis_or_none else IDENTITY_2
        return kron(q, m)

    name = seq.name
    if name == "xbarx":
        h = (on(None, a0) + on("x", ax)
             - s * (on("y", az) - on("z", ay)))
    elif name == "x4":
        h = (on(None, a0) + on("x", ax)
             - s * taup * anticomm(on(None, ax), on("y", ay) + on("z", az))
             + 1j * s * taup * comm(on(None, a0), on("y", az) - on("z", ay)))
    elif name == "4p":
        h = (on(None, a0) + (s / 2) * (on("x", az) - on("z", ay))
             + comm_sign * (-0.5j * taup) * comm(on(None, a0),
                                                 on("x", ax) - on("y", ay))
             - taup * (alpha / 2) * on("y", ax @ ax + az @ az)
             + taup * (0.5j * alpha) * on(None, comm(az, ay))
             - taup * ((1 + 4 * zeta) / 4) * on("z", anticomm(ax, ay)))
    elif name == "8s":
        blk = (0.25j * on(None, comm(az, ax + ay))
               + 0.5 * (on("x", ay @ ay) - on("y", ax @ ax))
               + 0.25 * on("y", anticomm(ax, ay))
               + 0.25 * on("z", anticomm(ay, az))
               + 0.5j * comm(on(None, a0),
                             on("y", az) + on("z", ax)
                             + 1.5 * on("z", ay) - 2.5 * on("x", az)))
        h = (on(None, a0) + s * taup * blk
             - (alpha * taup / 2) * (on("y", ax @ ax + az @ az)
                                     + 1j * on(None, comm(ay, az))))
    else:  # 8a
        h = on(None, a0) + (s / 2) * (on("x", az) - on("z", ay))

    if not is_hermitian(h):
        raise AssertionError("effective Hamiltonian lost hermiticity")
    return h, _ANNOTATIONS[name]


def period_taups(seq: Sequence, shape: PulseShape) -> float:
    """Sequence period in tau_p units (delta pulses have zero duration)."""
    per_pulse = 0.0 if shape.is_delta else 1.0
    return seq.pulse_count * per_pulse + seq.delay_total


# ---------------------------------------------------------------------------
# the cavity-model specializations as printed, for the comparison report
# ---------------------------------------------------------------------------

def jc_cavity_hamiltonian(name: str, model: ModelParams, params: ShapeParams,
                          taup: float = 1.0) -> np.ndarray:
    """Leading-order cavity-model effective Hamiltonians, verbatim forms.

    Names: "4p", "4p_s0" (the separate equation for first-order
    self-refocusing pulses), "4pxz", "8s", "8a".  Frequencies in ``model``
    are in 2*pi/tau_p units.
    """
    unit = 2 * np.pi / taup
    omr, om0, g = model.omega_r * unit, model.omega_0 * unit, model.g * unit
    dim = model.n_max + 1
    b = lowering(dim)
    bd = b.conj().T
    base = kron(IDENTITY_2, omr * (bd @ b))
    s, alpha, zeta = params.s, params.alpha, params.zeta
    if name == "4p":
        return (base + (s * om0 / 2) * kron(PAULI["x"], np.eye(dim))
                + (s * g / 4) * kron(PAULI["z"], 1j * (bd - b)))
    if name == "4p_s0":
        return (base - (taup * g * omr / 4) * kron(PAULI["x"], 1j * (bd - b))
                - ((1 + 4 * zeta) / 8) * taup * g ** 2
                * kron(PAULI["z"], 1j * (b @ b - bd @ bd)))
    if name == "4pxz":
        return (base + (s * g / 4) * kron(PAULI["x"], 1j * (bd - b))
                + (taup * g * omr / 4) * kron(PAULI["x"], 1j * (bd - b)))
    if name == "8s":
        return (base - (alpha * g ** 2 * taup / 8)
                * kron(PAULI["y"], (bd + b) @ (bd + b)))
    if name == "8a":
        return base + (s * g / 4) * kron(PAULI["z"], 1j * (bd - b))
    raise ValueError(f"no cavity-model form for {name!r}")


# ---------------------------------------------------------------------------
# refocusing-order check against the exact propagator
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OrderCheckResult:
    scales: tuple[float, ...]
    defects: tuple[float, ...]
    exponent: float
    floor_limited: bool
    reference: str


def order_check(seq: Sequence, couplings: CouplingSet, shape: PulseShape,
                scales, taup: float = 1.0, steps_per_pulse: int = 256,
                reference: str = "zero", params: ShapeParams | None = None,
                convention: str = "matched") -> OrderCheckResult:
    """Fit the scaling exponent of the one-period refocusing defect.

    For each scale factor lam the couplings are uniformly rescaled, one
    period is propagated exactly, and the defect

        delta(lam) = || U_num(lam) - exp(-i T H_ref(lam)) ||

    is recorded; the fitted slope of log delta vs log lam is returned.
    ``reference`` is "zero" (H_ref = 0, i.e. the identity target) or
    "effective" (the analytic effective Hamiltonian of a named sequence).
    Defects below 1e-12 are floor-limited and excluded from the fit.
    """
    from . import propagate  # deferred: propagate builds on this module
    from . import shapes as shapes_mod

    scales = tuple(float(x) for x in scales)
    if len(scales) < 2:
        raise ValueError("need at least two scale points")
    if max(scales) / min(scales) < 10 - 1e-9:
        raise ValueError("scale factors must span at least one decade")
    if reference not in ("zero", "effective"):
        raise ValueError("reference must be 'zero' or 'effective'")
    if reference == "effective" and params is None:
        params = shapes_mod.compute_params(shape)

    schedule = propagate.build_schedule(seq, shape)
    period = schedule.period
    dim = 2 * couplings.dim
    defects = []
    for lam in scales:
        scaled = couplings.scaled(lam)
        u = propagate.propagate_period(scaled, schedule,
                                       steps_per_pulse=steps_per_pulse)
        if reference == "zero":
            target = np.eye(dim, dtype=complex)
        else:
            h, _ = effective_hamiltonian(seq, scaled, params, taup, convention)
            target = expm_herm(h, period)
        defects.append(float(np.linalg.norm(u - target, 2)))

    floor = 1e-12
    pts = [(lam, d) for lam, d in zip(scales, defects) if d > floor]
    floor_limited = len(pts) < len(scales)
    if len(pts) < 2:
        return OrderCheckResult(scales, tuple(defects), float("nan"),
                                True, reference)
    lams = np.log([p[0] for p in pts])
    ds = np.log([p[1] for p in pts])
    exponent = float(np.polyfit(lams, ds, 1)[0])
    return OrderCheckResult(scales, tuple(defects), exponent,
                            floor_limited, reference)
