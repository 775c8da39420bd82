"""Symmetric pi-pulse envelopes and their second-order shape parameters.

A pulse shape is the field V(t) on [0, tau_p] driving one qubit axis,
normalized so the rotation area phi(tau_p) = integral of V equals pi.  A
symmetric inversion shape is characterized to second order by three
dimensionless parameters

    s     = <sin phi(t)>              (single average over the pulse)
    alpha = <theta(t-t') sin[phi(t) - phi(t')]>   (ordered two-time average)
    zeta  = <theta(t-t') cos phi(t')>

computed here by composite-Simpson quadrature, with the ordered double
integrals reduced to cumulative single integrals via
sin[phi(t)-phi(t')] = sin phi(t) cos phi(t') - cos phi(t) sin phi(t').

The hard (delta) pulse is represented symbolically: its parameters are exact
(s = 0, alpha = 0, zeta = 1/4) and its propagator contribution is the exact
rotation, so it never enters a quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConvergenceError

# Width-independent value making the quadratic-envelope ("Hermitian") pulse
# first-order self-refocusing, s(gamma) = 0; re-derivable per width with
# solve_hermitian_gamma.
HERMITIAN_GAMMA = 0.9609317217

DEFAULT_N_QUAD = 4096
PARAM_CONVERGENCE_TOL = 1e-9

# Published reference parameters (s, alpha/2, zeta) for the classic shapes and
# the designed first/second-order self-refocusing families; the designed-shape
# rows depend on coefficient sets not reproduced here, so they are compared
# loosely (see designer.ZETA_FLAG_THRESHOLD).
REFERENCE_PARAMS = {
    "delta": (0.0, 0.0, 0.25),
    "G05": (0.0744895, 0.0349708, 0.249476),
    "G10": (0.148979, 0.0653938, 0.247905),
    "H05": (0.0, 0.00153849, 0.249647),
    "H10": (0.0, 0.00615393, 0.248589),
    "S1": (0.0, 0.0332661, 0.238227),
    "S2": (0.0, 0.0250328, 0.241377),
    "Q1": (0.0, 0.0, 0.239889),
    "Q2": (0.0, 0.0, 0.242205),
}


@dataclass(frozen=True)
class PulseShape:
    """A symmetric inversion-pulse envelope on [0, tau_p].

    kind is one of "delta", "gaussian", "hermitian", "fourier".  Gaussian and
    hermitian shapes carry width_ratio = tau/tau_p (the envelope is truncated
    to [0, tau_p] and rescaled to exact pi area); fourier shapes carry cosine
    coefficients in units of 2*pi/tau_p, V(t) = A0 + sum_m A_m cos(m Omega_p
    (t - tau_p/2)) with Omega_p = 2*pi/tau_p.
    """

    kind: str
    width_ratio: float | None = None
    gamma: float | None = None
    coeffs: tuple[float, ...] | None = None
    taup: float = 1.0

    def __post_init__(self):
        if self.kind not in ("delta", "gaussian", "hermitian", "fourier"):
            raise ValueError(f"unknown shape kind {self.kind!r}")
        if self.taup <= 0:
            raise ValueError("taup must be positive")
        if self.kind in ("gaussian", "hermitian"):
            if self.width_ratio is None or not (0 < self.width_ratio < 1):
                raise ValueError("width_ratio must be in (0, 1)")
        if self.kind == "fourier":
            if not self.coeffs or abs(self.coeffs[0]) < 1e-15:
                raise ValueError("fourier shape needs coefficients with A0 != 0")

    @property
    def is_delta(self) -> bool:
        return self.kind == "delta"


def delta(taup: float = 1.0) -> PulseShape:
    """Hard pi pulse (zero duration, symbolic)."""
    return PulseShape(kind="delta", taup=taup)


def gaussian(width_ratio: float, taup: float = 1.0) -> PulseShape:
    """Gaussian envelope of width tau = width_ratio * tau_p."""
    return PulseShape(kind="gaussian", width_ratio=width_ratio, taup=taup)


def hermitian(width_ratio: float, gamma: float = HERMITIAN_GAMMA,
              taup: float = 1.0) -> PulseShape:
    """Gaussian times (1 - gamma t^2/tau^2)/(1 - gamma/2) around the center."""
    return PulseShape(kind="hermitian", width_ratio=width_ratio, gamma=gamma,
                      taup=taup)


def fourier(coeffs, taup: float = 1.0) -> PulseShape:
    """Cosine-series shape; coefficients in units of 2*pi/tau_p.

    The coefficient vector is rescaled uniformly so the area is exactly pi
    (i.e. A0 -> 1/2 in these units), preserving endpoint zeros.
    """
    c = np.asarray(coeffs, dtype=float)
    if c.size == 0 or abs(c[0]) < 1e-15:
        raise ValueError("fourier shape needs coefficients with A0 != 0")
    c = c * (0.5 / c[0])
    return PulseShape(kind="fourier", coeffs=tuple(c.tolist()), taup=taup)


# built-in soft shapes from the reference table
def named_builtin(name: str) -> PulseShape:
    table = {
        "delta": lambda: delta(),
        "G05": lambda: gaussian(0.05),
        "G10": lambda: gaussian(0.10),
        "H05": lambda: hermitian(0.05),
        "H10": lambda: hermitian(0.10),
    }
    if name not in table:
        raise ValueError(f"unknown built-in shape {name!r}")
    return table[name]()


def _raw_envelope(shape: PulseShape, t: np.ndarray) -> np.ndarray:
    """Unnormalized envelope sampled at t."""
    tau = shape.width_ratio * shape.taup if shape.width_ratio else None
    x = t - shape.taup / 2
    if shape.kind == "gaussian":
        return (np.sqrt(np.pi) / tau) * np.exp(-(x / tau) ** 2)
    if shape.kind == "hermitian":
        g = (np.sqrt(np.pi) / tau) * np.exp(-(x / tau) ** 2)
        return g * (1 - shape.gamma * (x / tau) ** 2) / (1 - shape.gamma / 2)
    if shape.kind == "fourier":
        omp = 2 * np.pi / shape.taup
        out = np.full_like(np.asarray(x, dtype=float), 2 * np.pi / shape.taup * shape.coeffs[0])
        for m in range(1, len(shape.coeffs)):
            out = out + (2 * np.pi / shape.taup) * shape.coeffs[m] * np.cos(m * omp * x)
        return out
    raise ValueError("delta shape has no pointwise envelope")


def _simpson(y: np.ndarray, h: float) -> float:
    n = len(y) - 1
    if n % 2:
        raise ValueError("simpson needs an even number of panels")
    return h / 3 * (y[0] + y[-1] + 4 * y[1:-1:2].sum() + 2 * y[2:-1:2].sum())


def _cumulative_simpson(y: np.ndarray, h: float) -> np.ndarray:
    """Cumulative integral on a uniform grid via local cubics (O(h^4) global).

    Each panel [x_i, x_{i+1}] integrates the cubic through the four
    surrounding nodes; the end panels use one-sided stencils.
    """
    n = len(y)
    if n < 4:
        raise ValueError("need at least 4 samples")
    inc = np.empty(n - 1)
    inc[0] = h * (9 * y[0] + 19 * y[1] - 5 * y[2] + y[3]) / 24.0
    inc[1:-1] = h * (-y[:-3] + 13 * y[1:-2] + 13 * y[2:-1] - y[3:]) / 24.0
    inc[-1] = h * (y[-4] - 5 * y[-3] + 19 * y[-2] + 9 * y[-1]) / 24.0
    out = np.zeros(n)
    out[1:] = np.cumsum(inc)
    return out


@lru_cache(maxsize=256)
def _norm_scale(shape: PulseShape) -> float:
    """Factor rescaling the truncated envelope to exact pi area."""
    if shape.kind == "fourier":
        # cosine terms integrate to zero over full periods: area = A0 * taup
        return 0.5 / shape.coeffs[0]
    n = 1 << 14
    t = np.linspace(0.0, shape.taup, n + 1)
    area = _simpson(_raw_envelope(shape, t), shape.taup / n)
    return np.pi / area


@lru_cache(maxsize=256)
def _sampled(shape: PulseShape, n_quad: int):
    """Normalized envelope and cumulative integrals on n_quad+1 uniform nodes."""
    h = shape.taup / n_quad
    t = np.linspace(0.0, shape.taup, n_quad + 1)
    v = _norm_scale(shape) * _raw_envelope(shape, t)
    phi = _cumulative_simpson(v, h)
    return t, v, phi


def amplitude(shape: PulseShape, t):
    """Field value V(t), 0 <= t <= tau_p.

    The delta variant rejects pointwise evaluation (it is symbolic).
    """
    if shape.is_delta:
        raise ValueError("delta pulse has no pointwise amplitude")
    ta = np.asarray(t, dtype=float)
    if np.any(ta < 0) or np.any(ta > shape.taup):
        raise ValueError("t outside [0, taup]")
    out = _norm_scale(shape) * _raw_envelope(shape, ta)
    return float(out) if np.isscalar(t) else out


def phase_integral(shape: PulseShape, t: float) -> float:
    """Accumulated rotation angle phi(t) = int_0^t V; phi(tau_p) = pi."""
    if t < 0 or t > shape.taup:
        raise ValueError("t outside [0, taup]")
    if shape.is_delta:
        if t < shape.taup / 2:
            return 0.0
        if t > shape.taup / 2:
            return np.pi
        return np.pi / 2
    if t == 0:
        return 0.0
    n = max(64, 2 * int(np.ceil(DEFAULT_N_QUAD * t / shape.taup / 2)))
    grid = np.linspace(0.0, t, n + 1)
    v = _norm_scale(shape) * _raw_envelope(shape, grid)
    return float(_simpson(v, t / n))


@dataclass(frozen=True)
class ShapeParams:
    """Second-order characterization of an inversion shape."""

    s: float
    alpha: float
    zeta: float
    area: float


def _params_at(shape: PulseShape, n_quad: int, negate: bool) -> ShapeParams:
    t, v, phi = _sampled(shape, n_quad)
    if negate:
        phi = -phi
    h = shape.taup / n_quad
    sin_phi = np.sin(phi)
    cos_phi = np.cos(phi)
    s = _simpson(sin_phi, h) / shape.taup
    c_cum = _cumulative_simpson(cos_phi, h)
    s_cum = _cumulative_simpson(sin_phi, h)
    alpha = _simpson(sin_phi * c_cum - cos_phi * s_cum, h) / shape.taup ** 2
    zeta = _simpson(c_cum, h) / shape.taup ** 2
    return ShapeParams(s=s, alpha=alpha, zeta=zeta, area=float(phi[-1]))


def compute_params(shape: PulseShape, n_quad: int = DEFAULT_N_QUAD,
                   negate: bool = False) -> ShapeParams:
    """Shape parameters (s, alpha, zeta) by quadrature.

    Evaluates at n_quad and 2*n_quad panels and requires the two answers to
    agree to PARAM_CONVERGENCE_TOL; the converged (finer) values are
    returned.  ``negate=True`` computes the parameters of the sign-flipped
    pulse V -> -V (s and alpha change sign, zeta is even in V).

    Raises
    ------
    ConvergenceError
        If doubling the node count moves any parameter by >= 1e-9.
    """
    if n_quad < 64:
        raise ValueError("n_quad must be >= 64")
    if shape.is_delta:
        area = -np.pi if negate else np.pi
        return ShapeParams(s=0.0, alpha=0.0, zeta=0.25, area=area)
    coarse = _params_at(shape, n_quad, negate)
    fine = _params_at(shape, 2 * n_quad, negate)
    resid = {
        "s": abs(fine.s - coarse.s),
        "alpha": abs(fine.alpha - coarse.alpha),
        "zeta": abs(fine.zeta - coarse.zeta),
    }
    if max(resid.values()) >= PARAM_CONVERGENCE_TOL:
        raise ConvergenceError(
            f"quadrature not converged at n_quad={n_quad}: residuals {resid}; "
            "increase n_quad")
    return fine


def cosine_average(shape: PulseShape, n_quad: int = DEFAULT_N_QUAD) -> float:
    """<cos phi(t)> over the pulse; vanishes for symmetric pi shapes."""
    if shape.is_delta:
        return 0.0
    t, v, phi = _sampled(shape, n_quad)
    return _simpson(np.cos(phi), shape.taup / n_quad) / shape.taup


def solve_hermitian_gamma(width_ratio: float, taup: float = 1.0,
                          bracket: tuple[float, float] = (0.5, 1.3),
                          tol: float = 1e-11, n_quad: int = 8192) -> float:
    """Root of s(gamma) = 0 for the quadratic-envelope family at this width.

    Plain bisection on the bracket; s(gamma) is smooth and monotone there.
    """
    def s_of(gam: float) -> float:
        shp = hermitian(width_ratio, gamma=gam, taup=taup)
        return _params_at(shp, n_quad, negate=False).s

    lo, hi = bracket
    f_lo, f_hi = s_of(lo), s_of(hi)
    if f_lo * f_hi > 0:
        raise ConvergenceError(
            f"s(gamma) does not change sign on {bracket}: {f_lo:g}, {f_hi:g}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        f_mid = s_of(mid)
        if f_lo * f_mid <= 0:
            hi, f_hi = mid, f_mid
        else:
            lo, f_lo = mid, f_mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# plain-text serialization:  kind=gaussian width=0.10
# ---------------------------------------------------------------------------

def shape_to_text(shape: PulseShape) -> str:
    if shape.kind == "delta":
        return "kind=delta"
    if shape.kind == "gaussian":
        return f"kind=gaussian width={shape.width_ratio:.12g}"
    if shape.kind == "hermitian":
        return (f"kind=hermitian width={shape.width_ratio:.12g} "
                f"gamma={shape.gamma:.12g}")
    coeffs = ",".join(f"{c:.12g}" for c in shape.coeffs)
    return f"kind=fourier coeffs={coeffs}"


def shape_from_text(text: str, taup: float = 1.0) -> PulseShape:
    """Parse the ``kind=... key=value`` serialization."""
    fields = {}
    for tok in text.split():
        if "=" not in tok:
            raise ValueError(f"malformed shape token {tok!r}")
        k, v = tok.split("=", 1)
        fields[k] = v
    kind = fields.get("kind")
    if kind == "delta":
        return delta(taup)
    if kind == "gaussian":
        return gaussian(float(fields["width"]), taup)
    if kind == "hermitian":
        return hermitian(float(fields["width"]),
                         float(fields.get("gamma", HERMITIAN_GAMMA)), taup)
    if kind == "fourier":
        coeffs = [float(c) for c in fields["coeffs"].split(",")]
        return fourier(coeffs, taup)
    raise ValueError(f"unknown shape kind {kind!r}")


# ---------------------------------------------------------------------------
# parameter table for the built-in and designed shapes
# ---------------------------------------------------------------------------

def table_rows(n_quad: int = DEFAULT_N_QUAD):
    """(name, s, alpha/2, zeta) for delta, G/H widths 0.05/0.10, S1/S2/Q1/Q2."""
    from . import designer  # lazy: designer depends on this module

    rows = []
    for name in ("delta", "G05", "G10", "H05", "H10"):
        p = compute_params(named_builtin(name), n_quad)
        rows.append((name, p.s, p.alpha / 2, p.zeta))
    for name in ("S1", "S2", "Q1", "Q2"):
        result = designer.design_named(name)
        p = compute_params(result.shape, n_quad)
        rows.append((name, p.s, p.alpha / 2, p.zeta))
    return rows


def table_report(n_quad: int = DEFAULT_N_QUAD) -> str:
    """Formatted parameter table with reference values and deviation flags."""
    lines = [f"{'pulse':>6s} {'s':>12s} {'alpha/2':>12s} {'zeta':>10s}"
             f"   {'ref zeta':>10s}  note"]
    for name, s, ah, z in table_rows(n_quad):
        ref = REFERENCE_PARAMS[name]
        note = ""
        if name in ("S1", "S2", "Q1", "Q2"):
            dz = abs(z - ref[2])
            note = f"designed; |dzeta|={dz:.4f}" + (" FLAG" if dz > 0.01 else "")
        lines.append(f"{name:>6s} {s:>12.7f} {ah:>12.7f} {z:>10.6f}"
                     f"   {ref[2]:>10.6f}  {note}")
    return "\n".join(lines)
