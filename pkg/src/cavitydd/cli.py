"""Command-line front end: parameter tables, shape design, simulation runs,
effective-Hamiltonian reports and refocusing-order checks.

All frequencies (omega_r, omega_0, g) are given in units of 2*pi/tau_p; the
builders convert to absolute angular frequency internally.  Config files are
flat ``key = value`` text (# starts a comment); command-line flags override
file values.  Exit codes: 0 success, 2 validation error, 3 numerical
convergence failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, fields, replace

import numpy as np

from . import designer, metrics, propagate, sequences, shapes
from .algebra import ModelParams, jaynes_cummings
from .errors import ConvergenceError

_NAMED_DESIGNED = ("S1", "S2", "Q1", "Q2")
_NAMED_BUILTIN = ("delta", "G05", "G10", "H05", "H10")


def resolve_shape(spec: str, taup: float = 1.0) -> shapes.PulseShape:
    """Shape from a name (G10, H05, Q1, ...), a colon spec
    (gaussian:0.10, hermitian:0.05[:gamma], fourier:c0,c1,...), or the
    ``kind=...`` serialization."""
    text = spec.strip()
    if text.startswith("kind="):
        return shapes.shape_from_text(text, taup)
    lowered = text.lower()
    for name in _NAMED_BUILTIN:
        if lowered == name.lower():
            built = shapes.named_builtin(name)
            return built if taup == built.taup else \
                shapes.shape_from_text(shapes.shape_to_text(built), taup)
    for name in _NAMED_DESIGNED:
        if lowered == name.lower():
            # designed coefficients are dimensionless (2*pi/taup units)
            result = designer.design_named(name)
            return shapes.fourier(result.coeffs, taup=taup)
    if ":" in text:
        kind, _, rest = text.partition(":")
        kind = kind.lower()
        if kind == "gaussian":
            return shapes.gaussian(float(rest), taup)
        if kind == "hermitian":
            parts = rest.split(":")
            gamma = float(parts[1]) if len(parts) > 1 else shapes.HERMITIAN_GAMMA
            return shapes.hermitian(float(parts[0]), gamma, taup)
        if kind == "fourier":
            return shapes.fourier([float(c) for c in rest.split(",")], taup)
        raise ValueError(f"unknown shape spec {spec!r}")
    if lowered == "delta":
        return shapes.delta(taup)
    raise ValueError(f"unknown shape spec {spec!r}")


@dataclass
class ExperimentConfig:
    """Resolved simulation configuration (frequencies in 2*pi/tau_p units)."""

    sequence: str = "8s"
    shape: str = "Q1"
    omega_r: float = 0.117
    omega_0: float = 0.0
    g: float = 0.0002
    n_max: int = 8
    periods: int = 100
    steps_per_pulse: int = 256
    grid: int = 50
    oscillator_level: int = 0
    taup: float = 1.0
    output: str = "trace.csv"

    def validate(self):
        if self.periods < 0:
            raise ValueError("periods must be >= 0")
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")
        if self.grid < 0:
            raise ValueError("grid must be >= 0")
        if self.steps_per_pulse < propagate.MIN_STEPS_PER_PULSE:
            raise ValueError("steps_per_pulse must be >= "
                             f"{propagate.MIN_STEPS_PER_PULSE}")
        if self.taup <= 0:
            raise ValueError("taup must be positive")
        resolve_shape(self.shape, self.taup)
        sequences.parse_sequence(self.sequence)


_INT_KEYS = {"n_max", "periods", "steps_per_pulse", "grid", "oscillator_level"}
_FLOAT_KEYS = {"omega_r", "omega_0", "g", "taup"}


def load_config(path: str) -> ExperimentConfig:
    """Parse a flat key = value config file."""
    values = {}
    valid = {f.name for f in fields(ExperimentConfig)}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            key, _, val = line.partition("=")
            key = key.strip().replace("-", "_")
            val = val.strip()
            if key not in valid:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            if key in _INT_KEYS:
                values[key] = int(val)
            elif key in _FLOAT_KEYS:
                values[key] = float(val)
            else:
                values[key] = val
    return ExperimentConfig(**values)


def _apply_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    updates = {}
    for f in fields(ExperimentConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            updates[f.name] = v
    return replace(cfg, **updates)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_params(args) -> int:
    if args.shape:
        shape = resolve_shape(args.shape)
        p = shapes.compute_params(shape, n_quad=args.n_quad)
        print(f"shape: {shapes.shape_to_text(shape)}")
        print(f"s       = {p.s:.7f}")
        print(f"alpha/2 = {p.alpha / 2:.7f}")
        print(f"zeta    = {p.zeta:.6f}")
        print(f"area    = {p.area:.12f}")
    else:
        print(shapes.table_report(n_quad=args.n_quad))
    return 0


def cmd_design(args) -> int:
    spec = designer.DesignSpec(family=args.family.upper(), order=args.order,
                               extra_terms=args.extra_terms)
    result = designer.design(spec, tol=args.tol)
    print(shapes.shape_to_text(result.shape))
    print(f"coefficients (2*pi/taup units): "
          + ", ".join(f"{c:.10f}" for c in result.coeffs))
    for k, v in sorted(result.residuals.items()):
        print(f"residual {k:>12s} = {v:.3e}")
    p = result.params
    print(f"achieved: s = {p.s:.3e}  alpha/2 = {p.alpha / 2:.3e}  "
          f"zeta = {p.zeta:.6f}")
    print(f"peak amplitude max|V| = {result.peak_amplitude:.4f} / taup")
    if result.zeta_reference is not None:
        flag = "  FLAG: differs from reference branch" if result.flagged else ""
        print(f"reference zeta = {result.zeta_reference:.6f}  "
              f"|deviation| = {result.zeta_deviation:.6f}{flag}")
    return 0


def _model_from_args(args) -> ModelParams:
    return ModelParams(omega_r=args.omega_r, omega_0=args.omega_0, g=args.g,
                       n_max=args.n_max)


def cmd_simulate(args) -> int:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    cfg = _apply_overrides(cfg, args)
    cfg.validate()
    shape = resolve_shape(cfg.shape, cfg.taup)
    seq = sequences.parse_sequence(cfg.sequence)
    model = ModelParams(omega_r=cfg.omega_r, omega_0=cfg.omega_0, g=cfg.g,
                        n_max=cfg.n_max)
    couplings = jaynes_cummings(model, cfg.taup)
    schedule = propagate.build_schedule(seq, shape)
    grid = metrics.BlochGrid.build(cfg.grid)
    trace = propagate.run_trace(couplings, schedule, cfg.periods,
                                grid.as_array(),
                                oscillator_level=cfg.oscillator_level,
                                steps_per_pulse=cfg.steps_per_pulse)
    metrics.write_csv(cfg.output, trace, grid, cfg.taup)
    fmin = metrics.fidelity_min(trace, grid)
    nmax = metrics.quanta_max(trace, grid)
    print(f"wrote {cfg.output}: {cfg.periods} periods of {cfg.sequence} + "
          f"{cfg.shape}")
    print(f"final fidelity_min = {fmin[-1]:.9f}   worst 1-F = "
          f"{np.max(1 - fmin):.3e}")
    print(f"worst <n> = {np.max(nmax):.3e}   halving diff = "
          f"{trace.halving_diff:.2e}   unitarity drift = "
          f"{trace.unitarity_drift:.2e}")
    return 0


def _format_operator(h: np.ndarray, dim_rest: int, tol: float = 1e-12) -> str:
    """Coefficients of H over sigma_mu (x) |n><m| oscillator matrix units."""
    from .algebra import IDENTITY_2, PAULI
    labels = [("1", IDENTITY_2)] + [(f"sigma_{a}", PAULI[a]) for a in "xyz"]
    lines = []
    for name, q in labels:
        block = np.einsum("ij,injm->nm", q.conj().T,
                          h.reshape(2, dim_rest, 2, dim_rest)) / 2
        for n in range(dim_rest):
            for m in range(dim_rest):
                c = block[n, m]
                if abs(c) > tol:
                    lines.append(f"  {name} (x) |{n}><{m}| : {c.real:+.6e}"
                                 f"{c.imag:+.6e}j")
    return "\n".join(lines) if lines else "  (zero)"


def cmd_effham(args) -> int:
    seq = sequences.parse_sequence(args.sequence)
    shape = resolve_shape(args.shape)
    params = shapes.compute_params(shape)
    model = _model_from_args(args)
    couplings = jaynes_cummings(model)
    schedule = propagate.build_schedule(seq, shape)
    period = schedule.period
    u = propagate.propagate_period(couplings, schedule,
                                   steps_per_pulse=args.steps_per_pulse)

    print(f"sequence {seq.name or seq.label()}: period T = {period:g} taup")
    print(f"shape {shapes.shape_to_text(shape)}: s = {params.s:.6f}, "
          f"alpha/2 = {params.alpha / 2:.6f}, zeta = {params.zeta:.6f}")
    candidates = []
    if seq.name in sequences.EFFECTIVE_SEQUENCES:
        h_m, note = sequences.effective_hamiltonian(seq, couplings, params,
                                                    convention="matched")
        h_p, _ = sequences.effective_hamiltonian(seq, couplings, params,
                                                 convention="printed")
        print(f"analytic H_eff (matched convention), remainder {note}:")
        with np.printoptions(precision=4, suppress=True, linewidth=120):
            print(h_m)
        print("operator-basis coefficients:")
        print(_format_operator(h_m, couplings.dim, tol=1e-10))
        candidates.append(("generic, matched convention", h_m))
        candidates.append(("generic, printed convention", h_p))
    cavity_names = {"4p": ["4p"], "8a": ["8a"], "8s": ["8s"], "4pxz": ["4pxz"]}
    if seq.name in cavity_names:
        which = cavity_names[seq.name][0]
        candidates.append(
            ("cavity equation, printed",
             sequences.jc_cavity_hamiltonian(which, model, params)))
        if seq.name == "4p" and abs(params.s) < 1e-6:
            candidates.append(
                ("cavity equation (s=0 form), printed",
                 sequences.jc_cavity_hamiltonian("4p_s0", model, params)))
    if not candidates:
        raise ValueError(f"no analytic form available for {args.sequence!r}")

    print("defect |U(T) - exp(-i T H)| per variant:")
    defects = []
    from .algebra import expm_herm
    for label, h in candidates:
        d = float(np.linalg.norm(u - expm_herm(h, period), 2))
        defects.append((d, label))
        print(f"  {label:38s} {d:.6e}")
    best = min(defects)
    print(f"verdict: best match is '{best[1]}' (defect {best[0]:.3e})")
    return 0


def cmd_ordercheck(args) -> int:
    seq = sequences.parse_sequence(args.sequence)
    shape = resolve_shape(args.shape)
    model = _model_from_args(args)
    couplings = jaynes_cummings(model)
    scales = [float(x) for x in args.scales.split(",")]
    result = sequences.order_check(seq, couplings, shape, scales,
                                   steps_per_pulse=args.steps_per_pulse,
                                   reference=args.reference)
    print(f"sequence {seq.name or seq.label()} + {args.shape}, reference "
          f"{result.reference}")
    for lam, d in zip(result.scales, result.defects):
        print(f"  lambda = {lam:<8g} defect = {d:.6e}")
    if result.floor_limited:
        print("  note: some defects at the numerical floor (1e-12), "
              "excluded from the fit")
    print(f"fitted exponent p = {result.exponent:.3f}")
    return 0


# ---------------------------------------------------------------------------

def _add_model_args(p: argparse.ArgumentParser, with_defaults: bool = True):
    dflt = ExperimentConfig()
    get = (lambda v: v) if with_defaults else (lambda v: None)
    p.add_argument("--omega-r", type=float, default=get(dflt.omega_r),
                   help="oscillator frequency bias (2*pi/taup units)")
    p.add_argument("--omega-0", type=float, default=get(dflt.omega_0),
                   help="qubit frequency bias (2*pi/taup units)")
    p.add_argument("--g", type=float, default=get(dflt.g),
                   help="qubit-oscillator coupling (2*pi/taup units)")
    p.add_argument("--n-max", type=int, default=get(dflt.n_max),
                   help="oscillator truncation level")
    p.add_argument("--steps-per-pulse", type=int,
                   default=get(dflt.steps_per_pulse))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cavitydd",
        description="Soft-pulse dynamical decoupling workbench "
                    "(frequencies in units of 2*pi/tau_p)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("params", help="shape-parameter table or single row")
    p.add_argument("--shape", help="shape name or spec (e.g. gaussian:0.10)")
    p.add_argument("--n-quad", type=int, default=shapes.DEFAULT_N_QUAD)
    p.set_defaults(func=cmd_params)

    p = sub.add_parser("design", help="synthesize a self-refocusing shape")
    p.add_argument("--family", required=True, choices=["S", "Q", "s", "q"])
    p.add_argument("--order", "-L", type=int, required=True)
    p.add_argument("--extra-terms", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-12)
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("simulate", help="stroboscopic trace -> CSV")
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--sequence", default=None)
    p.add_argument("--shape", default=None)
    for name, typ in [("omega-r", float), ("omega-0", float), ("g", float),
                      ("n-max", int), ("periods", int),
                      ("steps-per-pulse", int), ("grid", int),
                      ("oscillator-level", int), ("taup", float)]:
        p.add_argument(f"--{name}", type=typ, default=None)
    p.add_argument("--output", default=None, help="CSV path")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("effham", help="analytic effective Hamiltonian report")
    p.add_argument("--sequence", required=True)
    p.add_argument("--shape", required=True)
    _add_model_args(p)
    p.set_defaults(func=cmd_effham)

    p = sub.add_parser("ordercheck", help="refocusing-order exponent fit")
    p.add_argument("--sequence", required=True)
    p.add_argument("--shape", required=True)
    p.add_argument("--scales", default="0.4,0.2,0.1,0.025",
                   help="comma-separated coupling scale factors")
    p.add_argument("--reference", choices=["zero", "effective"],
                   default="zero")
    _add_model_args(p)
    p.set_defaults(func=cmd_ordercheck)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConvergenceError as exc:
        print(f"numerical convergence failure: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
