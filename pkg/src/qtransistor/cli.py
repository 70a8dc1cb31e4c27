"""``qt``: command-line front end.

Exit codes: 0 success, 1 domain error, 2 usage error. Data goes to stdout or
``--out``; diagnostics go to stderr. Every file written with ``--out`` gets a
``<out>.manifest.json`` next to it, and passing that manifest back through
``--config`` reproduces the output byte for byte.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
import time
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .design import design_gate, plan_transfer, predict_gate_output
from .dispersive import DispersiveConfig, effective_frequency, simulate_dispersive
from .dynamics import QubitState, survival_probabilities, u_exact
from .errors import QTError
from .network import NetworkConfig, blocking_margin
from .open_system import (
    FidelityMapRow, exchange_exponent, fidelity_avg, fidelity_map, fidelity_point,
    nbar_from_ratio, optimal_kappa,
)
from .spectral import analytic_spectrum
from .validation import run_validation

FLOAT_FMT = "%.17g"
# Options that only steer where output goes; they are not part of a run's identity.
_NON_CONFIG = {"out", "config", "json", "csv", "func", "command"}


class UsageError(Exception):
    """Bad flag values discovered after argparse accepted the syntax."""


@dataclass
class RunManifest:
    subcommand: str
    config: dict
    version: str = __version__
    outputs: list = field(default_factory=list)
    wall_seconds: float = 0.0


# -- parsing helpers ---------------------------------------------------------


def parse_float_range(text: str) -> np.ndarray:
    """``a:b:n`` -> n evenly spaced values, ``a,b,c`` -> list, ``a`` -> [a]."""
    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) != 3:
                raise ValueError
            a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
            if n < 1:
                raise ValueError
            return np.linspace(a, b, n)
        return np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise UsageError(f"bad range {text!r}; expected a:b:n, a comma list or a number") from None


def parse_int_range(text: str) -> np.ndarray:
    """``a:b`` -> a..b inclusive, ``a:b:s`` -> step s, ``a,b`` -> list."""
    try:
        if ":" in text:
            parts = [int(p) for p in text.split(":")]
            if len(parts) == 2:
                return np.arange(parts[0], parts[1] + 1)
            if len(parts) == 3 and parts[2] > 0:
                return np.arange(parts[0], parts[1] + 1, parts[2])
            raise ValueError
        return np.array([int(v) for v in text.split(",")])
    except ValueError:
        raise UsageError(f"bad integer range {text!r}; expected a:b, a:b:step or a list") from None


def _fmt(x) -> str:
    return FLOAT_FMT % x


def _csv(header, rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(v if isinstance(v, str) else
                           (str(v) if isinstance(v, (int, np.integer)) and not isinstance(v, bool)
                            else _fmt(v)) for v in row) + "\n")
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(obj, indent=2, default=_json_default) + "\n"


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _network(args) -> NetworkConfig:
    scale = 2 * math.pi if args.units == "hz" else 1.0
    kappa = args.N if args.kappa is None else args.kappa
    return NetworkConfig(args.omega * scale, args.lam * scale, args.N, kappa, args.delta * scale)


def _tabular(args) -> str:
    return "csv" if args.csv else "json"


# -- subcommands --------------------------------------------------------------


def cmd_spectrum(args):
    cfg = _network(args)
    spec = analytic_spectrum(cfg)
    if _tabular(args) == "csv":
        rows = [(i, f, e) for i, (f, e) in enumerate(zip(spec.families, spec.eigenvalues))]
        return _csv(("index", "family", "eigenvalue"), rows)
    cubic = spec.cubic
    return _json({
        "config": cfg.to_dict(),
        "eigenvalues": spec.eigenvalues,
        "families": list(spec.families),
        "family_sizes": spec.family_sizes(),
        "cubic": {"Phi": cubic.big_phi, "eta": cubic.eta, "theta": cubic.theta,
                  "R": cubic.roots, "A": cubic.amplitudes},
        "vectors": spec.vectors if args.vectors else None,
    })


def cmd_evolve(args):
    cfg = _network(args)
    psi = QubitState.from_angles(args.alpha, args.theta)
    if args.times is not None:
        times = parse_float_range(args.times)
    else:
        t_end = args.t_max if args.t_max is not None else 4 * math.pi / (cfg.lam * math.sqrt(2 * max(cfg.kappa, 1)))
        times = np.linspace(0.0, t_end, args.steps)
    spec = analytic_spectrum(cfg)
    amps = u_exact(cfg, times, spec)
    p_s, p_d = survival_probabilities(cfg, psi, times, spec)
    up, um = np.atleast_1d(amps.u_plus), np.atleast_1d(amps.u_minus)
    p_s, p_d = np.atleast_1d(p_s), np.atleast_1d(p_d)
    header = ("t", "p_s", "p_d", "re_u_plus", "im_u_plus", "re_u_minus", "im_u_minus")
    rows = [(t, a, b, c.real, c.imag, d.real, d.imag)
            for t, a, b, c, d in zip(times, p_s, p_d, up, um)]
    if args.json:
        return _json([dict(zip(header, r)) for r in rows])
    return _csv(header, rows)


def cmd_block_check(args):
    cfg = _network(args)
    margin, ok = blocking_margin(cfg, args.threshold)
    return _json({"config": cfg.to_dict(), "margin": margin, "threshold": args.threshold,
                  "blocking": ok})


def _one_of(a, b, name):
    if (a is None) == (b is None):
        raise UsageError(f"give exactly one of --{name}-hz / --{name}-rad")
    return (a, True) if a is not None else (b, False)


def cmd_plan_transfer(args):
    omega, omega_hz = _one_of(args.omega_hz, args.omega_rad, "omega")
    lam, lam_hz = _one_of(args.lambda_hz, args.lambda_rad, "lambda")
    if omega_hz != lam_hz:
        raise UsageError("omega and lambda must use the same unit")
    plan = plan_transfer(omega, lam, args.u, hz=omega_hz)
    if args.csv:
        d = plan.to_dict()
        return _csv(tuple(d), [tuple(d.values())])
    return _json(plan.to_dict())


def cmd_design_gate(args):
    phi = args.phi_over_pi * math.pi if args.phi is None else args.phi
    plan = design_gate(phi, omega=args.omega, lam=args.lam, kappa=args.kappa, ell=args.ell,
                       ell_search_max=args.ell_search_max, min_ratio=args.min_ratio)
    n_bus = plan.kappa if args.N is None else args.N
    if n_bus != plan.kappa:
        if args.delta is None:
            raise UsageError("kappa < N needs --delta so the blocking margin can be checked")
        margin, ok = blocking_margin(NetworkConfig(plan.omega, plan.lam, n_bus, plan.kappa, args.delta))
        if not ok and not args.allow_unblocked:
            raise QTError(
                f"blocking margin {margin:.3g} fails for kappa < N; pass --allow-unblocked to override"
            )
    out = plan.to_dict()
    if args.alpha is not None:
        psi = QubitState.from_angles(args.alpha, args.theta)
        res = predict_gate_output(plan, psi)
        out["output"] = {"a0": [res.a0.real, res.a0.imag], "a1": [res.a1.real, res.a1.imag]}
    return _json(out)


def cmd_dispersive(args):
    cfg = DispersiveConfig(args.omega0, args.nu, args.g, args.gamma_spont, args.nbar_field)
    norm = math.hypot(args.a, args.b)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        res = simulate_dispersive(cfg, [args.a / norm, args.b / norm], args.t)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    out = res.to_dict()
    out["effective_frequency"] = effective_frequency(cfg)
    out["chi"] = cfg.chi
    return _json(out)


def _nbar_arg(args):
    if args.nbar is not None:
        return args.nbar, None
    if args.kbt_over_hnu is not None:
        return nbar_from_ratio(args.kbt_over_hnu), args.kbt_over_hnu
    raise UsageError("give --nbar or --kbt-over-hnu")


def cmd_fidelity(args):
    nbar, ratio = _nbar_arg(args)
    x = exchange_exponent(args.kappa, args.gamma_over_lambda)
    kw = dict(n_bus=args.N, allow_out_of_scope=args.allow_out_of_scope)
    out = {"kappa": args.kappa, "gamma_over_lambda": args.gamma_over_lambda,
           "kBT_over_hnu": ratio, "nbar": nbar, "x": float(x), "measure": args.measure,
           "fbar": fidelity_avg(args.kappa, x, nbar, args.measure, **kw)}
    if args.alpha is not None:
        out["alpha"] = args.alpha
        out["F"] = fidelity_point(args.kappa, x, nbar, args.alpha, **kw)
    return _json(out)


def _parse_panel(text):
    key, _, value = text.partition("=")
    key = key.strip().lower().replace("_", "-")
    if key not in ("kbt-over-hnu", "kappa") or not value:
        raise UsageError(f"bad --panel {text!r}; expected kbt-over-hnu=<value> or kappa=<int>")
    return key, value


def cmd_fidelity_map(args):
    gs = parse_float_range(args.gamma_over_lambda)
    if args.panel is not None:
        key, value = _parse_panel(args.panel)
        if key == "kbt-over-hnu":
            rs = parse_float_range(value)
            ks = parse_int_range(args.kappa or "1:60")
        else:
            ks = parse_int_range(value)
            rs = parse_float_range(args.kbt_over_hnu or "0.05:1.4:100")
    else:
        if args.kappa is None or args.kbt_over_hnu is None:
            raise UsageError("give --panel, or both --kappa and --kbt-over-hnu")
        ks = parse_int_range(args.kappa)
        rs = parse_float_range(args.kbt_over_hnu)
    rows = fidelity_map(gs, rs, ks, args.measure, workers=args.workers)
    bad = sum(not r.valid for r in rows)
    if bad:
        print(f"warning: {bad} rows have nbar > 1 (outside the closed form's stated range)",
              file=sys.stderr)
    if args.json:
        return _json([r.to_dict() for r in rows])
    return FidelityMapRow.CSV_HEADER + "\n" + "".join(r.csv() + "\n" for r in rows)


def cmd_optimal_kappa(args):
    nbar, ratio = _nbar_arg(args)
    k, f = optimal_kappa(args.gamma_over_lambda, nbar, args.kappa_max, args.measure)
    out = {"gamma_over_lambda": args.gamma_over_lambda, "kBT_over_hnu": ratio, "nbar": nbar,
           "kappa_max": args.kappa_max, "kappa_star": k, "fbar_star": f}
    if args.csv:
        return _csv(tuple(out), [tuple("" if v is None else v for v in out.values())])
    return _json(out)


def cmd_validate(args):
    report = run_validation(seed=args.seed, full=args.full)
    if any(not r["pass"] for r in report):
        args._failed = True
    if args.csv:
        return _csv(("check", "config", "max_error", "pass"),
                    [(r["check"], r["config"], r["max_error"], str(r["pass"]).lower())
                     for r in report])
    return _json(report)


# -- parser ---------------------------------------------------------------------


def _add_output(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--json", action="store_true", help="JSON output")
    g.add_argument("--csv", action="store_true", help="CSV output")
    p.add_argument("--out", help="write data to this file (a manifest is written next to it)")
    p.add_argument("--config", help="JSON file whose keys override the flags (a run manifest works too)")


def _add_network(p):
    p.add_argument("--omega", type=float, default=1.0, help="source/drain frequency")
    p.add_argument("--lambda", dest="lam", type=float, default=0.1, help="coupling")
    p.add_argument("--N", type=int, default=1, help="bus size")
    p.add_argument("--kappa", type=int, help="resonant bus oscillators (default N)")
    p.add_argument("--delta", type=float, default=0.0, help="detuning of the other bus oscillators")
    p.add_argument("--units", choices=("angular", "hz"), default="angular")


def _add_reservoir(p):
    p.add_argument("--nbar", type=float)
    p.add_argument("--kbt-over-hnu", type=float)
    p.add_argument("--measure", choices=("alpha-uniform", "haar"), default="alpha-uniform")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qt", description="Harmonic-oscillator quantum transistor toolkit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="subcommand")

    p = sub.add_parser("spectrum", help="closed-form eigenmodes")
    _add_network(p)
    p.add_argument("--vectors", action="store_true", help="include eigenvectors in JSON output")
    _add_output(p)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("evolve", help="transfer amplitudes and survival probabilities (CSV)")
    _add_network(p)
    p.add_argument("--alpha", type=float, default=0.0, help="|0> amplitude of the source qubit")
    p.add_argument("--theta", type=float, default=0.0, help="relative phase of the |1> amplitude")
    p.add_argument("--times", help="time grid a:b:n or comma list")
    p.add_argument("--t-max", type=float)
    p.add_argument("--steps", type=int, default=201)
    _add_output(p)
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("block-check", help="blocking-regime margin")
    _add_network(p)
    p.add_argument("--threshold", type=float, default=0.1)
    _add_output(p)
    p.set_defaults(func=cmd_block_check)

    p = sub.add_parser("plan-transfer", help="kappa and transfer time for full transfer")
    p.add_argument("--omega-hz")
    p.add_argument("--omega-rad")
    p.add_argument("--lambda-hz")
    p.add_argument("--lambda-rad")
    p.add_argument("--u", type=int, default=1, help="odd multiplier on m")
    _add_output(p)
    p.set_defaults(func=cmd_plan_transfer)

    p = sub.add_parser("design-gate", help="solve the phase-gate condition")
    p.add_argument("--phi", type=float, help="target phase (radians)")
    p.add_argument("--phi-over-pi", type=float, default=0.0)
    p.add_argument("--omega", type=float)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--kappa", type=int)
    p.add_argument("--N", type=int, help="bus size (default kappa)")
    p.add_argument("--delta", type=float, help="detuning, needed when kappa < N")
    p.add_argument("--allow-unblocked", action="store_true")
    p.add_argument("--ell", type=int)
    p.add_argument("--ell-search-max", type=int, default=99)
    p.add_argument("--min-ratio", type=float, default=1.0)
    p.add_argument("--alpha", type=float, help="also predict the output for this input")
    p.add_argument("--theta", type=float, default=0.0)
    _add_output(p)
    p.set_defaults(func=cmd_design_gate)

    p = sub.add_parser("dispersive", help="dispersive atom-field detuning control")
    p.add_argument("--omega0", type=float, required=False, default=10.0)
    p.add_argument("--nu", type=float, default=0.0)
    p.add_argument("--g", type=float, default=0.1)
    p.add_argument("--gamma-spont", type=float, default=0.0)
    p.add_argument("--nbar-field", type=float, default=1.0)
    p.add_argument("--a", type=float, default=1.0, help="field |0> amplitude (normalised with --b)")
    p.add_argument("--b", type=float, default=1.0, help="field |1> amplitude")
    p.add_argument("--t", type=float, default=1.0)
    _add_output(p)
    p.set_defaults(func=cmd_dispersive)

    p = sub.add_parser("fidelity", help="closed-form gate fidelity")
    p.add_argument("--kappa", type=int, default=1)
    p.add_argument("--N", type=int, help="bus size (must equal kappa unless overridden)")
    p.add_argument("--allow-out-of-scope", action="store_true")
    p.add_argument("--gamma-over-lambda", type=float, required=False, default=0.1)
    p.add_argument("--alpha", type=float)
    _add_reservoir(p)
    _add_output(p)
    p.set_defaults(func=cmd_fidelity)

    p = sub.add_parser("fidelity-map", help="average-fidelity grid (CSV)")
    p.add_argument("--panel", help="kbt-over-hnu=<value or range> or kappa=<int or range>")
    p.add_argument("--gamma-over-lambda", default="0:1:100")
    p.add_argument("--kappa", help="kappa range, e.g. 1:60")
    p.add_argument("--kbt-over-hnu", help="k_B T / h nu range, e.g. 0.05:1.4:100")
    p.add_argument("--measure", choices=("alpha-uniform", "haar"), default="alpha-uniform")
    p.add_argument("--workers", type=int, help="worker processes (default $QT_WORKERS or 1)")
    _add_output(p)
    p.set_defaults(func=cmd_fidelity_map)

    p = sub.add_parser("optimal-kappa", help="bus size maximising the average fidelity")
    p.add_argument("--gamma-over-lambda", type=float, default=0.1)
    p.add_argument("--kappa-max", type=int, default=60)
    _add_reservoir(p)
    _add_output(p)
    p.set_defaults(func=cmd_optimal_kappa)

    p = sub.add_parser("validate", help="oracle-equivalence report")
    p.add_argument("--full", action="store_true", help="include master-equation checks (slow)")
    p.add_argument("--seed", type=int, default=0)
    _add_output(p)
    p.set_defaults(func=cmd_validate)
    return parser


def _apply_config(parser, args):
    path = Path(args.config)
    try:
        doc = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    if isinstance(doc, dict) and "subcommand" in doc and "config" in doc:
        if doc["subcommand"] != args.command:
            raise UsageError(f"manifest is for {doc['subcommand']!r}, not {args.command!r}")
        doc = doc["config"]
    if not isinstance(doc, dict):
        raise UsageError("config must be a JSON object")
    known = vars(args)
    for key, value in doc.items():
        dest = key.replace("-", "_")
        if dest == "lambda":
            dest = "lam"
        if dest not in known or dest in _NON_CONFIG:
            raise UsageError(f"unknown config key {key!r} for {args.command}")
        setattr(args, dest, value)


def parse_and_dispatch(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    started = time.perf_counter()
    try:
        if args.config:
            _apply_config(parser, args)
        text = args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"qt: error: {exc}", file=sys.stderr)
        return 2
    except QTError as exc:
        print(f"qt: {exc}", file=sys.stderr)
        return 1

    if args.out:
        out = Path(args.out)
        out.write_bytes(text.encode())
        config = {k: v for k, v in sorted(vars(args).items())
                  if k not in _NON_CONFIG and not k.startswith("_")}
        manifest = RunManifest(args.command, config, outputs=[str(out)],
                               wall_seconds=time.perf_counter() - started)
        Path(str(out) + ".manifest.json").write_text(_json(asdict(manifest)))
    else:
        sys.stdout.write(text)
    return 1 if getattr(args, "_failed", False) else 0


def main(argv=None):
    sys.exit(parse_and_dispatch(argv))
