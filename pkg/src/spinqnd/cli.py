"""Command-line entry point.

Subcommands:
    kappa     coupling strength from physical constants
    curves    analytic variance curves as CSV (optionally a figure)
    simulate  Monte Carlo campaign: records.csv, report.json, figures
    oracle    exact small-system check of the linearized model

Exit codes: 0 ok, 2 invalid input, 3 I/O failure, 4 invariant failure.
The only environment dependence is the optional SPINQND_THREADS cap on
parallel shot execution.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import analytics, coupling, figures, montecarlo, oracle
from .model import ExperimentConfig, PhysicalParams, validate, validate_params

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_IO = 3
EXIT_INVARIANT = 4


class InvariantFailure(Exception):
    pass


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinqnd",
        description="QND spin-squeezing protocol: Gaussian engine, Monte Carlo, exact oracle",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    k = sub.add_parser("kappa", help="coupling strength from physical constants")
    k.add_argument("--preset", choices=sorted(coupling.PRESETS), help="built-in parameter set")
    k.add_argument("--gamma", type=float, help="natural full linewidth (rad/s)")
    k.add_argument("--sigma0", type=float, help="absorption cross section (m^2)")
    k.add_argument("--w0", type=float, help="beam waist (m)")
    k.add_argument("--delta", type=float, help="probe detuning (rad/s)")
    k.add_argument("--delta0", type=float, help="hyperfine splitting (rad/s)")
    k.add_argument("--n-atoms", type=float, help="atom number")
    k.add_argument("--n-photons", type=float, help="photons per pulse")
    k.add_argument("--epsilon-a", type=float, help="atomic loss per probe pass")

    c = sub.add_parser("curves", help="analytic variance curves as CSV")
    c.add_argument("--kappa", type=float, required=True)
    c.add_argument("--phi-start", type=float, default=0.0)
    c.add_argument("--phi-stop", type=float, default=2.0 * math.pi)
    c.add_argument("--phi-step", type=float, default=math.pi / 16.0)
    c.add_argument("--loss-epsilon", type=float, default=0.0,
                   help="attenuation per probe pass (engine-based curves)")
    c.add_argument("-o", "--output", type=Path, help="CSV file (default: stdout)")
    c.add_argument("--figures", action="store_true",
                   help="also render the curves as a PNG next to the CSV")

    s = sub.add_parser("simulate", help="Monte Carlo campaign from a config file")
    s.add_argument("--config", type=Path, required=True, help="ExperimentConfig JSON")
    s.add_argument("--outdir", type=Path, default=Path("."))
    s.add_argument("--no-first-pulse", action="store_true",
                   help="coherent-state control only (no QND pulse, no conditioning)")
    s.add_argument("--no-figures", action="store_true", help="skip PNG rendering")

    o = sub.add_parser("oracle", help="exact-vs-Gaussian deviation report")
    o.add_argument("--n-atoms", type=int, default=8)
    o.add_argument("--n-photons", type=int, default=8)
    o.add_argument("--kappa-target", type=float, default=0.3)
    o.add_argument("--angles", type=float, nargs="+", required=True)
    o.add_argument("--sizes", type=int, nargs="*", default=None,
                   help="run N_A = N_L = SIZE for each size and check convergence")
    o.add_argument("--max-deviation", type=float, default=0.15,
                   help="relative deviation bound at the largest size")
    return parser


def _params_from_args(args) -> PhysicalParams:
    base = coupling.PRESETS.get(args.preset) if args.preset else None
    overrides = {
        "gamma": args.gamma,
        "sigma0": args.sigma0,
        "w0": args.w0,
        "delta": args.delta,
        "delta0": args.delta0,
        "n_atoms": args.n_atoms,
        "n_photons": args.n_photons,
        "epsilon_A": args.epsilon_a,
    }
    overrides = {k: v for k, v in overrides.items() if v is not None}
    if base is not None:
        return replace(base, **overrides)
    missing = [k for k in ("gamma", "sigma0", "w0", "delta", "delta0", "n_atoms", "n_photons")
               if k not in overrides]
    if missing:
        raise ValueError(
            "missing parameters (give --preset or all flags): " + ", ".join(missing)
        )
    overrides.setdefault("epsilon_A", 0.0)
    return PhysicalParams(**overrides)


def _cmd_kappa(args) -> int:
    params = _params_from_args(args)
    bad = validate_params(params)
    if bad:
        raise ValueError("invalid parameters: " + "; ".join(bad))
    k = coupling.kappa_from_physics(params)
    doc = {
        "kappa": k,
        "kappa_abs": abs(k),
        "j": params.j,
        "s": params.s,
        "epsilon_a": params.epsilon_A,
    }
    print(montecarlo.dumps_json(doc))
    return EXIT_OK


CURVE_COLUMNS = ("v1", "v2", "v_plus", "v_minus", "v_cond", "v_coh")


def _cmd_curves(args) -> int:
    if not math.isfinite(args.kappa):
        raise ValueError("kappa must be finite")
    if args.phi_step <= 0:
        raise ValueError("phi-step must be > 0")
    n = int(math.floor((args.phi_stop - args.phi_start) / args.phi_step + 1e-9)) + 1
    if n < 1:
        raise ValueError("empty angle grid")
    grid = args.phi_start + args.phi_step * np.arange(n)

    lines = ["phi," + ",".join(CURVE_COLUMNS)]
    for phi in grid:
        row = analytics.protocol_variances(args.kappa, float(phi), args.loss_epsilon)
        lines.append(",".join([repr(float(phi))] + [repr(row[c]) for c in CURVE_COLUMNS]))
    text = "\n".join(lines) + "\n"

    if args.output is not None:
        args.output.write_text(text)
    else:
        sys.stdout.write(text)
    if args.figures:
        target = (args.output or Path("curves.csv")).with_suffix(".png")
        figures.render_curves_figure(args.kappa, grid, target, args.loss_epsilon)
        print(f"wrote {target}", file=sys.stderr)
    return EXIT_OK


def _summary_table(reports) -> str:
    head = f"{'phi':>8} {'ctrl':>4} {'V1':>10} {'V2':>10} {'V+':>10} {'V-':>10} {'V_cond':>10}"
    rows = [head]
    for r in reports:
        vc = f"{r.v_cond:10.5f}" if r.v_cond is not None else f"{'--':>10}"
        rows.append(
            f"{r.phi:8.4f} {('yes' if r.control else 'no'):>4} "
            f"{r.v1:10.5f} {r.v2:10.5f} {r.v_plus:10.5f} {r.v_minus:10.5f} {vc}"
        )
    return "\n".join(rows)


def _cmd_simulate(args) -> int:
    try:
        text = args.config.read_text()
    except OSError as exc:
        raise ValueError(f"cannot read config: {exc}") from exc
    config = ExperimentConfig.from_json(text)
    bad = validate(config)
    if bad:
        raise ValueError("invalid config: " + "; ".join(bad))

    n_threads = int(os.environ.get("SPINQND_THREADS", "1"))
    result = montecarlo.sweep(config, first_pulse=not args.no_first_pulse,
                              n_threads=max(1, n_threads))

    outdir = args.outdir
    outdir.mkdir(parents=True, exist_ok=True)
    main_records = result.records if result.records else result.control_records
    (outdir / "records.csv").write_text(montecarlo.records_csv(main_records))
    if result.records and result.control_records:
        (outdir / "control_records.csv").write_text(
            montecarlo.records_csv(result.control_records)
        )
    (outdir / "report.json").write_text(montecarlo.reports_json(result.reports))

    if not args.no_figures:
        figures.render_report_figures(result.reports, config.kappa, outdir,
                                      config.loss_epsilon)

    print(_summary_table(result.reports))
    if result.g_global is not None:
        print(f"global gain g = {result.g_global:.6f}")
    return EXIT_OK


def _check_convergence(per_size: list[float]) -> bool:
    """Nonincreasing max deviation over sizes; one increase within 10% of the
    previous value is tolerated as statistical floor."""
    soft = 0
    for prev, cur in zip(per_size, per_size[1:]):
        if cur > prev * 1.10:
            return False
        if cur > prev:
            soft += 1
    return soft <= 1


def _cmd_oracle(args) -> int:
    if not args.angles:
        raise ValueError("angle list is empty")
    sizes = args.sizes
    runs = (
        [(n, n) for n in sizes]
        if sizes
        else [(args.n_atoms, args.n_photons)]
    )
    reports = []
    for n_atoms, n_photons in runs:
        for phi in args.angles:
            reports.append(
                oracle.deviation_report(n_atoms, n_photons, args.kappa_target, phi)
            )
    print(montecarlo.dumps_json(reports))

    if sizes:
        per_size = []
        for n_atoms, n_photons in runs:
            devs = [
                oracle.max_deviation(r)
                for r in reports
                if r["n_atoms"] == n_atoms and r["n_photons"] == n_photons
            ]
            per_size.append(max(devs))
        if not _check_convergence(per_size):
            raise InvariantFailure(
                "max deviation not nonincreasing over sizes: "
                + ", ".join(f"{d:.4f}" for d in per_size)
            )
        if per_size[-1] >= args.max_deviation:
            raise InvariantFailure(
                f"deviation {per_size[-1]:.4f} at the largest size exceeds "
                f"{args.max_deviation}"
            )
    return EXIT_OK


_COMMANDS = {
    "kappa": _cmd_kappa,
    "curves": _cmd_curves,
    "simulate": _cmd_simulate,
    "oracle": _cmd_oracle,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except InvariantFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
