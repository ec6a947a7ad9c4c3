"""Command-line harness: one subcommand per experiment family.

Every table and figure of the study maps to one invocation emitting CSV/JSON
artifacts; all commands are deterministic for a fixed --seed (default from
the BOSEHUB_SEED environment variable). Energies echo with 5 decimals; files
carry full precision.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from . import basis as basis_mod
from . import circuit as qc
from . import readout as ro
from . import variational as vr
from .hamiltonian import (
    HamiltonianMatrix,
    ModelParams,
    build_deformed,
    build_full,
    build_reduced,
    ground_state,
    min_eigenvalue_power,
    write_ground_state_csv,
    write_matrix_coo,
)

DEFAULT_SITES = 6
DEFAULT_BOSONS = 5


def main(argv=None) -> int:
    bootstrap = argparse.ArgumentParser(add_help=False)
    bootstrap.add_argument("--config", type=Path, default=None)
    known, _ = bootstrap.parse_known_args(argv)
    config = {}
    if known.config is not None:
        try:
            config = json.loads(known.config.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            print(f"error: cannot read config: {exc}", file=sys.stderr)
            return 1

    parser = _build_parser(config)
    args = parser.parse_args(argv)
    _coerce_paths(args)
    if args.check:
        failures = run_oracle_checks()
        if failures:
            return 1
        if args.command is None:
            return 0
    if args.command is None:
        parser.print_help()
        return 2
    try:
        return args.func(args)
    except Exception as exc:  # surfaced with nonzero status per contract
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _build_parser(config: dict | None = None) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bosehub",
        description="Bose-Hubbard ground states: exact, neural and "
                    "single-qubit variational pipelines.")
    parser.add_argument("--check", action="store_true",
                        help="run oracle self-checks before the command")
    parser.add_argument("--config", type=Path, default=None,
                        help="JSON file of flag defaults, overridden by "
                             "explicit flags")
    sub = parser.add_subparsers(dest="command")
    leaves = []

    p = sub.add_parser("basis", help="enumerate and dump a basis")
    leaves.append(p)
    _common(p)
    p.add_argument("--kind", default="reduced",
                   choices=[k.value for k in basis_mod.BasisKind])
    p.add_argument("--out", type=Path, default=None)
    p.set_defaults(func=cmd_basis)

    p = sub.add_parser("exact", help="exact diagonalization")
    leaves.append(p)
    _common(p)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--U", type=float, default=None)
    p.add_argument("--phi", type=float, default=0.0)
    p.add_argument("--basis", default="full",
                   choices=[k.value for k in basis_mod.BasisKind])
    p.add_argument("--orientation", default="interaction",
                   choices=["interaction", "lex"])
    p.add_argument("--out-prefix", type=Path, default=None,
                   help="write <prefix>_ground.csv (and _matrix.txt)")
    p.add_argument("--dump-matrix", action="store_true")
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("train", help="train a variational ansatz")
    leaves.append(p)
    _common(p)
    _train_flags(p)
    p.add_argument("--basis", default="reduced",
                   choices=[k.value for k in basis_mod.BasisKind],
                   help="full reproduces the network's 252-state baseline")
    p.add_argument("--out-dir", type=Path, default=None)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("study", help="layer / shots / noise studies")
    study = p.add_subparsers(dest="study_kind", required=True)

    ps = study.add_parser("layers", help="energy vs layer count")
    leaves.append(ps)
    _common(ps)
    _train_flags(ps, ansatz_choices=("compressed", "quat"))
    ps.add_argument("--layer-grid", default="3,4,5,6",
                    help="comma-separated layer counts")
    ps.add_argument("--out", type=Path, default=None)
    ps.set_defaults(func=cmd_study_layers)

    ps = study.add_parser("shots", help="finite-shot energy deviations")
    leaves.append(ps)
    _common(ps)
    ps.add_argument("--checkpoint", type=Path, default=None)
    ps.add_argument("--t", type=float, default=1.0)
    ps.add_argument("--U", type=float, default=None)
    ps.add_argument("--grid", default="100,1000,10000,20000,100000")
    ps.add_argument("--trials", type=int, default=100)
    ps.add_argument("--out", type=Path, default=None)
    ps.set_defaults(func=cmd_study_shots)

    ps = study.add_parser("noise", help="noisy-device energies per mode")
    leaves.append(ps)
    _common(ps)
    ps.add_argument("--checkpoint", type=Path, nargs="+", default=None,
                    help="one trained circuit checkpoint per U value")
    ps.add_argument("--t", type=float, default=1.0)
    ps.add_argument("--U", default=None, help="comma-separated U values")
    ps.add_argument("--modes",
                    default="uncorrected,corrected,postselected-corrected")
    ps.add_argument("--shots", type=int, default=20000)
    ps.add_argument("--trials", type=int, default=1)
    ps.add_argument("--qubits", type=int, default=ro.DEFAULT_QUBITS)
    ps.add_argument("--error-min", type=float, default=ro.DEFAULT_ERROR_RANGE[0])
    ps.add_argument("--error-max", type=float, default=ro.DEFAULT_ERROR_RANGE[1])
    ps.add_argument("--threads", type=int, default=1)
    ps.add_argument("--out", type=Path, default=None)
    ps.add_argument("--calibration-out", type=Path, default=None)
    ps.set_defaults(func=cmd_study_noise)

    p = sub.add_parser("noise-run", help="single noisy energy evaluation")
    leaves.append(p)
    _common(p)
    p.add_argument("--checkpoint", type=Path, default=None)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--U", type=float, default=None)
    p.add_argument("--mode", default="corrected",
                   choices=[m.value for m in ro.CorrectionMode])
    p.add_argument("--shots", type=int, default=20000)
    p.add_argument("--qubits", type=int, default=ro.DEFAULT_QUBITS)
    p.add_argument("--error-min", type=float, default=ro.DEFAULT_ERROR_RANGE[0])
    p.add_argument("--error-max", type=float, default=ro.DEFAULT_ERROR_RANGE[1])
    p.set_defaults(func=cmd_noise_run)

    if config:
        for leaf in leaves:
            leaf.set_defaults(**config)
    return parser


def _common(p) -> None:
    p.add_argument("--sites", type=int, default=DEFAULT_SITES)
    p.add_argument("--bosons", type=int, default=DEFAULT_BOSONS)
    p.add_argument("--seed", type=int,
                   default=int(os.environ.get("BOSEHUB_SEED", "0")))


def _train_flags(p, ansatz_choices=("nn", "compressed", "quat")) -> None:
    p.add_argument("--ansatz", default=None, choices=list(ansatz_choices))
    p.add_argument("--layers", type=int, default=6)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--U", type=float, default=None)
    p.add_argument("--steps", type=int, default=None,
                   help="default: 1500 for nn, 1200 for circuits, "
                        "2400 in complex mode")
    p.add_argument("--lr", type=float, default=0.02)
    p.add_argument("--restarts", type=int, default=1)
    p.add_argument("--phi", type=float, default=0.0)
    p.add_argument("--complex", dest="complex_mode", action="store_true",
                   help="complex coefficients (required when phi != 0)")
    p.add_argument("--raw-features", action="store_true",
                   help="feed occupations without mean subtraction")


def _coerce_paths(args) -> None:
    """Config-file values arrive as plain strings; normalize path options."""
    for dest in ("out", "out_dir", "out_prefix", "calibration_out",
                 "checkpoint"):
        value = getattr(args, dest, None)
        if isinstance(value, str):
            setattr(args, dest, Path(value))
        elif isinstance(value, list):
            setattr(args, dest, [Path(v) for v in value])


def _require(args, *names) -> None:
    for name in names:
        if getattr(args, name, None) is None:
            raise ValueError(
                f"missing required option --{name.replace('_', '-')} "
                f"(flag or config file)")


def _resolve_hamiltonian(args, kind="reduced", orientation="interaction",
                         phi=None) -> HamiltonianMatrix:
    phi = getattr(args, "phi", 0.0) if phi is None else phi
    params = ModelParams(args.t, args.U, args.sites, args.bosons, phi)
    descriptor = basis_mod.reduced_basis(args.sites, args.bosons,
                                         basis_mod.BasisKind(kind))
    if phi != 0.0:
        if basis_mod.BasisKind(kind) is not basis_mod.BasisKind.REDUCED:
            raise ValueError("the deformed model lives in the reduced basis")
        return build_deformed(params, descriptor, orientation)
    if basis_mod.BasisKind(kind) is basis_mod.BasisKind.FULL:
        return build_full(params, descriptor)
    return build_reduced(params, descriptor)


def cmd_basis(args) -> int:
    descriptor = basis_mod.reduced_basis(args.sites, args.bosons,
                                         basis_mod.BasisKind(args.kind))
    print(f"kind={descriptor.kind.value} classes={descriptor.dim} "
          f"states={int(descriptor.multiplicities().sum())}")
    if args.out:
        basis_mod.write_basis_csv(descriptor, args.out)
        print(f"wrote {args.out}")
    return 0


def cmd_exact(args) -> int:
    _require(args, "U")
    h = _resolve_hamiltonian(args, kind=args.basis,
                             orientation=args.orientation)
    state = ground_state(h)
    print(f"{state.energy:.5f}")
    if args.out_prefix:
        args.out_prefix.parent.mkdir(parents=True, exist_ok=True)
        write_ground_state_csv(state, f"{args.out_prefix}_ground.csv")
        if args.dump_matrix:
            write_matrix_coo(h, f"{args.out_prefix}_matrix.txt")
    return 0


def _default_steps(args) -> int:
    if args.steps is not None:
        return args.steps
    if getattr(args, "complex_mode", False) or args.phi != 0.0:
        return 2400
    return 1500 if args.ansatz == "nn" else 1200


def _make_ansatz(args, h: HamiltonianMatrix):
    complex_mode = args.complex_mode or args.phi != 0.0
    if args.ansatz == "nn":
        return vr.MlpAnsatz(h, complex_mode=complex_mode,
                            raw_features=args.raw_features)
    return vr.CircuitAnsatz(h, args.ansatz, args.layers,
                            complex_mode=complex_mode,
                            raw_features=args.raw_features)


def cmd_train(args) -> int:
    _require(args, "ansatz", "U")
    complex_mode = args.complex_mode or args.phi != 0.0
    h = _resolve_hamiltonian(args, kind=args.basis)
    exact = ground_state(h).energy
    ansatz = _make_ansatz(args, h)
    cfg = vr.TrainConfig(steps=_default_steps(args), learning_rate=args.lr,
                         seed=args.seed, restarts=args.restarts)
    result = vr.train(ansatz, h, cfg)
    print(f"{result.final_energy:.5f}")

    if args.out_dir:
        args.out_dir.mkdir(parents=True, exist_ok=True)
        stem = f"{args.ansatz}_U{args.U:g}" + (
            f"_phi{args.phi:g}" if args.phi else "")
        (args.out_dir / f"{stem}_checkpoint.json").write_text(
            ansatz.export(result.theta))
        vr.write_trace_csv(result, exact, args.out_dir / f"{stem}_trace.csv")
        summary = _summary("train", {
            "ansatz": args.ansatz,
            "layers": None if args.ansatz == "nn" else args.layers,
            "t": args.t, "U": args.U, "phi": args.phi,
            "complex": complex_mode,
            "steps": cfg.steps, "learning_rate": cfg.learning_rate,
            "seed": args.seed, "restarts": args.restarts,
        }, {
            "final_energy": result.final_energy,
            "exact_energy": exact,
            "loss": exact - result.final_energy,
            "winning_seed": result.seed,
        })
        (args.out_dir / f"{stem}_summary.json").write_text(summary)
        print(f"wrote artifacts to {args.out_dir}")
    return 0


def cmd_study_layers(args) -> int:
    _require(args, "ansatz", "U")
    h = _resolve_hamiltonian(args)
    cfg = vr.TrainConfig(steps=_default_steps(args), learning_rate=args.lr,
                         seed=args.seed, restarts=args.restarts)
    counts = [int(s) for s in args.layer_grid.split(",")]
    rows = vr.layer_study(args.ansatz, counts, h, cfg,
                          complex_mode=args.complex_mode or args.phi != 0.0,
                          raw_features=args.raw_features)
    for layers, energy in rows:
        print(f"{layers} {energy:.5f}")
    if args.out:
        with open(args.out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["layers", "energy"])
            for layers, energy in rows:
                writer.writerow([layers, repr(energy)])
        print(f"wrote {args.out}")
    return 0


def cmd_study_shots(args) -> int:
    _require(args, "checkpoint", "U")
    params = qc.from_json(args.checkpoint.read_text())
    h = _resolve_hamiltonian(args, phi=0.0)
    grid = [int(s) for s in args.grid.split(",")]
    rows = ro.shot_study(params, h, grid, trials=args.trials, seed=args.seed)
    for shots, median, std in rows:
        print(f"{shots} {median:.5f} {std:.5f}")
    if args.out:
        ro.write_shot_study_csv(rows, args.out)
        print(f"wrote {args.out}")
    return 0


def cmd_study_noise(args) -> int:
    _require(args, "checkpoint", "U")
    u_values = [float(s) for s in str(args.U).split(",")]
    checkpoints = (args.checkpoint if isinstance(args.checkpoint, list)
                   else [args.checkpoint])
    if len(checkpoints) != len(u_values):
        raise ValueError("need one checkpoint per U value")
    modes = [ro.CorrectionMode(m) for m in args.modes.split(",")]
    device = ro.SimulatedDevice.random(
        args.qubits, (args.error_min, args.error_max), seed=args.seed)
    layout = ro.replica_layout(n_qubits=args.qubits)

    jobs = []
    for ui, (u, ckpt) in enumerate(zip(u_values, checkpoints)):
        params = qc.from_json(Path(ckpt).read_text())
        h = _resolve_hamiltonian(
            argparse.Namespace(t=args.t, U=u, sites=args.sites,
                               bosons=args.bosons), phi=0.0)
        ideal = vr.rayleigh_energy(
            qc.batch_weights(params, basis_mod.feature_matrix(h.basis)), h)
        for trial in range(args.trials):
            jobs.append((trial, ui, u, params, h, ideal))

    def run(job):
        trial, ui, u, params, h, ideal = job
        rng = np.random.default_rng(
            np.random.SeedSequence((args.seed, ui, trial)))
        energies = ro.noisy_energies(params, h, device, layout, args.shots,
                                     modes, rng)
        return [(trial, mode.value, u, energies[mode], ideal)
                for mode in modes]

    if args.threads > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            chunks = list(pool.map(run, jobs))
    else:
        chunks = [run(job) for job in jobs]
    rows = [row for chunk in chunks for row in chunk]
    rows.sort(key=lambda r: (r[0], r[2], r[1]))
    for trial, mode, u, energy, ideal in rows:
        print(f"run={trial} mode={mode} U={u:g} energy={energy:.5f} "
              f"ideal={ideal:.5f}")
    if args.out:
        ro.write_energy_report_csv(rows, args.out)
        print(f"wrote {args.out}")
    if args.calibration_out:
        report = ro.calibration_report(device, args.shots, args.seed)
        # mark each coefficient's best replica qubit by this report's merits
        fom = {row[0]: row[5] for row in report}
        selected = {min((int(q) for q in group), key=lambda q: (fom[q], q))
                    for group in layout}
        report = [row[:6] + (int(row[0] in selected),) for row in report]
        ro.write_calibration_csv(report, args.calibration_out)
        print(f"wrote {args.calibration_out}")
    return 0


def cmd_noise_run(args) -> int:
    _require(args, "checkpoint", "U")
    params = qc.from_json(args.checkpoint.read_text())
    h = _resolve_hamiltonian(args, phi=0.0)
    device = ro.SimulatedDevice.random(
        args.qubits, (args.error_min, args.error_max), seed=args.seed)
    layout = ro.replica_layout(n_qubits=args.qubits)
    energy = ro.noisy_energy_run(params, h, device, layout, args.shots,
                                 ro.CorrectionMode(args.mode), args.seed)
    print(f"{energy:.5f}")
    return 0


def run_oracle_checks() -> list[str]:
    """Cross-validate the core numerics; prints one pass/fail line each."""
    failures = []

    def check(name: str, ok: bool, detail: str = ""):
        print(f"[{'PASS' if ok else 'FAIL'}] {name}" +
              (f" ({detail})" if detail else ""))
        if not ok:
            failures.append(name)

    full = basis_mod.full_basis(DEFAULT_SITES, DEFAULT_BOSONS)
    reduced = basis_mod.reduced_basis(DEFAULT_SITES, DEFAULT_BOSONS)
    for u in (2.0, 5.0, 8.0):
        params = ModelParams(1.0, u, DEFAULT_SITES, DEFAULT_BOSONS)
        e_full = ground_state(build_full(params, full)).energy
        hr = build_reduced(params, reduced)
        e_red = ground_state(hr).energy
        check(f"full vs reduced ground energy (U={u:g})",
              abs(e_full - e_red) < 1e-9, f"{e_full:.9f} vs {e_red:.9f}")
        e_power = min_eigenvalue_power(hr)
        check(f"dense solver vs power iteration (U={u:g})",
              abs(e_power - e_red) < 1e-7, f"delta={abs(e_power - e_red):.2e}")

    rng = np.random.default_rng(0)
    for kind in ("compressed", "quat"):
        params = qc.init_params(kind, 3, rng, scale=1.0)
        x = rng.uniform(-1.0, 1.0, 6)
        analytic = qc.gradient(params, x)
        worst = 0.0
        for k in range(params.n_params):
            step = np.zeros(params.n_params)
            step[k] = 1e-5
            plus = qc.CircuitParams(kind, 3, params.values + step)
            minus = qc.CircuitParams(kind, 3, params.values - step)
            fd = (qc.weight_of(plus, x) - qc.weight_of(minus, x)) / 2e-5
            # 1e-6 relative with a 1e-9 absolute floor under the FD noise
            worst = max(worst,
                        abs(fd - analytic[k]) - 1e-6 * abs(fd) - 1e-9)
        check(f"{kind} gradient vs finite differences", worst <= 0.0,
              f"worst excess {worst:.2e}")
    return failures


def _summary(command: str, config: dict, results: dict) -> str:
    return json.dumps({
        "command": command,
        "config": config,
        "version": __version__,
        "results": results,
    }, indent=2, sort_keys=True)


if __name__ == "__main__":
    sys.exit(main())
