"""Command-line entry point: ``chstab {certify,simulate,sweep,kernel,resolvent}``.

Exit codes: 0 success, 1 usage or I/O error, 2 inadmissible parameters
(certify) or an unbracketed sweep row, 3 a certified max-norm bound was
violated during a run.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig, load_config
from .graph import ResolventProblem, from_edge_list
from .io import ENERGY_HEADER, energy_row, fmt, write_snapshot
from .kernels import general_kernel, kernel_1d_periodic
from .stepper import (GraphBackend, NotBracketedError, StepperState, find_critical_tau,
                      initial_report, initial_state, make_backend, step)
from .theory import SchemeParams, certify

EXIT_OK, EXIT_USAGE, EXIT_INADMISSIBLE, EXIT_ALARM = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _csv(rows) -> str:
    return "\n".join(",".join(str(c) for c in row) for row in rows) + "\n"


# --------------------------------------------------------------------------- certify


def cmd_certify(args, out=sys.stdout) -> int:
    try:
        params = SchemeParams(args.nu, args.tau, args.A)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    linf = 0.0 if args.linf_u0 is None else args.linf_u0
    cert = certify(params, linf, args.M)
    rows = [("quantity", "value"), ("nu", fmt(params.nu)), ("tau", fmt(params.tau)), ("A", fmt(params.A)),
            ("A_cr", fmt(cert.A_cr)), ("beta", fmt(cert.beta)), ("M0", fmt(cert.M0)), ("M1", fmt(cert.M1)),
            ("M", fmt(cert.M)), ("linf_u0", fmt(linf)),
            ("verdict", "admissible" if cert.admissible else "inadmissible")]
    out.write(_csv(rows))
    if not cert.admissible:
        if params.A < cert.A_cr:
            reason = (f"A={params.A!r} is below A_cr={cert.A_cr!r}; the max-norm bound is not certified "
                      "for this setting (the scheme may still be stable in practice)")
        elif linf > cert.M:
            reason = f"initial max norm {linf!r} exceeds M={cert.M!r}"
        else:
            reason = f"M={cert.M!r} lies outside [M0, M1]"
        print(f"note: {reason}", file=sys.stderr)
        return EXIT_INADMISSIBLE
    return EXIT_OK


# --------------------------------------------------------------------------- simulate


def _overrides(args) -> dict:
    keys = ["scheme", "dim", "points_per_dim", "bc", "nu", "tau", "A", "steps", "seed", "initial",
            "snapshot_stride", "output_dir", "dealias"]
    return {k: getattr(args, k, None) for k in keys}


def run_simulation(config: RunConfig, out=sys.stdout) -> int:
    params = SchemeParams(config.nu, config.tau, config.A)
    backend = make_backend(config)
    state = initial_state(config, backend)
    v0 = backend.values(state.u)
    cert = certify(params, float(np.max(np.abs(v0))))
    if isinstance(backend, GraphBackend):
        bound = cert.M * (1 + 1e-12)
    else:
        bound = cert.M + 1e-8  # collocation aliasing sits outside the proof
    outdir = Path(config.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    violated_at = None
    with open(outdir / "energy.csv", "w", newline="\n") as fh:
        fh.write(ENERGY_HEADER + "\n")
        report = initial_report(state.u, config.nu, backend)
        fh.write(energy_row(0, 0.0, report) + "\n")
        stride = config.snapshot_stride
        if stride:
            write_snapshot(outdir / "snapshot_000000.chf", v0)
        for _ in range(config.steps):
            state = step(state, params, backend)
            report = state.history[-1]
            state = StepperState(state.n, state.t, state.u)
            fh.write(energy_row(state.n, state.t, report) + "\n")
            if stride and state.n % stride == 0:
                write_snapshot(outdir / f"snapshot_{state.n:06d}.chf", backend.values(state.u))
            if cert.admissible and violated_at is None and report.linf > bound:
                violated_at = state.n
    out.write(_csv([("quantity", "value"), ("steps", state.n), ("time", fmt(state.t)),
                    ("energy", fmt(report.energy)), ("linf", fmt(report.linf)), ("mean", fmt(report.mean)),
                    ("increment_l2", fmt(report.increment_l2)), ("grad_H_l2", fmt(report.grad_H_l2)),
                    ("dissipation_residual", fmt(report.dissipation_residual)),
                    ("certified", str(cert.admissible).lower()), ("M", fmt(cert.M))]))
    if violated_at is not None:
        print(f"ALARM: certified bound M={cert.M!r} exceeded at step {violated_at}", file=sys.stderr)
        return EXIT_ALARM
    return EXIT_OK


def cmd_simulate(args, out=sys.stdout) -> int:
    try:
        config = load_config(args.config, _overrides(args))
    except (ConfigError, OSError) as exc:
        raise UsageError(str(exc)) from None
    try:
        return run_simulation(config, out)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


# --------------------------------------------------------------------------- sweep


def sweep(config: RunConfig, A_list, tau_lo: float, tau_hi: float, rel_tol: float):
    """``[(A, tau_c or nan)]`` in input order."""
    rows = []
    for A in A_list:
        try:
            tau_c = find_critical_tau(config.replace(A=A), tau_lo, tau_hi, rel_tol)
        except NotBracketedError as exc:
            print(f"A={A!r}: {exc}", file=sys.stderr)
            tau_c = math.nan
        rows.append((A, tau_c))
    return rows


def cmd_sweep(args, out=sys.stdout) -> int:
    try:
        config = load_config(args.config, _overrides(args))
        A_list = [float(a) for a in args.A_list.split(",") if a.strip()]
        if not A_list:
            raise ValueError("empty A list")
        if not 0 < args.tau_lo <= args.tau_hi:
            raise ValueError("need 0 < tau_lo <= tau_hi")
    except (ConfigError, OSError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    rows = sweep(config, A_list, args.tau_lo, args.tau_hi, args.rel_tol)
    text = _csv([("A", "tau_c")] + [(fmt(A), fmt(t)) for A, t in rows])
    if args.output:
        Path(args.output).write_text(text)
    else:
        out.write(text)
    return EXIT_INADMISSIBLE if any(math.isnan(t) for _, t in rows) else EXIT_OK


# --------------------------------------------------------------------------- kernel / resolvent


def cmd_kernel(args, out=sys.stdout) -> int:
    try:
        kernel = kernel_1d_periodic(args.N, args.theta)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rows = [("name", "index", "value")]
    rows += [("c", j, fmt(c)) for j, c in enumerate(kernel.c)]
    rows += [("c_sum", "", fmt(np.sum(kernel.c))), ("epsilon_sharp", "", fmt(kernel.epsilon_sharp)),
             ("epsilon_perturbation", "", fmt(kernel.epsilon_perturbation))]
    out.write(_csv(rows))
    return EXIT_OK


def cmd_resolvent(args, out=sys.stdout) -> int:
    try:
        op = from_edge_list(Path(args.operator).read_text())
        if not args.k > 0:
            raise ValueError("k must be positive")
        if not op.conservative:
            raise ValueError("the general kernel needs a conservative operator")
        if not op.is_connected():
            raise ValueError("operator graph is disconnected; epsilon0 = 0 and no improved bound exists")
    except (OSError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    kernel = general_kernel(op, args.k)
    theta = ResolventProblem(op, args.k).theta
    rows = [("name", "index", "value"), ("N_v", "", kernel.N_v), ("k", "", fmt(args.k)), ("theta", "", fmt(theta)),
            ("epsilon0", "", fmt(kernel.epsilon0)), ("epsilon_perturbation", "", fmt(kernel.epsilon))]
    rows += [("row_sum", i, fmt(s)) for i, s in enumerate(kernel.columns.sum(axis=1))]
    out.write(_csv(rows))
    return EXIT_OK


# --------------------------------------------------------------------------- parser


def _add_run_options(p):
    p.add_argument("--config", help="key = value run configuration file")
    p.add_argument("--scheme", choices=["spectral", "graph"])
    p.add_argument("--dim", type=int)
    p.add_argument("--points-per-dim", "--N", dest="points_per_dim", type=int)
    p.add_argument("--bc", choices=["periodic", "dirichlet"])
    p.add_argument("--nu", type=float)
    p.add_argument("--tau", type=float)
    p.add_argument("--A", type=float)
    p.add_argument("--steps", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--initial")
    p.add_argument("--snapshot-stride", dest="snapshot_stride", type=int)
    p.add_argument("--output-dir", dest="output_dir")
    p.add_argument("--dealias", action="store_const", const=True, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="chstab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("certify", help="stability constants and verdict for (nu, tau, A)")
    p.add_argument("--nu", type=float, required=True)
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--A", type=float, required=True)
    p.add_argument("--linf-u0", dest="linf_u0", type=float)
    p.add_argument("--M", type=float, help="bound to certify (default M1)")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("simulate", help="run the scheme, write energy.csv and snapshots")
    _add_run_options(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="critical time step for each A")
    _add_run_options(p)
    p.add_argument("--A-list", dest="A_list", required=True, help="comma-separated A values")
    p.add_argument("--tau-lo", dest="tau_lo", type=float, required=True)
    p.add_argument("--tau-hi", dest="tau_hi", type=float, required=True)
    p.add_argument("--rel-tol", dest="rel_tol", type=float, default=1e-2)
    p.add_argument("--output")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("kernel", help="periodic 1D resolvent kernel and mean-zero constants")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--theta", type=float, required=True)
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("resolvent", help="general-graph kernel constants from an edge-list file")
    p.add_argument("--operator", required=True)
    p.add_argument("--k", type=float, required=True)
    p.set_defaults(func=cmd_resolvent)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, out)
    except UsageError as exc:
        print(f"chstab {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
