"""Energy growth without stabilization, and its disappearance once A is large enough.

Runs the same initial data at one large step with A = 0 and with A at the
certified threshold, and reports the first step (if any) at which the
discrete energy rises.

    python scripts/instability_demo.py --tau 0.05
"""

import argparse

import numpy as np

from chstab.config import RunConfig
from chstab.stepper import StepperState, initial_state, make_backend, step
from chstab.theory import SchemeParams, critical_A


def first_energy_rise(config: RunConfig) -> tuple[int | None, float]:
    params = SchemeParams(config.nu, config.tau, config.A)
    backend = make_backend(config)
    state = initial_state(config, backend)
    peak = 0.0
    with np.errstate(all="ignore"):
        for n in range(1, config.steps + 1):
            state = step(state, params, backend)
            r = state.history[-1]
            state = StepperState(state.n, state.t, state.u)
            peak = max(peak, r.linf) if np.isfinite(r.linf) else np.inf
            if not np.isfinite(r.energy) or r.dissipation_residual < -1e-10 * (1 + abs(r.energy)):
                return n, peak
    return None, peak


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nu", type=float, default=0.001)
    ap.add_argument("--tau", type=float, default=0.05)
    ap.add_argument("--N", type=int, default=128)
    ap.add_argument("--steps", type=int, default=400)
    args = ap.parse_args()
    base = RunConfig(points_per_dim=args.N, nu=args.nu, tau=args.tau, steps=args.steps)
    for A in (0.0, critical_A(args.nu, args.tau)):
        n, peak = first_energy_rise(base.replace(A=A))
        verdict = f"energy rises at step {n}" if n else "energy monotone"
        print(f"A={A:.4f}: {verdict}; max ||u||_inf = {peak:.4g}")


if __name__ == "__main__":
    main()
