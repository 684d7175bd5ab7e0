"""Mean-zero contraction constants of the periodic resolvent kernel.

Tabulates the sharp constant next to the cruder ``1 - N min c`` bound.

    python scripts/kernel_constants.py --max-N 12
"""

import argparse

from chstab.kernels import kernel_1d_periodic


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--max-N", type=int, default=10)
    ap.add_argument("--thetas", default="0.1,0.5,0.9,0.99")
    args = ap.parse_args()
    print("N,theta,epsilon_sharp,epsilon_perturbation")
    for N in range(2, args.max_N + 1):
        for theta in (float(t) for t in args.thetas.split(",")):
            k = kernel_1d_periodic(N, theta)
            print(f"{N},{theta!r},{k.epsilon_sharp!r},{k.epsilon_perturbation!r}")


if __name__ == "__main__":
    main()
