"""Mesh-refinement table for one kind: finite differences against the mode solver.

    python3 scripts/convergence_study.py --kind deltaprime_vs_neumann --beta -1 --n 3
"""

import argparse

from deltashell import fd_oracle, modes
from deltashell.geometry import Hypersurface
from deltashell.kinds import Kind


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--kind", default="delta_vs_free", choices=[k.value for k in Kind])
    ap.add_argument("--alpha", type=float, default=1.0)
    ap.add_argument("--beta", type=float, default=1.0)
    ap.add_argument("--n", type=int, default=2, choices=(2, 3))
    ap.add_argument("--m0", type=float, default=1.0)
    ap.add_argument("--modes", type=int, default=10)
    ap.add_argument("--levels", type=int, default=4)
    args = ap.parse_args()

    kind = Kind(args.kind)
    strength = {"alpha": args.alpha} if kind.uses_alpha else (
        {"beta": args.beta} if kind.uses_beta else {})
    surface = Hypersurface.circle() if args.n == 2 else Hypersurface.sphere()
    table = modes.mode_table(surface, args.m0, args.modes)
    exact = modes.krein_mode_values(kind, table, **strength)
    hs = [4e-3 / 2**i for i in range(args.levels)]
    print(f"{'mode':>4} {'h':>9} {'fd value':>22} {'rel error':>10} {'order':>6}")
    for k in range(args.modes + 1):
        errs = []
        for h in hs:
            mesh = fd_oracle.RadialMesh.build(args.n, 1.0, h, k, args.m0)
            val = fd_oracle.fd_resolvent_difference(kind, mesh, args.m0, **strength)
            errs.append(abs(val - exact[k]) / exact[k])
            order = fd_oracle.observed_orders(errs[-2:])[0] if len(errs) > 1 else float("nan")
            print(f"{k:>4} {h:>9.2e} {val:>22.15e} {errs[-1]:>10.2e} {order:>6.3f}")


if __name__ == "__main__":
    main()
