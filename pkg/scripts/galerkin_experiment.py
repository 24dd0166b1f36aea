"""Sensitivity of the variable-strength fit to truncation and guard band.

    python3 scripts/galerkin_experiment.py --alpha 2 0.5 --m0 2
"""

import argparse

from deltashell import modes
from deltashell.asymptotics import fit_constant
from deltashell.errors import AdmissibilityError
from deltashell.geometry import CoefficientField, Hypersurface
from deltashell.kinds import Kind
from deltashell.seeley import predict
from deltashell.strengths import FourierStrength


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--alpha", type=float, nargs="+", default=[2.0, 0.5],
                    help="real Fourier coefficients a0 a1 ...")
    ap.add_argument("--m0", type=float, default=2.0)
    ap.add_argument("--cutoffs", type=int, nargs="+", default=[500, 1000, 1500])
    ap.add_argument("--guard-fractions", type=float, nargs="+", default=[0.1, 0.25, 0.4])
    args = ap.parse_args()

    disk = Hypersurface.circle()
    strength = FourierStrength(tuple(args.alpha))
    c_ref = predict(Kind.DELTA_VS_FREE, disk, CoefficientField.identity(2), strength).constant
    print(f"reference constant {c_ref:.10f}")
    print(f"{'K':>5} {'guard':>5} {'values':>6} {'C_est':>12} {'rel err':>9} {'slope':>7}")
    for K in args.cutoffs:
        for frac in args.guard_fractions:
            guard = int(frac * K)
            try:
                spectrum = modes.fourier_galerkin_singular_values(strength, disk, args.m0, K, guard)
            except AdmissibilityError as exc:
                print(f"inadmissible: {exc}")
                return
            lo = min(500, len(spectrum) // 4)
            rep = fit_constant(spectrum, 3, (lo, len(spectrum)), c_ref=c_ref)
            slope = float("nan") if rep.remainder_slope is None else rep.remainder_slope
            print(f"{K:>5} {guard:>5} {len(spectrum):>6} {rep.C_est:>12.7f} "
                  f"{rep.rel_error:>9.2e} {slope:>7.3f}")


if __name__ == "__main__":
    main()
