"""Shrink ||f_1||_{U^{d+1}} by growing n and watch |t| follow.

f_1 = e_p(sum_i x_i^{d+1}), remaining functions are 1.
"""
import argparse
import json

from hofa_lab.experiments import verify_strong_independence
from hofa_lab.linsys import arithmetic_progression


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--p", type=int, default=5)
    ap.add_argument("--length", type=int, default=3, help="progression length")
    ap.add_argument("--d", type=int, default=1)
    ap.add_argument("--n-max", type=int, default=3)
    args = ap.parse_args()

    S = arithmetic_progression(args.length, args.p)
    report = verify_strong_independence(S, args.d, n_range=range(1, args.n_max + 1))
    for row in report.measurements:
        print(f"n={row['n']}  ||f_1||_U{args.d + 1}={row['norm_d']:.6f}  |t|={row['abs_t']:.6f}")
    print(json.dumps({"passed": report.passed, "vacuous": report.vacuous, "notes": report.notes}))


if __name__ == "__main__":
    main()
