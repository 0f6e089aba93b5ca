"""Tabulate (true, Cauchy-Schwarz) complexity pairs over all small systems."""
import argparse
from collections import Counter

from hofa_lab.linsys import cs_complexity, systems_up_to_isomorphism, true_complexity


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--p", type=int, default=5)
    ap.add_argument("--k", type=int, default=2)
    ap.add_argument("--m-max", type=int, default=4)
    args = ap.parse_args()

    systems = systems_up_to_isomorphism(args.p, args.k, args.m_max, pairwise_independent=True)
    pairs = Counter()
    gaps = []
    for S in systems:
        t, s = true_complexity(S), cs_complexity(S).s
        pairs[(S.m, t, s)] += 1
        if t < s:
            gaps.append(S)
    print(f"{len(systems)} classes (p={args.p}, k={args.k}, m<={args.m_max})")
    print(" m  true  cs  count")
    for (m, t, s), c in sorted(pairs.items()):
        print(f"{m:2d}  {t:4d}  {s:2d}  {c:5d}")
    print(f"{len(gaps)} classes with true < cs")
    for S in gaps[:5]:
        print("  ", [list(L.coeffs) for L in S.forms])


if __name__ == "__main__":
    main()
