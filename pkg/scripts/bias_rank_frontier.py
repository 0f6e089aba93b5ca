"""Largest bias among polynomials of rank > r, for each r, over a tiny field."""
import argparse
from collections import Counter

from hofa_lab.factors import bias_rank_frontier


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--p", type=int, default=2)
    ap.add_argument("--n", type=int, default=3)
    ap.add_argument("--d", type=int, default=2)
    ap.add_argument("--r-max", type=int, default=2)
    args = ap.parse_args()

    pairs, frontier = bias_rank_frontier(args.p, args.n, args.d, args.r_max)
    ranks = Counter("inf" if rk is None else rk for _, _, rk in pairs)
    print(f"{len(pairs)} polynomials of degree {args.d} over F_{args.p}^{args.n}")
    print("rank histogram:", dict(sorted(ranks.items(), key=str)))
    for pt in frontier:
        print(f"rank > {pt.rank_above}: {pt.count:5d} polys, max bias {pt.max_bias:.4f}")


if __name__ == "__main__":
    main()
