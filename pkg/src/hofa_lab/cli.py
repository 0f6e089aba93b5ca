"""Command-line front end.  JSON on stdout, logs on stderr.

Exit codes: 0 success, 1 failed verification, 2 invalid input, 3 budget exceeded.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time

import numpy as np

from .analytic import DIRECT_BUDGET, fourier, gowers_norm, t_average
from .codecs import complex_to_json, function_from_json, read_json, system_from_json
from .errors import BudgetError, HofaError, ValidationError
from .factors import DecomposeConfig, decompose, rank_gt
from .linsys import complexity_report, is_homogeneous_system

log = logging.getLogger("hofa_lab")


def _load_fn(path, p=None, n=None):
    return function_from_json(read_json(path), p, n)


def cmd_analyze_system(args) -> dict:
    S = system_from_json(read_json(args.file))
    rep = complexity_report(S)
    w = is_homogeneous_system(S)
    out = rep.to_json()
    out.update({"homogeneous": w is not None, "witness": None if w is None else list(w.coords)})
    return out


def cmd_gowers(args) -> dict:
    f = _load_fn(args.fn, args.p, args.n)
    return {"value": gowers_norm(f, args.k, args.method, args.budget), "method": args.method}


def cmd_average(args) -> dict:
    S = system_from_json(read_json(args.system))
    n = args.n
    fs = []
    for path in args.fn:
        f = _load_fn(path, S.p, n)
        n = f.n
        fs.append(f)
    if len(fs) == 1:
        fs = fs[0]
    t = t_average(S, fs, args.method, args.budget)
    return {"value": complex_to_json(t), "abs": abs(t), "method": args.method}


def cmd_fourier(args) -> dict:
    f = _load_fn(args.fn, args.p, args.n)
    spectrum = fourier(f, args.method)
    return {
        "value": [[float(c.real), float(c.imag)] for c in spectrum.coefficients],
        "method": args.method,
        "parseval_mass": spectrum.parseval_mass(),
    }


def cmd_decompose(args) -> dict:
    f = _load_fn(args.fn, args.p, args.n)
    cfg = DecomposeConfig(args.d, args.epsilon, args.delta, args.max_steps, args.growth)
    res = decompose(f, cfg)
    out = res.to_json()
    if out["rank_certificate"] is None and res.factor.polys:
        out["rank_certificate"] = rank_gt(res.factor.polys, 0).to_json()
    out["method"] = "energy-increment"
    return out


def cmd_verify(args) -> dict:
    from . import suite

    if args.criterion:
        numbers = sorted(set(args.criterion))
        unknown = [c for c in numbers if c not in suite.CRITERIA]
        if unknown:
            raise ValidationError(f"unknown criteria {unknown}")
    elif args.suite == "all":
        numbers = None
    else:
        raise ValidationError("give --suite all or --criterion N")
    results = suite.run_all(numbers)
    table = suite.summary_text(results)
    print(table, file=sys.stderr)
    return {
        "passed": all(r.passed for r in results),
        "criteria": [r.to_json() for r in results],
        "table": table.splitlines(),
    }


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hofa-lab", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def fn_opts(sp, multiple=False):
        if multiple:
            sp.add_argument("--fn", nargs="+", required=True, help="function JSON file(s)")
        else:
            sp.add_argument("--fn", required=True, help="function JSON file")
        sp.add_argument("--p", type=int, help="field size for generator specs without p")
        sp.add_argument("--n", type=int, help="dimension for generator specs without n")
        sp.add_argument("--budget", type=int, default=DIRECT_BUDGET)

    sp = sub.add_parser("analyze-system", help="complexities and homogeneity of a system")
    sp.add_argument("--file", required=True)
    sp.set_defaults(run=cmd_analyze_system)

    sp = sub.add_parser("gowers", help="Gowers U^k norm")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--method", choices=["fourier", "recursive", "direct"], default="fourier")
    fn_opts(sp)
    sp.set_defaults(run=cmd_gowers)

    sp = sub.add_parser("average", help="linear-form average t_L")
    sp.add_argument("--system", required=True)
    sp.add_argument("--method", choices=["auto", "naive", "fourier"], default="auto")
    fn_opts(sp, multiple=True)
    sp.set_defaults(run=cmd_average)

    sp = sub.add_parser("fourier", help="Fourier coefficients")
    sp.add_argument("--method", choices=["fast", "direct"], default="fast")
    fn_opts(sp)
    sp.set_defaults(run=cmd_fourier)

    sp = sub.add_parser("decompose", help="energy-increment decomposition")
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--epsilon", type=float, required=True)
    sp.add_argument("--delta", type=float)
    sp.add_argument("--max-steps", type=int)
    sp.add_argument("--growth", help="growth function, e.g. 'r(C)=C+1'")
    fn_opts(sp)
    sp.set_defaults(run=cmd_decompose)

    sp = sub.add_parser("verify", help="run acceptance criteria")
    sp.add_argument("--suite", choices=["all"])
    sp.add_argument("--criterion", type=int, action="append")
    sp.set_defaults(run=cmd_verify)
    return ap


def _default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, complex):
        return [o.real, o.imag]
    if isinstance(o, (np.ndarray, tuple, set)):
        return list(o)
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(stream=sys.stderr, level=logging.INFO if args.verbose else logging.WARNING)
    t0 = time.perf_counter()
    try:
        out = args.run(args)
    except BudgetError as exc:
        log.error("%s", exc)
        print(json.dumps({"error": "budget", "message": str(exc)}))
        return 3
    except (ValidationError, HofaError) as exc:
        log.error("%s", exc)
        print(json.dumps({"error": "validation", "message": str(exc)}))
        return 2
    out["runtime_ms"] = (time.perf_counter() - t0) * 1e3
    print(json.dumps(out, default=_default))
    if args.command == "verify" and not out["passed"]:
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
