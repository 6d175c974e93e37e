"""Command line: ``subspar <command> ...``; every run writes outputs plus a ``manifest.json``."""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import math
import platform
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .cuts import min_st_cut_approx, sparsest_cut_driver
from .graph import load_edge_list, store_edge_list
from .hardness import binomial_anticoncentration, build_gkp
from .oracle import ConfigError, OracleError, OracleHandle, implicit_backend
from .sparsifier import PreconditionError, SparsifyConfig, max_delta, sublinear_sparsify
from .spectral import _jsonable, check_cut_sandwich, check_lower_bound, check_upper_bound, verify_resistance_sandwich

log = logging.getLogger("subspar")

EXIT_OK, EXIT_IO, EXIT_INVALID, EXIT_CHECK = 0, 1, 2, 3


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(_jsonable(obj), sort_keys=True, indent=2) + "\n")


def parse_implicit(spec: str, seed: int) -> OracleHandle:
    """``complete:N`` or ``stochastic-block:SIZES:PROBS``.

    PROBS is either ``p_in,p_out`` or a full row-major matrix.
    """
    kind, _, rest = spec.partition(":")
    try:
        if kind == "complete":
            return implicit_backend("complete", {"n": int(rest)})
        if kind in ("stochastic-block", "sbm"):
            sizes_s, _, probs_s = rest.partition(":")
            sizes = [int(x) for x in sizes_s.split(",")]
            probs = [float(x) for x in probs_s.split(",")]
            B = len(sizes)
            if len(probs) == 2:
                P = np.full((B, B), probs[1])
                np.fill_diagonal(P, probs[0])
            elif len(probs) == B * B:
                P = np.array(probs).reshape(B, B)
            else:
                raise ConfigError(f"expected 2 or {B * B} probabilities, got {len(probs)}")
            return implicit_backend("stochastic-block", {"sizes": sizes, "probs": P}, seed)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad implicit spec {spec!r}: {exc}") from exc
    raise ConfigError(f"unknown implicit graph kind {kind!r} (expected complete or stochastic-block)")


def _input_handle(args, inputs: dict) -> OracleHandle:
    if getattr(args, "implicit", None):
        return parse_implicit(args.implicit, args.seed)
    if not getattr(args, "input", None):
        raise ConfigError("give an edge-list path or --implicit")
    inputs[args.input] = sha256_file(args.input)
    return OracleHandle(load_edge_list(args.input))


def _sparsify_config(args, n: int) -> SparsifyConfig:
    delta = max_delta(n) if args.delta is None else args.delta
    return SparsifyConfig(epsilon=args.eps, delta=delta, q_multiplier=args.q_multiplier, seed=args.seed,
                          expander_mode=args.expander_mode, resparsify=not args.no_resparsify)


# -- commands ----------------------------------------------------------------------
# each returns (outputs: dict name->Path, summary: dict, passed: bool)

def cmd_sparsify(args, out: Path, inputs: dict):
    h = _input_handle(args, inputs)
    res = sublinear_sparsify(h, _sparsify_config(args, h.n))
    edges, report = out / "sparsifier.edges", out / "report.json"
    store_edge_list(res.graph, edges)
    rep = res.to_report()
    write_json(report, rep)
    summary = {"n": h.n, "edges": res.edges, "queries": res.query_report.total}
    return {"sparsifier": edges, "report": report}, summary, True


def cmd_verify(args, out: Path, inputs: dict):
    for p in (args.g, args.h):
        inputs[p] = sha256_file(p)
    g, h = load_edge_list(args.g), load_edge_list(args.h)
    delta = max_delta(g.n) if args.delta is None else args.delta
    if args.mode == "spectral":
        lo = check_lower_bound(g, h, args.eps, seed=args.seed)
        up = check_upper_bound(g, h, args.eps, delta, seed=args.seed)
        reports = [lo, up]
    elif args.mode == "cuts":
        reports = [check_cut_sandwich(g, h, args.eps, delta, seed=args.seed)]
    else:
        reports = [verify_resistance_sandwich(g, delta)]
    for r in reports:
        for w in r.warnings:
            print(f"warning: {w}", file=sys.stderr)
    path = out / "verify.json"
    write_json(path, [r.to_dict() for r in reports])
    passed = all(r.passed for r in reports)
    return {"verify": path}, {"passed": passed, "checks": [r.check for r in reports]}, passed


def cmd_sparsest_cut(args, out: Path, inputs: dict):
    h = _input_handle(args, inputs)
    cfg = SparsifyConfig(q_multiplier=args.q_multiplier, seed=args.seed, expander_mode=args.expander_mode)
    res = sparsest_cut_driver(h, alpha_estimate=args.alpha, cfg=cfg)
    path = out / "cut.json"
    write_json(path, res.to_dict())
    return {"cut": path}, {"ratio": res.ratio, "size": len(res.U), "iterations": res.iterations,
                           "certified": res.certified}, True


def cmd_min_st_cut(args, out: Path, inputs: dict):
    h = _input_handle(args, inputs)
    cfg = SparsifyConfig(q_multiplier=args.q_multiplier, seed=args.seed, expander_mode=args.expander_mode)
    res = min_st_cut_approx(h, args.s, args.t, args.eps, cfg)
    path = out / "cut.json"
    write_json(path, res.to_dict())
    return {"cut": path}, {"value": res.value, "size": len(res.U)}, True


def cmd_gadget(args, out: Path, inputs: dict):
    gad = build_gkp(args.k, args.p, args.seed, fill=args.fill)
    edges, meta = gad.save(out / "gadget")
    bad = gad.check()
    for b in bad:
        print(f"invariant violated: {b}", file=sys.stderr)
    return {"edges": edges, "sidecar": meta}, {"k": gad.k, "cut_S": gad.planted_cut(), "violations": bad}, not bad


def cmd_binom(args, out: Path, inputs: dict):
    res = binomial_anticoncentration(args.p, args.n)
    path = out / "binom.json"
    write_json(path, res)
    print(f"P = {res['min_probability']:.6f} {'PASS' if res['passed'] else 'FAIL'}")
    return {"binom": path}, {"min_probability": res["min_probability"], "passed": res["passed"]}, res["passed"]


def cmd_bench_queries(args, out: Path, inputs: dict):
    rows = []
    for n in args.sizes:
        h = implicit_backend("complete", {"n": n})
        cfg = SparsifyConfig(epsilon=args.eps, delta=args.delta, q_multiplier=args.q_multiplier, seed=args.seed,
                             expander_mode=args.expander_mode, resparsify=not args.no_resparsify)
        res = sublinear_sparsify(h, cfg)
        m = n * (n - 1) // 2
        total = res.query_report.total
        rows.append({"n": n, "m": m, "queries": total, "ratio": total / m,
                     "C_fit": total * args.delta * args.eps ** 2 / (n * math.log(n) ** 2)})
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    path = out / "bench.csv"
    path.write_text(buf.getvalue())
    decreasing = all(a["ratio"] > b["ratio"] for a, b in zip(rows, rows[1:]))
    return {"bench": path}, {"rows": rows, "ratio_decreasing": decreasing}, True


COMMANDS = {"sparsify": cmd_sparsify, "verify": cmd_verify, "sparsest-cut": cmd_sparsest_cut,
            "min-st-cut": cmd_min_st_cut, "gadget": cmd_gadget, "binom": cmd_binom,
            "bench-queries": cmd_bench_queries}


# -- parser ----------------------------------------------------------------------

def _sizes(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad size list {text!r}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="subspar", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, sparsifier=True, graph_input=False):
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", default=".", help="output directory")
        if graph_input:
            sp.add_argument("input", nargs="?", help="edge-list file")
            sp.add_argument("--implicit", help="complete:N or stochastic-block:SIZES:PROBS")
        if sparsifier:
            sp.add_argument("--q-multiplier", type=float, default=SparsifyConfig.q_multiplier)
            sp.add_argument("--expander-mode", default="random-regular", choices=["random-regular", "margulis"])

    s = sub.add_parser("sparsify", help="sparsify a graph through its oracles")
    common(s, graph_input=True)
    s.add_argument("--eps", type=float, default=0.5)
    s.add_argument("--delta", type=float, default=None, help="default 1/ln n")
    s.add_argument("--no-resparsify", action="store_true")

    s = sub.add_parser("verify", help="check a sparsifier against its source graph")
    common(s, sparsifier=False)
    s.add_argument("g")
    s.add_argument("h")
    s.add_argument("--eps", type=float, default=0.5)
    s.add_argument("--delta", type=float, default=None)
    s.add_argument("--mode", choices=["spectral", "cuts", "resistance"], default="spectral")

    s = sub.add_parser("sparsest-cut", help="sparsest cut via the delta-halving driver")
    common(s, graph_input=True)
    s.add_argument("--alpha", type=float, default=8.0)

    s = sub.add_parser("min-st-cut", help="additive-error minimum s-t cut")
    common(s, graph_input=True)
    s.add_argument("--s", type=int, required=True)
    s.add_argument("--t", type=int, required=True)
    s.add_argument("--eps", type=float, default=0.3)

    s = sub.add_parser("gadget", help="write a four-block gadget with its sidecar")
    common(s, sparsifier=False)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--fill", type=int, choices=[0, 1], default=None)

    s = sub.add_parser("binom", help="exact binomial anti-concentration check")
    common(s, sparsifier=False)
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--n", type=int, required=True)

    s = sub.add_parser("bench-queries", help="oracle calls on implicit complete graphs")
    common(s)
    s.add_argument("--eps", type=float, default=0.5)
    s.add_argument("--delta", type=float, default=0.1)
    s.add_argument("--sizes", type=_sizes, default=[500, 1000, 2000])
    s.add_argument("--no-resparsify", action="store_true")

    s = sub.add_parser("replay", help="re-run a manifest and compare output hashes")
    s.add_argument("manifest")
    s.add_argument("--out", default=None, help="directory for the re-run (default: a replay/ subdir)")
    return p


def _versions() -> dict:
    import networkx
    import scipy
    import sklearn
    return {"python": platform.python_version(), "subspar": __version__, "numpy": np.__version__,
            "scipy": scipy.__version__, "networkx": networkx.__version__, "scikit-learn": sklearn.__version__}


def run_command(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    inputs: dict = {}
    params = {k: v for k, v in vars(args).items() if k not in ("out", "verbose")}
    t0 = time.perf_counter()
    outputs, summary, passed = COMMANDS[args.command](args, out, inputs)
    manifest = {
        "command": args.command, "params": params, "seed": args.seed, "versions": _versions(),
        "inputs": inputs,
        "outputs": {k: {"path": p.name, "sha256": sha256_file(p)} for k, p in outputs.items()},
        "wall_clock_s": round(time.perf_counter() - t0, 3), "summary": summary, "passed": passed,
    }
    write_json(out / "manifest.json", manifest)
    print(json.dumps(_jsonable(summary), sort_keys=True))
    return EXIT_OK if passed else EXIT_CHECK


def replay(manifest_path: str, out: str | None) -> int:
    src = Path(manifest_path)
    man = json.loads(src.read_text())
    params = dict(man["params"])
    out_dir = Path(out) if out else src.parent / "replay"
    args = argparse.Namespace(**params, out=str(out_dir), verbose=False)
    for path, digest in man["inputs"].items():
        if sha256_file(path) != digest:
            print(f"input {path} changed since the original run", file=sys.stderr)
            return EXIT_CHECK
    run_command(args)
    new = json.loads((out_dir / "manifest.json").read_text())
    diffs = [k for k, v in man["outputs"].items() if new["outputs"].get(k, {}).get("sha256") != v["sha256"]]
    for k in diffs:
        print(f"output {k} differs", file=sys.stderr)
    print("identical" if not diffs else "DIFFERENT")
    return EXIT_CHECK if diffs else EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(message)s")
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            if args.command == "replay":
                return replay(args.manifest, args.out)
            return run_command(args)
    except PreconditionError as exc:
        print(f"error: precondition violated: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ConfigError, OracleError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
