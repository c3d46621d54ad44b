"""Command-line front end: ingest, lp, simulate, bounds, audit, report.

Every randomized command takes a mandatory --seed and is byte-reproducible
from (flags, seed); trial batches are split into fixed-size chunks with
per-chunk derived generators, so --jobs changes wall time but never output.

Exit codes: 0 success (audit pass), 1 audit failure, 2 usage/parse error,
3 solver or infeasibility error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import audit as audit_mod
from . import bounds as bounds_mod
from . import protocol as proto
from .graph import (DatasetRecord, GraphParseError, TrustGraph, load_registry,
                    make_threshold, parse_edge_list)
from .lp import (FractionalCover, LpError, approx_cover, solve_cover,
                 solve_robust_cover)

CHUNK_TRIALS = 4096


def _load_graph(path: str) -> TrustGraph:
    return TrustGraph.load(path)


def _load_thresholds(g: TrustGraph, args) -> tuple[int, ...] | None:
    if getattr(args, "t_file", None):
        t = json.loads(Path(args.t_file).read_text())
        return tuple(int(v) for v in t)
    if getattr(args, "t_alpha", None) is not None:
        return make_threshold(g, args.t_alpha)
    return None


def _write_or_print(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_ingest(args) -> int:
    text = Path(args.edges).read_text()
    g = parse_edge_list(text, fmt=args.format)
    g.save(args.out)
    print(f"n={g.n} edges={g.num_edges()} maxdeg={g.max_degree()}")
    return 0


def cmd_lp(args) -> int:
    g = _load_graph(args.graph)
    t = _load_thresholds(g, args)
    if args.approx:
        if t is not None:
            raise LpError("approximate solver only supports the plain LP")
        cover = approx_cover(g, eps=args.approx_eps)
    elif t is not None:
        cover = solve_robust_cover(g, t)
    else:
        cover = solve_cover(g)
    if args.out:
        cover.save(args.out)
    flag = " (approximate)" if cover.approximate else ""
    print(f"OPT={cover.objective:.2f} ratio={cover.objective / g.n:.3f}{flag}")
    return 0


def _chunk_worker(payload) -> tuple[int, np.ndarray, np.ndarray]:
    idx, g, protocol, kwargs, trials, seed = payload
    rng = np.random.default_rng([seed, idx])
    if protocol in ("lp", "robust"):
        run = proto.simulate_lp_batch(g, kwargs["cover"], kwargs["x"],
                                      kwargs["eps"], kwargs["delta"], trials, rng)
    elif protocol == "domset":
        run = proto.simulate_domset_batch(g, kwargs["domset"], kwargs["x"],
                                          kwargs["eps"], kwargs["delta"],
                                          trials, rng)
    elif protocol == "vecsum":
        run = proto.simulate_vecsum_batch(g, kwargs["domset"], kwargs["xvec"],
                                          kwargs["norm_bound"], kwargs["rho"],
                                          trials, rng)
    elif protocol == "real":
        run = proto.simulate_real_batch(g, kwargs["cover"], kwargs["xreal"],
                                        kwargs["eps"], kwargs["grid"],
                                        trials, rng)
    else:
        raise ValueError(protocol)
    return idx, run.estimates, run.truth


def _run_chunked(g, protocol, kwargs, trials, seed, jobs):
    payloads = []
    done = 0
    idx = 0
    while done < trials:
        size = min(CHUNK_TRIALS, trials - done)
        payloads.append((idx, g, protocol, kwargs, size, seed))
        done += size
        idx += 1
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_chunk_worker, payloads))
    else:
        results = [_chunk_worker(p) for p in payloads]
    results.sort(key=lambda r: r[0])
    estimates = np.concatenate([r[1] for r in results])
    truth = np.concatenate([r[2] for r in results])
    return estimates, truth


def _parse_inputs(spec: str, g: TrustGraph, delta: int) -> list[int]:
    if spec == "zeros":
        return [0] * g.n
    if spec == "max":
        return [delta] * g.n
    vals = [int(s) for s in spec.split(",")]
    if len(vals) != g.n:
        raise GraphParseError(f"expected {g.n} inputs, got {len(vals)}")
    return vals


def cmd_simulate(args) -> int:
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    g = _load_graph(args.graph)
    kwargs: dict = {"eps": args.eps, "delta": args.delta}

    if args.protocol in ("lp", "robust", "real"):
        if args.cover:
            cover = FractionalCover.load(args.cover)
        else:
            t = _load_thresholds(g, args)
            cover = solve_robust_cover(g, t) if t is not None else solve_cover(g)
        kwargs["cover"] = cover
    if args.protocol in ("domset", "vecsum"):
        if args.domset:
            domset = [int(s) for s in args.domset.split(",")]
        else:
            domset = list(bounds_mod.greedy_dominating_set(g).vertices)
        kwargs["domset"] = domset
    if args.protocol in ("lp", "robust", "domset"):
        kwargs["x"] = _parse_inputs(args.inputs, g, args.delta)
    if args.protocol == "vecsum":
        kwargs["xvec"] = np.zeros((g.n, args.dim))
        kwargs["norm_bound"] = args.norm_bound
        kwargs["rho"] = args.rho
    if args.protocol == "real":
        kwargs["xreal"] = np.zeros(g.n)
        kwargs["grid"] = args.grid

    estimates, truth = _run_chunked(g, args.protocol, kwargs, args.trials,
                                    args.seed, args.jobs)

    lines = ["trial,estimate,truth,sq_error"]
    for i in range(args.trials):
        if estimates.ndim == 2:
            est = ";".join(repr(x) for x in estimates[i].tolist())
            tru = ";".join(repr(x) for x in truth[i].tolist())
            sq = float(((estimates[i] - truth[i]) ** 2).sum())
        else:
            est, tru = repr(estimates[i].item()), repr(truth[i].item())
            sq = float((estimates[i] - truth[i]) ** 2)
        lines.append(f"{i},{est},{tru},{sq!r}")
    _write_or_print("\n".join(lines) + "\n", args.out)

    err = (estimates - truth).astype(float)
    mse = float((err ** 2).sum(axis=-1).mean()) if err.ndim == 2 else float(
        (err ** 2).mean())
    print(f"trials={args.trials} mse={mse:.6g}", file=sys.stderr)
    return 0


def cmd_bounds(args) -> int:
    g = _load_graph(args.graph)
    t = _load_thresholds(g, args)
    cap_pack = args.cap if args.force else 32
    cap_dom = args.cap if args.force else 64
    report = bounds_mod.gap_report(g, t, exact=args.exact,
                                   packing_cap=cap_pack, domset_cap=cap_dom)
    payload = report.to_json_dict()
    if args.round is not None:
        if args.seed is None:
            raise UsageError("--round needs --seed")
        from .lp import robust_dual_multipliers
        t_eff = t if t is not None else (0,) * g.n
        dual = robust_dual_multipliers(g, t_eff)
        rng = np.random.default_rng(args.seed)
        sizes = [bounds_mod.rounded_robust_packing(g, t_eff, args.round, dual,
                                                   rng).size
                 for _ in range(args.reps)]
        payload["rounding"] = {
            "alpha": args.round, "reps": args.reps,
            "mean_size": float(np.mean(sizes)),
            "expected_lower_bound": args.round / 8.0 * dual.objective,
        }
    _write_or_print(json.dumps(payload, indent=2, sort_keys=True), args.out)
    return 0


def cmd_audit(args) -> int:
    g = _load_graph(args.graph)
    t = _load_thresholds(g, args)
    if args.cover:
        cover = FractionalCover.load(args.cover)
    else:
        cover = solve_robust_cover(g, t) if t is not None else solve_cover(g)

    if args.mc:
        if args.seed is None or args.vertex is None:
            raise UsageError("--mc needs --seed and --vertex")
        report = audit_mod.monte_carlo_view_audit(
            g, cover, args.eps, args.vertex, args.trials,
            np.random.default_rng(args.seed), delta_sens=args.delta)
    else:
        report = audit_mod.exact_statistic_audit(g, cover, args.eps,
                                                 args.delta, t)
    if args.out:
        Path(args.out).write_text(json.dumps(report.to_json_dict(), indent=2,
                                             sort_keys=True))
    worst = report.worst
    status = "PASS" if report.passed else "FAIL"
    detail = (f" worst_vertex={worst.vertex} ratio={worst.ratio:.6g}"
              if worst else "")
    print(f"{status} method={report.method} eps={report.eps}{detail}")
    return 0 if report.passed else 1


def cmd_report(args) -> int:
    if args.table == "tgdp":
        lines = ["dataset,n,opt_lp,ratio,packing"]
        for rec in _registry(args):
            try:
                g = rec.load(root=os.environ.get("TGDP_DATA_DIR"))
                cover = solve_cover(g)
                pack = bounds_mod.maximal_packing(g)
                lines.append(f"{rec.name},{g.n},{cover.objective:.2f},"
                             f"{cover.objective / g.n:.3f},{pack.size}")
            except (OSError, GraphParseError, LpError) as exc:
                print(f"{rec.name}: {exc}", file=sys.stderr)
        _write_or_print("\n".join(lines) + "\n", args.out)
        return 0
    if args.table == "rtgdp":
        g = _load_graph(args.graph)
        alphas = [float(s) for s in args.alphas.split(",")]
        points = audit_mod.rtgdp_curve(g, alphas, eps=args.eps)
        lines = ["alpha,opt_lp_t,ratio"]
        for pt in points:
            lines.append(f"{pt.alpha},{pt.opt:.4f},{pt.ratio:.6f}")
        _write_or_print("\n".join(lines) + "\n", args.out)
        return 0
    if args.table == "gaps":
        lines = ["dataset,n,opt_lp,domset,ratio,domset_exact"]
        for rec in _registry(args):
            try:
                g = rec.load(root=os.environ.get("TGDP_DATA_DIR"))
                rep = bounds_mod.gap_report(g, exact=args.exact)
                lines.append(
                    f"{rec.name},{g.n},{rep.opt_lp:.2f},{rep.domset_size},"
                    f"{rep.opt_lp / rep.domset_size:.4f},{rep.domset_exact}")
            except (OSError, GraphParseError, LpError,
                    bounds_mod.CapExceededError) as exc:
                print(f"{rec.name}: {exc}", file=sys.stderr)
        _write_or_print("\n".join(lines) + "\n", args.out)
        return 0
    raise UsageError(f"unknown table {args.table!r}")


def _registry(args) -> list[DatasetRecord]:
    if not args.datasets:
        return []
    return load_registry(args.datasets)


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

class UsageError(ValueError):
    pass


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="tgdp",
        description="Differentially private aggregation over trust graphs")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("ingest", help="parse a raw edge list into graph JSON")
    sp.add_argument("--edges", required=True)
    sp.add_argument("--format", default="snap", choices=["snap", "bitcoin-csv"])
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_ingest)

    sp = sub.add_parser("lp", help="solve the (robust) covering LP")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--alpha", dest="t_alpha", type=float)
    sp.add_argument("--t-file")
    sp.add_argument("--out")
    sp.add_argument("--approx", action="store_true",
                    help="multiplicative-weights approximate solver")
    sp.add_argument("--approx-eps", type=float, default=1e-3)
    sp.set_defaults(func=cmd_lp)

    sp = sub.add_parser("simulate", help="run seeded protocol trials")
    sp.add_argument("--protocol", required=True,
                    choices=["domset", "lp", "robust", "vecsum", "real"])
    sp.add_argument("--graph", required=True)
    sp.add_argument("--eps", type=float, default=1.0)
    sp.add_argument("--delta", type=int, default=1,
                    help="integer sensitivity bound")
    sp.add_argument("--trials", type=int, required=True)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--cover")
    sp.add_argument("--alpha", dest="t_alpha", type=float)
    sp.add_argument("--t-file")
    sp.add_argument("--domset", help="comma-separated dominating set")
    sp.add_argument("--rho", type=float, default=1.0)
    sp.add_argument("--norm-bound", type=float, default=1.0)
    sp.add_argument("--dim", type=int, default=1)
    sp.add_argument("--grid", type=int, default=100)
    sp.add_argument("--inputs", default="zeros",
                    help='"zeros", "max", or comma-separated integers')
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("bounds", help="packing/dominating-set gap report")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--alpha", dest="t_alpha", type=float)
    sp.add_argument("--t-file")
    sp.add_argument("--exact", action="store_true")
    sp.add_argument("--force", action="store_true",
                    help="lift the exact-solver caps to --cap")
    sp.add_argument("--cap", type=int, default=256)
    sp.add_argument("--round", type=float,
                    help="run randomized rounding at this alpha")
    sp.add_argument("--reps", type=int, default=1000)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_bounds)

    sp = sub.add_parser("audit", help="privacy certification")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--eps", type=float, required=True)
    sp.add_argument("--delta", type=int, default=1)
    sp.add_argument("--cover")
    sp.add_argument("--alpha", dest="t_alpha", type=float)
    sp.add_argument("--t-file")
    sp.add_argument("--mc", action="store_true",
                    help="Monte-Carlo view audit instead of the exact one")
    sp.add_argument("--vertex", type=int)
    sp.add_argument("--trials", type=int, default=1_000_000)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_audit)

    sp = sub.add_parser("report", help="emit experiment tables as CSV")
    sp.add_argument("--table", required=True, choices=["tgdp", "rtgdp", "gaps"])
    sp.add_argument("--datasets", help="dataset registry JSON")
    sp.add_argument("--graph")
    sp.add_argument("--alphas", default="0,0.1,0.25,0.5,0.75,1")
    sp.add_argument("--eps", type=float)
    sp.add_argument("--exact", action="store_true")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, GraphParseError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (LpError, proto.ProtocolError, bounds_mod.CapExceededError,
            ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
