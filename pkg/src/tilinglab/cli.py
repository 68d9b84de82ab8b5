"""Command line interface: ``tilinglab {gen|tile|lp|pipeline|regcheck|bounds|sweep}``."""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from tilinglab import absorber, bounds, generators, harness, regularity, startile, tiler
from tilinglab.errors import BudgetExceeded, ConfigError, TilingLabError
from tilinglab.mpgraph import PartiteGraph, deserialize, serialize


def _read_graph(path: str) -> PartiteGraph:
    data = sys.stdin.buffer.read() if path == "-" else Path(path).read_bytes()
    return deserialize(data)


def _emit(obj) -> None:
    json.dump(obj, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")


def cmd_gen(a) -> int:
    spec = generators.RandomSpec(a.p or 0.0, a.seed)
    if a.kind == "random":
        g = generators.gen_random(a.r, a.n, spec)
    elif a.kind == "extremal":
        g = generators.gen_extremal(a.r, a.n, a.alpha)
    elif a.kind == "sublinear":
        g = generators.gen_sublinear(a.r, a.n, a.omega)
    else:
        g = generators.gen_superregular_star(a.r, a.n, a.d, spec)
    if a.kind in ("extremal", "sublinear") and a.p:
        g = g | generators.gen_random(a.r, a.n, spec)
    data = serialize(g)
    if a.out:
        Path(a.out).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
    return 0


def cmd_tile(a) -> int:
    g = _read_graph(a.graph)
    if a.greedy:
        t = tiler.greedy_partial_tiling(g, a.seed)
        out = {"status": "perfect" if t.is_perfect else "partial",
               "leftover_per_part": t.leftover()[0],
               "uncovered": [f"{p + 1}:{i + 1}" for p, i in map(g.ref, t.uncovered())], **t.to_json()}
    else:
        stats = tiler.TilingSearchStats()
        try:
            t = tiler.exact_perfect_tiling(g, budget=a.budget, stats=stats)
        except BudgetExceeded as exc:
            _emit({"status": "budget_exceeded", "reason": exc.reason, "expansions": exc.expansions})
            return 0
        out = {"status": "no_tiling"} if t is None else {"status": "perfect", **t.to_json()}
        out["search"] = {"cliques": stats.cliques, "expansions": stats.expansions, "pruned": stats.pruned}
    if "copies" in out:
        out["valid"] = tiler.validate_tiling(g, t, require_perfect=out["status"] == "perfect")
    _emit(out)
    return 0


def cmd_lp(a) -> int:
    g = _read_graph(a.graph)
    res = startile.solve_fractional(g, a.t)
    out = startile.fractional_to_json(g, res)
    out["t"] = a.t
    out["verified"] = (startile.verify_fractional(g, res) if isinstance(res, startile.FractionalTiling)
                       else startile.verify_certificate(g, a.t, res))
    _emit(out)
    return 0


def cmd_pipeline(a) -> int:
    if a.graph:
        g = _read_graph(a.graph)
    else:
        g = generators.gen_superregular_star(a.r, a.n, a.d, generators.RandomSpec(0.0, a.seed))
    p = a.p if a.p is not None else min(1.0, 8 * math.log(g.n) / g.n)
    cfg = absorber.PipelineConfig(a.d, a.delta, p, a.seed, attempts=a.attempts)
    res = absorber.star_tiling_pipeline(g, cfg)
    out = res.to_json()
    out["config"] = {"d": cfg.d, "delta": cfg.delta, "p": cfg.p, "seed": cfg.seed, "attempts": cfg.attempts}
    if res.tiling is not None:
        out["valid"] = tiler.validate_tiling(res.perturbed, res.tiling)
    _emit(out)
    return 0


def cmd_regcheck(a) -> int:
    g = _read_graph(a.graph)
    try:
        i, j = (int(x) - 1 for x in a.pair.split(":"))
    except ValueError:
        raise ConfigError(f"--pair must look like i:j, got {a.pair!r}")
    if not (0 <= i < g.r and 0 <= j < g.r):
        raise ConfigError(f"--pair parts must lie in 1..{g.r}")
    params = regularity.RegularityParams(a.epsilon, a.d)
    report, ok = regularity.check_superregular(g, g.part_vertices(i), g.part_vertices(j), params,
                                               mode=a.mode, samples=a.samples, seed=a.seed)
    _emit({"superregular": ok, "pair": a.pair, "epsilon": a.epsilon, "d": a.d, **report.to_json()})
    return 0


def cmd_bounds(a) -> int:
    f = a.formula
    if f == "chernoff":
        out = {"mu": a.mu, "xi": a.xi, "two_sided": bounds.chernoff_tail(a.mu, a.xi)}
        if a.k is not None:
            out["k"] = a.k
            out["upper_tail"] = bounds.chernoff_upper_tail(a.mu, a.k)
    elif f == "janson":
        if a.mu is not None:
            j = bounds.JansonInput(a.mu, a.delta_bar or 0.0, a.mu_prime if a.mu_prime is not None else a.mu)
        else:
            j = bounds.fixed_vertex_janson(a.r, a.n, a.p)
        t = a.t if a.t is not None else j.mu
        b = bounds.janson_bounds(j, t)
        out = {"mu": j.mu, "delta_bar": j.delta_bar, "mu_prime": j.mu_prime, "t": t,
               "lower_P_S0": b.lower_p_s0, "upper_P_S0": b.upper_p_s0,
               "upper_P_S0_weak": b.upper_p_s0_weak, "lower_tail": b.lower_tail,
               "lower_tail_phi": b.lower_tail_phi}
    elif f == "krmoments":
        mu, delta = bounds.kr_count_moments(a.r, a.n, a.p, a.m)
        out = {"r": a.r, "n": a.n, "m": a.m or a.n, "p": a.p, "mu": float(mu), "delta_bar": float(delta)}
    else:
        p = a.p if a.p is not None else bounds.sublinear_p(a.r, a.n, a.omega)
        mom = bounds.isolated_vertex_moments(a.r, a.n, p, a.omega)
        out = {"r": a.r, "n": a.n, "p": p, "omega": a.omega, **mom.__dict__}
    _emit(out)
    return 0


def cmd_sweep(a) -> int:
    cfg = harness.SweepConfig.from_json(a.config)
    res = harness.sweep(cfg, threads=a.threads, out_dir=a.out_dir, resume=a.resume, gnuplot=not a.no_gnuplot)
    s = res.summary()
    print(f"{s['total_trials']} trials -> {a.out_dir}/results.csv; exponent estimate {s['exponent_estimate']}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tilinglab", description="Randomly perturbed multipartite K_r-tiling lab")
    sub = ap.add_subparsers(dest="cmd", required=True)

    s = sub.add_parser("gen", help="generate a graph in the text edge-list format")
    s.add_argument("--kind", choices=["random", "extremal", "sublinear", "star"], default="random")
    s.add_argument("--r", type=int, default=3)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--p", type=float, default=None, help="edge probability (random kind, or perturbation)")
    s.add_argument("--alpha", type=float, default=0.1)
    s.add_argument("--omega", type=float, default=2.0)
    s.add_argument("--d", type=float, default=0.4)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("tile", help="exact or greedy K_r-tiling of a graph file")
    s.add_argument("graph")
    mode = s.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true", default=True)
    mode.add_argument("--greedy", action="store_true")
    s.add_argument("--budget", type=int, default=200_000)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_tile)

    s = sub.add_parser("lp", help="perfect fractional labeled-star tiling or Farkas certificate")
    s.add_argument("graph")
    s.add_argument("--t", type=int, required=True)
    s.set_defaults(func=cmd_lp)

    s = sub.add_parser("pipeline", help="star-tiling pipeline on a star host")
    s.add_argument("graph", nargs="?", default=None)
    s.add_argument("--r", type=int, default=3)
    s.add_argument("--n", type=int, default=60)
    s.add_argument("--d", type=float, default=0.4)
    s.add_argument("--delta", type=float, default=0.04)
    s.add_argument("--p", type=float, default=None, help="default 8 ln(n)/n")
    s.add_argument("--attempts", type=int, default=64)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_pipeline)

    s = sub.add_parser("regcheck", help="super-regularity check of a pair of parts")
    s.add_argument("graph")
    s.add_argument("--pair", required=True, help="parts i:j, 1-based")
    s.add_argument("--epsilon", type=float, required=True)
    s.add_argument("--d", type=float, required=True)
    s.add_argument("--mode", choices=["auto", "exhaustive", "sampled"], default="auto")
    s.add_argument("--samples", type=int, default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_regcheck)

    s = sub.add_parser("bounds", help="evaluate concentration bounds")
    s.add_argument("--formula", choices=["chernoff", "janson", "krmoments", "isolated"], required=True)
    s.add_argument("--json", action="store_true", help="JSON output (the only format)")
    s.add_argument("--mu", type=float)
    s.add_argument("--xi", type=float, default=0.5)
    s.add_argument("--k", type=float)
    s.add_argument("--delta-bar", type=float)
    s.add_argument("--mu-prime", type=float)
    s.add_argument("--t", type=float)
    s.add_argument("--r", type=int, default=3)
    s.add_argument("--n", type=int, default=10)
    s.add_argument("--m", type=int)
    s.add_argument("--p", type=float)
    s.add_argument("--omega", type=float, default=2.0)
    s.set_defaults(func=cmd_bounds)

    s = sub.add_parser("sweep", help="run a threshold sweep from a JSON config")
    s.add_argument("config")
    s.add_argument("--threads", type=int, default=1)
    s.add_argument("--out-dir", default="sweep_out")
    s.add_argument("--resume", action="store_true")
    s.add_argument("--no-gnuplot", action="store_true")
    s.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.cmd == "bounds":
        need = {"chernoff": ["mu"], "krmoments": ["p"], "janson": [], "isolated": []}[args.formula]
        if args.formula == "janson" and args.mu is None and args.p is None:
            need = ["p"]
        missing = [k for k in need if getattr(args, k) is None]
        if missing:
            print(f"error: --{missing[0]} is required for --formula {args.formula}", file=sys.stderr)
            return 2
    try:
        return args.func(args)
    except (ConfigError, TilingLabError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
