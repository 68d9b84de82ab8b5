"""Run a threshold sweep from a JSON config and print the per-cell table.

    python3 scripts/run_sweep.py scripts/configs/extremal_r3.json --out-dir runs/extremal
"""
import argparse

from tilinglab.harness import SweepConfig, sweep


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("config")
    ap.add_argument("--out-dir", default="runs/sweep")
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--resume", action="store_true")
    a = ap.parse_args()

    cfg = SweepConfig.from_json(a.config)
    res = sweep(cfg, threads=a.threads, out_dir=a.out_dir, resume=a.resume)
    print(f"{'n':>4} {'c':>7} {'p':>8} {'succ':>9}  outcomes")
    for (n, c), s in sorted(res.cells.items()):
        print(f"{n:>4} {c:>7.3g} {cfg.p_of(n, c):>8.4f} {s.successes:>4}/{s.trials:<4}  {s.outcomes}")
    for n, f in res.fits.items():
        if isinstance(f, str):
            print(f"n={n}: {f}")
        else:
            print(f"n={n}: c50={f.c50:.3f} CI=({f.c50_ci[0]:.3f}, {f.c50_ci[1]:.3f}) slope={f.slope:.2f}")
    if res.exponent_estimate is not None:
        print(f"exponent of p50 vs n: {res.exponent_estimate:.3f} (target {-2 / cfg.r:.3f})")


if __name__ == "__main__":
    main()
