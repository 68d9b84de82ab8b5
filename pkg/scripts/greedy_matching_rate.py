"""How far the random greedy matching on F gets, as a function of the reveal probability.

Prints the fraction of seeds reaching the target n - ceil(delta n) and the
spread of the final matching size.  Random greedy on a sparse random
3-partite 3-graph with about c n^2 edges stops near c/(c+1) of n, so the
target is only reached once c is well above 1/delta.
"""
import argparse
import math

import numpy as np

from tilinglab.absorber import build_aux_hypergraph, leftover_size, random_greedy_matching, reveal_hyperedges
from tilinglab.generators import RandomSpec, gen_random, gen_superregular_star
from tilinglab.rng import derive_seed


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=60)
    ap.add_argument("--d", type=float, default=0.4)
    ap.add_argument("--delta", type=float, default=0.04)
    ap.add_argument("--seeds", type=int, default=100)
    ap.add_argument("--scales", type=float, nargs="+", default=[6.0, 12.0, 4 * math.log(60), 8 * math.log(60)],
                    help="values of p n")
    a = ap.parse_args()

    n = a.n
    target = n - leftover_size(n, a.delta)
    for scale in a.scales:
        p = min(1.0, scale / n)
        sizes, hits = [], 0
        for s in range(a.seeds):
            g = gen_superregular_star(3, n, a.d, RandomSpec(0.0, s))
            f = build_aux_hypergraph(g, None, a.d)
            gr = gen_random(3, n, RandomSpec(p, derive_seed(s, 1)), parts=(1, 2))
            m = random_greedy_matching(reveal_hyperedges(f, gr), target, s)
            sizes.append(len(m.edges))
            hits += not m.stalled
        print(f"p n = {scale:6.2f}: target {target} reached {hits}/{a.seeds}; "
              f"|M| mean {np.mean(sizes):.2f} min {min(sizes)} max {max(sizes)}")


if __name__ == "__main__":
    main()
