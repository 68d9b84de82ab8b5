"""Closed forms for the concentration bounds used in the threshold arguments.

Moment functions accept ints, floats or Fractions; with Fraction inputs the
K_r moments are exact rationals.  Probability bounds are evaluated as exp of
the closed-form exponent, which underflows cleanly to 0 for very negative
arguments.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from tilinglab.errors import TOutOfRange, XiOutOfRange
from tilinglab.mpgraph import PartiteGraph, iter_bits


def _exp(x: float) -> float:
    return math.exp(x) if x < 700 else math.inf


def chernoff_tail(mu: float, xi: float) -> float:
    """P(|X - mu| >= xi mu) <= 2 exp(-xi^3 mu / 3) for binomial or hypergeometric X."""
    if not 0 < xi < 1:
        raise XiOutOfRange(f"xi must lie in (0, 1), got {xi}")
    if mu < 0:
        raise ValueError(f"mu must be >= 0, got {mu}")
    return 2 * _exp(-(xi ** 3) * mu / 3)


def chernoff_upper_tail(mu: float, k: float) -> float:
    """P(X > k) <= exp(-k), valid for k >= 7 mu."""
    if mu < 0:
        raise ValueError(f"mu must be >= 0, got {mu}")
    if k < 7 * mu:
        raise ValueError(f"upper-tail form needs k >= 7 mu = {7 * mu}, got {k}")
    return _exp(-k)


def chebyshev_bound(variance: float, t: float) -> float:
    if t <= 0:
        raise ValueError("t must be positive")
    return min(1.0, variance / t ** 2)


@dataclass(frozen=True)
class JansonInput:
    mu: float
    delta_bar: float
    mu_prime: float

    def __post_init__(self):
        if self.mu < 0 or self.delta_bar < 0 or self.mu_prime < 0:
            raise ValueError("mu, delta_bar and mu_prime must be nonnegative")

    @classmethod
    def from_probabilities(cls, probs, delta_bar: float = 0.0) -> "JansonInput":
        probs = list(probs)
        if any(not 0 <= q < 1 for q in probs):
            raise ValueError("event probabilities must lie in [0, 1)")
        return cls(sum(probs), delta_bar, -sum(math.log1p(-q) for q in probs))


@dataclass(frozen=True)
class JansonBounds:
    lower_p_s0: float  # exp(-mu')
    upper_p_s0: float  # exp(-mu^2 / (Delta + mu))
    upper_p_s0_weak: float  # exp(-mu + Delta)
    lower_tail: float  # exp(-t^2 / (2 (Delta + mu)))
    lower_tail_phi: float  # exp(-phi(-t/mu) mu^2 / (Delta + mu))

    def as_tuple(self) -> tuple[float, float, float]:
        return self.lower_p_s0, self.upper_p_s0, self.lower_tail


def _phi(x: float) -> float:
    if x <= -1:
        return 1.0  # limit of (1+x)ln(1+x) - x as x -> -1
    return (1 + x) * math.log1p(x) - x


def janson_bounds(j: JansonInput, t: float) -> JansonBounds:
    """Sandwich for P(S = 0) and the lower tail P(S <= mu - t)."""
    if not 0 <= t <= j.mu:
        raise TOutOfRange(f"need 0 <= t <= mu = {j.mu}, got {t}")
    denom = j.delta_bar + j.mu
    if denom == 0:
        return JansonBounds(_exp(-j.mu_prime), 1.0, 1.0, 1.0, 1.0)
    return JansonBounds(
        lower_p_s0=_exp(-j.mu_prime),
        upper_p_s0=_exp(-j.mu ** 2 / denom),
        upper_p_s0_weak=_exp(-j.mu + j.delta_bar),
        lower_tail=_exp(-t ** 2 / (2 * denom)),
        lower_tail_phi=_exp(-_phi(-t / j.mu) * j.mu ** 2 / denom),
    )


def kr_count_moments(r: int, n: int, p, m: int | None = None):
    """(mu, Delta) for the count of transversal K_r in G_r(m, p).

    mu = m^r p^C(r,2); Delta sums E[I_i I_j] over ordered pairs of distinct
    copies sharing l >= 2 vertices: C(r, l) choices of shared parts and
    (m-1)^(r-l) choices for the rest.
    """
    if r < 3:
        raise ValueError("r must be >= 3")
    m = n if m is None else m
    e = math.comb(r, 2)
    mu = m ** r * p ** e
    delta = 0 * p
    for ell in range(2, r):
        delta += math.comb(r, ell) * (m - 1) ** (r - ell) * p ** (2 * e - math.comb(ell, 2))
    return mu, m ** r * delta


def fixed_vertex_moments(r: int, n: int, p) -> tuple:
    """(mu, Delta) for the number of transversal K_r through one fixed vertex of G_r(n, p).

    Two such copies are dependent iff they share another vertex; sharing l of
    the other r-1 vertices leaves C(l+1, 2) common edges.
    """
    e = math.comb(r, 2)
    mu = n ** (r - 1) * p ** e
    delta = 0 * p
    for ell in range(1, r - 1):
        delta += math.comb(r - 1, ell) * (n - 1) ** (r - 1 - ell) * p ** (2 * e - math.comb(ell + 1, 2))
    return mu, n ** (r - 1) * delta


def fixed_vertex_janson(r: int, n: int, p: float) -> JansonInput:
    mu, delta = fixed_vertex_moments(r, n, p)
    q = p ** math.comb(r, 2)
    mu_prime = -n ** (r - 1) * math.log1p(-q) if q < 1 else math.inf
    return JansonInput(float(mu), float(delta), mu_prime)


@dataclass(frozen=True)
class IsolatedMoments:
    mu: float  # two-vertex expectation 2 n^(r-1) p^C(r,2)
    mu_prime: float  # one-vertex -n^(r-1) ln(1 - p^C(r,2))
    delta_bar: float  # two-sum codependency for the pair (u, v)
    ex_lower: float  # (n / omega) exp(-(ln omega)^2 / n^(r-1))
    delta_simplified: float  # n^(2r-3+2/r) p^(2C(r,2)) [2 2^(r-1) + 2^(r-1)/n]
    delta_target: float  # n^(-1/4)


def isolated_vertex_moments(r: int, n: int, p: float, omega: float) -> IsolatedMoments:
    e = math.comb(r, 2)
    q = p ** e
    mu = 2 * n ** (r - 1) * q
    mu_prime = -n ** (r - 1) * math.log1p(-q) if q < 1 else math.inf
    s1 = sum(2 * math.comb(r - 1, ell) * n ** (2 * r - ell - 2) * p ** (2 * e - math.comb(ell + 1, 2))
             for ell in range(1, r - 1))
    s2 = sum(math.comb(r - 1, ell) * n ** (2 * r - ell - 2) * p ** (2 * e - math.comb(ell, 2))
             for ell in range(2, r))
    ex_lower = (n / omega) * math.exp(-math.log(omega) ** 2 / n ** (r - 1))
    simplified = n ** (2 * r - 3 + 2 / r) * p ** (2 * e) * (2 * 2 ** (r - 1) + 2 ** (r - 1) / n)
    return IsolatedMoments(mu, mu_prime, s1 + s2, ex_lower, simplified, n ** -0.25)


def sublinear_p(r: int, n: int, omega: float) -> float:
    """p = n^(-2/r) (ln omega)^(1/C(r,2)), the edge probability of the sublinear construction."""
    return n ** (-2 / r) * math.log(omega) ** (1 / math.comb(r, 2))


def count_isolated(g: PartiteGraph, part: int) -> int:
    """Vertices of ``part`` lying in no transversal K_r of ``g``."""
    n, r = g.n, g.r
    others = [k for k in range(r) if k != part]
    count = 0
    for v in g.part_vertices(part):
        cand = [g.nbr_mask(v, k) for k in others]
        if not _extends(g, others, cand, 0):
            count += 1
    return count


def _extends(g, parts, cand, k) -> bool:
    if k == len(parts):
        return True
    n = g.n
    for x in iter_bits(cand[k]):
        u = parts[k] * n + x
        nxt = list(cand)
        ok = True
        for j in range(k + 1, len(parts)):
            nxt[j] = cand[j] & g.nbr_mask(u, parts[j])
            if not nxt[j]:
                ok = False
                break
        if ok and _extends(g, parts, nxt, k + 1):
            return True
    return False


def binomial_sigma(successes: int, trials: int, z: float = 3.0) -> float:
    """Standard error of a Monte Carlo proportion.

    Normal approximation when both counts are at least 5; otherwise the
    Wilson score interval half-width divided by ``z`` so that z * sigma
    stays meaningful near 0 and 1.
    """
    if trials <= 0:
        raise ValueError("trials must be positive")
    ph = successes / trials
    if min(successes, trials - successes) >= 5:
        return math.sqrt(ph * (1 - ph) / trials)
    z2 = z * z
    half = z / (1 + z2 / trials) * math.sqrt(ph * (1 - ph) / trials + z2 / (4 * trials * trials))
    return half / z


def wilson_interval(successes: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    ph = successes / trials
    z2 = z * z
    center = (ph + z2 / (2 * trials)) / (1 + z2 / trials)
    half = z / (1 + z2 / trials) * math.sqrt(ph * (1 - ph) / trials + z2 / (4 * trials * trials))
    return max(0.0, center - half), min(1.0, center + half)
