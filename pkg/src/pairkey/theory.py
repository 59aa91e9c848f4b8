"""Closed-form quantities for the pairwise scheme under unreliable links:
link probabilities, connectivity thresholds, isolation probabilities, and the
moment/tail bounds the Monte Carlo suite validates against.

All functions are pure and deterministic; bounds are returned raw (they may
exceed 1 and are never clamped).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict


def _check_nk(n: int, K: int) -> None:
    if not 1 <= K < n:
        raise ValueError(f"require 1 <= K < n, got K={K}, n={n}")


def lambda_n(n: int, K: int) -> float:
    """Link probability in the key-sharing graph: 2K/(n-1) - (K/(n-1))^2."""
    _check_nk(n, K)
    q = K / (n - 1)
    return 2.0 * q - q * q


def edge_prob(n: int, K: int, p: float) -> float:
    """Edge probability in the intersection graph: p * lambda_n."""
    if not 0.0 < p <= 1.0:
        raise ValueError(f"p must be in (0, 1], got {p}")
    return p * lambda_n(n, K)


def tau(p: float) -> float:
    """Connectivity threshold constant for the scaling
    p*(2K - K^2/(n-1)) ~ c log n; continuous on [0, 1], 1 at p=0, 0 at p=1."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    if p == 0.0:
        return 1.0
    if p == 1.0:
        return 0.0
    # log(1-p)/p via log1p to keep continuity at p -> 0 free of cancellation
    return 2.0 / (1.0 - math.log1p(-p) / p)


def tau_hat(p: float) -> float:
    """Threshold constant for K ~ t log n: tau(p)/(2p) = 1/(p - log(1-p))."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must be in (0, 1), got {p}")
    return 1.0 / (p - math.log1p(-p))


def scaling_c_n(n: int, K: int, p: float) -> float:
    """The finite-n scaling constant: c_n = p*(2K - K^2/(n-1)) / log n."""
    if n < 3:
        raise ValueError(f"n must be >= 3, got {n}")
    _check_nk(n, K)
    if not 0.0 < p <= 1.0:
        raise ValueError(f"p must be in (0, 1], got {p}")
    return p * (2.0 * K - K * K / (n - 1)) / math.log(n)


def alpha_n(n: int, K: int, p: float) -> float:
    """Exponent approximating log(n * isolation_prob):
    (1 - c_n) log n + K (p + log(1-p))."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must be in (0, 1), got {p}")
    c = scaling_c_n(n, K, p)
    return (1.0 - c) * math.log(n) + K * (p + math.log1p(-p))


def expected_isolated_approx(n: int, K: int, p: float) -> float:
    """exp(alpha_n): the large-n approximation of n * isolation_prob."""
    return math.exp(alpha_n(n, K, p))


def psi(x: float) -> float:
    """Remainder in log(1-x) = -x - psi(x); nonnegative, psi(x)/x^2 -> 1/2."""
    if not 0.0 <= x < 1.0:
        raise ValueError(f"x must be in [0, 1), got {x}")
    return -x - math.log1p(-x)


def isolation_prob(n: int, K: int, p: float) -> float:
    """Probability that a given node is isolated in the intersection graph:
    (1-p)^K * (1 - pK/(n-1))^(n-K-1)."""
    _check_nk(n, K)
    if not 0.0 < p <= 1.0:
        raise ValueError(f"p must be in (0, 1], got {p}")
    return (1.0 - p) ** K * (1.0 - p * K / (n - 1)) ** (n - K - 1)


def asymptotic_isolation_prob(K: int, p: float) -> float:
    """Large-n limit of isolation_prob at fixed (K, p): (1-p)^K * e^(-pK)."""
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must be in (0, 1), got {p}")
    return (1.0 - p) ** K * math.exp(-p * K)


def u_n(n: int, K: int, p: float) -> float:
    """E[(1-p)^X] for X the indicator that a fixed node picked another fixed
    node: 1 - pK/(n-1)."""
    _check_nk(n, K)
    return 1.0 - p * K / (n - 1)


def cross_moment_ratio_bound(n: int, K: int, p: float) -> float:
    """Upper bound on E[chi_1 chi_2] / E[chi_1]^2 for the two-node isolation
    indicators: (1/(1-p)) (K/(n-1))^2 + (1 - pK/(n-1))^(-2)."""
    _check_nk(n, K)
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must be in (0, 1), got {p}")
    q = K / (n - 1)
    return q * q / (1.0 - p) + (1.0 - p * q) ** -2


def estar_mean(n: int, r: int, K: int) -> float:
    """Mean of the count of picks from outside nodes into {1..r}:
    r (n-r) K / (n-1)."""
    if not 2 <= r <= n - 1:
        raise ValueError(f"require 2 <= r <= n-1, got r={r}, n={n}")
    _check_nk(n, K)
    return r * (n - r) * K / (n - 1)


def estar_chernoff(n: int, r: int, K: int, t: float) -> float:
    """Chernoff-Hoeffding tail bound on the same count falling below
    (1-t) of its mean: exp(-(t^2/2) * r K (n-r)/(n-1))."""
    if not 0.0 < t < 1.0:
        raise ValueError(f"t must be in (0, 1), got {t}")
    return math.exp(-0.5 * t * t * estar_mean(n, r, K))


def connected_subset_bound(n: int, r: int, K: int, p: float) -> float:
    """Union-over-spanning-trees bound on the probability that r given nodes
    induce a connected subgraph: r^(r-2) * (p lambda_n)^(r-1). May exceed 1."""
    if not 2 <= r <= n:
        raise ValueError(f"require 2 <= r <= n, got r={r}, n={n}")
    return r ** (r - 2) * edge_prob(n, K, p) ** (r - 1)


def predicted_threshold_K(n: int, p: float) -> float:
    """Critical number of partners for connectivity: tau_hat(p) * log n."""
    if n < 3:
        raise ValueError(f"n must be >= 3, got {n}")
    return tau_hat(p) * math.log(n)


@dataclass(frozen=True)
class TheoryReport:
    """Every closed form evaluated at one parameter point (n, K, p)."""

    n: int
    K: int
    p: float
    lambda_n: float
    edge_prob: float
    c_n: float
    alpha_n: float
    tau: float
    tau_hat: float
    isolation_prob: float
    predicted_threshold_K: float
    cross_moment_bound: float

    def to_dict(self) -> dict:
        return asdict(self)


def theory_report(n: int, K: int, p: float) -> TheoryReport:
    interior = 0.0 < p < 1.0
    return TheoryReport(
        n=n,
        K=K,
        p=p,
        lambda_n=lambda_n(n, K),
        edge_prob=edge_prob(n, K, p),
        c_n=scaling_c_n(n, K, p),
        alpha_n=alpha_n(n, K, p) if interior else float("nan"),
        tau=tau(p),
        tau_hat=tau_hat(p) if interior else float("nan"),
        isolation_prob=isolation_prob(n, K, p),
        predicted_threshold_K=predicted_threshold_K(n, p) if interior else float("nan"),
        cross_moment_bound=cross_moment_ratio_bound(n, K, p) if interior else float("nan"),
    )
