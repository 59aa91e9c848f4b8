"""Monte Carlo engine: trial execution, parameter sweeps with standard
errors, crossover extraction, channel comparison, and the bound-validation
suite.

Every trial is seeded by a counter-based derivation from
(master seed, channel tag, n, K-index, p-index, trial index), so results are
bit-identical regardless of execution order or worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from functools import lru_cache
from dataclasses import dataclass, asdict
from typing import Optional

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components as _sparse_components

from . import theory
from .channels import match_rho, toroidal_distance_matrix
from .scheme import sample_gamma_matrix

CHANNELS = ("on_off", "disk", "disk_forced")
_CHANNEL_TAGS = {"on_off": 1, "disk": 2, "disk_forced": 3}


def trial_entropy(seed: int, channel: str, n: int, k_index: int,
                  p_index: int, trial_index: int) -> tuple[int, ...]:
    """Entropy tuple identifying one trial; feeds numpy's SeedSequence, which
    hashes it into an independent stream per trial."""
    return (seed, _CHANNEL_TAGS[channel], n, k_index, p_index, trial_index)


def rng_from_entropy(entropy) -> np.random.Generator:
    if isinstance(entropy, (int, np.integer)):
        entropy = (int(entropy),)
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(list(entropy))))


@lru_cache(maxsize=8)
def _triu(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.triu_indices(n, k=1)


@dataclass(frozen=True)
class TrialOutcome:
    connected: bool
    isolated_count: int
    edge_count: int


@dataclass(frozen=True)
class ExperimentConfig:
    """One sweep: a (K, p) grid at fixed n, with a trial count and master seed."""

    n: int
    K_grid: tuple[int, ...]
    p_grid: tuple[float, ...]
    trials: int
    seed: int
    channel: str = "on_off"

    def __post_init__(self):
        object.__setattr__(self, "K_grid", tuple(int(k) for k in self.K_grid))
        object.__setattr__(self, "p_grid", tuple(float(p) for p in self.p_grid))
        if not self.K_grid or not self.p_grid:
            raise ValueError("K_grid and p_grid must be non-empty")
        if any(not 1 <= k < self.n for k in self.K_grid):
            raise ValueError(f"every K must satisfy 1 <= K < n={self.n}")
        if any(not 0.0 < p <= 1.0 for p in self.p_grid):
            raise ValueError("every p must be in (0, 1]")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")
        if self.channel not in CHANNELS:
            raise ValueError(f"channel must be one of {CHANNELS}, got {self.channel!r}")


def _intersection_adjacency(n: int, K: int, p: float, channel: str,
                            rng: np.random.Generator) -> np.ndarray:
    """Sample one intersection graph as a boolean adjacency matrix.

    Draw order (pairing first, then channel) matches the object-level
    composition sample_pairing -> sample_er / sample_positions, so outcomes
    are bitwise comparable across the two paths.
    """
    gamma0 = sample_gamma_matrix(n, K, rng)
    picked = np.zeros((n, n), dtype=bool)
    picked[np.arange(n)[:, None], gamma0] = True
    keyed = picked | picked.T

    if channel == "on_off":
        u = rng.random(n * (n - 1) // 2)
        chan = np.zeros((n, n), dtype=bool)
        iu, ju = _triu(n)
        hit = u < p
        chan[iu[hit], ju[hit]] = True
        chan |= chan.T
    else:
        rho = match_rho(p, allow_large_rho=(channel == "disk_forced")).rho
        pts = rng.random((n, 2))
        chan = toroidal_distance_matrix(pts) < rho

    adj = keyed & chan
    np.fill_diagonal(adj, False)
    return adj


def run_trial(n: int, K: int, p: float, channel: str, trial_seed) -> TrialOutcome:
    """Sample one pairing, one channel graph, intersect, and measure.

    trial_seed is an int or a tuple of ints (see trial_entropy); identical
    seeds give identical outcomes.
    """
    if not 1 <= K < n:
        raise ValueError(f"require 1 <= K < n, got K={K}, n={n}")
    if not 0.0 < p <= 1.0:
        raise ValueError(f"p must be in (0, 1], got {p}")
    if channel not in CHANNELS:
        raise ValueError(f"channel must be one of {CHANNELS}, got {channel!r}")
    rng = rng_from_entropy(trial_seed)
    adj = _intersection_adjacency(n, K, p, channel, rng)
    iso = int(n - np.count_nonzero(adj.any(axis=1)))
    edges = int(np.count_nonzero(adj) // 2)
    if iso > 0 and n > 1:
        connected = False
    else:
        ncomp = _sparse_components(csr_matrix(adj), directed=False,
                                   return_labels=False)
        connected = ncomp == 1
    return TrialOutcome(connected=connected, isolated_count=iso, edge_count=edges)


def _binomial_stderr(count: int, trials: int) -> float:
    q = count / trials
    return math.sqrt(q * (1.0 - q) / trials)


@dataclass(frozen=True)
class CellEstimate:
    """Empirical probabilities for one (channel, n, K, p) cell."""

    channel: str
    n: int
    K: int
    p: float
    trials: int
    count_connected: int
    count_no_isolated: int
    seed: int
    notes: tuple[str, ...] = ()

    @property
    def prob_connected(self) -> float:
        return self.count_connected / self.trials

    @property
    def stderr_connected(self) -> float:
        return _binomial_stderr(self.count_connected, self.trials)

    @property
    def prob_no_isolated(self) -> float:
        return self.count_no_isolated / self.trials

    @property
    def stderr_no_isolated(self) -> float:
        return _binomial_stderr(self.count_no_isolated, self.trials)


CSV_COLUMNS = (
    "channel", "n", "K", "p", "trials",
    "count_connected", "prob_connected", "stderr_connected",
    "count_no_isolated", "prob_no_isolated", "stderr_no_isolated",
    "seed",
)


def _fmt_prob(x: float) -> str:
    return format(x, ".6g")


@dataclass(frozen=True)
class EstimateTable:
    rows: tuple[CellEstimate, ...]

    def __post_init__(self):
        ordered = tuple(sorted(self.rows, key=lambda r: (r.channel, r.p, r.K)))
        object.__setattr__(self, "rows", ordered)

    def cell(self, channel: str, K: int, p: float) -> CellEstimate:
        for r in self.rows:
            if r.channel == channel and r.K == K and math.isclose(r.p, p):
                return r
        raise KeyError(f"no cell for channel={channel}, K={K}, p={p}")

    def column(self, p: float, channel: Optional[str] = None) -> list[CellEstimate]:
        """All cells at a given p, ascending in K."""
        out = [r for r in self.rows
               if math.isclose(r.p, p) and (channel is None or r.channel == channel)]
        return sorted(out, key=lambda r: r.K)

    def to_csv_text(self) -> str:
        lines = [",".join(CSV_COLUMNS)]
        for r in self.rows:
            lines.append(",".join([
                r.channel, str(r.n), str(r.K), _fmt_prob(r.p), str(r.trials),
                str(r.count_connected), _fmt_prob(r.prob_connected),
                _fmt_prob(r.stderr_connected),
                str(r.count_no_isolated), _fmt_prob(r.prob_no_isolated),
                _fmt_prob(r.stderr_no_isolated),
                str(r.seed),
            ]))
        return "\n".join(lines) + "\n"

    def to_json_obj(self) -> list[dict]:
        return [asdict(r) | {"notes": list(r.notes)} for r in self.rows]

    @classmethod
    def from_json_obj(cls, obj: list[dict]) -> "EstimateTable":
        rows = tuple(CellEstimate(**(d | {"notes": tuple(d.get("notes", ()))}))
                     for d in obj)
        return cls(rows=rows)


def _run_cell(args) -> tuple[int, int, int, int]:
    """Worker: all trials of one grid cell. Returns (k_index, p_index,
    count_connected, count_no_isolated)."""
    n, K, p, trials, seed, channel, k_index, p_index = args
    conn = noiso = 0
    for t in range(trials):
        out = run_trial(n, K, p, channel,
                        trial_entropy(seed, channel, n, k_index, p_index, t))
        conn += out.connected
        noiso += out.isolated_count == 0
    return k_index, p_index, conn, noiso


def sweep(config: ExperimentConfig, workers: int = 1) -> EstimateTable:
    """Run every (K, p) cell of the grid. Output is bit-identical for any
    worker count; trials are seeded independently of scheduling."""
    jobs = [
        (config.n, K, p, config.trials, config.seed, config.channel, ki, pi)
        for pi, p in enumerate(config.p_grid)
        for ki, K in enumerate(config.K_grid)
    ]
    if workers <= 1:
        results = [_run_cell(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_cell, jobs, chunksize=1))

    rows = []
    for ki, pi, conn, noiso in results:
        notes = []
        for name, count in (("connected", conn), ("no_isolated", noiso)):
            if count in (0, config.trials):
                notes.append(
                    f"{name} estimate at boundary; rule-of-three upper bound "
                    f"{3.0 / config.trials:.3g}"
                )
        rows.append(CellEstimate(
            channel=config.channel, n=config.n, K=config.K_grid[ki],
            p=config.p_grid[pi], trials=config.trials,
            count_connected=conn, count_no_isolated=noiso,
            seed=config.seed, notes=tuple(notes),
        ))
    return EstimateTable(rows=tuple(rows))


def find_crossover(table: EstimateTable, p: float, level: float = 0.5,
                   channel: Optional[str] = None,
                   prop: str = "connected") -> Optional[int]:
    """Smallest K in the sweep whose empirical probability reaches `level`;
    None if never reached."""
    column = table.column(p, channel=channel)
    if not column:
        raise KeyError(f"table has no cells at p={p}")
    for r in column:
        q = r.prob_connected if prop == "connected" else r.prob_no_isolated
        if q >= level:
            return r.K
    return None


@dataclass(frozen=True)
class ChannelComparison:
    """Per-cell deltas and per-p crossover deltas between two channel models."""

    table_onoff: EstimateTable
    table_disk: EstimateTable
    deltas: tuple[tuple[int, float, float], ...]  # (K, p, prob_on - prob_disk)
    crossovers: tuple[tuple[float, Optional[int], Optional[int]], ...]
    forced_rho_ps: tuple[float, ...]

    def crossover_delta(self, p: float) -> Optional[int]:
        for pp, k_on, k_disk in self.crossovers:
            if math.isclose(pp, p):
                if k_on is None or k_disk is None:
                    return None
                return abs(k_on - k_disk)
        raise KeyError(f"no crossover entry for p={p}")


def compare_channels(config: ExperimentConfig, workers: int = 1,
                     allow_large_rho: bool = False) -> ChannelComparison:
    """Run the same grid under the on/off and disk channels and report the
    per-cell and crossover differences."""
    disk_channel = "disk_forced" if allow_large_rho else "disk"
    on_cfg = ExperimentConfig(n=config.n, K_grid=config.K_grid,
                              p_grid=config.p_grid, trials=config.trials,
                              seed=config.seed, channel="on_off")
    disk_cfg = ExperimentConfig(n=config.n, K_grid=config.K_grid,
                                p_grid=config.p_grid, trials=config.trials,
                                seed=config.seed, channel=disk_channel)
    t_on = sweep(on_cfg, workers=workers)
    t_disk = sweep(disk_cfg, workers=workers)
    deltas = tuple(
        (K, p, t_on.cell("on_off", K, p).prob_connected
         - t_disk.cell(disk_channel, K, p).prob_connected)
        for p in config.p_grid for K in config.K_grid
    )
    crossovers = tuple(
        (p, find_crossover(t_on, p), find_crossover(t_disk, p))
        for p in config.p_grid
    )
    forced = tuple(p for p in config.p_grid
                   if match_rho(p, allow_large_rho=True).forced)
    return ChannelComparison(table_onoff=t_on, table_disk=t_disk,
                             deltas=deltas, crossovers=crossovers,
                             forced_rho_ps=forced if allow_large_rho else ())


# ---------------------------------------------------------------------------
# Targeted estimators and the bound-validation suite
# ---------------------------------------------------------------------------

def estimate_edge_prob(n: int, K: int, p: float, trials: int,
                       seed: int) -> tuple[float, float]:
    """Monte Carlo estimate of the probability that nodes 1 and 2 are
    adjacent in the intersection graph. Samples only the two relevant
    partner sets plus the one channel variable, so it scales to large n.

    Returns (estimate, stderr).
    """
    if not 1 <= K < n:
        raise ValueError(f"require 1 <= K < n, got K={K}, n={n}")
    rng = rng_from_entropy((seed, 101, n, K))
    hits = 0
    done = 0
    chunk = max(1024, min(trials, int(4e6 / (2 * (n - 1)))))
    while done < trials:
        t = min(chunk, trials - done)
        u = rng.random((t, 2, n - 1))
        # node 2 is candidate 0 of node 1, node 1 is candidate 0 of node 2
        in_g1 = (u[:, 0, :] < u[:, 0, 0:1]).sum(axis=1) < K
        in_g2 = (u[:, 1, :] < u[:, 1, 0:1]).sum(axis=1) < K
        b = rng.random(t) < p
        hits += int(np.count_nonzero((in_g1 | in_g2) & b))
        done += t
    q = hits / trials
    return q, math.sqrt(q * (1.0 - q) / trials)


@dataclass(frozen=True)
class BoundCheck:
    name: str
    empirical: float
    reference: float
    sigma: float
    kind: str  # "two_sided" | "upper"
    passed: bool
    status: str = "checked"


@dataclass(frozen=True)
class ValidationReport:
    n: int
    K: int
    p: float
    samples: int
    seed: int
    checks: tuple[BoundCheck, ...]

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks if c.status == "checked")

    def to_dict(self) -> dict:
        return {
            "n": self.n, "K": self.K, "p": self.p,
            "samples": self.samples, "seed": self.seed,
            "all_passed": self.all_passed,
            "checks": [asdict(c) for c in self.checks],
        }


def _two_sided(name, emp, ref, sigma) -> BoundCheck:
    return BoundCheck(name=name, empirical=emp, reference=ref, sigma=sigma,
                      kind="two_sided", passed=abs(emp - ref) <= 3.0 * sigma)


def _upper(name, emp, bound, sigma) -> BoundCheck:
    return BoundCheck(name=name, empirical=emp, reference=bound, sigma=sigma,
                      kind="upper", passed=emp <= bound + 3.0 * sigma)


def validate_bounds(n: int, K: int, p: float, samples: int,
                    seed: int = 0, tail_t: float = 0.5) -> ValidationReport:
    """Estimate every checkable moment and compare it against its closed
    form or bound at the 3-sigma level.

    Checks: the pair edge probability, the pairing probability K/(n-1), the
    single-node isolation probability, the negative-association bound
    b <= u^2, the isolation cross-moment ratio bound, the mean and
    Chernoff tail of the outside-pick count, and the sign of the pairwise
    edge covariance. Intended for small n where moments are estimable.
    """
    if not 1 <= K < n or n < 3:
        raise ValueError(f"require n >= 3 and 1 <= K < n, got K={K}, n={n}")
    if not 0.0 < p <= 1.0:
        raise ValueError(f"p must be in (0, 1], got {p}")
    if samples < 1000:
        raise ValueError(f"need at least 1000 samples, got {samples}")

    rng = rng_from_entropy((seed, 102, n, K))
    r = 2
    q1 = 1.0 - p

    # accumulators
    s_edge = s_pair = s_chi1 = s_chi12 = 0
    s_b = s_b2 = 0.0
    s_e = s_e2 = 0.0
    s_tail = 0
    s_x = s_y = s_xy = 0
    done = 0
    chunk = max(1000, min(samples, int(2e6 / (n * n))))
    e_mean = theory.estar_mean(n, r, K)
    tail_cut = (1.0 - tail_t) * e_mean

    while done < samples:
        t = min(chunk, samples - done)
        u = rng.random((t, n, n - 1))
        cand = np.argpartition(u, K, axis=2)[:, :, :K] if K < n - 1 else \
            np.tile(np.arange(n - 1), (t, n, 1))
        rows = np.arange(n)[None, :, None]
        gamma0 = cand + (cand >= rows)
        picked = np.zeros((t, n, n), dtype=bool)
        ti = np.arange(t)[:, None, None]
        picked[ti, rows, gamma0] = True
        keyed = picked | picked.transpose(0, 2, 1)

        m = n * (n - 1) // 2
        ub = rng.random((t, m))
        chan = np.zeros((t, n, n), dtype=bool)
        iu, ju = np.triu_indices(n, k=1)
        chan[:, iu, ju] = ub < p
        chan |= chan.transpose(0, 2, 1)
        adj = keyed & chan

        s_edge += int(np.count_nonzero(adj[:, 0, 1]))
        s_pair += int(np.count_nonzero(picked[:, 2, 0]))

        chi1 = ~adj[:, 0, :].any(axis=1)
        chi2 = ~adj[:, 1, :].any(axis=1)
        s_chi1 += int(np.count_nonzero(chi1))
        s_chi12 += int(np.count_nonzero(chi1 & chi2))

        b_samp = q1 ** (picked[:, 2, 0].astype(np.int64)
                        + picked[:, 2, 1].astype(np.int64))
        s_b += float(b_samp.sum())
        s_b2 += float((b_samp * b_samp).sum())

        e_samp = picked[:, r:, :r].sum(axis=(1, 2)).astype(float)
        s_e += float(e_samp.sum())
        s_e2 += float((e_samp * e_samp).sum())
        s_tail += int(np.count_nonzero(e_samp <= tail_cut))

        x = keyed[:, 0, 1]
        y = keyed[:, 0, 2]
        s_x += int(np.count_nonzero(x))
        s_y += int(np.count_nonzero(y))
        s_xy += int(np.count_nonzero(x & y))
        done += t

    T = samples
    checks: list[BoundCheck] = []

    q_edge = theory.edge_prob(n, K, p)
    checks.append(_two_sided("edge_prob", s_edge / T, q_edge,
                             math.sqrt(q_edge * (1 - q_edge) / T)))

    q_pair = K / (n - 1)
    checks.append(_two_sided("pairing_prob", s_pair / T, q_pair,
                             math.sqrt(q_pair * (1 - q_pair) / T)))

    q_iso = theory.isolation_prob(n, K, p)
    checks.append(_two_sided("isolation_prob", s_chi1 / T, q_iso,
                             math.sqrt(q_iso * (1 - q_iso) / T)))

    b_hat = s_b / T
    b_var = max(s_b2 / T - b_hat * b_hat, 0.0)
    u_sq = theory.u_n(n, K, p) ** 2
    checks.append(_upper("b_leq_u_squared", b_hat, u_sq, math.sqrt(b_var / T)))

    if p < 1.0:
        a_hat = s_chi12 / T
        c_hat = s_chi1 / T
        bound = theory.cross_moment_ratio_bound(n, K, p)
        if c_hat > 0.0:
            ratio = a_hat / (c_hat * c_hat)
            sig_a = math.sqrt(a_hat * (1 - a_hat) / T)
            sig_c = math.sqrt(c_hat * (1 - c_hat) / T)
            rel = math.sqrt((sig_a / a_hat) ** 2 + (2 * sig_c / c_hat) ** 2) \
                if a_hat > 0 else 0.0
            checks.append(_upper("cross_moment_ratio", ratio, bound,
                                 ratio * rel))
        else:
            checks.append(BoundCheck(
                name="cross_moment_ratio", empirical=float("nan"),
                reference=bound, sigma=float("nan"), kind="upper",
                passed=True, status="skipped: no isolation events observed"))
    else:
        checks.append(BoundCheck(
            name="cross_moment_ratio", empirical=float("nan"),
            reference=float("nan"), sigma=float("nan"), kind="upper",
            passed=True, status="skipped: undefined at p=1"))

    e_hat = s_e / T
    e_var = max(s_e2 / T - e_hat * e_hat, 0.0)
    checks.append(_two_sided("estar_mean", e_hat, e_mean,
                             math.sqrt(e_var / T) if e_var > 0 else 1.0 / T))

    tail_hat = s_tail / T
    tail_bound = theory.estar_chernoff(n, r, K, tail_t)
    checks.append(_upper("estar_tail", tail_hat, tail_bound,
                         math.sqrt(max(tail_hat * (1 - tail_hat), 1.0 / T) / T)))

    mx, my = s_x / T, s_y / T
    cov = s_xy / T - mx * my
    # stderr of the covariance of two Bernoulli indicators, delta method
    var_cov = (s_xy / T) * (1 - s_xy / T) / T \
        + (my ** 2) * mx * (1 - mx) / T + (mx ** 2) * my * (1 - my) / T
    checks.append(_upper("edge_covariance", cov, 0.0, math.sqrt(var_cov)))

    return ValidationReport(n=n, K=K, p=p, samples=samples, seed=seed,
                            checks=tuple(checks))
