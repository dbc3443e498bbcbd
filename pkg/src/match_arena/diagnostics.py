"""Instrumentation of primary paths, blocking sets and good/bad vertices.

All quantities are computed over choice profiles ``tau`` drawn from the exact
rounding plan. Primary choices alone determine the primary arcs of the pruned
graph, so the samplers here ignore secondary arcs.

Conventions: for an arc ``(s, t)`` (source ``s`` arrived after target ``t``)
the blocking set is every potential arc ``(s', t)`` with ``t < s' < s``;
``Bz[s, t]`` is its total ``z``.
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np
from scipy import stats

from .graph_core import ArrivalInstance, Edge
from .rounding import ArcKind, PrunedGraph, RoundingConfig, RoundingPlan, improved_plan


@dataclass(frozen=True)
class GoodVertexParams:
    length_threshold: int = 5
    prob_threshold: float = 0.05
    samples: int = 2000

    def __post_init__(self):
        if self.length_threshold < 1:
            raise ValueError("length threshold must be at least 1")
        if not 0 < self.prob_threshold < 1:
            raise ValueError("probability threshold must lie in (0, 1)")
        if self.samples < 1:
            raise ValueError("need at least one sample")

    @classmethod
    def analysis_scale(cls, eps: float, samples: int = 2000) -> "GoodVertexParams":
        """Thresholds used by the asymptotic analysis (unreachable at small n)."""
        return cls(max(1, math.ceil(2000 * math.log(1 / eps))), eps ** 6, samples)


def blocking_matrix(inst: ArrivalInstance, z_map: Mapping[Edge, float]) -> np.ndarray:
    """``Bz[s, t] = sum of z(s', t)`` over arcs ``(s', t)`` with ``t < s' < s``."""
    n = inst.n
    Z = np.zeros((n, n))  # Z[s', t] = z of arc (s', t)
    for (s, t), val in z_map.items():
        Z[s, t] = val
    csum = np.cumsum(Z, axis=0)
    Bz = np.zeros((n, n))
    Bz[1:] = csum[:-1]  # sum over s' < s
    return Bz


def blocking_set(inst: ArrivalInstance, s: int, t: int) -> list[Edge]:
    return [(sp, t) for sp in range(t + 1, s) if t in inst.nbrs[sp]]


@dataclass
class PathStats:
    length: np.ndarray  # longest primary path rooted at each vertex
    blocking_z: np.ndarray  # z(B(P)) of that path
    certified_z: np.ndarray  # z(B(P, T)) of the certified path rooted there


def primary_path_stats(h: PrunedGraph, z_map: Mapping[Edge, float], inst: ArrivalInstance) -> PathStats:
    """Per-root primary path length and blocking mass in ``h``.

    Surviving primary arcs have in- and out-degree at most one, so each root
    has a single maximal path. Its termination certificate is either empty or
    the surviving primary arc into the target of the last vertex's pruned arc.
    """
    n = h.n
    Bz = blocking_matrix(inst, z_map)
    out = h.primary_out()
    first = np.full(n, -1)
    for a in h.arcs:
        if a.kind is ArcKind.PRIMARY:
            first[a.target] = a.source
    pruned_target = np.full(n, -1)
    if h.pruned_primary is not None:
        for s, t in h.pruned_primary:
            pruned_target[s] = t
    length = np.zeros(n, dtype=int)
    bz = np.zeros(n)
    cz = np.zeros(n)
    for v in range(n):
        t = out[v]
        if t >= 0:
            length[v] = length[t] + 1
            bz[v] = Bz[v, t] + bz[t]
            cz[v] = Bz[v, t] + cz[t]
        elif pruned_target[v] >= 0:
            w = pruned_target[v]
            cz[v] = Bz[first[w], w]
    return PathStats(length, bz, cz)


def _prune_primaries(prim: np.ndarray):
    """Vectorized pruning of sampled primaries (rows are samples).

    Returns ``first[s, w]`` (earliest source with a primary arc into ``w``, or
    ``n``) and the mask of surviving primary arcs.
    """
    S, n = prim.shape
    rows = np.arange(S)
    first = np.full((S, n), n)
    for v in range(n):
        t = prim[:, v]
        has = t >= 0
        tt = np.where(has, t, 0)
        upd = has & (first[rows, tt] == n)
        first[rows[upd], tt[upd]] = v
    tt = np.maximum(prim, 0)
    survive = (prim >= 0) & (np.take_along_axis(first, tt, axis=1) == np.arange(n)[None, :])
    return first, survive


def path_arrays(prim: np.ndarray, Bz: np.ndarray):
    """Rooted path lengths and certified blocking mass for every sample and root."""
    S, n = prim.shape
    rows = np.arange(S)
    first, survive = _prune_primaries(prim)
    length = np.zeros((S, n), dtype=np.int64)
    cz = np.zeros((S, n))
    for v in range(n):
        t = np.maximum(prim[:, v], 0)
        s = survive[:, v]
        length[s, v] = length[rows[s], t[s]] + 1
        cz[s, v] = Bz[v, t[s]] + cz[rows[s], t[s]]
        blocked = (prim[:, v] >= 0) & ~s
        if blocked.any():
            w = t[blocked]
            cz[blocked, v] = Bz[first[rows[blocked], w], w]
    return length, cz


def sample_primaries(plan: RoundingPlan, S: int, rng: np.random.Generator) -> np.ndarray:
    """``S`` independent primary profiles; ``-1`` for no arc."""
    n = plan.instance.n
    prim = np.full((S, n), -1, dtype=np.int64)
    for a in plan.arrivals:
        if not len(a.nbrs):
            continue
        cdf = np.cumsum(a.zprime)
        idx = np.searchsorted(cdf, rng.random(S), side="right")
        ok = idx < len(a.nbrs)
        prim[ok, a.v] = a.nbrs[idx[ok]]
    return prim


def _wilson(hits: np.ndarray, S: int):
    lo = np.empty(len(hits))
    hi = np.empty(len(hits))
    for i, k in enumerate(hits.tolist()):
        ci = stats.binomtest(int(k), S).proportion_ci(confidence_level=0.95, method="wilson")
        lo[i], hi[i] = ci.low, ci.high
    return lo, hi


@dataclass
class LongPathEstimate:
    freq: np.ndarray
    ci_low: np.ndarray
    ci_high: np.ndarray
    good: np.ndarray
    samples: int
    params: GoodVertexParams


def estimate_long_path_prob(inst: ArrivalInstance, cfg: RoundingConfig, params: GoodVertexParams,
                            rng: Optional[np.random.Generator] = None) -> LongPathEstimate:
    """Monte Carlo estimate of ``Pr[primary path rooted at v has length >= L]``."""
    if params.samples < 1:
        raise ValueError("zero samples")
    rng = np.random.default_rng(cfg.seed) if rng is None else rng
    plan = improved_plan(inst, cfg)
    prim = sample_primaries(plan, params.samples, rng)
    length, _ = path_arrays(prim, np.zeros((inst.n, inst.n)))
    hits = (length >= params.length_threshold).sum(axis=0)
    lo, hi = _wilson(hits, params.samples)
    freq = hits / params.samples
    return LongPathEstimate(freq, lo, hi, freq <= params.prob_threshold, params.samples, params)


def exact_long_path_prob(plan: RoundingPlan, L: int, limit: int = 2_000_000) -> np.ndarray:
    """Enumerate every primary profile; exact ``Pr[length >= L]`` per root."""
    n = plan.instance.n
    options = []
    for a in plan.arrivals:
        opts = [(int(u), float(p)) for u, p in zip(a.nbrs, a.zprime) if p > 0]
        rest = 1.0 - sum(p for _, p in opts)
        if rest > 0 or not opts:
            opts.append((-1, max(rest, 0.0)))
        options.append(opts)
    total = math.prod(len(o) for o in options)
    if total > limit:
        raise ValueError(f"{total} profiles exceed the enumeration limit {limit}")
    out = np.zeros(n)
    zero = np.zeros((n, n))
    for combo in itertools.product(*options):
        prim = np.array([[u for u, _ in combo]])
        prob = math.prod(p for _, p in combo)
        length, _ = path_arrays(prim, zero)
        out += prob * (length[0] >= L)
    return out


@dataclass
class TailReport:
    k_grid: tuple[float, ...]
    samples: int
    freq: np.ndarray  # (len(k_grid), n)
    bound: np.ndarray  # e^{-k/2}
    slack: np.ndarray  # 4 sigma at the bound
    max_excess: float  # max over k, roots of freq - bound - slack

    @property
    def ok(self) -> bool:
        return self.max_excess <= 0


def tail_bound_report(inst: ArrivalInstance, cfg: RoundingConfig, k_grid: Sequence[float] = (1, 2, 4),
                      samples: int = 100_000, rng: Optional[np.random.Generator] = None,
                      chunk: int = 20_000) -> TailReport:
    """Frequency that a root's certified primary path has ``z(B(P, T)) >= k`` vs ``e^{-k/2}``."""
    rng = np.random.default_rng(cfg.seed) if rng is None else rng
    plan = improved_plan(inst, cfg)
    Bz = blocking_matrix(inst, plan.z_map())
    ks = np.asarray(k_grid, dtype=float)
    hits = np.zeros((len(ks), inst.n))
    done = 0
    while done < samples:
        S = min(chunk, samples - done)
        _, cz = path_arrays(sample_primaries(plan, S, rng), Bz)
        hits += (cz[None, :, :] >= ks[:, None, None]).sum(axis=1)
        done += S
    freq = hits / samples
    bound = np.exp(-ks / 2)
    slack = 4 * np.sqrt(bound * (1 - bound) / samples)
    excess = freq - (bound + slack)[:, None]
    return TailReport(tuple(k_grid), samples, freq, bound, slack, float(excess.max(initial=-np.inf)))


@dataclass
class BadVertexReport:
    bad: int
    n: int
    fractional_value: float
    ratio: float  # bad / sum x
    reference: float  # eps^3, the asymptotic scale


def bad_vertex_report(est: LongPathEstimate, plan: RoundingPlan, eps: float) -> BadVertexReport:
    """Reported only: the asymptotic bound on bad vertices has unspecified constants."""
    bad = int((~est.good).sum())
    val = plan.fractional.value
    return BadVertexReport(bad, len(est.good), val, bad / val if val > 0 else 0.0, eps ** 3)


def write_diagnostics_csv(path, est: LongPathEstimate, tail: TailReport) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["vertex", "samples", "long_path_freq", "classification", "k", "tail_freq", "tail_bound"])
        for v in range(len(est.freq)):
            for i, k in enumerate(tail.k_grid):
                w.writerow([v, est.samples, f"{est.freq[v]:.12g}", "good" if est.good[v] else "bad",
                            f"{k:.12g}", f"{tail.freq[i, v]:.12g}", f"{tail.bound[i]:.12g}"])
