"""Online randomized rounding of the fractional solution.

Each arriving vertex ``v`` turns the fractional values ``x_uv`` into
conditional pick probabilities ``z_u = x_uv / Pr[u free]``, samples a primary
neighbor from the normalized ``z'`` and, when ``sum z > 1``, with probability
``sqrt(eps)`` a secondary neighbor that is kept only with the probability
needed to keep ``Pr[{u, v} matched] <= x_uv``.

Two probability engines supply ``Pr[u free]`` and ``Pr[w free | u free]``:

* :class:`ExactEngine` keeps the full distribution over matched-vertex subsets
  (exponential, intended for small instances and as a test oracle);
* :class:`ParticleEngine` simulates ``K`` independent copies of the process
  and reads probabilities off the ensemble.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .fractional import FractionalRun, FractionalState, WWParams, run_fractional
from .graph_core import ArrivalInstance, Edge

SUM_Z_TOL = 1e-9


class EngineCapacityError(ValueError):
    """The exact engine was asked to handle an instance above its size cap."""


class RoundingInvariantError(RuntimeError):
    """A quantity the analysis guarantees (e.g. ``sum z <= 1`` in the warmup) was violated."""


@dataclass(frozen=True)
class RoundingConfig:
    epsilon: float = 0.05
    engine: str = "exact"  # "exact" or "particles"
    max_n: int = 22
    particles: int = 20000
    seed: int = 0
    z_floor: float = 1e-6

    def __post_init__(self):
        if not 0 < self.epsilon <= 0.09:
            raise ValueError(f"epsilon must lie in (0, 0.09], got {self.epsilon}")
        if self.engine not in ("exact", "particles"):
            raise ValueError(f"unknown engine {self.engine!r}")
        if self.engine == "particles" and self.particles < 1000:
            raise ValueError("particle engine needs at least 1000 particles")
        if self.max_n > 22:
            raise ValueError("exact engine is capped at 22 vertices")
        if self.z_floor <= 0:
            raise ValueError("z_floor must be positive")

    @property
    def second_prob(self) -> float:
        return math.sqrt(self.epsilon)


# -- probability engines -----------------------------------------------------


class FreeStateDistribution:
    """Distribution over sets of matched vertices after a prefix of arrivals."""

    def __init__(self, arrived: int, masks: np.ndarray, probs: np.ndarray):
        self.arrived = arrived
        self.masks = masks
        self.probs = probs

    def items(self):
        """Yield ``(frozenset of free arrived vertices, probability)``."""
        full = (1 << self.arrived) - 1
        for m, p in zip(self.masks.tolist(), self.probs.tolist()):
            free = full & ~m
            yield frozenset(i for i in range(self.arrived) if (free >> i) & 1), p

    def total(self) -> float:
        return float(self.probs.sum())

    def free_probability(self, u: int) -> float:
        return float(self.probs[((self.masks >> u) & 1) == 0].sum())

    def joint_free(self, u: int, w: int) -> float:
        sel = (((self.masks >> u) & 1) == 0) & (((self.masks >> w) & 1) == 0)
        return float(self.probs[sel].sum())

    def conditional(self, w: int, u: int) -> float:
        """``Pr[w free | u free]``."""
        pu = self.free_probability(u)
        if pu == 0:
            return self.free_probability(w)
        return self.joint_free(u, w) / pu


def _conditionals(F: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """``cond[i, j] = Pr[F_j | F_i]`` from free indicators ``F`` (states x vertices)."""
    Fw = F * weights[:, None]
    joint = F.T @ Fw
    marg = np.diag(joint).copy()
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = joint / marg[:, None]
    # empty conditioning set: fall back to the unconditional estimate
    empty = marg <= 0
    if empty.any():
        cond[empty, :] = marg[None, :] / weights.sum()
    return cond


class ExactEngine:
    def __init__(self, n: int, max_n: int = 22):
        if n > max_n:
            raise EngineCapacityError(f"exact engine capped at {max_n} vertices, instance has {n}")
        self.n = n
        self.arrived = 0
        self.masks = np.zeros(1, dtype=np.int64)
        self.probs = np.ones(1)
        self.edge_probability: dict[Edge, float] = {}

    def _free(self, verts: np.ndarray) -> np.ndarray:
        return ((self.masks[:, None] >> verts[None, :]) & 1) == 0

    def marginals(self, verts: np.ndarray) -> np.ndarray:
        return self.probs @ self._free(verts)

    def conditionals(self, verts: np.ndarray) -> np.ndarray:
        return _conditionals(self._free(verts).astype(float), self.probs)

    def advance(self, v: int, verts: np.ndarray, zp: np.ndarray, second: float, keep: np.ndarray) -> None:
        F = self._free(verts)
        blocked = (~F).astype(float) @ zp
        q = F * zp[None, :] * (1.0 + second * keep[None, :] * blocked[:, None])
        stay = np.clip(1.0 - q.sum(axis=1), 0.0, None)
        p = self.probs
        new_masks = [self.masks]
        new_probs = [p * stay]
        for j, u in enumerate(verts.tolist()):
            new_masks.append(self.masks | np.int64((1 << u) | (1 << v)))
            new_probs.append(p * q[:, j])
            self.edge_probability[(u, v)] = float(p @ q[:, j])
        masks = np.concatenate(new_masks)
        probs = np.concatenate(new_probs)
        keep_rows = probs > 0
        masks, inv = np.unique(masks[keep_rows], return_inverse=True)
        self.probs = np.bincount(inv.ravel(), weights=probs[keep_rows])
        self.masks = masks
        self.arrived = v + 1

    def distribution(self) -> FreeStateDistribution:
        return FreeStateDistribution(self.arrived, self.masks.copy(), self.probs.copy())


class ParticleEngine:
    """``K`` simulated copies of the process; row ``k`` is particle ``k``'s free vector."""

    def __init__(self, n: int, particles: int):
        self.n = n
        self.free = np.ones((particles, n), dtype=bool)

    @property
    def K(self) -> int:
        return self.free.shape[0]

    def marginals(self, verts: np.ndarray) -> np.ndarray:
        return self.free[:, verts].mean(axis=0)

    def conditionals(self, verts: np.ndarray) -> np.ndarray:
        return _conditionals(self.free[:, verts].astype(float), np.ones(self.K))

    def apply(self, v: int, verts: np.ndarray, targets: np.ndarray) -> None:
        hit = targets >= 0
        rows = np.nonzero(hit)[0]
        self.free[rows, verts[targets[hit]]] = False
        self.free[rows, v] = False


# -- per-arrival probabilities -------------------------------------------------


def keep_probability(x_uv: float, marg_u: float, zp_u: float, zp: np.ndarray,
                     cond_row: np.ndarray, eps: float) -> float:
    """Probability of keeping ``u`` when it is drawn as the second choice.

    ``first`` is the chance ``v`` takes ``u`` as first choice, ``second`` the
    extra chance via the second choice if it were always kept.
    """
    first = marg_u * zp_u
    second = marg_u * zp_u * math.sqrt(eps) * float(np.dot(zp, 1.0 - cond_row))
    if second <= 0:
        return 1.0
    return min(1.0, max(0.0, (x_uv - first) / second))


def keep_probabilities(x: np.ndarray, marg: np.ndarray, zp: np.ndarray, cond: np.ndarray, eps: float) -> np.ndarray:
    return np.array([keep_probability(x[i], marg[i], zp[i], zp, cond[i], eps) for i in range(len(x))])


def match_probability_without_drop(marg: np.ndarray, zp: np.ndarray, cond: np.ndarray, eps: float) -> np.ndarray:
    """Per-neighbor match probability if the second choice were never dropped."""
    return marg * (zp + zp * math.sqrt(eps) * ((1.0 - cond) @ zp))


@dataclass
class ArrivalPlan:
    """Everything ``v`` needs to make its random choices."""

    v: int
    nbrs: np.ndarray
    x: np.ndarray
    marginals: np.ndarray
    z: np.ndarray
    zprime: np.ndarray
    sum_z: float
    second_prob: float
    keep: np.ndarray
    conditionals: Optional[np.ndarray] = None

    @property
    def normalized(self) -> bool:
        return self.sum_z > 1.0


def _plan_arrival(v, nbrs, x, marg, z_floor, eps, cond_fn, warmup: bool) -> ArrivalPlan:
    z = np.clip(x / np.maximum(marg, z_floor), 0.0, 1.0)
    s = float(z.sum())
    if warmup and s > 1.0 + SUM_Z_TOL:
        raise RoundingInvariantError(f"sum of z is {s} > 1 at arrival {v}")
    zp = z / max(1.0, s)
    cond = None
    keep = np.ones(len(nbrs))
    second = 0.0
    if not warmup and s > 1.0:
        cond = cond_fn()
        keep = keep_probabilities(x, marg, zp, cond, eps)
        second = math.sqrt(eps)
    return ArrivalPlan(v, nbrs, x, marg, z, zp, s, second, keep, cond)


@dataclass
class RoundingPlan:
    """Deterministic per-arrival probabilities computed by the exact engine."""

    instance: ArrivalInstance
    fractional: FractionalRun
    arrivals: list[ArrivalPlan]
    edge_probability: dict[Edge, float]
    engine: ExactEngine

    def z_map(self) -> dict[Edge, float]:
        """``z`` value of every potential arc ``(v, u)``, keyed source first."""
        return {(a.v, int(u)): float(zu) for a in self.arrivals for u, zu in zip(a.nbrs, a.z)}

    def zprime_map(self) -> dict[Edge, float]:
        return {(a.v, int(u)): float(zu) for a in self.arrivals for u, zu in zip(a.nbrs, a.zprime)}

    @property
    def lossless_regime(self) -> bool:
        """True if no arrival needed normalization (``sum z <= 1`` throughout)."""
        return all(a.sum_z <= 1.0 for a in self.arrivals)


def _exact_plan(inst: ArrivalInstance, params: WWParams, eps: float, z_floor: float,
                max_n: int, warmup: bool, upto: Optional[int] = None) -> RoundingPlan:
    engine = ExactEngine(inst.n, max_n)
    state = FractionalState(inst.n, params)
    arrivals = []
    stop = inst.n if upto is None else upto
    for v in range(stop):
        step = state.process_arrival(v, inst.nbrs[v])
        nb = np.asarray(step.nbrs, dtype=int)
        marg = 1.0 - step.y_before if warmup else engine.marginals(nb)
        plan = _plan_arrival(v, nb, step.x_new, marg, z_floor, eps, lambda: engine.conditionals(nb), warmup)
        engine.advance(v, nb, plan.zprime, plan.second_prob, plan.keep)
        arrivals.append(plan)
    frac = run_fractional(inst, params)
    return RoundingPlan(inst, frac, arrivals, dict(engine.edge_probability), engine)


@lru_cache(maxsize=64)
def warmup_plan(inst: ArrivalInstance, max_n: int = 22) -> RoundingPlan:
    """Exact distribution of the warmup rounding (kappa = 1, beta = 2)."""
    return _exact_plan(inst, WWParams.warmup(), 0.0, 1e-12, max_n, warmup=True)


@lru_cache(maxsize=64)
def _improved_plan_cached(inst, eps, z_floor, max_n) -> RoundingPlan:
    return _exact_plan(inst, WWParams.improved(eps), eps, z_floor, max_n, warmup=False)


def improved_plan(inst: ArrivalInstance, cfg: RoundingConfig) -> RoundingPlan:
    """Exact per-arrival probabilities of the improved rounding."""
    return _improved_plan_cached(inst, cfg.epsilon, cfg.z_floor, cfg.max_n)


def exact_free_distribution(inst: ArrivalInstance, cfg: RoundingConfig, upto: int) -> FreeStateDistribution:
    """Joint free/matched distribution after the first ``upto`` arrivals."""
    if not 0 <= upto <= inst.n:
        raise ValueError(f"upto must lie in [0, {inst.n}]")
    plan = _exact_plan(inst, WWParams.improved(cfg.epsilon), cfg.epsilon, cfg.z_floor,
                       cfg.max_n, warmup=False, upto=upto)
    return plan.engine.distribution()


# -- sampling -----------------------------------------------------------------


@dataclass
class Draws:
    u1: np.ndarray  # index into nbrs, -1 for none
    second: np.ndarray  # second sample taken
    u2: np.ndarray  # index, -1 for none (raw draw, before the drop rule)
    keep_coin: np.ndarray
    kept: np.ndarray


def draw_choices(rng: np.random.Generator, K: int, plan: ArrivalPlan) -> Draws:
    """Inverse-CDF draws over neighbors in arrival order, one uniform per decision."""
    r = rng.random((4, K))
    d = len(plan.zprime)
    cdf = np.cumsum(plan.zprime)
    if d:
        u1 = np.searchsorted(cdf, r[0], side="right")
        u1[u1 >= d] = -1
    else:
        u1 = np.full(K, -1)
    second = (r[1] < plan.second_prob) & (u1 >= 0)
    if d:
        u2 = np.searchsorted(cdf, r[2], side="right")
        u2[(u2 >= d) | ~second] = -1
    else:
        u2 = np.full(K, -1)
    kept = (u2 >= 0) & (r[3] < plan.keep[np.maximum(u2, 0)]) if d else np.zeros(K, dtype=bool)
    return Draws(u1, second, u2, r[3], kept)


def resolve(free_nbrs: np.ndarray, draws: Draws) -> np.ndarray:
    """Neighbor index each copy matches to (``-1``: stays free). ``free_nbrs`` is K x d."""
    K = free_nbrs.shape[0]
    rows = np.arange(K)
    out = np.full(K, -1)
    if free_nbrs.shape[1] == 0:
        return out
    has1 = draws.u1 >= 0
    ok1 = has1 & free_nbrs[rows, np.maximum(draws.u1, 0)]
    out[ok1] = draws.u1[ok1]
    ok2 = has1 & ~ok1 & draws.kept & free_nbrs[rows, np.maximum(draws.u2, 0)]
    out[ok2] = draws.u2[ok2]
    return out


@dataclass
class ArcProfile:
    """Random choices of every vertex: primary, surviving secondary, drop coin."""

    n: int
    primary: list[Optional[int]] = field(default_factory=list)
    secondary: list[Optional[int]] = field(default_factory=list)
    keep_coin: list[float] = field(default_factory=list)

    @classmethod
    def empty(cls, n: int) -> "ArcProfile":
        return cls(n, [None] * n, [None] * n, [1.0] * n)


@dataclass
class ArrivalRecord:
    v: int
    sum_z: float
    normalized: bool
    second_sampled: bool
    matched_to: Optional[int]
    engine_marginal_min: float
    engine_marginal_max: float
    primary: Optional[int]
    secondary: Optional[int]


@dataclass
class RoundingResult:
    matching: list[Edge]
    profile: ArcProfile
    records: list[ArrivalRecord]
    plans: list[ArrivalPlan]
    fractional: FractionalRun
    edge_probability: Optional[dict[Edge, float]] = None

    @property
    def size(self) -> int:
        return len(self.matching)

    def indicator(self) -> dict[Edge, int]:
        got = set(self.matching)
        return {e: int(e in got) for e in self.fractional.x}


def _record(plan: ArrivalPlan, draws: Draws, target: int) -> ArrivalRecord:
    nb = plan.nbrs
    u1 = int(nb[draws.u1[0]]) if draws.u1[0] >= 0 else None
    u2 = int(nb[draws.u2[0]]) if draws.kept[0] else None
    marg = plan.marginals
    return ArrivalRecord(
        v=plan.v, sum_z=plan.sum_z, normalized=plan.normalized,
        second_sampled=bool(draws.second[0]),
        matched_to=int(nb[target]) if target >= 0 else None,
        engine_marginal_min=float(marg.min()) if len(marg) else 1.0,
        engine_marginal_max=float(marg.max()) if len(marg) else 1.0,
        primary=u1, secondary=u2,
    )


def realize(plan: RoundingPlan, rng: np.random.Generator) -> RoundingResult:
    """Sample one run of the algorithm from precomputed per-arrival probabilities."""
    n = plan.instance.n
    free = np.ones(n, dtype=bool)
    profile = ArcProfile(n)
    records = []
    matching = []
    for a in plan.arrivals:
        draws = draw_choices(rng, 1, a)
        t = int(resolve(free[a.nbrs][None, :], draws)[0])
        rec = _record(a, draws, t)
        records.append(rec)
        profile.primary.append(rec.primary)
        profile.secondary.append(rec.secondary)
        profile.keep_coin.append(float(draws.keep_coin[0]))
        if t >= 0:
            u = int(a.nbrs[t])
            free[u] = free[a.v] = False
            matching.append((u, a.v))
    return RoundingResult(matching, profile, records, plan.arrivals, plan.fractional, plan.edge_probability)


def run_warmup(inst: ArrivalInstance, seed: int = 0, max_n: int = 22) -> RoundingResult:
    """Warmup rounding: ``z_u = x_uv / (1 - y_u)``, one pick, match if free.

    ``edge_probability`` on the result is the exact per-edge match probability
    (computed when ``inst.n <= max_n``).
    """
    if inst.n <= max_n:
        plan = warmup_plan(inst, max_n)
    else:
        plan = _formula_only_plan(inst)
    return realize(plan, np.random.default_rng(seed))


def _formula_only_plan(inst: ArrivalInstance) -> RoundingPlan:
    state = FractionalState(inst.n, WWParams.warmup())
    arrivals = []
    for v in range(inst.n):
        step = state.process_arrival(v, inst.nbrs[v])
        nb = np.asarray(step.nbrs, dtype=int)
        arrivals.append(_plan_arrival(v, nb, step.x_new, 1.0 - step.y_before, 1e-12, 0.0, None, warmup=True))
    frac = run_fractional(inst, WWParams.warmup())
    return RoundingPlan(inst, frac, arrivals, {}, None)


def warmup_edge_frequencies(inst: ArrivalInstance, trials: int, seed: int = 0) -> dict[Edge, float]:
    """Monte Carlo per-edge match frequencies of the warmup rounding (vectorized)."""
    plan = _formula_only_plan(inst)
    return _simulate(plan, trials, np.random.default_rng(seed))[0]


def _simulate(plan: RoundingPlan, K: int, rng: np.random.Generator):
    """Run ``K`` independent copies of a fixed plan; returns edge frequencies and the ensemble."""
    pe = ParticleEngine(plan.instance.n, K)
    counts: dict[Edge, float] = {}
    for a in plan.arrivals:
        draws = draw_choices(rng, K, a)
        targets = resolve(pe.free[:, a.nbrs], draws)
        for j, u in enumerate(a.nbrs.tolist()):
            counts[(u, a.v)] = float(np.mean(targets == j))
        pe.apply(a.v, a.nbrs, targets)
    return counts, pe


def run_improved(inst: ArrivalInstance, cfg: RoundingConfig = RoundingConfig()) -> RoundingResult:
    """Improved rounding with ``beta = 2 - eps`` and ``f = f_{1+2 eps}``."""
    rng = np.random.default_rng(cfg.seed)
    if cfg.engine == "exact":
        return realize(improved_plan(inst, cfg), rng)
    return _run_particles(inst, cfg, rng)


def _run_particles(inst: ArrivalInstance, cfg: RoundingConfig, rng: np.random.Generator) -> RoundingResult:
    params = WWParams.improved(cfg.epsilon)
    pe = ParticleEngine(inst.n, cfg.particles)
    state = FractionalState(inst.n, params)
    plans, records = [], []
    profile = ArcProfile(inst.n)
    matching = []
    for v in range(inst.n):
        step = state.process_arrival(v, inst.nbrs[v])
        nb = np.asarray(step.nbrs, dtype=int)
        plan = _plan_arrival(v, nb, step.x_new, pe.marginals(nb), cfg.z_floor, cfg.epsilon,
                             lambda: pe.conditionals(nb), warmup=False)
        draws = draw_choices(rng, pe.K, plan)
        targets = resolve(pe.free[:, nb], draws)
        rec = _record(plan, draws, int(targets[0]))
        pe.apply(v, nb, targets)
        plans.append(plan)
        records.append(rec)
        profile.primary.append(rec.primary)
        profile.secondary.append(rec.secondary)
        profile.keep_coin.append(float(draws.keep_coin[0]))
        if rec.matched_to is not None:
            matching.append((rec.matched_to, v))
    frac = run_fractional(inst, params)
    result = RoundingResult(matching, profile, records, plans, frac)
    result.particle_free = pe.free  # type: ignore[attr-defined]
    return result


def particle_plan(inst: ArrivalInstance, cfg: RoundingConfig) -> RoundingPlan:
    """Per-arrival probabilities estimated by the particle engine (no exact edge probabilities)."""
    res = _run_particles(inst, cfg, np.random.default_rng(cfg.seed))
    return RoundingPlan(inst, res.fractional, res.plans, {}, None)


def write_records_csv(result: RoundingResult, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["arrival", "sum_z", "normalized", "second_sampled", "matched_to",
                    "engine_marginal_min", "engine_marginal_max"])
        for r in result.records:
            w.writerow([r.v, f"{r.sum_z:.12g}", int(r.normalized), int(r.second_sampled),
                        "" if r.matched_to is None else r.matched_to,
                        f"{r.engine_marginal_min:.12g}", f"{r.engine_marginal_max:.12g}"])


# -- selection graphs ----------------------------------------------------------


class ArcKind(str, enum.Enum):
    PRIMARY = "primary"
    SECONDARY = "secondary"


@dataclass(frozen=True)
class Arc:
    source: int
    target: int
    kind: ArcKind


@dataclass(frozen=True)
class SelectionGraph:
    n: int
    arcs: tuple[Arc, ...]


@dataclass(frozen=True)
class PrunedGraph:
    n: int
    arcs: tuple[Arc, ...]
    # primary arcs of the selection graph removed by pruning, as (source, target)
    pruned_primary: Optional[tuple[Edge, ...]] = None

    def primary_out(self) -> list[int]:
        out = [-1] * self.n
        for a in self.arcs:
            if a.kind is ArcKind.PRIMARY:
                out[a.source] = a.target
        return out


def build_selection(inst: ArrivalInstance, profile: ArcProfile) -> SelectionGraph:
    arcs = []
    for v in range(profile.n):
        for choice, kind in ((profile.primary[v], ArcKind.PRIMARY), (profile.secondary[v], ArcKind.SECONDARY)):
            if choice is None:
                continue
            if choice not in inst.nbrs[v]:
                raise ValueError(f"vertex {v} chose {choice}, which is not an earlier neighbor")
            arcs.append(Arc(v, choice, kind))
    return SelectionGraph(profile.n, tuple(arcs))


def prune_selection(g: SelectionGraph) -> PrunedGraph:
    """Drop arcs into a target that already has an earlier primary arc.

    A secondary arc ``(v, u)`` also goes if ``v`` itself holds the first
    primary arc into ``u``.
    """
    first = [g.n] * g.n
    for a in g.arcs:
        if a.kind is ArcKind.PRIMARY:
            first[a.target] = min(first[a.target], a.source)
    kept = []
    dropped = []
    for a in g.arcs:
        f = first[a.target]
        if a.kind is ArcKind.PRIMARY:
            (kept if a.source <= f else dropped).append(a)
        elif a.source < f:
            kept.append(a)
    return PrunedGraph(g.n, tuple(kept), tuple((a.source, a.target) for a in dropped))


def greedy_status_trace(h: PrunedGraph) -> tuple[list[Edge], np.ndarray]:
    """Greedy matching on ``h`` in arrival order, primary first.

    Returns the matching and a boolean array whose row ``t`` is the matched
    status of every vertex after ``t`` arrivals.
    """
    prim = [-1] * h.n
    sec = [-1] * h.n
    for a in h.arcs:
        if a.kind is ArcKind.PRIMARY:
            prim[a.source] = a.target
        else:
            sec[a.source] = a.target
    matched = np.zeros(h.n, dtype=bool)
    trace = np.zeros((h.n + 1, h.n), dtype=bool)
    pairs = []
    for v in range(h.n):
        for t in (prim[v], sec[v]):
            if t >= 0 and not matched[t]:
                matched[t] = matched[v] = True
                pairs.append((t, v))
                break
        trace[v + 1] = matched
    return pairs, trace


def greedy_match_pruned(h: PrunedGraph, inst: Optional[ArrivalInstance] = None) -> list[Edge]:
    return greedy_status_trace(h)[0]


def random_profile(inst: ArrivalInstance, rng: np.random.Generator, p_primary: float = 0.8,
                   p_secondary: float = 0.3) -> ArcProfile:
    """Arbitrary (not algorithm-driven) choices; for structural tests of the selection graphs."""
    prof = ArcProfile.empty(inst.n)
    for v in range(inst.n):
        prof.primary[v], prof.secondary[v] = _random_choices(inst.nbrs[v], rng, p_primary, p_secondary)
        prof.keep_coin[v] = float(rng.random())
    return prof


def _random_choices(nb: Sequence[int], rng, p_primary, p_secondary):
    if not nb:
        return None, None
    prim = int(rng.choice(nb)) if rng.random() < p_primary else None
    sec = int(rng.choice(nb)) if prim is not None and rng.random() < p_secondary else None
    return prim, sec


def resample_vertex(inst: ArrivalInstance, profile: ArcProfile, v: int, rng: np.random.Generator,
                    p_primary: float = 0.8, p_secondary: float = 0.3) -> ArcProfile:
    """Copy of ``profile`` with vertex ``v``'s choices redrawn."""
    out = ArcProfile(profile.n, list(profile.primary), list(profile.secondary), list(profile.keep_coin))
    out.primary[v], out.secondary[v] = _random_choices(inst.nbrs[v], rng, p_primary, p_secondary)
    return out


# -- sampling whole choice profiles ------------------------------------------------


def sample_choice_arrays(plan: RoundingPlan, S: int, rng: np.random.Generator):
    """Draw ``S`` independent choice profiles from a plan.

    The choices of a vertex do not depend on the matching state, so a profile
    can be drawn up front. Returns ``(primary, secondary, coin)`` arrays of
    shape ``(S, n)``; ``-1`` marks a missing arc and ``secondary`` already has
    dropped arcs removed.
    """
    n = plan.instance.n
    prim = np.full((S, n), -1, dtype=np.int64)
    sec = np.full((S, n), -1, dtype=np.int64)
    coin = np.ones((S, n))
    for a in plan.arrivals:
        if not len(a.nbrs):
            continue
        d = draw_choices(rng, S, a)
        has1 = d.u1 >= 0
        prim[has1, a.v] = a.nbrs[d.u1[has1]]
        sec[d.kept, a.v] = a.nbrs[d.u2[d.kept]]
        coin[:, a.v] = d.keep_coin
    return prim, sec, coin


def profile_from_arrays(prim_row, sec_row, coin_row) -> ArcProfile:
    opt = lambda t: None if t < 0 else int(t)
    return ArcProfile(len(prim_row), [opt(t) for t in prim_row], [opt(t) for t in sec_row],
                      [float(c) for c in coin_row])


def sample_profile(plan: RoundingPlan, rng: np.random.Generator) -> ArcProfile:
    prim, sec, coin = sample_choice_arrays(plan, 1, rng)
    return profile_from_arrays(prim[0], sec[0], coin[0])


def resample_from_plan(plan: RoundingPlan, profile: ArcProfile, v: int, rng: np.random.Generator) -> ArcProfile:
    """Copy of ``profile`` with vertex ``v``'s choices redrawn from the plan."""
    out = ArcProfile(profile.n, list(profile.primary), list(profile.secondary), list(profile.keep_coin))
    a = plan.arrivals[v]
    if len(a.nbrs):
        d = draw_choices(rng, 1, a)
        out.primary[v] = int(a.nbrs[d.u1[0]]) if d.u1[0] >= 0 else None
        out.secondary[v] = int(a.nbrs[d.u2[0]]) if d.kept[0] else None
        out.keep_coin[v] = float(d.keep_coin[0])
    return out


@dataclass
class ZStructureReport:
    """Shape of ``z`` at arrivals that needed normalization."""

    arrivals: int
    normalized: int
    max_sum_z: float
    max_z: float
    min_marginal: float
    max_marginal: float
    sum_bound_ok: bool
    max_bound_ok: bool
    marginals_in_band: bool


def z_structure_report(plans: Sequence[ArrivalPlan], eps: float, C: float = 10.0, c: float = 0.0) -> ZStructureReport:
    """Compare ``sum z <= 1 + C eps`` and ``max z <= 1/2 + C sqrt(eps)`` at normalized arrivals.

    Free probabilities are checked against the band ``[c, 1 - c]``; the
    constants are configurable since only their existence is known.
    """
    norm = [a for a in plans if a.sum_z > 1.0]
    max_s = max((a.sum_z for a in norm), default=0.0)
    max_z = max((float(a.z.max()) for a in norm), default=0.0)
    lo = min((float(a.marginals.min()) for a in norm), default=1.0)
    hi = max((float(a.marginals.max()) for a in norm), default=0.0)
    return ZStructureReport(
        arrivals=len(plans), normalized=len(norm), max_sum_z=max_s, max_z=max_z,
        min_marginal=lo, max_marginal=hi,
        sum_bound_ok=max_s <= 1 + C * eps, max_bound_ok=max_z <= 0.5 + C * math.sqrt(eps),
        marginals_in_band=not norm or (lo >= c and hi <= 1 - c),
    )
