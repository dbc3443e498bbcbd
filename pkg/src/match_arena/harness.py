"""Instance families, experiment runs and reproducible CSV output.

Seeds: the instance is drawn from ``spec.seed``; trial ``i`` uses
``derive_seed(spec.seed, i) = splitmix64(splitmix64(seed) ^ i)``, so any single
trial can be reproduced on its own.
"""

from __future__ import annotations

import csv
import io
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence, Union

import numpy as np

from .fractional import KAPPA_OPT, WWParams, beta_star, run_fractional
from .graph_core import (ArrivalInstance, EdgeArrivalInstance, check_fractional_feasibility, check_matching,
                         maximum_matching)
from .hardness import BASELINES, generate_hard_instance, run_edge_algorithm
from .rounding import RoundingConfig, improved_plan, realize, run_improved, warmup_plan

MASK64 = (1 << 64) - 1

FAMILIES = ("hard_gn", "random_bipartite", "random_general", "path", "three_edge_path", "triangle")
ALGORITHMS = ("greedy", "warmup", "improved", "fractional_ww", "edge_baseline")
EDGE_ALGORITHMS = ("edge_baseline",)


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def derive_seed(base: int, trial: int) -> int:
    return splitmix64(splitmix64(base & MASK64) ^ trial)


@dataclass(frozen=True)
class ExperimentSpec:
    family: str = "random_general"
    algorithm: str = "greedy"
    n: int = 8
    p: float = 0.5
    trials: int = 1
    seed: int = 0
    epsilon: float = 0.05
    engine: str = "exact"
    particles: int = 20000
    kappa: float = KAPPA_OPT
    beta: Optional[float] = None  # None: beta_star(kappa)
    baseline: str = "water_filling"

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; choose from {FAMILIES}")
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}; choose from {ALGORITHMS}")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if not 0 <= self.p <= 1:
            raise ValueError("p must lie in [0, 1]")
        edge_family = self.family == "hard_gn"
        if edge_family != (self.algorithm in EDGE_ALGORITHMS):
            raise ValueError(f"algorithm {self.algorithm!r} cannot run on family {self.family!r}")
        if self.baseline not in BASELINES:
            raise ValueError(f"unknown edge baseline {self.baseline!r}")

    @property
    def instance_id(self) -> str:
        if self.family in ("three_edge_path", "triangle"):
            return self.family
        if self.family in ("hard_gn", "path"):
            return f"{self.family}-{self.n}"
        return f"{self.family}-{self.n}-{self.p:g}-{self.seed}"


Instance = Union[ArrivalInstance, EdgeArrivalInstance]


def random_general(n: int, p: float, rng: np.random.Generator) -> ArrivalInstance:
    iu, ju = np.triu_indices(n, 1)
    keep = rng.random(len(iu)) < p
    return ArrivalInstance.from_edges(n, zip(iu[keep].tolist(), ju[keep].tolist()))


def random_bipartite(n: int, p: float, rng: np.random.Generator) -> ArrivalInstance:
    """``n`` vertices split into halves, edges across with probability ``p``, random arrival order."""
    side = np.zeros(n, dtype=bool)
    side[: (n + 1) // 2] = True
    order = rng.permutation(n)  # order[i] = arrival position of original vertex i
    iu, ju = np.triu_indices(n, 1)
    cross = side[iu] != side[ju]
    keep = cross & (rng.random(len(iu)) < p)
    edges = [(int(order[a]), int(order[b])) for a, b in zip(iu[keep], ju[keep])]
    return ArrivalInstance.from_edges(n, edges)


def generate_family(spec: ExperimentSpec) -> Instance:
    fam = spec.family
    if fam == "hard_gn":
        return generate_hard_instance(spec.n)
    if fam == "path":
        if spec.n < 1:
            raise ValueError("path needs at least one vertex")
        return ArrivalInstance.from_edges(spec.n, [(i, i + 1) for i in range(spec.n - 1)])
    if fam == "three_edge_path":
        # path a - b - c - d; internal b, c arrive first: ids b=0, c=1, a=2, d=3
        return ArrivalInstance.from_edges(4, [(0, 1), (0, 2), (1, 3)])
    if fam == "triangle":
        return ArrivalInstance.from_edges(3, [(0, 1), (0, 2), (1, 2)])
    if spec.n < 1:
        raise ValueError("n must be positive")
    rng = np.random.default_rng(spec.seed)
    if fam == "random_general":
        return random_general(spec.n, spec.p, rng)
    return random_bipartite(spec.n, spec.p, rng)


def greedy_integral(inst: ArrivalInstance) -> list[tuple[int, int]]:
    """Match each arrival to its earliest free neighbor."""
    free = [True] * inst.n
    out = []
    for v, nb in enumerate(inst.nbrs):
        for u in nb:
            if free[u]:
                free[u] = free[v] = False
                out.append((u, v))
                break
    return out


@dataclass
class ResultRow:
    instance_id: str
    trial: int
    value: float
    opt: int
    ratio: float
    runtime: float = field(default=0.0, compare=False)


@lru_cache(maxsize=128)
def _opt(inst: Instance) -> int:
    edges = inst.edges() if isinstance(inst, ArrivalInstance) else inst.edges
    return len(maximum_matching(inst.n, edges))


def _ww_params(spec: ExperimentSpec) -> WWParams:
    beta = beta_star(spec.kappa) if spec.beta is None else spec.beta
    return WWParams(spec.kappa, beta)


def _run_one(spec: ExperimentSpec, inst: Instance, trial: int) -> ResultRow:
    t0 = time.perf_counter()
    seed = derive_seed(spec.seed, trial)
    alg = spec.algorithm
    if alg == "edge_baseline":
        xs = run_edge_algorithm(BASELINES[spec.baseline], inst)
        value = float(xs.sum())
    elif alg == "fractional_ww":
        run = run_fractional(inst, _ww_params(spec))
        rep = check_fractional_feasibility(run.x, inst.n, inst.edges())
        if not rep.feasible:
            raise RuntimeError(f"fractional output infeasible: max load {rep.max_load}")
        value = run.value
    else:
        if alg == "greedy":
            matching = greedy_integral(inst)
        elif alg == "warmup":
            matching = realize(warmup_plan(inst), np.random.default_rng(seed)).matching
        else:
            cfg = RoundingConfig(epsilon=spec.epsilon, engine=spec.engine, particles=spec.particles, seed=seed)
            if spec.engine == "exact":
                matching = realize(improved_plan(inst, cfg), np.random.default_rng(seed)).matching
            else:
                matching = run_improved(inst, cfg).matching
        check_matching(matching, inst.edges())
        value = float(len(matching))
    opt = _opt(inst)
    ratio = value / opt if opt > 0 else 1.0
    return ResultRow(spec.instance_id, trial, value, opt, ratio, time.perf_counter() - t0)


def thread_count() -> int:
    cap = os.environ.get("MATCH_ARENA_THREADS")
    n = os.cpu_count() or 1
    if cap:
        n = max(1, min(n, int(cap)))
    return n


def run_trials(spec: ExperimentSpec, threads: Optional[int] = None) -> list[ResultRow]:
    """Run every trial; rows come back ordered by trial index."""
    inst = generate_family(spec)
    threads = thread_count() if threads is None else threads
    # the first trial populates the per-instance caches before fanning out
    rows = [_run_one(spec, inst, 0)]
    rest = range(1, spec.trials)
    if threads > 1 and spec.trials > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows += list(pool.map(lambda t: _run_one(spec, inst, t), rest))
    else:
        rows += [_run_one(spec, inst, t) for t in rest]
    return rows


@dataclass
class Summary:
    count: int
    mean_ratio: float
    stderr: float
    mean_value: float


def summarize(rows: Sequence[ResultRow]) -> Summary:
    if not rows:
        raise ValueError("no rows to summarize")
    r = np.array([row.ratio for row in rows])
    se = float(r.std(ddof=1) / np.sqrt(len(r))) if len(r) > 1 else 0.0
    return Summary(len(r), float(r.mean()), se, float(np.mean([row.value for row in rows])))


CSV_COLUMNS = ["instance_id", "trial", "value", "opt", "ratio"]


def rows_to_csv(rows: Sequence[ResultRow]) -> str:
    """Byte-stable CSV (runtime is left out since it varies between runs)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([r.instance_id, r.trial, f"{r.value:.12g}", r.opt, f"{r.ratio:.12g}"])
    return buf.getvalue()


def write_csv(rows: Sequence[ResultRow], path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(rows_to_csv(rows))


def format_table(spec: ExperimentSpec, s: Summary) -> str:
    return (
        f"{'instance':<28}{'algorithm':<16}{'trials':>8}{'mean ratio':>14}{'std err':>12}\n"
        f"{spec.instance_id:<28}{spec.algorithm:<16}{s.count:>8}{s.mean_ratio:>14.6f}{s.stderr:>12.6f}\n"
    )
