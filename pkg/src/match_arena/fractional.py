"""Primal-dual online fractional matching under general vertex arrivals.

When ``v`` arrives with earlier neighbors ``N``, the algorithm picks the largest
``theta <= 1`` with ``sum_u (theta - y_u)^+ <= f(theta)``, sets

    x_uv = (theta - y_u)^+ / beta * (1 + (1 - theta) / f(theta)),
    y_u  = max(y_u, theta),     y_v = 1 - theta,

for a function ``f`` from the one-parameter family ``f_kappa`` below.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import integrate

from .graph_core import ArrivalInstance, Edge

#: kappa giving the best ratio of the family (about 0.526)
KAPPA_OPT = 1.1997


def f_kappa(theta, kappa: float):
    """Evaluate ``f_kappa`` on scalars or arrays; ``f_1(theta) = 1 - theta``."""
    if kappa < 1:
        raise ValueError(f"kappa must be >= 1, got {kappa}")
    t = np.asarray(theta, dtype=float)
    if np.any(t < -1e-12) or np.any(t > 1 + 1e-12):
        raise ValueError("theta must lie in [0, 1]")
    t = np.clip(t, 0.0, 1.0)
    if kappa == 1:
        out = 1.0 - t
    else:
        a = (1 + kappa) / 2 - t
        b = t + (kappa - 1) / 2
        out = a ** ((1 + kappa) / (2 * kappa)) * b ** ((kappa - 1) / (2 * kappa))
    return float(out) if out.ndim == 0 else out


def beta_star(kappa: float) -> float:
    """Smallest beta for which the family member ``f_kappa`` is guaranteed feasible."""
    return 1.0 + f_kappa(0.0, kappa)


def tightness_residual(theta: float, kappa: float) -> float:
    """``1 + f(1-theta) + int_theta^1 (1-t)/f(t) dt - beta_star``; zero on the family."""
    if kappa == 1:
        integrand = lambda t: 1.0  # (1-t)/(1-t)
    else:
        integrand = lambda t: (1 - t) / f_kappa(t, kappa)
    val, _ = integrate.quad(integrand, theta, 1.0, epsabs=1e-12, epsrel=1e-10)
    return 1.0 + f_kappa(1.0 - theta, kappa) + val - beta_star(kappa)


def taylor_upper_bound(theta, eps: float):
    """Simplified upper bound for ``f_{1+2eps}`` used in the small-eps analysis."""
    t = np.asarray(theta, dtype=float)
    return (1 - t) * (1 + eps * np.log((t + eps) / (1 + eps - t))) + 1.01 * eps


class Binding(enum.Enum):
    AT_ONE = "at_one"
    INTERIOR = "interior"


@dataclass(frozen=True)
class ThetaResult:
    theta: float
    binding: Binding


def solve_theta(duals: Sequence[float], kappa: float, tol: float = 1e-12) -> ThetaResult:
    """Largest theta <= 1 with ``sum (theta - y)^+ <= f_kappa(theta)``.

    The slack ``sum (theta - y)^+ - f(theta)`` is nondecreasing in theta, so
    bisection applies. The returned theta is always feasible.
    """
    y = np.asarray(duals, dtype=float)
    if y.size and (y.min() < -1e-12 or y.max() > 1 + 1e-12):
        raise ValueError("duals must lie in [0, 1]")

    def slack(t: float) -> float:
        return float(np.maximum(t - y, 0.0).sum()) - f_kappa(t, kappa)

    if slack(1.0) <= 0.0:
        return ThetaResult(1.0, Binding.AT_ONE)
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if slack(mid) <= 0.0:
            lo = mid
        else:
            hi = mid
    return ThetaResult(lo, Binding.INTERIOR)


@dataclass(frozen=True)
class WWParams:
    kappa: float = 1.0
    beta: float = 2.0
    epsilon: float = 0.0

    def __post_init__(self):
        if self.kappa < 1 or self.beta <= 0:
            raise ValueError(f"invalid parameters kappa={self.kappa}, beta={self.beta}")

    @classmethod
    def warmup(cls) -> "WWParams":
        return cls(1.0, 2.0, 0.0)

    @classmethod
    def improved(cls, eps: float) -> "WWParams":
        return cls(1 + 2 * eps, 2 - eps, eps)

    @classmethod
    def best_known(cls) -> "WWParams":
        return cls(KAPPA_OPT, beta_star(KAPPA_OPT), 0.0)

    def f(self, theta):
        return f_kappa(theta, self.kappa)

    @property
    def guaranteed(self) -> bool:
        return self.beta >= beta_star(self.kappa) - 1e-12


@dataclass
class ArrivalStep:
    v: int
    nbrs: tuple[int, ...]
    theta: float
    binding: Binding
    y_before: np.ndarray  # duals of nbrs before the update
    x_new: np.ndarray  # x_{uv} for u in nbrs


@dataclass
class FractionalState:
    """Running primal/dual solution; ``load`` holds fractional degrees."""

    n: int
    params: WWParams
    y: np.ndarray = field(init=False)
    load: np.ndarray = field(init=False)
    x: dict[Edge, float] = field(default_factory=dict)
    primal_value: float = 0.0
    dual_value: float = 0.0
    arrived: int = 0

    def __post_init__(self):
        self.y = np.zeros(self.n)
        self.load = np.zeros(self.n)

    def process_arrival(self, v: int, nbrs: Sequence[int]) -> ArrivalStep:
        if v != self.arrived:
            raise ValueError(f"expected arrival {self.arrived}, got {v}")
        nb = np.asarray(nbrs, dtype=int)
        if nb.size and nb.max() >= v:
            raise ValueError(f"vertex {v} lists a neighbor that has not arrived")
        y_before = self.y[nb].copy()
        res = solve_theta(y_before, self.params.kappa)
        theta = res.theta
        gap = np.maximum(theta - y_before, 0.0)
        ftheta = self.params.f(theta)
        # (1 - theta) / f(theta) is 0 at theta = 1 even when f(1) = 0
        ratio = 0.0 if theta >= 1.0 else (1.0 - theta) / ftheta
        x_new = gap / self.params.beta * (1.0 + ratio)
        for u, val in zip(nb.tolist(), x_new.tolist()):
            self.x[(u, v)] = val
        self.load[nb] += x_new
        self.load[v] += x_new.sum()
        self.y[nb] = np.maximum(y_before, theta)
        self.y[v] = 1.0 - theta
        self.primal_value += float(x_new.sum())
        self.dual_value += float(gap.sum()) + (1.0 - theta)
        self.arrived += 1
        return ArrivalStep(v, tuple(nb.tolist()), theta, res.binding, y_before, x_new)


@dataclass
class FractionalRun:
    instance: ArrivalInstance
    params: WWParams
    x: dict[Edge, float]
    y: np.ndarray
    steps: list[ArrivalStep]
    # row t: state after the first t arrivals (row 0 is all zeros)
    load_snapshots: np.ndarray
    y_snapshots: np.ndarray
    primal_trace: np.ndarray
    dual_trace: np.ndarray

    @property
    def value(self) -> float:
        return float(sum(self.x.values()))

    @property
    def thetas(self) -> np.ndarray:
        return np.array([s.theta for s in self.steps])


def run_fractional(inst: ArrivalInstance, params: WWParams) -> FractionalRun:
    state = FractionalState(inst.n, params)
    steps = []
    loads = np.zeros((inst.n + 1, inst.n))
    ys = np.zeros((inst.n + 1, inst.n))
    primal = np.zeros(inst.n)
    dual = np.zeros(inst.n)
    for v, nb in enumerate(inst.nbrs):
        steps.append(state.process_arrival(v, nb))
        loads[v + 1] = state.load
        ys[v + 1] = state.y
        primal[v] = state.primal_value
        dual[v] = state.dual_value
    return FractionalRun(inst, params, dict(state.x), state.y.copy(), steps, loads, ys, primal, dual)


def degree_bound_violation(run: FractionalRun) -> float:
    """Largest violation of ``y/beta <= load <= (y + f(1-y))/beta`` over all snapshots."""
    beta = run.params.beta
    y = run.y_snapshots
    lower = y / beta - run.load_snapshots
    upper = run.load_snapshots - (y + run.params.f(1.0 - y)) / beta
    return float(max(lower.max(initial=0.0), upper.max(initial=0.0)))


def write_trace_csv(run: FractionalRun, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["arrival", "theta", "dual_sum", "primal_sum"])
        for i, step in enumerate(run.steps):
            w.writerow([i, f"{step.theta:.12g}", f"{run.dual_trace[i]:.12g}", f"{run.primal_trace[i]:.12g}"])


def beta_star_holds(eps: float) -> bool:
    """Whether ``1 + f_{1+2eps}(0) <= 2 - eps``."""
    return beta_star(1 + 2 * eps) <= 2 - eps


def taylor_bound_violation(eps: float, grid: int = 20001) -> float:
    """Max over a theta grid of ``f_{1+2eps}(theta) - taylor_upper_bound``; <= 0 means it holds."""
    th = np.linspace(0.0, 1.0, grid)
    return float(np.max(f_kappa(th, 1 + 2 * eps) - taylor_upper_bound(th, eps)))


def is_monotone_nonincreasing(kappa: float, grid: int = 10001) -> bool:
    vals = f_kappa(np.linspace(0.0, 1.0, grid), kappa)
    return bool(np.all(np.diff(vals) <= 1e-15))


__all__ = [
    "KAPPA_OPT", "f_kappa", "beta_star", "tightness_residual", "taylor_upper_bound",
    "Binding", "ThetaResult", "solve_theta", "WWParams", "ArrivalStep", "FractionalState",
    "FractionalRun", "run_fractional", "degree_bound_violation", "write_trace_csv",
    "beta_star_holds", "taylor_bound_violation", "is_monotone_nonincreasing",
]
