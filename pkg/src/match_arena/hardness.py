"""Hard edge-arrival family, its dual certificate and fractional baselines.

In round ``i`` of ``G_n`` the edges ``(u_j, v_{i-j+1})`` for ``j = 1..i``
arrive, i.e. a perfect matching between the first ``i`` left and right
vertices. Left vertex ``u_j`` has id ``j - 1`` and right vertex ``v_j`` has id
``n + j - 1``.

Any online fractional algorithm must, after round ``k``, hold value at least
``alpha * k`` to be ``alpha``-competitive on every prefix. A feasible solution
of the dual LP bounds ``alpha`` from above; the certificate below is kept in
exact rationals.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from .graph_core import Edge, EdgeArrivalInstance, edge_key


def left(j: int) -> int:
    """Id of ``u_j`` (1-based ``j``)."""
    return j - 1


def right(j: int, n: int) -> int:
    return n + j - 1


def generate_hard_instance(n: int) -> EdgeArrivalInstance:
    if n < 1:
        raise ValueError("n must be at least 1")
    edges = []
    ends = []
    for i in range(1, n + 1):
        for j in range(1, i + 1):
            edges.append((left(j), right(i - j + 1, n)))
        ends.append(len(edges))
    return EdgeArrivalInstance(2 * n, tuple(edges), tuple(ends))


def round_of(inst: EdgeArrivalInstance) -> list[int]:
    """1-based round index of every edge."""
    out = []
    start = 0
    for r, end in enumerate(inst.round_ends, 1):
        out += [r] * (end - start)
        start = end
    return out


@dataclass(frozen=True)
class DualCertificate:
    n: int
    ell: tuple[Fraction, ...]
    r: tuple[Fraction, ...]
    c: tuple[Fraction, ...]


def dual_certificate(n: int) -> DualCertificate:
    if n < 2 or n % 2:
        raise ValueError(f"certificate is defined for even n >= 2, got {n}")
    denom = n * (n + 1)
    c = tuple(Fraction(2, denom) for _ in range(n))
    ell = tuple(Fraction(n - 2 * (j - 1), denom) if j <= n // 2 + 1 else Fraction(0) for j in range(1, n + 1))
    return DualCertificate(n, ell, ell, c)


@dataclass
class CertificateCheck:
    feasible: bool
    value: Fraction
    weighted_c: Fraction  # sum k c_k
    violations: list[str]


def verify_certificate(cert: DualCertificate, n: int) -> CertificateCheck:
    if not (len(cert.ell) == len(cert.r) == len(cert.c) == n):
        raise ValueError(f"certificate dimensions do not match n={n}")
    bad = []
    for name, vec in (("ell", cert.ell), ("r", cert.r), ("c", cert.c)):
        bad += [f"{name}_{k + 1} < 0" for k, val in enumerate(vec) if val < 0]
    weighted = sum((k * ck for k, ck in enumerate(cert.c, 1)), Fraction(0))
    if weighted < 1:
        bad.append(f"sum k c_k = {weighted} < 1")
    # suffix[i] = sum_{k >= i} c_k (1-based)
    suffix = [Fraction(0)] * (n + 2)
    for k in range(n, 0, -1):
        suffix[k] = suffix[k + 1] + cert.c[k - 1]
    for i in range(1, n + 1):
        for j in range(1, i + 1):
            if cert.ell[j - 1] + cert.r[i - j] < suffix[i]:
                bad.append(f"edge (u_{j}, v_{i - j + 1}) of round {i} uncovered")
    value = sum(cert.ell, Fraction(0)) + sum(cert.r, Fraction(0))
    return CertificateCheck(not bad, value, weighted, bad)


def certificate_value(n: int) -> Fraction:
    """``1/2 + 1/(2n + 2)``."""
    return Fraction(1, 2) + Fraction(1, 2 * n + 2)


# -- fractional edge-arrival baselines --------------------------------------------

EdgeRule = Callable[[float, float], float]


def greedy_rule(load_u: float, load_v: float) -> float:
    """Maximal greedy: saturate the edge."""
    return min(1.0 - load_u, 1.0 - load_v)


def water_filling_rule(load_u: float, load_v: float) -> float:
    """Proportional split: half of the smaller remaining capacity."""
    return (1.0 - max(load_u, load_v)) / 2.0


BASELINES: dict[str, EdgeRule] = {"greedy": greedy_rule, "water_filling": water_filling_rule}


class InfeasibleAssignment(ValueError):
    pass


def run_edge_algorithm(rule: EdgeRule, inst: EdgeArrivalInstance, tol: float = 1e-12) -> np.ndarray:
    """Feed the edge stream to ``rule``; returns the values in arrival order."""
    load = np.zeros(inst.n)
    xs = np.zeros(len(inst.edges))
    for i, (u, v) in enumerate(inst.edges):
        val = rule(load[u], load[v])
        if val < -tol or load[u] + val > 1 + tol or load[v] + val > 1 + tol:
            raise InfeasibleAssignment(f"edge {edge_key(u, v)} got {val}, loads {load[u]}, {load[v]}")
        xs[i] = val
        load[u] += val
        load[v] += val
    return xs


@dataclass
class PrefixRatio:
    ratio: float
    values: np.ndarray  # V_k after round k
    ratios: np.ndarray  # V_k / k


def prefix_competitive_ratio(rule: EdgeRule, inst: EdgeArrivalInstance) -> PrefixRatio:
    """``min_k V_k / k`` where ``V_k`` is the value after round ``k`` (OPT of that prefix is ``k``)."""
    if not inst.round_ends:
        raise ValueError("instance has no round structure")
    xs = run_edge_algorithm(rule, inst)
    cum = np.cumsum(xs)
    vals = np.array([cum[e - 1] for e in inst.round_ends])
    ratios = vals / np.arange(1, len(vals) + 1)
    return PrefixRatio(float(ratios.min()), vals, ratios)


# -- LP export --------------------------------------------------------------------


def _var(i: int, j: int) -> str:
    return f"x_{i}_{j}"


def export_lp(n: int) -> str:
    """Text serialization of the LP maximizing alpha over online fractional algorithms on G_n.

    ``x_i_j`` is the value of edge ``(u_j, v_{i-j+1})`` of round ``i``.
    Rows: load of each left vertex, load of each right vertex, then one
    competitiveness row per round.
    """
    lines = [f"lp-matching v1 n={n}", "max alpha"]
    for a in range(1, n + 1):
        terms = [f"1,{_var(i, a)}" for i in range(a, n + 1)]
        lines.append(f"row left_{a} {' '.join(terms)} <= 1")
    for b in range(1, n + 1):
        terms = [f"1,{_var(i, i - b + 1)}" for i in range(b, n + 1)]
        lines.append(f"row right_{b} {' '.join(terms)} <= 1")
    for k in range(1, n + 1):
        terms = [f"1,{_var(i, j)}" for i in range(1, k + 1) for j in range(1, i + 1)]
        lines.append(f"row comp_{k} {' '.join(terms)} -{k},alpha >= 0")
    return "\n".join(lines) + "\n"


@dataclass
class ParsedLP:
    n: int
    variables: list[str]
    rows: list[tuple[str, dict[str, float], str, float]]


def parse_lp(text: str) -> ParsedLP:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    head = lines[0].split()
    if head[:2] != ["lp-matching", "v1"] or not head[2].startswith("n="):
        raise ValueError("bad LP header")
    if lines[1].strip() != "max alpha":
        raise ValueError("expected objective 'max alpha'")
    variables: list[str] = []
    rows = []
    for ln in lines[2:]:
        parts = ln.split()
        if parts[0] != "row":
            raise ValueError(f"bad row: {ln}")
        name, sense, rhs = parts[1], parts[-2], float(parts[-1])
        coeffs = {}
        for tok in parts[2:-2]:
            c, var = tok.split(",")
            coeffs[var] = float(c)
            if var not in variables:
                variables.append(var)
        rows.append((name, coeffs, sense, rhs))
    return ParsedLP(int(head[2][2:]), variables, rows)


def solve_lp(text: str) -> Optional[float]:
    """Optimal alpha of an exported LP via scipy's HiGHS backend."""
    from scipy.optimize import linprog

    lp = parse_lp(text)
    idx = {v: i for i, v in enumerate(lp.variables)}
    A, b = [], []
    for _, coeffs, sense, rhs in lp.rows:
        row = np.zeros(len(idx))
        for var, c in coeffs.items():
            row[idx[var]] = c
        if sense == "<=":
            A.append(row)
            b.append(rhs)
        else:
            A.append(-row)
            b.append(-rhs)
    cost = np.zeros(len(idx))
    cost[idx["alpha"]] = -1.0
    res = linprog(cost, A_ub=np.array(A), b_ub=np.array(b), bounds=[(0, None)] * len(idx), method="highs")
    return -res.fun if res.success else None


def certificate_report(n: int) -> str:
    """Human-readable verification summary used by the command-line tool."""
    lines = [f"G_n with n={n}: {n * (n + 1) // 2} edges in {n} rounds"]
    if n % 2 == 0:
        chk = verify_certificate(dual_certificate(n), n)
        lines.append(f"certificate feasible: {chk.feasible}")
        lines.append(f"certificate value: {chk.value} (target {certificate_value(n)})")
        lines.append(f"sum k c_k: {chk.weighted_c}")
        lines += [f"violation: {msg}" for msg in chk.violations]
    else:
        lines.append("certificate: only defined for even n")
    inst = generate_hard_instance(n)
    for name, rule in BASELINES.items():
        pr = prefix_competitive_ratio(rule, inst)
        lines.append(f"baseline {name}: min_k V_k/k = {pr.ratio:.12g}")
    return "\n".join(lines) + "\n"
