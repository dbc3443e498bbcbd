"""Why edge arrivals are hard for fractional algorithms.

The family G_n reveals, in round i, a perfect matching between the first i
vertices of each side. An exact-rational dual solution caps the prefix
competitive ratio of any algorithm at 1/2 + 1/(2n + 2).
"""

from match_arena.hardness import (BASELINES, certificate_value, dual_certificate, export_lp, generate_hard_instance,
                                  prefix_competitive_ratio, solve_lp, verify_certificate)

# %% the certificate for small n
for n in (2, 4, 10, 50):
    chk = verify_certificate(dual_certificate(n), n)
    print(f"n={n:<3} feasible={chk.feasible} value={chk.value} = {float(chk.value):.5f}")

# %% baselines never beat the certificate
for n in (4, 8, 16):
    inst = generate_hard_instance(n)
    ratios = {name: round(prefix_competitive_ratio(rule, inst).ratio, 4) for name, rule in BASELINES.items()}
    print(f"n={n:<3} {ratios}  bound {float(certificate_value(n)):.4f}")

# %% the LP itself, solved with HiGHS: the certificate is tight
print(export_lp(2))
for n in (2, 4, 6):
    print(f"n={n}: LP optimum {solve_lp(export_lp(n)):.6f}")
