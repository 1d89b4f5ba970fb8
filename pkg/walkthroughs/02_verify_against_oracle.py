"""
Verifying matchings and comparing with brute force
==================================================

Run the full protocol (election, matching size, doubling phases) on a few
hundred random instances and compare each verdict with an exhaustive
search for the shortest augmenting path.
"""

from fractions import Fraction

from matchverify.generators import random_gnm
from matchverify.oracle import path_between, shortest_augmenting
from matchverify.verifier import verify

rows = []
for seed in range(300):
    n = 4 + seed % 21
    g, m = random_gnm(n, seed)
    v = verify(g, m)
    ell = shortest_augmenting(g, m, want_paths=False).shortest_aug_len
    witnessed = not v.disproved or path_between(g, m, v.f, v.f_prime, v.ell) is not None
    rows.append((n, len(m), v, ell, witnessed))

agree = sum(v.ell == ell and ok for _, _, v, ell, ok in rows)
print(f"{agree}/{len(rows)} verdicts agree with the oracle")

# rounds against the two shapes of the bound
dis = [Fraction(v.rounds, v.tree_depth + v.ell + 1) for _, _, v, _, _ in rows if v.disproved]
ver = [Fraction(v.rounds, size + v.tree_depth + 1) for _, size, v, _, _ in rows if not v.disproved]
print(f"Disproved: rounds / (D_T + l + 1)   max {float(max(dis)):.2f}")
print(f"Verified : rounds / (|M| + D_T + 1) max {float(max(ver)):.2f}")

# one verdict in detail
n, size, v, ell, _ = next(r for r in rows if r[2].disproved and r[2].ell >= 5)
print(f"\nn={n}, |M|={size}: {v.kind}, l={v.ell} between {v.f} and {v.f_prime}, "
      f"middle edge {v.middle_edge}")
for p in v.phases:
    print(f"  phase radius {p.radius:3}: {p.rounds:3} rounds, detected={p.detected}")
