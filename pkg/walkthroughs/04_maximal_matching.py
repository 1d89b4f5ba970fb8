"""
A maximal matching to start from
================================

Locally heaviest edges (by the id pair ``(max, min)``) join the matching
until a convergecast reports that no free edge remains.  The result is
within a factor two of maximum.
"""

from matchverify.generators import random_gnm
from matchverify.graphcore import Graph
from matchverify.oracle import maximum_matching_size
from matchverify.verifier import maximal_matching_distributed, verify

p4 = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)])
print("P4:", maximal_matching_distributed(p4).matching.sorted_edges())

for seed in range(8):
    g, _ = random_gnm(16, seed)
    res = maximal_matching_distributed(g)
    s_star = maximum_matching_size(g)
    # feed the maximal matching to the verifier: is it already maximum?
    v = verify(g, res.matching)
    print(f"seed {seed}: |maximal|={res.size}  s*={s_star}  rounds={res.rounds:3}  "
          f"phases={res.phases}  verifier says {v.kind}" + (f" (l={v.ell})" if v.disproved else ""))
