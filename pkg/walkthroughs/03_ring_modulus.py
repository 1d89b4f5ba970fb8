"""
How small can the ring be?
==========================

The bounded-message variant replaces exact fractions with residues modulo
``gamma = n**c``.  A false cancellation (a random sum that happens to be
zero) makes a node miss its second reachability.  Shrinking ``c`` makes
this visible.
"""

from matchverify.congest import default_bit_budget
from matchverify.dfnc import run_dfnc
from matchverify.generators import random_gnm
from matchverify.ring import RingParams, run_ring

instances = [random_gnm(6 + k % 10, k) for k in range(150)]
reference = [run_dfnc(g, m, 2 * g.n, record=False).registers() for g, m in instances]

for c in (1, 2, 3, 6):
    runs = mismatches = 0
    for seed in range(4):
        for (g, m), ref in zip(instances, reference):
            got = run_ring(g, m, 2 * g.n, gamma_exp=c, seed=seed, record=False)
            runs += 1
            mismatches += got.registers() != ref
    print(f"gamma = n^{c}: {mismatches:4} of {runs} runs differ from the exact variant")

# the price: one ring element per message, which still fits the budget
for n in (8, 24, 100):
    p = RingParams.for_graph(n, 6)
    print(f"n={n:3}: gamma=n^6 needs {p.gamma.bit_length()} bits, "
          f"budget {default_bit_budget(n)}, fits={p.fits(n)}")
