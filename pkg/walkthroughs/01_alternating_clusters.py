"""
Alternating clusters on the seven-node gadget
=============================================

A free node grows a cluster along alternating paths.  On this gadget the
cheapest way to reach ``v`` is not an extension of the cheapest way to
reach ``u``, which is why every node keeps two reachability values.
"""

from matchverify.dfnc import run_dfnc
from matchverify.fnc import fnc
from matchverify.generators import FIG1_NAMES, fig1_gadget

g, m = fig1_gadget()
name = {v: k for k, v in FIG1_NAMES.items()}
print("edges   :", [(name[a], name[b]) for a, b in g.edges])
print("matched :", [(name[a], name[b]) for a, b in m.sorted_edges()])

# the centralised reference: reachability through unmatched (r0) and
# matched (r1) last edges, plus the predecessors on shortest paths
table = fnc(g, m, 2 * g.n).table
print("\nnode  cid  r0    r1    pred")
for v in range(g.n):
    cid, pred, r0, r1 = table.rows()[v]
    print(f"{name[v]:>4}  {name[cid]:>3}  {str(r0):5} {str(r1):5} {sorted(name[p] for p in pred)}")

# the distributed protocol reaches the same registers one round at a time
run = run_dfnc(g, m, 4 * g.n, snapshots=True, audit=True)
u, v = FIG1_NAMES["u"], FIG1_NAMES["v"]
for r, regs in enumerate(run.snapshots[:7]):
    print(f"after round {r}: u -> {regs[u][2:]}, v -> {regs[v][2:]}")

# u and w send tokens over their matched edge in the same round; the edge
# generates a unit flow that travels back to b and is dropped there
print("\ngenerated:", [(tuple(name[x] for x in e), name[n], rr) for e, n, rr, _ in run.audit.generated])
print("discards :", [(name[n], tuple(name[x] for x in e), t, str(val)) for n, e, t, val in run.audit.discards])
print("u and w learn their second value in round", sorted({t for _, t, _ in run.audit.incomplete}))
