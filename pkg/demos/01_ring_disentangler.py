"""Disentangle the ring cluster state with symmetric 4-qubit gates.

A single CZ on a ring bond does not commute with the two sublattice
symmetries, yet the whole ring of CZs does.  Folding the ring in half and
grouping bonds into 4-cycles gives gates that are each symmetric, and whose
product is exactly the ring of CZs.
"""

from klocal import constructions as C
from klocal import phasepoly as pp

n = 12
gates = C.w_gates_1d(n)
odd, even = C.ring_parity_symmetries(n)

print(f"ring of {n} qubits, {len(gates)} gates")
for k, g in enumerate(gates, 1):
    print(f"  W_{k}: edges {g.sorted_edges()}  symmetric: {pp.commutes_with(g, odd) and pp.commutes_with(g, even)}")

single = pp.from_edges(n, [(0, 1)])
print("one CZ commutes with X_odd?", pp.commutes_with(single, odd))
print("residual of X_odd on it:", pp.residual(single, odd).sorted_edges())

total = pp.compose_all(gates)
print("product equals cluster entangler:", total == C.cluster_entangler(n))
print("layers:", C.layer_gates(gates))
