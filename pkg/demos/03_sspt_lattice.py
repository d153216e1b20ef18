"""Subsystem-symmetric cluster state on a rotated square lattice.

Every diagonal line carries its own X symmetry.  The 8-qubit gates are
products of two folded ring cells, one per lattice direction, so each line
meets every gate in an even number of sites on matching layers.
"""

from klocal import constructions as C
from klocal import phasepoly as pp

geom = C.folded_rotated_lattice(8, 8)
gates = C.sspt_gates(geom)
rep = C.family_report("sspt 8x8", gates, C.cluster_2d_entangler(geom), geom.lines)
print(f"{geom.n_sites} sites, {len(geom.lines)} line symmetries, {rep['gates']} gates, {rep['layers']} layers")
print("identity:", rep["identity_ok"], " symmetry failures:", len(rep["symmetry_failures"]))

a, b = geom.edges[0]
cz = pp.from_edges(geom.n_sites, [(a, b)])
broken = [line.label for line in geom.lines if not pp.commutes_with(cz, line)]
print(f"a bare CZ on {(a, b)} breaks {broken}")
