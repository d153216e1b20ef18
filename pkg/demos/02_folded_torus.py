"""Hypergraph state on a folded triangular torus.

The entangler is a CCZ on every triangle.  Folding the torus onto a
two-layer stack groups the triangles into prisms of 12 faces; the CCZs of
each prism act on 8 qubits and commute with all three colour symmetries.
"""

from klocal import constructions as C

for width, half in ((3, 2), (6, 6)):
    surf = C.folded_triangular_torus(width, half)
    rep = C.family_report(
        f"torus {width}x{half}x2", C.w_gates_2d(surf), C.hypergraph_entangler(surf), C.color_symmetries(surf)
    )
    print(
        f"{rep['family']}: {rep['n_qubits']} qubits, {rep['gates']} gates of at most {rep['max_support']} qubits, "
        f"{rep['layers']} layers, identity {rep['identity_ok']}, symmetry failures {len(rep['symmetry_failures'])}"
    )

print("depth lower bound for k=8 and distance 64:", C.depth_lower_bound(8, 64))
