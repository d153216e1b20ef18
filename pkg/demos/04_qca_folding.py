"""Realize a QCA on a ring by folding a doubled chain.

For a QCA in Margolus form, the depth-2 circuit V_R on the doubled region,
dressed by the correction layers W_1 and W_2, reproduces the QCA on the
ring obtained by stitching the two copies together.
"""

import numpy as np

from klocal import qca as Q

cases = [
    Q.shift_qca(2),
    Q.identity_qca(2),
    Q.random_qca(2, 2, np.random.default_rng(0), name="random"),
    Q.compactify_2d_shift(2),
    Q.compactify_2d_shift(3),
]
for q in cases:
    dev = Q.verify_ring_equality(q, 2)
    _, layout, cert = Q.build_vr(q, 2, dense=False)
    print(f"{q.name:>18}: ring {layout.size} sites, deviation {dev:.1e}, index {Q.gnvw_index(q)}, "
          f"V_R layers {len(cert)}")

shift = Q.shift_qca(2)
print("w for the shift, legs exchanged:\n", Q.build_w(shift).matrix.real)
print("w for the shift, internal wires mirrored:\n", Q.build_w(shift, mirror_internal=True).matrix.real)
