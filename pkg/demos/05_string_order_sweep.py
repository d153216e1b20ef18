"""String order of monitored Clifford circuits for the four gate ensembles.

Measuring g_i = Z X Z drives the ring towards the cluster state; random
gates compete with it.  Symmetric local gates leave the string order finite,
while generic gates make it shrink with system size.

Increase REALIZATIONS for smoother numbers.
"""

from klocal import monitored as M

REALIZATIONS = 20
rows = M.sweep(M.ENSEMBLES, [16, 32], [0.0, 0.1, 0.3], REALIZATIONS, seed=1)
print(M.sweep_csv(rows), end="")
