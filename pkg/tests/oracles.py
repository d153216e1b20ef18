"""Independent dense reference implementations used by the tests.

Nothing here imports the algebra under test beyond plain data accessors:
diagonal circuits are evaluated as +-1 vectors over the computational basis
and stabilizer states as explicit state vectors.
"""

from __future__ import annotations

import numpy as np

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.diag([1, -1]).astype(complex)
Y = 1j * X @ Z
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
S = np.diag([1, 1j])
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


def basis_bits(n: int) -> np.ndarray:
    """``(2**n, n)`` array; row ``b`` holds the bits of ``b``, qubit 0 first."""
    idx = np.arange(2 ** n)
    return ((idx[:, None] >> np.arange(n)[None, :]) & 1).astype(bool)


def diagonal_of(n: int, edges, sign: int = 1) -> np.ndarray:
    """Diagonal of ``sign * prod_e C^{|e|-1}Z_e`` as a +-1 vector."""
    bits = basis_bits(n)
    out = np.full(2 ** n, sign, dtype=np.int64)
    for e in edges:
        e = list(e)
        if not e:
            out = -out
            continue
        out = np.where(bits[:, e].all(axis=1), -out, out)
    return out


def conjugate_diagonal_by_x(diag: np.ndarray, n: int, support) -> np.ndarray:
    """Diagonal of ``X_S D X_S``: entry ``b`` becomes ``D[b xor S]``."""
    mask = 0
    for q in support:
        mask |= 1 << q
    return diag[np.arange(2 ** n) ^ mask]


def pauli_matrix(x, z, phase: int = 0) -> np.ndarray:
    """Dense Hermitian-convention Pauli string, qubit 0 leftmost in ``kron``."""
    out = np.ones((1, 1), dtype=complex)
    for a, b in zip(x, z):
        out = np.kron(out, [I2, X, Z, Y][int(a) + 2 * int(b)])
    return out * (1j ** phase)


def apply_two_qubit(psi: np.ndarray, u: np.ndarray, a: int, b: int, n: int) -> np.ndarray:
    t = psi.reshape([2] * n)
    t = np.moveaxis(t, [a, b], [0, 1]).reshape(4, -1)
    t = (u @ t).reshape([2, 2] + [2] * (n - 2))
    return np.moveaxis(t, [0, 1], [a, b]).reshape(-1)


def plus_state(n: int) -> np.ndarray:
    return np.ones(2 ** n, dtype=complex) / np.sqrt(2 ** n)


GENERATOR_MATRICES = {
    "H1": np.kron(H, I2),
    "S1": np.kron(S, I2),
    "H2": np.kron(I2, H),
    "S2": np.kron(I2, S),
    "CNOT": CNOT,
}
