"""Margolus-form quantum cellular automata and the folding construction.

A 1D QCA in Margolus form is ``Q = prod_i v_{2i-1,2i} prod_i u_{2i,2i+1}``
with ``u : C^d (x) C^d -> C^l (x) C^r`` and ``v : C^r (x) C^l -> C^d (x) C^d``
and ``l * r = d**2``.  This module builds, as explicit two-site circuits:

* ``V_R``, the truncation of ``(prod S_i)(prod Q_A^{-1} S_i Q_A)`` over a
  region ``R`` of a doubled chain ``A (x) B`` (``S_i`` swaps ``[i]_A`` and
  ``[i]_B``), which is a depth-2 circuit;
* ``w = vbar u`` and the correcting layers ``W_1`` and ``W_2``;

and checks densely that ``W_1 V_R W_2`` equals ``Q`` on the ring obtained by
stitching the doubled region into one periodic chain.

Spatial reversal (the bar) exchanges the left and right tensor legs of a
two-site map.  Legs are treated as atomic, which is what makes the bonds of
``W_1 V_R W_2`` line up with those of ``Q`` on the ring.  Reversing the
internal factors of a composite leg as well (``mirror_internal=True``)
gives another valid ``w``; for the shift it is the identity, and then
``V_R`` alone acts as the shift on the ring minus one spectator site.

Operators are dense ``numpy`` arrays; circuits whose gates are all monomial
(permutation times phases) can also be evaluated exactly on every basis
state without forming a matrix, which extends the reachable ring sizes.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

__all__ = [
    "DENSE_QUBIT_BUDGET",
    "DenseOperator",
    "MargolusQCA",
    "RingLayout",
    "LegCircuit",
    "BudgetError",
    "spatial_reverse",
    "shift_qca",
    "identity_qca",
    "fdqc_qca",
    "random_qca",
    "reversed_qca",
    "compactify_2d_shift",
    "compactify_2d_qca",
    "translation_operator",
    "haar_unitary",
    "margolus_circuit",
    "apply_margolus_on_ring",
    "ring_layout",
    "build_vr",
    "build_vr_reference",
    "build_w",
    "build_w1_w2",
    "ring_equality_circuits",
    "verify_ring_equality",
    "deviation",
    "gnvw_index",
    "schmidt_operator_decompose",
    "check_w_symmetry",
    "check_w_translation",
    "vr_gatewise_symmetry",
    "pauli",
    "embed",
]

#: Largest register (in qubits) for which full operator matrices are built.
#: Two complex matrices at 12 qubits take about 0.5 GB.
DENSE_QUBIT_BUDGET = 12

_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class BudgetError(ValueError):
    """Raised when a dense computation would exceed :data:`DENSE_QUBIT_BUDGET`."""


def pauli(label: str) -> np.ndarray:
    """Dense matrix of a Pauli string such as ``"XZI"`` (leftmost = first factor)."""
    out = np.ones((1, 1), dtype=complex)
    for ch in label:
        out = np.kron(out, _PAULI[ch])
    return out


def _qubits(dim: int) -> float:
    return float(np.log2(dim)) if dim > 0 else 0.0


# ---------------------------------------------------------------------------
# Dense operators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DenseOperator:
    """A linear map between tensor products, stored as a matrix.

    :ivar matrix: shape ``(prod(out_dims), prod(in_dims))``.
    :ivar in_dims: dimensions of the input tensor factors (left to right).
    :ivar out_dims: dimensions of the output tensor factors.
    """

    matrix: np.ndarray
    in_dims: tuple[int, ...]
    out_dims: tuple[int, ...]

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "in_dims", tuple(int(x) for x in self.in_dims))
        object.__setattr__(self, "out_dims", tuple(int(x) for x in self.out_dims))
        if m.shape != (int(np.prod(self.out_dims)), int(np.prod(self.in_dims))):
            raise ValueError(
                f"matrix shape {m.shape} does not match factors {self.out_dims} <- {self.in_dims}"
            )

    @classmethod
    def square(cls, matrix: np.ndarray, dims: Sequence[int]) -> "DenseOperator":
        return cls(matrix, tuple(dims), tuple(dims))

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape  # type: ignore[return-value]

    def dagger(self) -> "DenseOperator":
        return DenseOperator(self.matrix.conj().T, self.out_dims, self.in_dims)

    def __matmul__(self, other: "DenseOperator") -> "DenseOperator":
        if self.in_dims != other.out_dims:
            raise ValueError(f"cannot compose {self.in_dims} with {other.out_dims}")
        return DenseOperator(self.matrix @ other.matrix, other.in_dims, self.out_dims)

    def unitarity_error(self) -> float:
        m = self.matrix
        return float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[1]))))

    def is_unitary(self, tol: float = 1e-10) -> bool:
        return self.shape[0] == self.shape[1] and self.unitarity_error() <= tol

    def tensor(self) -> np.ndarray:
        return self.matrix.reshape(self.out_dims + self.in_dims)


def spatial_reverse(
    op: DenseOperator,
    in_factors: Sequence[int] | None = None,
    out_factors: Sequence[int] | None = None,
) -> DenseOperator:
    """Mirror a map between tensor products: reverse the order of its factors.

    By default the factors are ``op.in_dims`` and ``op.out_dims``, so a
    two-leg map has its left and right legs exchanged on both sides.  Finer
    factorizations may be supplied, in which case every sub-factor is
    reversed; the result is regrouped into the reversed coarse legs.
    """
    fin = tuple(in_factors) if in_factors is not None else op.in_dims
    fout = tuple(out_factors) if out_factors is not None else op.out_dims
    if int(np.prod(fin)) != op.shape[1] or int(np.prod(fout)) != op.shape[0]:
        raise ValueError("factorization does not match the operator dimensions")
    t = op.matrix.reshape(fout + fin)
    no, ni = len(fout), len(fin)
    perm = list(range(no - 1, -1, -1)) + list(range(no + ni - 1, no - 1, -1))
    mat = t.transpose(perm).reshape(op.shape)
    return DenseOperator(mat, op.in_dims[::-1], op.out_dims[::-1])


def deviation(a: np.ndarray, b: np.ndarray, norm: str = "max") -> float:
    """Distance between two operators modulo a global phase.

    The phase is fixed by aligning the largest-magnitude entry of ``b``.
    ``norm`` is ``"max"`` (largest entry), ``"fro"`` (Frobenius, an upper
    bound on the operator norm) or ``"spectral"``.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    k = int(np.argmax(np.abs(b)))
    bk = b.flat[k]
    if abs(bk) == 0:
        phase = 1.0 + 0j
    else:
        ak = a.flat[k]
        phase = ak / bk
        phase = phase / abs(phase) if abs(phase) > 0 else 1.0 + 0j
    diff = a - phase * b
    if norm == "max":
        return float(np.max(np.abs(diff)))
    if norm == "fro":
        return float(np.linalg.norm(diff))
    if norm == "spectral":
        return float(np.linalg.norm(diff, 2))
    raise ValueError(f"unknown norm {norm!r}")


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Gaussian matrix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    diag = np.diag(r)
    return q * (diag / np.abs(diag))


def _swap(d1: int, d2: int) -> np.ndarray:
    """Matrix taking ``C^d1 (x) C^d2`` to ``C^d2 (x) C^d1``."""
    m = np.zeros((d1 * d2, d1 * d2), dtype=complex)
    for i, j in itertools.product(range(d1), range(d2)):
        m[j * d1 + i, i * d2 + j] = 1
    return m


def embed(op: np.ndarray, sites: Sequence[int], dims: Sequence[int]) -> np.ndarray:
    """Embed an operator on ``sites`` into the full register with factor ``dims``."""
    n = len(dims)
    dims = tuple(dims)
    k = len(sites)
    sub = tuple(dims[s] for s in sites)
    t = np.asarray(op, dtype=complex).reshape(sub + sub)
    rest = [s for s in range(n) if s not in sites]
    eye = np.eye(int(np.prod([dims[s] for s in rest])) if rest else 1, dtype=complex)
    eye = eye.reshape(tuple(dims[s] for s in rest) * 2)
    full = np.tensordot(t, eye, axes=0)  # out_sub, in_sub, out_rest, in_rest
    order_out = list(sites) + rest
    axes = [0] * (2 * n)
    for pos, s in enumerate(order_out):
        axes[s] = pos if pos < k else 2 * k + (pos - k)
        axes[n + s] = k + pos if pos < k else 2 * k + len(rest) + (pos - k)
    full = full.transpose(axes)
    size = int(np.prod(dims))
    return full.reshape(size, size)


# ---------------------------------------------------------------------------
# Margolus data
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MargolusQCA:
    """Margolus data ``(d, l, r, u, v)`` of a 1D QCA.

    ``u`` maps ``d (x) d`` to ``l (x) r``; ``v`` maps ``r (x) l`` to ``d (x) d``.
    ``l_factors`` and ``r_factors`` optionally record an internal tensor
    structure of the ``l`` and ``r`` legs, used only by the mirrored
    reversal convention.
    """

    d: int
    ell: int
    r: int
    u: np.ndarray
    v: np.ndarray
    name: str = ""
    l_factors: tuple[int, ...] | None = None
    r_factors: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        if self.ell * self.r != self.d * self.d:
            raise ValueError(f"l*r = {self.ell * self.r} must equal d^2 = {self.d ** 2}")
        u = np.asarray(self.u, dtype=complex)
        v = np.asarray(self.v, dtype=complex)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)
        n = self.d * self.d
        if u.shape != (n, n) or v.shape != (n, n):
            raise ValueError("u and v must be d^2 x d^2 matrices")
        for name, m in (("u", u), ("v", v)):
            if np.max(np.abs(m.conj().T @ m - np.eye(n))) > 1e-10:
                raise ValueError(f"{name} is not unitary")
        for leg, dim in (("l_factors", self.ell), ("r_factors", self.r)):
            f = getattr(self, leg)
            if f is not None and int(np.prod(f)) != dim:
                raise ValueError(f"{leg} do not multiply to {dim}")

    @property
    def u_op(self) -> DenseOperator:
        return DenseOperator(self.u, (self.d, self.d), (self.ell, self.r))

    @property
    def v_op(self) -> DenseOperator:
        return DenseOperator(self.v, (self.r, self.ell), (self.d, self.d))

    def l_sub(self) -> tuple[int, ...]:
        return self.l_factors if self.l_factors is not None else ((self.ell,) if self.ell > 1 else ())

    def r_sub(self) -> tuple[int, ...]:
        return self.r_factors if self.r_factors is not None else ((self.r,) if self.r > 1 else ())


def shift_qca(d: int = 2) -> MargolusQCA:
    """Right translation by one site: ``l = 1``, ``r = d^2``, ``u = v = 1``."""
    eye = np.eye(d * d, dtype=complex)
    return MargolusQCA(d, 1, d * d, eye, eye, name="shift", l_factors=(), r_factors=(d, d))


def identity_qca(d: int = 2) -> MargolusQCA:
    """The trivial QCA with ``l = r = d``."""
    eye = np.eye(d * d, dtype=complex)
    return MargolusQCA(d, d, d, eye, eye, name="identity")


def fdqc_qca(u: np.ndarray, v: np.ndarray, d: int, name: str = "fdqc") -> MargolusQCA:
    """Two brickwork layers of two-site gates (``l = r = d``)."""
    return MargolusQCA(d, d, d, u, v, name=name)


def random_qca(d: int, ell: int, rng: np.random.Generator, name: str = "random") -> MargolusQCA:
    """Margolus data with Haar-random ``u`` and ``v`` and the given ``l``.

    With ``l = d`` this is a random brickwork circuit; with ``l = 1`` it is a
    random circuit composed with the translation.
    """
    if (d * d) % ell:
        raise ValueError("l must divide d^2")
    return MargolusQCA(
        d, ell, d * d // ell, haar_unitary(d * d, rng), haar_unitary(d * d, rng), name=name
    )


def reversed_qca(q: MargolusQCA) -> MargolusQCA:
    """Margolus data of the mirror image of ``q``: ``(d, r, l, ubar, vbar)``.

    On a ring of ``m`` sites its circuit equals ``R Q R^-1`` for the
    reflection ``k -> m-1-k``, which maps the ``u`` pairs onto ``u`` pairs.
    """
    ubar = spatial_reverse(q.u_op)
    vbar = spatial_reverse(q.v_op)
    return MargolusQCA(
        q.d, q.r, q.ell, ubar.matrix, vbar.matrix, name=f"reverse({q.name})",
        l_factors=q.r_factors, r_factors=q.l_factors,
    )


def translation_operator(width: int) -> np.ndarray:
    """Cyclic translation ``y -> y+1`` of a ring of ``width`` qubits."""
    dim = 2 ** width
    t = np.zeros((dim, dim), dtype=complex)
    for idx in range(dim):
        bits = [(idx >> (width - 1 - y)) & 1 for y in range(width)]
        moved = [bits[(y - 1) % width] for y in range(width)]
        out = 0
        for b in moved:
            out = (out << 1) | b
        t[out, idx] = 1
    return t


def compactify_2d_shift(width: int, diagonal: bool = True) -> MargolusQCA:
    """2D shift on a strip of ``width`` qubit rows as a 1D QCA over columns.

    Each column of ``width`` qubits is one supersite (``d = 2^width``).  The
    diagonal shift moves ``(x, y)`` to ``(x+1, y+1)``; ``diagonal=False`` gives
    the straight shift ``(x, y) -> (x+1, y)``.
    """
    if width < 1:
        raise ValueError("width must be positive")
    if 2 * 2 * width > 2 * DENSE_QUBIT_BUDGET:
        raise BudgetError(f"supersite of {width} qubits is too large")
    d = 2 ** width
    t = translation_operator(width) if diagonal else np.eye(d, dtype=complex)
    u = np.eye(d * d, dtype=complex)
    v = np.kron(t, t)
    kind = "diagonal" if diagonal else "straight"
    return MargolusQCA(d, 1, d * d, u, v, name=f"{kind}-shift-W{width}", l_factors=(), r_factors=(d, d))


def compactify_2d_qca(width: int, gate: np.ndarray, diagonal: bool = True) -> MargolusQCA:
    """Compactified 2D shift preceded by a two-column gate on pairs ``(2i, 2i+1)``."""
    base = compactify_2d_shift(width, diagonal)
    return MargolusQCA(
        base.d, 1, base.r, np.asarray(gate) @ base.u, base.v,
        name=f"{base.name}+gate", l_factors=(), r_factors=base.r_factors,
    )


# ---------------------------------------------------------------------------
# Two-site circuits on legs of varying dimension
# ---------------------------------------------------------------------------

@dataclass
class LegCircuit:
    """An ordered list of two-leg maps acting on sites of a chain.

    Site ``p`` starts with dimension ``site_dims[p]``; each gate consumes the
    legs at its two sites (in the listed order) and replaces them with its
    output legs, so intermediate legs may have dimension ``l`` or ``r``.
    """

    site_dims: tuple[int, ...]
    gates: list[tuple[str, DenseOperator, tuple[int, int]]] = field(default_factory=list)

    def add(self, label: str, op: DenseOperator, sites: tuple[int, int]) -> "LegCircuit":
        self.gates.append((label, op, (int(sites[0]), int(sites[1]))))
        return self

    def extend(self, other: "LegCircuit") -> "LegCircuit":
        self.gates.extend(other.gates)
        return self

    def output_dims(self) -> tuple[int, ...]:
        dims = list(self.site_dims)
        for label, op, (p, q) in self.gates:
            if (dims[p], dims[q]) != op.in_dims:
                raise ValueError(
                    f"gate {label} expects legs {op.in_dims} at {(p, q)}, found {(dims[p], dims[q])}"
                )
            dims[p], dims[q] = op.out_dims
        return tuple(dims)

    def n_qubits(self) -> float:
        return _qubits(int(np.prod(self.site_dims)))

    def dense(self) -> DenseOperator:
        """Full matrix of the circuit (raises :class:`BudgetError` if too large)."""
        if self.n_qubits() > DENSE_QUBIT_BUDGET + 1e-9:
            raise BudgetError(f"{self.n_qubits():.0f} qubits exceed the dense budget")
        self.output_dims()
        n = len(self.site_dims)
        dims = list(self.site_dims)
        size = int(np.prod(dims))
        t = np.eye(size, dtype=complex).reshape(tuple(dims) + (size,))
        for _, op, (p, q) in self.gates:
            g = op.tensor()  # out_p, out_q, in_p, in_q
            t = np.tensordot(g, t, axes=([2, 3], [p, q]))
            t = np.moveaxis(t, [0, 1], [p, q])
            dims[p], dims[q] = op.out_dims
        return DenseOperator(t.reshape(int(np.prod(dims)), size), self.site_dims, tuple(dims))

    def is_monomial(self, tol: float = 1e-12) -> bool:
        return all(_monomial_table(op.matrix, tol) is not None for _, op, _ in self.gates)

    def monomial(self) -> tuple[np.ndarray, np.ndarray]:
        """Exact action on every basis state for a circuit of monomial gates.

        Returns ``(image, phase)`` with ``U |j> = phase[j] |image[j]>`` in the
        row-major basis of the input and output legs.
        """
        out_dims = self.output_dims()
        n = len(self.site_dims)
        size = int(np.prod(self.site_dims))
        vals = np.array(np.unravel_index(np.arange(size), self.site_dims)).T.copy()
        phase = np.ones(size, dtype=complex)
        for label, op, (p, q) in self.gates:
            table = _monomial_table(op.matrix)
            if table is None:
                raise ValueError(f"gate {label} is not monomial")
            rows, ph = table
            col = vals[:, p] * op.in_dims[1] + vals[:, q]
            out = rows[col]
            phase *= ph[col]
            vals[:, p], vals[:, q] = np.divmod(out, op.out_dims[1])
        image = np.ravel_multi_index(tuple(vals[:, s] for s in range(n)), out_dims)
        return image, phase

    def layers(self) -> list[list[tuple[str, tuple[int, int]]]]:
        """Greedy as-soon-as-possible layering by site occupancy."""
        busy: dict[int, int] = {}
        out: list[list[tuple[str, tuple[int, int]]]] = []
        for label, _, (p, q) in self.gates:
            k = max(busy.get(p, -1), busy.get(q, -1)) + 1
            while len(out) <= k:
                out.append([])
            out[k].append((label, (p, q)))
            busy[p] = busy[q] = k
        return out


def _monomial_table(m: np.ndarray, tol: float = 1e-12) -> tuple[np.ndarray, np.ndarray] | None:
    mask = np.abs(m) > tol
    if not np.all(mask.sum(axis=0) == 1):
        return None
    rows = np.argmax(mask, axis=0)
    return rows, m[rows, np.arange(m.shape[1])]


def margolus_circuit(q: MargolusQCA, m: int) -> LegCircuit:
    """``prod v_{2i-1,2i} prod u_{2i,2i+1}`` on a periodic chain of ``m`` sites."""
    if m % 2 or m < 4:
        raise ValueError(f"ring size must be even and >= 4, got {m}")
    circ = LegCircuit((q.d,) * m)
    for k in range(0, m, 2):
        circ.add(f"u[{k},{k + 1}]", q.u_op, (k, k + 1))
    for k in range(1, m, 2):
        circ.add(f"v[{k},{(k + 1) % m}]", q.v_op, (k, (k + 1) % m))
    return circ


def apply_margolus_on_ring(q: MargolusQCA, m: int) -> DenseOperator:
    """Dense matrix of ``q`` on a periodic chain of ``m`` sites."""
    return margolus_circuit(q, m).dense()


# ---------------------------------------------------------------------------
# Folding construction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RingLayout:
    """The doubled region stitched into a ring.

    The region is ``R = [1, n]`` with ``n`` even, so ``c = 1`` and ``d = n``.
    Ring position ``p`` holds ``sites[p]``, a pair ``("A", a)`` or ``("B", b)``.
    The order is ``[0]_A, [1]_A, ..., [n+1]_A, [n]_B, ..., [1]_B``, a cyclic
    rotation of ``[c]_A .. [d+1]_A, [d]_B .. [c]_B, [c-1]_A``.
    """

    region_size: int
    sites: tuple[tuple[str, int], ...]

    @property
    def size(self) -> int:
        return len(self.sites)

    def pos(self, chain: str, k: int) -> int:
        return self.sites.index((chain, k))


def ring_layout(region_size: int) -> RingLayout:
    n = region_size
    if n % 2 or n < 2:
        raise ValueError(f"region size must be even and >= 2, got {n}")
    sites = [("A", a) for a in range(n + 2)] + [("B", b) for b in range(n, 0, -1)]
    return RingLayout(n, tuple(sites))


def _check_budget(q: MargolusQCA, layout: RingLayout) -> None:
    if layout.size * _qubits(q.d) > DENSE_QUBIT_BUDGET + 1e-9:
        raise BudgetError(
            f"ring of {layout.size} sites of dimension {q.d} exceeds {DENSE_QUBIT_BUDGET} qubits"
        )


def vr_circuit(q: MargolusQCA, layout: RingLayout) -> tuple[LegCircuit, list[list[str]]]:
    """Gate list of ``V_R`` in application order, plus its two layers."""
    n = layout.region_size
    A = lambda a: layout.pos("A", a)  # noqa: E731
    B = lambda b: layout.pos("B", b)  # noqa: E731
    u, v = q.u_op, q.v_op
    circ = LegCircuit((q.d,) * layout.size)
    first, second = [], []
    for k in range(0, n + 1, 2):
        first.append(f"u[A{k},A{k + 1}]")
        circ.add(first[-1], u, (A(k), A(k + 1)))
    for i in range(1, n // 2 + 1):
        first.append(f"v^-1[B{2 * i - 1},B{2 * i}]")
        circ.add(first[-1], v.dagger(), (B(2 * i - 1), B(2 * i)))
    for i in range(1, n // 2 + 1):
        second.append(f"v[A{2 * i - 1},A{2 * i}]")
        circ.add(second[-1], v, (A(2 * i - 1), A(2 * i)))
    for i in range(1, n // 2):
        second.append(f"u^-1[B{2 * i},B{2 * i + 1}]")
        circ.add(second[-1], u.dagger(), (B(2 * i), B(2 * i + 1)))
    second.append("u^-1[A0,B1]")
    circ.add(second[-1], u.dagger(), (A(0), B(1)))
    second.append(f"u^-1[B{n},A{n + 1}]")
    circ.add(second[-1], u.dagger(), (B(n), A(n + 1)))
    return circ, [first, second]


def _certificate(circ: LegCircuit, layers: list[list[str]]) -> list[list[list[int]]]:
    supports = {label: sites for label, _, sites in circ.gates}
    cert = []
    for layer in layers:
        seen: set[int] = set()
        row = []
        for label in layer:
            s = supports[label]
            if seen & set(s):
                raise AssertionError(f"layer is not disjoint at {label}")
            seen |= set(s)
            row.append(list(s))
        cert.append(row)
    return cert


def build_vr(
    q: MargolusQCA, region_size: int, dense: bool = True
) -> tuple[DenseOperator | None, RingLayout, list[list[list[int]]]]:
    """``V_R`` on the stitched ring, its layout and a depth-2 certificate.

    The certificate lists, per layer, the ring positions of each two-site
    gate; positions within a layer are pairwise disjoint.
    """
    layout = ring_layout(region_size)
    circ, layers = vr_circuit(q, layout)
    cert = _certificate(circ, layers)
    if not dense:
        return None, layout, cert
    _check_budget(q, layout)
    return circ.dense(), layout, cert


def build_vr_reference(q: MargolusQCA, region_size: int) -> DenseOperator:
    """``V_R`` from its definition ``S_R Q_A^{-1} S_R Q_A`` on the same ring sites.

    ``Q_A`` acts on a periodic A-chain of ``n + 2`` sites; its gates outside
    the light cone of ``R`` cancel, so this agrees with :func:`build_vr`.
    """
    layout = ring_layout(region_size)
    _check_budget(q, layout)
    n = region_size
    dims = (q.d,) * layout.size
    qa = margolus_circuit(q, n + 2)
    chain = LegCircuit(dims)
    for label, op, (p, r) in qa.gates:
        chain.add(label, op, (layout.pos("A", p), layout.pos("A", r)))
    qa_full = chain.dense().matrix
    swap_r = LegCircuit(dims)
    sw = DenseOperator.square(_swap(q.d, q.d), (q.d, q.d))
    for b in range(1, n + 1):
        swap_r.add(f"S{b}", sw, (layout.pos("A", b), layout.pos("B", b)))
    swap = swap_r.dense().matrix
    mat = swap @ qa_full.conj().T @ swap @ qa_full
    return DenseOperator.square(mat, dims)


def build_w(q: MargolusQCA, mirror_internal: bool = False) -> DenseOperator:
    """``w = vbar u`` as a map ``d (x) d -> d (x) d``.

    With ``mirror_internal`` the reversal of ``v`` also reverses the internal
    factors recorded in ``l_factors``/``r_factors``.
    """
    if mirror_internal:
        vbar = spatial_reverse(q.v_op, q.r_sub() + q.l_sub(), (q.d, q.d))
    else:
        vbar = spatial_reverse(q.v_op)
    return vbar @ q.u_op


def build_w1_w2(q: MargolusQCA, layout: RingLayout) -> tuple[LegCircuit, LegCircuit]:
    """``W_1`` (boundary and back-chain ``w``) and ``W_2`` (back-chain ``wbar``).

    ``W_2 = prod_i wbar[B(2i-1), B(2i)]`` and ``W_1`` holds ``w`` on
    ``([0]_A, [1]_B)``, ``([n]_B, [n+1]_A)`` and ``([2i]_B, [2i+1]_B)``.
    """
    n = layout.region_size
    w = build_w(q)
    wbar = spatial_reverse(w)
    dims = (q.d,) * layout.size
    B = lambda b: layout.pos("B", b)  # noqa: E731
    w2 = LegCircuit(dims)
    for i in range(1, n // 2 + 1):
        w2.add(f"wbar[B{2 * i - 1},B{2 * i}]", wbar, (B(2 * i - 1), B(2 * i)))
    w1 = LegCircuit(dims)
    w1.add("w[A0,B1]", w, (layout.pos("A", 0), B(1)))
    w1.add(f"w[B{n},A{n + 1}]", w, (B(n), layout.pos("A", n + 1)))
    for i in range(1, n // 2):
        w1.add(f"w[B{2 * i},B{2 * i + 1}]", w, (B(2 * i), B(2 * i + 1)))
    return w1, w2


def ring_equality_circuits(q: MargolusQCA, region_size: int) -> tuple[LegCircuit, LegCircuit, RingLayout]:
    """Circuits for ``W_1 V_R W_2`` and for ``Q`` on the stitched ring."""
    layout = ring_layout(region_size)
    vr, _ = vr_circuit(q, layout)
    w1, w2 = build_w1_w2(q, layout)
    lhs = LegCircuit(vr.site_dims)
    lhs.extend(w2).extend(vr).extend(w1)
    rhs = margolus_circuit(q, layout.size)
    return lhs, rhs, layout


def verify_ring_equality(q: MargolusQCA, region_size: int, norm: str = "max") -> float:
    """Deviation of ``W_1 V_R W_2`` from ``Q`` on the stitched ring, modulo phase.

    Dense matrices are used within :data:`DENSE_QUBIT_BUDGET`.  Larger rings
    are handled exactly when every gate is monomial; otherwise
    :class:`BudgetError` is raised.
    """
    lhs, rhs, layout = ring_equality_circuits(q, region_size)
    if lhs.n_qubits() <= DENSE_QUBIT_BUDGET + 1e-9:
        return deviation(lhs.dense().matrix, rhs.dense().matrix, norm)
    if lhs.is_monomial() and rhs.is_monomial():
        return _monomial_deviation(lhs.monomial(), rhs.monomial())
    raise BudgetError(f"ring of {lhs.n_qubits():.0f} qubits exceeds the dense budget")


def _monomial_deviation(a: tuple[np.ndarray, np.ndarray], b: tuple[np.ndarray, np.ndarray]) -> float:
    img_a, ph_a = a
    img_b, ph_b = b
    if not np.array_equal(img_a, img_b):
        return 1.0
    phase = ph_a[0] / ph_b[0]
    return float(np.max(np.abs(ph_a - phase * ph_b)))


def gnvw_index(q: MargolusQCA) -> Fraction:
    """Index ``r / d`` as an exact rational."""
    return Fraction(q.r, q.d)


# ---------------------------------------------------------------------------
# Operator Schmidt decomposition and symmetry lemmas
# ---------------------------------------------------------------------------

def schmidt_operator_decompose(
    o: np.ndarray | DenseOperator, dims: tuple[int, int], cutoff: float = 1e-12
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Write ``O = sum_k A_k (x) B_k`` with linearly independent families.

    ``dims = (dA, dB)`` splits the register into a left and a right block.
    The realigned matrix ``O[(a a'), (b b')]`` is factored by SVD; singular
    values below ``cutoff`` are dropped and the rest are split evenly.
    """
    m = o.matrix if isinstance(o, DenseOperator) else np.asarray(o, dtype=complex)
    da, db = dims
    if m.shape != (da * db, da * db):
        raise ValueError(f"operator shape {m.shape} does not match split {dims}")
    realigned = m.reshape(da, db, da, db).transpose(0, 2, 1, 3).reshape(da * da, db * db)
    uu, s, vh = np.linalg.svd(realigned)
    out = []
    for k, sk in enumerate(s):
        if sk < cutoff:
            break
        root = np.sqrt(sk)
        out.append(((uu[:, k] * root).reshape(da, da), (vh[k] * root).reshape(db, db)))
    return out


def _commutator_norm(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.abs(a @ b - b @ a)))


def check_w_symmetry(
    q: MargolusQCA, s: np.ndarray, ring: int = 4, tol: float = 1e-9, pre_tol: float = 1e-10
) -> bool | None:
    """``[w, s (x) s] = 0`` for an on-site symmetry ``s`` of ``q``.

    Returns ``None`` (check skipped) when ``s^{(x) ring}`` does not commute
    with ``q`` on a ring of ``ring`` sites.
    """
    qm = apply_margolus_on_ring(q, ring).matrix
    big = np.ones((1, 1), dtype=complex)
    for _ in range(ring):
        big = np.kron(big, s)
    if _commutator_norm(qm, big) > pre_tol:
        return None
    w = build_w(q).matrix
    return _commutator_norm(w, np.kron(s, s)) <= tol


def _local_generators(d: int) -> list[np.ndarray]:
    """Single-qubit X and Z on every qubit of two ``d``-dimensional supersites."""
    width = int(round(np.log2(d)))
    if 2 ** width != d:
        raise ValueError("supersite dimension must be a power of two")
    n = 2 * width
    gens = []
    for k in range(n):
        for p in "XZ":
            gens.append(pauli("I" * k + p + "I" * (n - k - 1)))
    return gens


def check_w_translation(q: MargolusQCA, t: np.ndarray, tol: float = 1e-9) -> bool:
    """Translation covariance ``w T O T^+ w^+ = T w O w^+ T^+`` with ``T = t (x) t``.

    ``O`` ranges over single-qubit X and Z on the two supersites, which
    generate the full two-supersite algebra.
    """
    return translation_covariance_error(q, t) <= tol


def translation_covariance_error(q: MargolusQCA, t: np.ndarray) -> float:
    w = build_w(q).matrix
    tt = np.kron(t, t)
    worst = 0.0
    for o in _local_generators(q.d):
        lhs = w @ tt @ o @ tt.conj().T @ w.conj().T
        rhs = tt @ w @ o @ w.conj().T @ tt.conj().T
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst


def vr_gatewise_symmetry(q: MargolusQCA, s: np.ndarray, region_size: int = 2) -> float:
    """Largest commutator of ``S_i`` and ``Q_A^{-1} S_i Q_A`` with ``s`` on every site.

    Both kinds of gate in the definition of ``V_R`` must commute with the
    doubled symmetry whenever ``q`` does.
    """
    layout = ring_layout(region_size)
    _check_budget(q, layout)
    n = region_size
    dims = (q.d,) * layout.size
    qa = margolus_circuit(q, n + 2)
    chain = LegCircuit(dims)
    for label, op, (p, r) in qa.gates:
        chain.add(label, op, (layout.pos("A", p), layout.pos("A", r)))
    qa_full = chain.dense().matrix
    sym = np.ones((1, 1), dtype=complex)
    for _ in dims:
        sym = np.kron(sym, s)
    sw = _swap(q.d, q.d)
    worst = _commutator_norm(sw, np.kron(s, s))
    for b in range(1, n + 1):
        si = embed(sw, (layout.pos("A", b), layout.pos("B", b)), dims)
        gate = qa_full.conj().T @ si @ qa_full
        worst = max(worst, _commutator_norm(gate, sym))
    return worst
