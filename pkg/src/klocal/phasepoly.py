"""GF(2) algebra of diagonal phase-gate circuits.

A product of ``C^{m-1}Z`` gates acting on ``N`` qubits is fully described by
the parity of each hyperedge it contains: every such gate squares to the
identity and all of them commute.  :class:`PhaseGateSet` stores exactly that
parity data together with a sign bit for the scalar ``-1`` (the arity-0 gate).

Conjugating by ``X_a`` maps ``C^{m-1}Z_S`` to ``C^{m-1}Z_S * C^{m-2}Z_{S - {a}}``
whenever ``a`` lies in ``S``.  Iterating this rule gives an exact decision
procedure for whether a diagonal circuit commutes with an X-type symmetry.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

Hyperedge = tuple[int, ...]

__all__ = [
    "Hyperedge",
    "PhaseGateSet",
    "SymmetrySpec",
    "hyperedge",
    "identity",
    "from_edges",
    "toggle",
    "compose",
    "compose_all",
    "conjugate_by_x",
    "commutes_with",
    "residual",
    "is_trivial",
    "to_json",
    "from_json",
]


def hyperedge(qubits: Iterable[int]) -> Hyperedge:
    """Return the canonical (sorted) form of a hyperedge.

    :param qubits: distinct qubit indices in any order.
    :raises ValueError: if an index repeats or is negative.
    """
    edge = tuple(sorted(int(q) for q in qubits))
    if any(q < 0 for q in edge):
        raise ValueError(f"negative qubit index in {edge}")
    if len(set(edge)) != len(edge):
        raise ValueError(f"repeated qubit index in {edge}")
    return edge


@dataclass(frozen=True)
class PhaseGateSet:
    """Parity representation of a diagonal circuit of multi-controlled Z gates.

    :ivar n_qubits: number of qubits the circuit acts on.
    :ivar edges: hyperedges appearing an odd number of times (arity >= 1).
    :ivar sign: ``+1`` or ``-1``, the parity of arity-0 edges.
    """

    n_qubits: int
    edges: frozenset[Hyperedge] = field(default_factory=frozenset)
    sign: int = 1

    def __post_init__(self) -> None:
        if self.n_qubits < 0:
            raise ValueError("n_qubits must be non-negative")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        for e in self.edges:
            if len(e) == 0:
                raise ValueError("arity-0 edges are stored in the sign bit")
            if tuple(sorted(set(e))) != e:
                raise ValueError(f"edge {e} is not canonical")
            if e[-1] >= self.n_qubits or e[0] < 0:
                raise ValueError(f"edge {e} out of range for {self.n_qubits} qubits")

    def __len__(self) -> int:
        return len(self.edges)

    def support(self) -> frozenset[int]:
        """Qubits touched by at least one edge."""
        return frozenset(q for e in self.edges for q in e)

    def sorted_edges(self) -> list[Hyperedge]:
        """Edges in lexicographic order (stable across runs)."""
        return sorted(self.edges)

    def max_arity(self) -> int:
        return max((len(e) for e in self.edges), default=0)


@dataclass(frozen=True)
class SymmetrySpec:
    """An X-type symmetry generator ``prod_{q in support} X_q``."""

    support: frozenset[int]
    label: str = ""

    def __init__(self, support: Iterable[int], label: str = "") -> None:
        object.__setattr__(self, "support", frozenset(int(q) for q in support))
        object.__setattr__(self, "label", label)


def identity(n_qubits: int) -> PhaseGateSet:
    """The empty circuit on ``n_qubits`` qubits."""
    return PhaseGateSet(n_qubits)


def _xor_into(acc: set[Hyperedge], sign: int, edge: Hyperedge) -> int:
    if not edge:
        return -sign
    if edge in acc:
        acc.remove(edge)
    else:
        acc.add(edge)
    return sign


def from_edges(n_qubits: int, edges: Iterable[Sequence[int]], sign: int = 1) -> PhaseGateSet:
    """Build a gate set by applying each listed gate in turn.

    Repeated edges cancel in pairs and empty edges flip the sign, so the
    result is the parity of the input multiset.
    """
    acc: set[Hyperedge] = set()
    for raw in edges:
        e = hyperedge(raw)
        if e and e[-1] >= n_qubits:
            raise IndexError(f"edge {e} out of range for {n_qubits} qubits")
        sign = _xor_into(acc, sign, e)
    return PhaseGateSet(n_qubits, frozenset(acc), sign)


def toggle(state: PhaseGateSet, e: Sequence[int]) -> PhaseGateSet:
    """Apply one gate: flip the membership of ``e`` (or the sign if ``e`` is empty).

    :raises IndexError: if ``e`` references a qubit outside the register.
    """
    edge = hyperedge(e)
    if edge and edge[-1] >= state.n_qubits:
        raise IndexError(f"edge {edge} out of range for {state.n_qubits} qubits")
    acc = set(state.edges)
    sign = _xor_into(acc, state.sign, edge)
    return PhaseGateSet(state.n_qubits, frozenset(acc), sign)


def compose(a: PhaseGateSet, b: PhaseGateSet) -> PhaseGateSet:
    """Concatenate two diagonal circuits (symmetric difference of edges)."""
    if a.n_qubits != b.n_qubits:
        raise ValueError(f"size mismatch: {a.n_qubits} vs {b.n_qubits}")
    return PhaseGateSet(a.n_qubits, a.edges ^ b.edges, a.sign * b.sign)


def compose_all(gates: Iterable[PhaseGateSet], n_qubits: int | None = None) -> PhaseGateSet:
    """Compose an iterable of gate sets; ``n_qubits`` is required if it may be empty."""
    acc: PhaseGateSet | None = None if n_qubits is None else identity(n_qubits)
    for g in gates:
        acc = g if acc is None else compose(acc, g)
    if acc is None:
        raise ValueError("cannot infer n_qubits from an empty family")
    return acc


def _conjugate_single(edges: set[Hyperedge], sign: int, a: int) -> int:
    # Snapshot first: derived edges must not be conjugated again within this step.
    hit = [e for e in edges if a in e]
    for e in hit:
        sign = _xor_into(edges, sign, tuple(q for q in e if q != a))
    return sign


def conjugate_by_x(op: PhaseGateSet, sym: SymmetrySpec | Iterable[int]) -> PhaseGateSet:
    """Return ``X_S op X_S`` where ``S`` is the symmetry support.

    Qubits of ``S`` are processed one at a time in ascending order; the
    result does not depend on that order because the single-qubit
    conjugations commute.
    """
    support = sym.support if isinstance(sym, SymmetrySpec) else frozenset(sym)
    for q in support:
        if q < 0 or q >= op.n_qubits:
            raise IndexError(f"symmetry qubit {q} out of range for {op.n_qubits} qubits")
    edges = set(op.edges)
    sign = op.sign
    touched = op.support()
    for a in sorted(support):
        if a in touched:
            sign = _conjugate_single(edges, sign, a)
    return PhaseGateSet(op.n_qubits, frozenset(edges), sign)


def residual(op: PhaseGateSet, sym: SymmetrySpec | Iterable[int]) -> PhaseGateSet:
    """Diagnostic ``op^{-1} X_S op X_S``; trivial iff ``op`` commutes with ``X_S``."""
    return compose(op, conjugate_by_x(op, sym))


def is_trivial(state: PhaseGateSet) -> bool:
    """True iff the circuit is exactly the identity (no edges, sign +1)."""
    return not state.edges and state.sign == 1


def commutes_with(op: PhaseGateSet, sym: SymmetrySpec | Iterable[int]) -> bool:
    """Exact operator commutation with ``X_S``, sign included."""
    return is_trivial(residual(op, sym))


def to_json(state: PhaseGateSet) -> str:
    """Serialize with lexicographically sorted edges and fixed key order."""
    payload = {
        "n": state.n_qubits,
        "sign": state.sign,
        "edges": [list(e) for e in state.sorted_edges()],
    }
    return json.dumps(payload, separators=(",", ":"))


def from_json(text: str) -> PhaseGateSet:
    """Inverse of :func:`to_json`."""
    payload = json.loads(text)
    return from_edges(int(payload["n"]), payload["edges"], int(payload["sign"]))
