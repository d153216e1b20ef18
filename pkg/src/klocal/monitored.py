"""Monitored Clifford dynamics on a ring and the cluster-state string order.

Two simulators are provided:

:class:`Tableau`
    Full stabilizer/destabilizer tableau with signs, rows bit-packed into
    64-bit words.  Supports two-qubit Clifford gates and measurement of
    arbitrary Hermitian Pauli strings.

:class:`StabilizerFrame`
    Stabilizer generators only, without signs.  The string order depends
    on the stabilizer group only through membership of Pauli strings in it
    (up to sign), and the group itself evolves independently of signs and
    measurement outcomes.  Dropping them makes the sweep several times
    faster without changing any statistic.

The dynamics: from ``|+>^N``, each step applies with probability ``p`` a
random two-qubit Clifford drawn from one of four ensembles, and otherwise
measures ``g_i = Z_{i-1} X_i Z_{i+1}`` at a uniformly random site.
"""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "PauliString",
    "CliffordGate2",
    "Tableau",
    "StabilizerFrame",
    "ExperimentConfig",
    "SweepRow",
    "g_operator",
    "string_operator",
    "measure_pauli",
    "expectation_pauli",
    "string_order",
    "enumerate_clifford2",
    "filter_ensemble",
    "ensemble_tables",
    "run_realization",
    "sweep",
    "sweep_csv",
    "CSV_HEADER",
    "ENSEMBLES",
]

ENSEMBLES = ("a", "b", "c", "d")
CSV_HEADER = "ensemble,N,p,realizations,steps,s_bar,stderr,seed"


# ---------------------------------------------------------------------------
# Pauli strings
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PauliString:
    """Hermitian-convention Pauli string ``phase * prod_j P_j``.

    Qubit ``j`` carries ``X`` if only ``x[j]``, ``Z`` if only ``z[j]`` and
    ``Y`` if both.  ``phase`` is a power of ``i`` in ``{0, 1, 2, 3}``; the
    string is Hermitian iff the phase is ``0`` or ``2``.
    """

    x: np.ndarray
    z: np.ndarray
    phase: int = 0

    def __post_init__(self) -> None:
        x = np.asarray(self.x, dtype=bool).copy()
        z = np.asarray(self.z, dtype=bool).copy()
        if x.shape != z.shape or x.ndim != 1:
            raise ValueError("x and z must be 1D arrays of equal length")
        x.setflags(write=False)
        z.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "phase", int(self.phase) % 4)

    @property
    def n(self) -> int:
        return len(self.x)

    @property
    def sign(self) -> int:
        if self.phase % 2:
            raise ValueError("non-Hermitian Pauli string has no real sign")
        return 1 if self.phase == 0 else -1

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        """Parse ``"+XZIY"`` or ``"-ZZ"``; a missing sign means ``+``."""
        phase = 0
        if label and label[0] in "+-":
            phase = 0 if label[0] == "+" else 2
            label = label[1:]
        x = np.array([c in "XY" for c in label])
        z = np.array([c in "ZY" for c in label])
        if any(c not in "IXYZ" for c in label):
            raise ValueError(f"bad Pauli label {label!r}")
        return cls(x, z, phase)

    def label(self) -> str:
        chars = "IXZY"
        body = "".join(chars[int(a) + 2 * int(b)] for a, b in zip(self.x, self.z))
        return {0: "+", 1: "+i", 2: "-", 3: "-i"}[self.phase] + body

    def __mul__(self, other: "PauliString") -> "PauliString":
        """Operator product ``self * other``."""
        phase = (self.phase + other.phase + _product_phase(self.x, self.z, other.x, other.z)) % 4
        return PauliString(self.x ^ other.x, self.z ^ other.z, phase)

    def commutes(self, other: "PauliString") -> bool:
        return not (np.count_nonzero(self.x & other.z) + np.count_nonzero(self.z & other.x)) % 2


def _product_phase(x1, z1, x2, z2) -> int:
    """Exponent of ``i`` in ``P1 P2`` for Hermitian-convention factors."""
    x1, z1, x2, z2 = (np.asarray(a, dtype=np.int64) for a in (x1, z1, x2, z2))
    g = np.where(
        (x1 == 1) & (z1 == 1), z2 - x2,
        np.where((x1 == 1) & (z1 == 0), z2 * (2 * x2 - 1),
                 np.where((x1 == 0) & (z1 == 1), x2 * (1 - 2 * z2), 0)),
    )
    return int(g.sum()) % 4


def g_operator(n: int, i: int) -> PauliString:
    """Cluster stabilizer ``Z_{i-1} X_i Z_{i+1}`` on a ring of ``n >= 3`` qubits."""
    x = np.zeros(n, dtype=bool)
    z = np.zeros(n, dtype=bool)
    x[i % n] = True
    z[(i - 1) % n] = True
    z[(i + 1) % n] = True
    return PauliString(x, z)


def string_operator(n: int, i: int, j: int) -> PauliString:
    """Product ``g_i g_{i+1} ... g_j`` (indices modulo ``n``)."""
    out = g_operator(n, i)
    for k in range(i + 1, j + 1):
        out = out * g_operator(n, k)
    return out


# ---------------------------------------------------------------------------
# Two-qubit Clifford gates
# ---------------------------------------------------------------------------

# Local pattern index of (x1, z1, x2, z2) is 8*x1 + 4*z1 + 2*x2 + z2.
_GEN_PATTERNS = (8, 4, 2, 1)  # X1, Z1, X2, Z2


def _bits(p: int) -> tuple[int, int, int, int]:
    return (p >> 3) & 1, (p >> 2) & 1, (p >> 1) & 1, p & 1


def _symp(p: int, q: int) -> int:
    a, b, c, d = _bits(p)
    e, f, g, h = _bits(q)
    return (a * f + b * e + c * h + d * g) % 2


@dataclass(frozen=True)
class CliffordGate2:
    """Two-qubit Clifford specified by the images of ``X1, Z1, X2, Z2``.

    Each image is ``(pattern, sign_bit)``: the Hermitian Pauli with local
    pattern ``pattern`` times ``(-1)**sign_bit``.
    """

    images: tuple[tuple[int, int], tuple[int, int], tuple[int, int], tuple[int, int]]

    def __post_init__(self) -> None:
        pats = [p for p, _ in self.images]
        want = {(0, 1): 1, (2, 3): 1, (0, 2): 0, (0, 3): 0, (1, 2): 0, (1, 3): 0}
        for (i, j), val in want.items():
            if _symp(pats[i], pats[j]) != val:
                raise ValueError("images do not preserve the commutation relations")

    @property
    def table(self) -> tuple[np.ndarray, np.ndarray]:
        return _gate_table(self)

    def conjugate(self, pattern: int) -> tuple[int, int]:
        """Image ``(pattern, sign_bit)`` of the Hermitian Pauli with ``pattern``."""
        rows, flips = self.table
        return int(rows[pattern]), int(flips[pattern])

    def then(self, other: "CliffordGate2") -> "CliffordGate2":
        """Gate ``other * self`` (apply ``self`` first)."""
        imgs = []
        for p, s in self.images:
            q, t = other.conjugate(p)
            imgs.append((q, s ^ t))
        return CliffordGate2(tuple(imgs))  # type: ignore[arg-type]

    def fixes(self, pattern: int, exact_sign: bool = True) -> bool:
        q, s = self.conjugate(pattern)
        return q == pattern and (s == 0 or not exact_sign)


@lru_cache(maxsize=None)
def _gate_table(gate: CliffordGate2) -> tuple[np.ndarray, np.ndarray]:
    rows = np.zeros(16, dtype=np.int64)
    flips = np.zeros(16, dtype=np.uint8)
    for pat in range(16):
        bits = _bits(pat)
        # Hermitian P = i^(x1 z1 + x2 z2) X1^x1 Z1^z1 X2^x2 Z2^z2, and the
        # product phase below is itself in the Hermitian convention.
        k = bits[0] * bits[1] + bits[2] * bits[3]
        acc_x = np.zeros(2, dtype=bool)
        acc_z = np.zeros(2, dtype=bool)
        acc_phase = 0
        for use, (img, sgn) in zip(bits, gate.images):
            if not use:
                continue
            a, b, c, d = _bits(img)
            ix, iz = np.array([a, c], bool), np.array([b, d], bool)
            acc_phase += 2 * sgn + _product_phase(acc_x, acc_z, ix, iz)
            acc_x ^= ix
            acc_z ^= iz
        total = (acc_phase + k) % 4
        if total % 2:
            raise AssertionError("conjugation produced a non-Hermitian image")
        rows[pat] = 8 * int(acc_x[0]) + 4 * int(acc_z[0]) + 2 * int(acc_x[1]) + int(acc_z[1])
        flips[pat] = total // 2
    return rows, flips


def _named_gate(images: Sequence[tuple[str, int]]) -> CliffordGate2:
    pats = []
    for label, sign in images:
        p = PauliString.from_label(label)
        pats.append((8 * int(p.x[0]) + 4 * int(p.z[0]) + 2 * int(p.x[1]) + int(p.z[1]), sign))
    return CliffordGate2(tuple(pats))  # type: ignore[arg-type]


IDENTITY2 = _named_gate([("XI", 0), ("ZI", 0), ("IX", 0), ("IZ", 0)])
H1 = _named_gate([("ZI", 0), ("XI", 0), ("IX", 0), ("IZ", 0)])
S1 = _named_gate([("YI", 0), ("ZI", 0), ("IX", 0), ("IZ", 0)])
H2 = _named_gate([("XI", 0), ("ZI", 0), ("IZ", 0), ("IX", 0)])
S2 = _named_gate([("XI", 0), ("ZI", 0), ("IY", 0), ("IZ", 0)])
CNOT = _named_gate([("XX", 0), ("ZI", 0), ("IX", 0), ("ZZ", 0)])
CZ = _named_gate([("XZ", 0), ("ZI", 0), ("ZX", 0), ("IZ", 0)])
SWAP = _named_gate([("IX", 0), ("IZ", 0), ("XI", 0), ("ZI", 0)])


@lru_cache(maxsize=1)
def _enumerate_cached() -> tuple[CliffordGate2, ...]:
    nonzero = range(1, 16)
    gates = []
    for x1 in nonzero:
        for z1 in nonzero:
            if _symp(x1, z1) != 1:
                continue
            for x2 in nonzero:
                if _symp(x1, x2) or _symp(z1, x2):
                    continue
                for z2 in nonzero:
                    if _symp(x1, z2) or _symp(z1, z2) or _symp(x2, z2) != 1:
                        continue
                    for signs in itertools.product((0, 1), repeat=4):
                        gates.append(CliffordGate2(tuple(zip((x1, z1, x2, z2), signs))))  # type: ignore[arg-type]
    return tuple(gates)


def enumerate_clifford2() -> list[CliffordGate2]:
    """All two-qubit Cliffords modulo global phase (11520 of them).

    Built as every symplectic image of ``(X1, Z1, X2, Z2)`` combined with
    every choice of signs, in a fixed deterministic order.
    """
    return list(_enumerate_cached())


_X1, _X2, _XX = 8, 2, 10


def filter_ensemble(
    gates: Iterable[CliffordGate2], ensemble: str, pair: str = "odd_even", exact_sign: bool = True
) -> list[CliffordGate2]:
    """Restrict ``gates`` to the symmetric subset for ``ensemble``.

    :param ensemble: ``"a"`` (no constraint), ``"b"``/``"c"`` (the two
        sublattice parities restricted to the pair), ``"d"`` (every ``X_i``).
    :param pair: ``"odd_even"`` for a pair of opposite parity (both ``X``
        factors fixed separately) or ``"same"`` for equal parity (``X (x) X``
        fixed).  Ignored for ``"a"`` and ``"d"``.
    :param exact_sign: require the symmetry to be mapped to itself with its
        sign; ``False`` accepts a sign flip.
    """
    if ensemble not in ENSEMBLES:
        raise ValueError(f"unknown ensemble {ensemble!r}")
    if ensemble == "a":
        keep = list(gates)
    elif ensemble == "d" or pair == "odd_even":
        keep = [g for g in gates if g.fixes(_X1, exact_sign) and g.fixes(_X2, exact_sign)]
    elif pair == "same":
        keep = [g for g in gates if g.fixes(_XX, exact_sign)]
    else:
        raise ValueError(f"unknown pair type {pair!r}")
    if not keep:
        raise ValueError("empty ensemble")
    return keep


@lru_cache(maxsize=None)
def ensemble_tables(ensemble: str, exact_sign: bool = True) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    """Stacked conjugation tables ``(rows, flips)`` of shape ``(n_gates, 16)`` per pair type."""
    out = {}
    allg = _enumerate_cached()
    for pair in ("odd_even", "same"):
        gates = filter_ensemble(allg, ensemble, pair, exact_sign)
        rows = np.stack([g.table[0] for g in gates])
        flips = np.stack([g.table[1] for g in gates])
        out[pair] = (rows, flips)
    return out


# ---------------------------------------------------------------------------
# Full tableau with signs
# ---------------------------------------------------------------------------

def _popcount(a: np.ndarray) -> np.ndarray:
    return np.bitwise_count(a).sum(axis=-1).astype(np.int64)


class Tableau:
    """Stabilizer tableau with destabilizers and signs, rows packed in uint64.

    Rows ``0 .. n-1`` are destabilizers, rows ``n .. 2n-1`` stabilizers.
    """

    def __init__(self, n: int) -> None:
        if n < 1:
            raise ValueError("need at least one qubit")
        self.n = n
        self.words = (n + 63) // 64
        self.x = np.zeros((2 * n, self.words), dtype=np.uint64)
        self.z = np.zeros((2 * n, self.words), dtype=np.uint64)
        self.r = np.zeros(2 * n, dtype=np.uint8)

    # -- construction -----------------------------------------------------
    @classmethod
    def zero_state(cls, n: int) -> "Tableau":
        t = cls(n)
        for q in range(n):
            t._set(t.x, q, q, 1)
            t._set(t.z, n + q, q, 1)
        return t

    @classmethod
    def plus_state(cls, n: int) -> "Tableau":
        t = cls(n)
        for q in range(n):
            t._set(t.z, q, q, 1)
            t._set(t.x, n + q, q, 1)
        return t

    def copy(self) -> "Tableau":
        t = Tableau.__new__(Tableau)
        t.n, t.words = self.n, self.words
        t.x, t.z, t.r = self.x.copy(), self.z.copy(), self.r.copy()
        return t

    # -- bit helpers ------------------------------------------------------
    @staticmethod
    def _set(arr: np.ndarray, row: int, q: int, val: int) -> None:
        w, b = divmod(q, 64)
        mask = np.uint64(1) << np.uint64(b)
        if val:
            arr[row, w] |= mask
        else:
            arr[row, w] &= ~mask

    def _col(self, arr: np.ndarray, q: int) -> np.ndarray:
        w, b = divmod(q, 64)
        return ((arr[:, w] >> np.uint64(b)) & np.uint64(1)).astype(np.uint8)

    def _pack(self, bits: np.ndarray) -> np.ndarray:
        out = np.zeros(self.words, dtype=np.uint64)
        for q in np.flatnonzero(bits):
            w, b = divmod(int(q), 64)
            out[w] |= np.uint64(1) << np.uint64(b)
        return out

    def _unpack(self, words: np.ndarray) -> np.ndarray:
        bits = np.unpackbits(words.astype("<u8").view(np.uint8), bitorder="little")
        return bits[: self.n].astype(bool)

    def row(self, k: int) -> PauliString:
        return PauliString(self._unpack(self.x[k]), self._unpack(self.z[k]), 2 * int(self.r[k]))

    def stabilizers(self) -> list[PauliString]:
        return [self.row(self.n + k) for k in range(self.n)]

    def destabilizers(self) -> list[PauliString]:
        return [self.row(k) for k in range(self.n)]

    # -- core operations --------------------------------------------------
    def _phase_sum(self, hx, hz, ix, iz) -> np.ndarray:
        """Sum of the AG ``g`` function for products ``P_i * P_h`` (row-wise)."""
        y1 = ix & iz
        x1 = ix & ~iz
        z1 = ~ix & iz
        pos = _popcount(y1 & hz & ~hx) + _popcount(x1 & hz & hx) + _popcount(z1 & hx & ~hz)
        neg = _popcount(y1 & hx & ~hz) + _popcount(x1 & hz & ~hx) + _popcount(z1 & hx & hz)
        return pos - neg

    def _rowsum(self, targets: np.ndarray, src: int) -> None:
        """Replace each target row ``h`` by ``P_src * P_h``."""
        if len(targets) == 0:
            return
        hx, hz = self.x[targets], self.z[targets]
        ix, iz = self.x[src][None, :], self.z[src][None, :]
        total = 2 * self.r[targets].astype(np.int64) + 2 * int(self.r[src]) + self._phase_sum(hx, hz, ix, iz)
        total %= 4
        # Destabilizer signs carry no meaning and may pick up odd phases.
        if np.any((total % 2) & (targets >= self.n)):
            raise AssertionError("rowsum of anticommuting stabilizer rows")
        self.r[targets] = (total // 2).astype(np.uint8)
        self.x[targets] = hx ^ ix
        self.z[targets] = hz ^ iz

    def _anticommuting(self, px: np.ndarray, pz: np.ndarray) -> np.ndarray:
        return (_popcount((self.x & pz) ^ (self.z & px)) % 2).astype(bool)

    def apply_clifford2(self, gate: CliffordGate2, a: int, b: int) -> None:
        """Conjugate every row by ``gate`` acting on qubits ``(a, b)``."""
        if a == b:
            raise ValueError("two-qubit gate needs distinct qubits")
        rows, flips = gate.table
        xa, za, xb, zb = self._col(self.x, a), self._col(self.z, a), self._col(self.x, b), self._col(self.z, b)
        pat = 8 * xa.astype(np.int64) + 4 * za + 2 * xb + zb
        new = rows[pat]
        self.r ^= flips[pat]
        for arr, q, bit in ((self.x, a, 3), (self.z, a, 2), (self.x, b, 1), (self.z, b, 0)):
            w, s = divmod(q, 64)
            mask = np.uint64(1) << np.uint64(s)
            vals = ((new >> bit) & 1).astype(np.uint64) << np.uint64(s)
            arr[:, w] = (arr[:, w] & ~mask) | vals

    def measure(self, p: PauliString, coin: int) -> tuple[int, bool]:
        """Measure Hermitian ``p``; return ``(outcome, was_random)``.

        ``coin`` in ``{0, 1}`` fixes the outcome ``(-1)**coin`` when it is
        random.
        """
        if p.n != self.n:
            raise ValueError("Pauli length does not match the tableau")
        sign_bit = p.phase // 2
        if p.phase % 2:
            raise ValueError("cannot measure a non-Hermitian Pauli string")
        px, pz = self._pack(p.x), self._pack(p.z)
        anti = self._anticommuting(px, pz)
        stab = np.flatnonzero(anti[self.n:])
        if len(stab):
            piv = self.n + int(stab[0])
            others = np.flatnonzero(anti)
            others = others[others != piv]
            self._rowsum(others, piv)
            d = piv - self.n
            self.x[d], self.z[d], self.r[d] = self.x[piv], self.z[piv], self.r[piv]
            self.x[piv], self.z[piv] = px, pz
            self.r[piv] = (int(coin) + sign_bit) % 2
            return (1 if coin == 0 else -1), True
        value = self._deterministic_sign(anti[: self.n])
        return (1 if (value + sign_bit) % 2 == 0 else -1), False

    def _deterministic_sign(self, destab_anti: np.ndarray) -> int:
        """Sign bit of the stabilizer product equal to ``+-P``."""
        acc_x = np.zeros(self.words, dtype=np.uint64)
        acc_z = np.zeros(self.words, dtype=np.uint64)
        acc_r = 0
        for k in np.flatnonzero(destab_anti):
            src = self.n + int(k)
            ix, iz = self.x[src][None, :], self.z[src][None, :]
            tot = 2 * acc_r + 2 * int(self.r[src]) + int(self._phase_sum(acc_x[None, :], acc_z[None, :], ix, iz)[0])
            acc_r = (tot % 4) // 2
            acc_x ^= self.x[src]
            acc_z ^= self.z[src]
        return acc_r

    def expectation(self, p: PauliString) -> int:
        """``<P>`` in ``{-1, 0, +1}`` without changing the state."""
        if p.phase % 2:
            raise ValueError("expectation of a non-Hermitian Pauli string")
        px, pz = self._pack(p.x), self._pack(p.z)
        anti = self._anticommuting(px, pz)
        if anti[self.n:].any():
            return 0
        value = (self._deterministic_sign(anti[: self.n]) + p.phase // 2) % 2
        return 1 if value == 0 else -1

    def check(self) -> bool:
        """Verify the symplectic pairing of destabilizers and stabilizers."""
        rows = [self.row(k) for k in range(2 * self.n)]
        for i in range(2 * self.n):
            for j in range(i + 1, 2 * self.n):
                anti = not rows[i].commutes(rows[j])
                should = j == i + self.n
                if anti != should:
                    return False
        return True


def measure_pauli(t: Tableau, p: PauliString, coin: int) -> int:
    """Measure ``p`` on ``t`` in place and return the outcome ``+-1``."""
    return t.measure(p, coin)[0]


def expectation_pauli(t: Tableau, p: PauliString) -> int:
    """``<P>`` in ``{-1, 0, +1}``."""
    return t.expectation(p)


# ---------------------------------------------------------------------------
# Sign-free stabilizer frame for the sweep
# ---------------------------------------------------------------------------

class StabilizerFrame:
    """Stabilizer generators of an ``n``-qubit state, signs dropped.

    ``x`` and ``z`` are ``(n, n)`` uint8 arrays, one generator per row.
    """

    def __init__(self, x: np.ndarray, z: np.ndarray) -> None:
        self.x = np.ascontiguousarray(x, dtype=np.uint8)
        self.z = np.ascontiguousarray(z, dtype=np.uint8)
        self.n = self.x.shape[1]

    @classmethod
    def plus_state(cls, n: int) -> "StabilizerFrame":
        return cls(np.eye(n, dtype=np.uint8), np.zeros((n, n), dtype=np.uint8))

    @classmethod
    def from_tableau(cls, t: Tableau) -> "StabilizerFrame":
        stabs = t.stabilizers()
        return cls(np.array([s.x for s in stabs]), np.array([s.z for s in stabs]))

    def apply(self, rows: np.ndarray, a: int, b: int) -> None:
        """Apply a gate given by its 16-entry pattern table to qubits ``(a, b)``."""
        x, z = self.x, self.z
        pat = (x[:, a] << 3) | (z[:, a] << 2) | (x[:, b] << 1) | z[:, b]
        new = rows[pat]
        x[:, a] = (new >> 3) & 1
        z[:, a] = (new >> 2) & 1
        x[:, b] = (new >> 1) & 1
        z[:, b] = new & 1

    def measure_g(self, k: int) -> bool:
        """Measure ``g_k``; return whether the group changed."""
        n = self.n
        x, z = self.x, self.z
        anti = z[:, k] ^ x[:, (k - 1) % n] ^ x[:, (k + 1) % n]
        hits = np.flatnonzero(anti)
        if len(hits) == 0:
            return False
        piv = hits[0]
        rest = hits[1:]
        if len(rest):
            x[rest] ^= x[piv]
            z[rest] ^= z[piv]
        x[piv] = 0
        z[piv] = 0
        x[piv, k] = 1
        z[piv, (k - 1) % n] = 1
        z[piv, (k + 1) % n] = 1
        return True

    def string_order(self) -> float:
        return _string_order_bits(self.x, self.z)


def _string_order_bits(x: np.ndarray, z: np.ndarray) -> float:
    """``s`` from generator bit matrices.

    ``s_ij^2 = 1`` iff the string ``g_i ... g_j`` commutes with every
    generator.  Commutation with a generator is additive over ``k``, so
    with prefix parities ``Pre[j]`` the condition is ``Pre[j] == Pre[i-1]``.
    """
    n = x.shape[1]
    comm = z ^ np.roll(x, 1, axis=1) ^ np.roll(x, -1, axis=1)
    pre = np.bitwise_xor.accumulate(comm, axis=1)
    cols = np.concatenate([np.zeros((x.shape[0], 1), dtype=pre.dtype), pre], axis=1)
    keys = np.packbits(cols.astype(np.uint8), axis=0).T
    _, labels = np.unique(keys, axis=0, return_inverse=True)
    labels = labels.ravel()
    counts = np.bincount(labels)
    equal_pairs = int((counts * (counts - 1) // 2).sum())
    adjacent = int(np.count_nonzero(labels[1:] == labels[:-1]))
    return (equal_pairs - adjacent) * 2.0 / (n * (n - 1))


def string_order(t: Tableau | StabilizerFrame) -> float:
    """``s = 2/(N(N-1)) * sum_{i<j} <g_i ... g_j>^2``."""
    if isinstance(t, Tableau):
        stabs = t.stabilizers()
        x = np.array([s.x for s in stabs], dtype=np.uint8)
        z = np.array([s.z for s in stabs], dtype=np.uint8)
        return _string_order_bits(x, z)
    return t.string_order()


# ---------------------------------------------------------------------------
# Experiments
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentConfig:
    """Parameters of one grid point.

    ``burn_in`` and ``steps`` default to ``2 N^2`` and ``4 N^2``;
    ``cadence`` defaults to ``N``.  ``steps`` counts every step, burn-in
    included.
    """

    N: int
    p: float
    ensemble: str
    realizations: int = 1
    seed: int = 0
    steps: int | None = None
    burn_in: int | None = None
    cadence: int | None = None
    exact_sign: bool = True

    def __post_init__(self) -> None:
        if self.N < 4 or self.N % 2:
            raise ValueError(f"N must be even and >= 4, got {self.N}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")
        if self.ensemble not in ENSEMBLES:
            raise ValueError(f"unknown ensemble {self.ensemble!r}")
        if self.realizations < 1:
            raise ValueError("need at least one realization")
        if self.total_steps < self.burn_in_steps:
            raise ValueError("steps must not be shorter than the burn-in")

    @property
    def burn_in_steps(self) -> int:
        return 2 * self.N ** 2 if self.burn_in is None else self.burn_in

    @property
    def total_steps(self) -> int:
        return 4 * self.N ** 2 if self.steps is None else self.steps

    @property
    def cadence_steps(self) -> int:
        return self.N if self.cadence is None else self.cadence


def _rng(seed: int, realization: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, realization])))


def _draw_history(cfg: ExperimentConfig, rng: np.random.Generator):
    steps, n = cfg.total_steps, cfg.N
    is_gate = rng.random(steps) < cfg.p
    first = rng.integers(0, n, size=steps)
    other = rng.integers(0, n - 1, size=steps)
    pick = rng.random(steps)
    if cfg.ensemble in ("a", "b"):
        second = (first + 1) % n
    else:
        second = other + (other >= first)
    return is_gate, first, second, pick


def run_realization(cfg: ExperimentConfig, realization: int = 0) -> np.ndarray:
    """Time series of ``s`` sampled every ``cadence`` steps after burn-in."""
    rng = _rng(cfg.seed, realization)
    is_gate, first, second, pick = _draw_history(cfg, rng)
    tables = ensemble_tables(cfg.ensemble, cfg.exact_sign)
    odd_even = tables["odd_even"][0].astype(np.uint8)
    same = tables["same"][0].astype(np.uint8)
    frame = StabilizerFrame.plus_state(cfg.N)
    burn, cad = cfg.burn_in_steps, cfg.cadence_steps
    samples = []
    dirty = True
    current = 0.0
    for t in range(cfg.total_steps):
        if is_gate[t]:
            a, b = int(first[t]), int(second[t])
            stack = same if (a - b) % 2 == 0 and cfg.ensemble == "c" else odd_even
            g = int(pick[t] * len(stack))
            frame.apply(stack[g], a, b)
            dirty = True
        else:
            dirty |= frame.measure_g(int(first[t]))
        done = t + 1
        if done > burn and (done - burn) % cad == 0:
            if dirty:
                current = frame.string_order()
                dirty = False
            samples.append(current)
    return np.array(samples)


@dataclass(frozen=True)
class SweepRow:
    ensemble: str
    N: int
    p: float
    realizations: int
    steps: int
    s_bar: float
    stderr: float
    seed: int

    def csv(self) -> str:
        return ",".join([
            self.ensemble, str(self.N), _fmt(self.p), str(self.realizations), str(self.steps),
            _fmt(self.s_bar), _fmt(self.stderr), str(self.seed),
        ])


def _fmt(v: float) -> str:
    return f"{v:#.6g}"


def _realization_mean(args: tuple[ExperimentConfig, int]) -> float:
    cfg, k = args
    series = run_realization(cfg, k)
    return float(series.mean()) if len(series) else float("nan")


def _workers(workers: int | None) -> int:
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get("KLOCAL_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValueError(f"KLOCAL_THREADS must be an integer, got {env!r}") from None
    return 1


def run_point(cfg: ExperimentConfig, workers: int | None = None) -> SweepRow:
    """Average ``s`` over realizations and the recording window of one point."""
    jobs = [(cfg, k) for k in range(cfg.realizations)]
    nw = _workers(workers)
    if nw > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=nw) as pool:
            means = list(pool.map(_realization_mean, jobs))
    else:
        means = [_realization_mean(j) for j in jobs]
    arr = np.array(means)
    err = float(arr.std(ddof=1) / math.sqrt(len(arr))) if len(arr) > 1 else 0.0
    return SweepRow(cfg.ensemble, cfg.N, cfg.p, cfg.realizations, cfg.total_steps,
                    float(arr.mean()), err, cfg.seed)


def sweep(
    ensembles: Sequence[str],
    sizes: Sequence[int],
    p_grid: Sequence[float],
    realizations: int,
    seed: int,
    exact_sign: bool = True,
    workers: int | None = None,
) -> list[SweepRow]:
    """Rows in ``(ensemble, N, p)`` ascending order."""
    if not ensembles or not sizes or not p_grid:
        raise ValueError("empty sweep grid")
    rows = []
    for ens in sorted(set(ensembles)):
        for n in sorted(set(sizes)):
            for p in sorted(set(p_grid)):
                cfg = ExperimentConfig(n, float(p), ens, realizations, seed, exact_sign=exact_sign)
                rows.append(run_point(cfg, workers))
    return rows


def sweep_csv(rows: Sequence[SweepRow]) -> str:
    return "\n".join([CSV_HEADER, *(r.csv() for r in rows)]) + "\n"
