"""Lattice geometries and symmetric k-local disentangler families.

Every builder here returns :class:`~klocal.phasepoly.PhaseGateSet` objects,
so the identities "product of the family equals the entangler" and "each
gate commutes with each symmetry" are exact GF(2) checks.

Indexing is 0-based throughout.  On a ring of ``N`` qubits the 1-based odd
sites ``1, 3, ..., N-1`` are the 0-based even indices ``0, 2, ..., N-2``; the
symmetry labelled ``X_odd`` therefore has support ``{0, 2, ...}``.

Families
--------
* ring cluster state: :func:`cluster_entangler`, :func:`w_gates_1d`
* folded triangular-lattice torus: :func:`folded_triangular_torus`,
  :func:`hypergraph_entangler`, :func:`w_gates_2d`
* subsystem-symmetric cluster state on a rotated square lattice:
  :func:`folded_rotated_lattice`, :func:`cluster_2d_entangler`,
  :func:`sspt_gates`
* one-to-all protocols with a central ancilla: :func:`one_to_all_1d`,
  :func:`one_to_all_2d`
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

from .phasepoly import (
    PhaseGateSet,
    SymmetrySpec,
    commutes_with,
    compose,
    compose_all,
    from_edges,
    is_trivial,
)

__all__ = [
    "COLOR_NAMES",
    "TriangulatedSurface",
    "FoldedSurface",
    "SSPTGeometry",
    "ring_parity_symmetries",
    "cluster_entangler",
    "w_gates_1d",
    "triangular_torus",
    "folded_triangular_torus",
    "color_symmetries",
    "hypergraph_entangler",
    "w_gates_2d",
    "folded_rotated_lattice",
    "cluster_2d_entangler",
    "sspt_gates",
    "one_to_all_1d",
    "one_to_all_1d_symmetries",
    "one_to_all_2d",
    "one_to_all_2d_symmetries",
    "layer_gates",
    "depth_lower_bound",
    "family_report",
]

COLOR_NAMES = ("R", "B", "G")


# ---------------------------------------------------------------------------
# 1D ring
# ---------------------------------------------------------------------------

def _check_even_ring(n: int, minimum: int) -> None:
    if n % 2:
        raise ValueError(f"ring size must be even, got {n}")
    if n < minimum:
        raise ValueError(f"ring size must be at least {minimum}, got {n}")


def ring_parity_symmetries(n: int) -> list[SymmetrySpec]:
    """``X_odd`` and ``X_even`` for an even ring (1-based naming, 0-based support)."""
    _check_even_ring(n, 4)
    return [
        SymmetrySpec(range(0, n, 2), "X_odd"),
        SymmetrySpec(range(1, n, 2), "X_even"),
    ]


def cluster_entangler(n: int) -> PhaseGateSet:
    """CZ on every bond of a periodic chain of ``n >= 3`` qubits."""
    if n < 3:
        raise ValueError(f"a ring needs at least 3 sites, got {n}")
    return from_edges(n, ((i, (i + 1) % n) for i in range(n)))


def _ring_cell_edges(n: int, i: int) -> list[tuple[int, int]]:
    """Four bonds of the folded cell ``i`` (1 <= i <= n/2 - 1) on a ring of ``n``.

    The cell couples sites ``i-1, i`` with their mirror images ``n-1-i, n-i``
    under the reflection ``x -> n-1-x``.
    """
    a, b, c, d = i - 1, i, n - 1 - i, n - i
    return [(a, b), (b, c), (d, c), (d, a)]


def w_gates_1d(n: int) -> list[PhaseGateSet]:
    """Symmetric 4-local gates whose product is :func:`cluster_entangler`.

    Gate ``i`` (``i = 1 .. n/2-1``) is the 4-cycle on ``{i-1, i, n-1-i, n-i}``.
    Consecutive gates share one chord, which cancels, leaving the ring bonds.
    """
    _check_even_ring(n, 6)
    return [from_edges(n, _ring_cell_edges(n, i)) for i in range(1, n // 2)]


# ---------------------------------------------------------------------------
# Triangulated surfaces
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TriangulatedSurface:
    """A closed, properly 3-coloured triangulated surface.

    :ivar coords: 2D lattice coordinate of each site.
    :ivar colors: colour of each site in ``{0, 1, 2}`` (R, B, G).
    :ivar triangles: sorted site triples, one per face.
    """

    coords: tuple[tuple[int, int], ...]
    colors: tuple[int, ...]
    triangles: tuple[tuple[int, int, int], ...]

    @property
    def n_sites(self) -> int:
        return len(self.coords)

    def validate(self) -> None:
        """Check closure (each edge in exactly two faces) and the colouring."""
        if len(set(self.triangles)) != len(self.triangles):
            raise ValueError("duplicate triangles")
        count: dict[tuple[int, int], int] = {}
        for t in self.triangles:
            if len({self.colors[s] for s in t}) != 3:
                raise ValueError(f"triangle {t} is not properly coloured")
            for e in itertools.combinations(t, 2):
                count[e] = count.get(e, 0) + 1
        bad = [e for e, c in count.items() if c != 2]
        if bad:
            raise ValueError(f"surface is not closed; edges {bad[:4]} have wrong face count")

    def triangles_at(self, site: int) -> list[tuple[int, int, int]]:
        return [t for t in self.triangles if site in t]


@dataclass(frozen=True)
class FoldedSurface(TriangulatedSurface):
    """A torus folded into a two-layer stack, with the prism partition.

    :ivar layers: ``0`` for the top layer, ``1`` for the bottom layer.
    :ivar partner: the site each site is stacked against after folding.
    :ivar prisms: for each box, its 12 triangles.
    """

    layers: tuple[int, ...] = ()
    partner: tuple[int, ...] = ()
    prisms: tuple[tuple[tuple[int, int, int], ...], ...] = ()


class _SkewTorus:
    """Triangular lattice in skew coordinates with a twisted period.

    Bonds point along ``(1,0)``, ``(0,1)`` and ``(-1,1)``.  The identification
    is ``(x, y) ~ (x + W, y) ~ (x + twist, y - H)``.
    """

    def __init__(self, width: int, height: int, twist: int) -> None:
        self.W, self.H, self.twist = width, height, twist

    def canon(self, x: int, y: int) -> tuple[int, int]:
        q, y = divmod(y, self.H)
        return (x + q * self.twist) % self.W, y

    def index(self, x: int, y: int) -> int:
        cx, cy = self.canon(x, y)
        return cy * self.W + cx

    def up(self, x: int, y: int) -> tuple[int, ...]:
        return tuple(sorted((self.index(x, y), self.index(x + 1, y), self.index(x, y + 1))))

    def down(self, x: int, y: int) -> tuple[int, ...]:
        return tuple(sorted((self.index(x + 1, y), self.index(x, y + 1), self.index(x + 1, y + 1))))


def _torus_surface(width: int, height: int, twist: int) -> tuple[_SkewTorus, TriangulatedSurface]:
    if width % 3:
        raise ValueError(f"width must be a multiple of 3 for a 3-colouring, got {width}")
    if (twist + height) % 3:
        raise ValueError("twist + height must be a multiple of 3 for a 3-colouring")
    if width < 3 or height < 3:
        raise ValueError("torus periods must be at least 3")
    lat = _SkewTorus(width, height, twist)
    coords = tuple((x, y) for y in range(height) for x in range(width))
    colors = tuple((x - y) % 3 for x, y in coords)
    tris = []
    for x, y in coords:
        tris.append(lat.up(x, y))
        tris.append(lat.down(x, y))
    surf = TriangulatedSurface(coords, colors, tuple(tris))
    surf.validate()
    return lat, surf


def triangular_torus(width: int, height: int) -> TriangulatedSurface:
    """Untwisted 3-coloured triangular-lattice torus; both periods multiples of 3."""
    if height % 3:
        raise ValueError(f"height must be a multiple of 3, got {height}")
    return _torus_surface(width, height, 0)[1]


def folded_triangular_torus(width: int, half_height: int) -> FoldedSurface:
    """Triangular torus of height ``2*half_height`` folded into two layers.

    The torus has periods ``width`` (a multiple of 3) and ``H = 2*half_height``
    with twist ``H/2``, which is a rectangular torus in real space.  Rows
    ``0 .. m-1`` form the top layer and the glide reflection
    ``(x, y) -> (x + y - m, H - 1 - y)`` stacks each top site over a bottom
    site; it maps bonds to bonds and raises every colour by one.

    Each box pairs a top rhombus (two faces) with its image and closes the
    gap with four side quadrilaterals, each split into two faces along the
    diagonal that keeps the colouring proper.  A box is therefore a
    triangulated sphere (12 faces on 8 sites).  Side faces shared by
    neighbouring boxes cancel; the outer side faces of the first and last
    rows of boxes reproduce the two seam rows of the torus.
    """
    m = half_height
    if m < 2:
        raise ValueError(f"half_height must be at least 2, got {m}")
    lat, base = _torus_surface(width, 2 * m, m)
    H = 2 * m

    def fold(p: tuple[int, int]) -> tuple[int, int]:
        x, y = p
        return lat.canon(x + y - m, H - 1 - y)

    def color(p: tuple[int, int]) -> int:
        x, y = p
        return (x - y) % 3

    def tri(*pts: tuple[int, int]) -> tuple[int, int, int]:
        t = tuple(sorted(lat.index(*p) for p in pts))
        if len(set(t)) != 3:
            raise ValueError("degenerate face; enlarge the torus")
        return t  # type: ignore[return-value]

    prisms = []
    for y in range(m - 1):
        for x in range(width):
            ring = [(x, y), (x + 1, y), (x + 1, y + 1), (x, y + 1)]
            faces = [
                tri(ring[0], ring[1], ring[3]),
                tri(ring[1], ring[3], ring[2]),
                tri(fold(ring[0]), fold(ring[1]), fold(ring[3])),
                tri(fold(ring[1]), fold(ring[3]), fold(ring[2])),
            ]
            for a, b in zip(ring, ring[1:] + ring[:1]):
                fa, fb = fold(a), fold(b)
                if color(b) == (color(a) + 1) % 3:
                    faces += [tri(a, b, fb), tri(a, fb, fa)]
                else:
                    faces += [tri(a, b, fa), tri(b, fb, fa)]
            prisms.append(tuple(faces))

    partner = [0] * base.n_sites
    for x, y in base.coords:
        partner[lat.index(x, y)] = lat.index(*fold((x, y)))
    layers = tuple(0 if y < m else 1 for _, y in base.coords)
    surf = FoldedSurface(
        base.coords, base.colors, base.triangles, layers, tuple(partner), tuple(prisms)
    )
    _validate_prisms(surf)
    return surf


def _validate_prisms(surf: FoldedSurface) -> None:
    total: set[tuple[int, int, int]] = set()
    for p in surf.prisms:
        if len(p) != 12 or len(set(p)) != 12:
            raise ValueError("every prism must own 12 distinct faces")
        total ^= set(p)
    if total != set(surf.triangles):
        raise ValueError("prism faces do not reproduce the surface")


def color_symmetries(surface: TriangulatedSurface, offset: int = 0) -> list[SymmetrySpec]:
    """``X_R``, ``X_B``, ``X_G``; ``offset`` shifts site labels (ancilla at 0)."""
    return [
        SymmetrySpec((s + offset for s, c in enumerate(surface.colors) if c == col), f"X_{name}")
        for col, name in enumerate(COLOR_NAMES)
    ]


def hypergraph_entangler(surface: TriangulatedSurface) -> PhaseGateSet:
    """One CCZ per face of the surface."""
    return from_edges(surface.n_sites, surface.triangles)


def w_gates_2d(surface: FoldedSurface) -> list[PhaseGateSet]:
    """One 8-site gate per prism: the CCZ's on its 12 faces."""
    if not surface.prisms:
        raise ValueError("surface has no prism partition")
    gates = []
    for p in surface.prisms:
        if len(p) != 12:
            raise ValueError(f"prism with {len(p)} faces")
        gates.append(from_edges(surface.n_sites, p))
    return gates


# ---------------------------------------------------------------------------
# Rotated square lattice with line symmetries
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SSPTGeometry:
    """Rotated square-lattice torus folded along both axes.

    Sites are the points ``(u, v)`` of ``Z_L x Z_M`` with ``u + v`` even; each
    is bonded to ``(u +- 1, v +- 1)``.  The line symmetries act on every
    site of constant ``u`` or of constant ``v`` (the two diagonal families
    of the unrotated lattice).

    Folding identifies ``u`` with ``L-1-u`` and ``v`` with ``M-1-v``, so the
    torus becomes a four-layer stack over an ``L/2 x M/2`` patch.

    :ivar coords: ``(u, v)`` per site.
    :ivar layers: ``(u >= L/2, v >= M/2)`` packed as ``2*a + b``.
    :ivar folded: folded coordinate ``(min(u, L-1-u), min(v, M-1-v))``.
    :ivar cells: site tuples of the gate cells, keyed in row-major order.
    :ivar lines: the line symmetries.
    """

    L: int
    M: int
    coords: tuple[tuple[int, int], ...]
    layers: tuple[int, ...]
    folded: tuple[tuple[int, int], ...]
    edges: tuple[tuple[int, int], ...]
    cells: tuple[tuple[int, ...], ...]
    lines: tuple[SymmetrySpec, ...]

    @property
    def n_sites(self) -> int:
        return len(self.coords)

    def index(self, u: int, v: int) -> int:
        u, v = u % self.L, v % self.M
        if (u + v) % 2:
            raise KeyError(f"({u}, {v}) is not a lattice site")
        return (u * self.M + v) // 2


def _line_mirror_ok(geom: SSPTGeometry) -> bool:
    """Each line meets each cell equally often on both sides of the transverse fold."""
    for line in geom.lines:
        axis = 1 if line.label.endswith("-") else 0  # constant u lines cross the v fold
        for cell in geom.cells:
            hits = [s for s in cell if s in line.support]
            sides = [geom.layers[s] >> (1 - axis) & 1 for s in hits]
            if sides.count(0) != sides.count(1):
                return False
    return True


def folded_rotated_lattice(L: int, M: int) -> SSPTGeometry:
    """Build the folded rotated lattice; both periods even and at least 4.

    Odd periods would leave a row fixed by the fold, breaking the pairing of
    line segments between layers, and are rejected.
    """
    for name, n in (("L", L), ("M", M)):
        if n % 2 or n < 4:
            raise ValueError(f"{name} must be even and >= 4, got {n}")
    coords = tuple((u, v) for u in range(L) for v in range(M) if (u + v) % 2 == 0)
    layers = tuple(2 * (u >= L // 2) + (v >= M // 2) for u, v in coords)
    folded = tuple((min(u, L - 1 - u), min(v, M - 1 - v)) for u, v in coords)

    def idx(u: int, v: int) -> int:
        return ((u % L) * M + (v % M)) // 2

    edges = sorted(
        {tuple(sorted((idx(u, v), idx(u + 1, v + s)))) for u, v in coords for s in (1, -1)}
    )
    cells = []
    for i in range(1, L // 2):
        for j in range(1, M // 2):
            rows = (i - 1, i, L - 1 - i, L - i)
            cols = (j - 1, j, M - 1 - j, M - j)
            cells.append(tuple(sorted(idx(a, b) for a in rows for b in cols if (a + b) % 2 == 0)))
    lines = [SymmetrySpec((idx(a, v) for v in range(a % 2, M, 2)), f"line {a},-") for a in range(L)]
    lines += [
        SymmetrySpec((idx(u, b) for u in range(b % 2, L, 2)), f"line {(-b) % M},+") for b in range(M)
    ]
    geom = SSPTGeometry(
        L, M, coords, layers, folded, tuple(edges), tuple(cells), tuple(lines)  # type: ignore[arg-type]
    )
    if not _line_mirror_ok(geom):
        raise ValueError("fold does not pair line segments across layers")
    return geom


def cluster_2d_entangler(geom: SSPTGeometry) -> PhaseGateSet:
    """CZ on every bond of the rotated lattice."""
    return from_edges(geom.n_sites, geom.edges)


def sspt_gates(geom: SSPTGeometry) -> list[PhaseGateSet]:
    """Symmetric 8-site gates whose product is :func:`cluster_2d_entangler`.

    The rotated lattice is the even-parity component of the tensor product
    of two rings, ``C_L x C_M`` (bond iff both coordinates step by one).
    The bond set of a tensor product is bilinear in the factors' bond sets,
    so expanding each ring into its folded 4-cycles (:func:`w_gates_1d`)
    splits the lattice into products of two 4-cycles.  The even component of
    such a product is ``K_{4,4}``, and every line meets each part of it in
    zero or two sites, which makes each gate symmetric.
    """
    L, M = geom.L, geom.M
    gates = []
    for i in range(1, L // 2):
        for j in range(1, M // 2):
            bonds = []
            for (a, a2), (b, b2) in itertools.product(
                _ring_cell_edges(L, i), _ring_cell_edges(M, j)
            ):
                for p, q in (((a, b), (a2, b2)), ((a, b2), (a2, b))):
                    if (p[0] + p[1]) % 2 == 0:
                        bonds.append((geom.index(*p), geom.index(*q)))
            gates.append(from_edges(geom.n_sites, bonds))
    return gates


# ---------------------------------------------------------------------------
# One-to-all protocols
# ---------------------------------------------------------------------------

def one_to_all_1d(n: int) -> list[PhaseGateSet]:
    """Gates ``V_i`` on a ring ``1..n`` plus ancilla 0, ``i = 1 .. n/2``.

    ``V_i`` is the 4-cycle ``0 - (2i-1) - 2i - (2i+1) - 0`` with ring labels
    taken modulo ``n`` in ``1..n``.  Bonds to the ancilla appear in exactly
    two consecutive gates and cancel.
    """
    _check_even_ring(n, 4)

    def site(k: int) -> int:
        return (k - 1) % n + 1

    gates = []
    for i in range(1, n // 2 + 1):
        a, b, c = site(2 * i - 1), site(2 * i), site(2 * i + 1)
        gates.append(from_edges(n + 1, [(0, a), (a, b), (b, c), (c, 0)]))
    return gates


def one_to_all_1d_symmetries(n: int) -> list[SymmetrySpec]:
    """``X_odd`` on odd ring sites and ``X_even`` extended by the ancilla."""
    _check_even_ring(n, 4)
    return [
        SymmetrySpec(range(1, n + 1, 2), "X_odd"),
        SymmetrySpec([0, *range(2, n + 1, 2)], "X_even+anc"),
    ]


def one_to_all_2d(surface: TriangulatedSurface, green: int = 2) -> list[PhaseGateSet]:
    """Gates ``V_g``, one per site ``g`` of colour ``green``; ancilla is qubit 0.

    ``V_g`` holds the CCZ on each face around ``g`` and the same face with
    ``g`` replaced by the ancilla.  Surface site ``s`` becomes qubit ``s+1``.
    """
    n = surface.n_sites + 1
    gates = []
    for g, col in enumerate(surface.colors):
        if col != green:
            continue
        faces = []
        for t in surface.triangles_at(g):
            others = [s + 1 for s in t if s != g]
            faces.append((g + 1, *others))
            faces.append((0, *others))
        gates.append(from_edges(n, faces))
    return gates


def one_to_all_2d_symmetries(surface: TriangulatedSurface, green: int = 2) -> list[SymmetrySpec]:
    """Colour symmetries on the shifted labels, the ancilla counted as ``green``."""
    out = []
    for sym in color_symmetries(surface, offset=1):
        if sym.label == f"X_{COLOR_NAMES[green]}":
            sym = SymmetrySpec(sym.support | {0}, sym.label + "+anc")
        out.append(sym)
    return out


# ---------------------------------------------------------------------------
# Depth certificates
# ---------------------------------------------------------------------------

def layer_gates(gates: Sequence[PhaseGateSet]) -> list[list[int]]:
    """Greedy first-fit layering into layers of pairwise disjoint supports.

    Gates are visited in input order and placed in the lowest layer they do
    not overlap, so the result is deterministic.
    """
    layers: list[list[int]] = []
    occupied: list[set[int]] = []
    for k, g in enumerate(gates):
        supp = g.support()
        for lay, occ in zip(layers, occupied):
            if occ.isdisjoint(supp):
                lay.append(k)
                occ |= supp
                break
        else:
            layers.append([k])
            occupied.append(set(supp))
    return layers


def depth_lower_bound(k: int, code_distance: int) -> int:
    """Smallest integer ``D`` with ``k**D >= code_distance`` (``ceil(log_k d)``)."""
    if k < 2:
        raise ValueError("gate locality k must be at least 2")
    if code_distance < 1:
        raise ValueError("code distance must be positive")
    depth, reach = 0, 1
    while reach < code_distance:
        reach *= k
        depth += 1
    return depth


def family_report(
    label: str,
    gates: Sequence[PhaseGateSet],
    entangler: PhaseGateSet,
    symmetries: Iterable[SymmetrySpec],
) -> dict:
    """Check a gate family and summarise the result as a JSON-ready dict."""
    syms = list(symmetries)
    residual_edges = compose(compose_all(gates, entangler.n_qubits), entangler)
    failures = [
        {"gate": k, "symmetry": s.label}
        for k, g in enumerate(gates)
        for s in syms
        if not commutes_with(g, s)
    ]
    layers = layer_gates(gates)
    return {
        "family": label,
        "n_qubits": entangler.n_qubits,
        "gates": len(gates),
        "max_support": max((len(g.support()) for g in gates), default=0),
        "layers": len(layers),
        "layer_assignment": layers,
        "residual_edges": len(residual_edges.edges),
        "residual_sign": residual_edges.sign,
        "identity_ok": is_trivial(residual_edges),
        "symmetry_failures": failures,
        "entangler_symmetric": all(commutes_with(entangler, s) for s in syms),
    }

