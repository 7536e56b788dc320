"""Exact arithmetic on the K3 cohomology lattice and the Mukai lattice.

The second cohomology of a K3 surface is modelled by the even unimodular
lattice U + U + U + E8(-1) + E8(-1) of signature (3,19).  A Mukai vector
(r, c, s) lives in the extended lattice Z + Lambda + Z, paired by

    (v, w) = <c, c'> - r s' - s r',

which is even unimodular of signature (4,20) when Lambda is the K3 lattice.
All operations below are exact integer (or rational) computations; no
floating point is used anywhere in this module.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd

from . import exactlinalg as xl


class LatticeError(ValueError):
    """Raised on malformed lattice data or violated preconditions."""


@dataclass(frozen=True)
class LatticeInvariants:
    rank: int
    determinant: int
    signature: tuple[int, int]
    is_even: bool
    is_unimodular: bool
    nullity: int = 0

    @property
    def is_nondegenerate(self) -> bool:
        return self.nullity == 0


class IntegerLattice:
    """Free Z-module of finite rank with a symmetric integer Gram matrix."""

    def __init__(self, gram):
        gram = [[int(x) for x in row] for row in gram]
        if not xl.is_symmetric(gram):
            raise LatticeError("Gram matrix must be symmetric")
        self.gram = gram
        self.rank = len(gram)

    def pairing(self, x, y) -> int:
        if len(x) != self.rank or len(y) != self.rank:
            raise LatticeError("vector length does not match lattice rank")
        return sum(int(x[i]) * self.gram[i][j] * int(y[j])
                   for i in range(self.rank) for j in range(self.rank))

    def is_even(self) -> bool:
        return all(self.gram[i][i] % 2 == 0 for i in range(self.rank))

    def invariants(self) -> LatticeInvariants:
        return lattice_invariants(self)

    def __eq__(self, other):
        return isinstance(other, IntegerLattice) and self.gram == other.gram

    def __hash__(self):
        return hash(tuple(map(tuple, self.gram)))

    def __repr__(self):
        return f"IntegerLattice(rank={self.rank})"


def hyperbolic_plane() -> IntegerLattice:
    """The even unimodular rank-2 lattice U."""
    return IntegerLattice([[0, 1], [1, 0]])


# Bourbaki numbering: chain 1-3-4-5-6-7-8 with node 2 attached to node 4.
_E8_EDGES = ((1, 3), (3, 4), (4, 5), (5, 6), (6, 7), (7, 8), (2, 4))


def e8_cartan_matrix():
    cartan = [[2 * int(i == j) for j in range(8)] for i in range(8)]
    for a, b in _E8_EDGES:
        cartan[a - 1][b - 1] = cartan[b - 1][a - 1] = -1
    return cartan


def e8_lattice(sign: int = -1) -> IntegerLattice:
    """E8 with the given sign; sign=-1 is the negative definite form."""
    if sign not in (1, -1):
        raise LatticeError("sign must be +1 or -1")
    return IntegerLattice([[sign * x for x in row] for row in e8_cartan_matrix()])


def direct_sum(*lattices) -> IntegerLattice:
    total = sum(lat.rank for lat in lattices)
    gram = [[0] * total for _ in range(total)]
    off = 0
    for lat in lattices:
        for i in range(lat.rank):
            for j in range(lat.rank):
                gram[off + i][off + j] = lat.gram[i][j]
        off += lat.rank
    return IntegerLattice(gram)


def k3_lattice() -> IntegerLattice:
    """The K3 lattice U + U + U + E8(-1) + E8(-1), hyperbolic planes first."""
    u = hyperbolic_plane()
    e8m = e8_lattice(-1)
    return direct_sum(u, u, u, e8m, e8m)


def lattice_invariants(lat: IntegerLattice) -> LatticeInvariants:
    """Exact rank, determinant, signature, parity and unimodularity."""
    det = xl.bareiss_determinant(lat.gram)
    pos, neg, zero = xl.inertia(lat.gram)
    return LatticeInvariants(
        rank=lat.rank,
        determinant=det,
        signature=(pos, neg),
        is_even=lat.is_even(),
        is_unimodular=abs(det) == 1,
        nullity=zero,
    )


# ---------------------------------------------------------------------------
# Mukai vectors


@dataclass(frozen=True)
class MukaiVector:
    """Triple (r, c, s) in Z + Lambda + Z over a fixed H^2 lattice."""

    r: int
    c: tuple
    s: int
    lattice: IntegerLattice

    def __post_init__(self):
        if len(self.c) != self.lattice.rank:
            raise LatticeError("c has wrong length for the H^2 lattice")
        object.__setattr__(self, "c", tuple(int(x) for x in self.c))
        object.__setattr__(self, "r", int(self.r))
        object.__setattr__(self, "s", int(self.s))

    @property
    def coords(self) -> tuple:
        return (self.r,) + self.c + (self.s,)

    def dual(self) -> "MukaiVector":
        """Degree-sign involution: flips the middle component only."""
        return MukaiVector(self.r, tuple(-x for x in self.c), self.s, self.lattice)

    def content(self) -> int:
        g = 0
        for x in self.coords:
            g = gcd(g, x)
        return g

    def is_primitive(self) -> bool:
        return self.content() == 1

    def divide_content(self) -> "MukaiVector":
        g = self.content()
        if g == 0:
            raise LatticeError("zero vector has no primitive part")
        return MukaiVector(self.r // g, tuple(x // g for x in self.c),
                           self.s // g, self.lattice)

    def __repr__(self):
        return f"MukaiVector(r={self.r}, c={list(self.c)}, s={self.s})"


def from_coords(coords, lattice: IntegerLattice) -> MukaiVector:
    coords = [int(x) for x in coords]
    if len(coords) != lattice.rank + 2:
        raise LatticeError("coordinate vector has wrong length")
    return MukaiVector(coords[0], tuple(coords[1:-1]), coords[-1], lattice)


def mukai_gram(lattice: IntegerLattice):
    """Gram matrix of the Mukai pairing on Z + Lambda + Z."""
    n = lattice.rank
    gram = [[0] * (n + 2) for _ in range(n + 2)]
    for i in range(n):
        for j in range(n):
            gram[1 + i][1 + j] = lattice.gram[i][j]
    gram[0][n + 1] = gram[n + 1][0] = -1
    return gram


def mukai_lattice(lattice: IntegerLattice) -> IntegerLattice:
    return IntegerLattice(mukai_gram(lattice))


def mukai_vector(r: int, c1, c2: int, lattice: IntegerLattice) -> MukaiVector:
    """Mukai vector (r, c1, c1^2/2 - c2 + r) of a sheaf with these Chern data."""
    c1 = tuple(int(x) for x in c1)
    sq = lattice.pairing(c1, c1)
    if sq % 2 != 0:
        raise LatticeError("half-integer Mukai component: c1^2 is odd "
                           "(the H^2 lattice is not even)")
    return MukaiVector(r, c1, sq // 2 - int(c2) + int(r), lattice)


def mukai_pairing(v: MukaiVector, w: MukaiVector, lattice: IntegerLattice | None = None) -> int:
    """<c_v, c_w> - r_v s_w - s_v r_w, exactly."""
    lat = lattice if lattice is not None else v.lattice
    if v.lattice is not w.lattice and v.lattice != w.lattice:
        raise LatticeError("vectors live over different H^2 lattices")
    if lat != v.lattice:
        raise LatticeError("explicit lattice disagrees with the vectors")
    return lat.pairing(v.c, w.c) - v.r * w.s - v.s * w.r


def euler_characteristic_and_dimension(v: MukaiVector, w: MukaiVector):
    """Euler characteristic chi = -(v, w); moduli dimension (v,v)+2 when v = w."""
    chi = -mukai_pairing(v, w)
    dim = None
    if v == w:
        dim = mukai_pairing(v, v) + 2
    return chi, dim


def _require_primitive_isotropic(v: MukaiVector):
    if all(x == 0 for x in v.coords):
        raise LatticeError("zero vector")
    if not v.is_primitive():
        raise LatticeError("vector is not primitive: divide by content first")
    if mukai_pairing(v, v) != 0:
        raise LatticeError("vector is not isotropic: quotient pairing undefined")


def orthogonal_complement_quotient(v: MukaiVector):
    """Integral basis of v-perp and the Gram of v-perp / Z v.

    Requires v primitive and isotropic.  The returned basis has v itself as
    its first element; the quotient Gram is the pairing matrix of the
    remaining generators, well defined because (v, v) = 0.
    """
    _require_primitive_isotropic(v)
    gtilde = mukai_gram(v.lattice)
    coords = list(v.coords)
    ell = xl.matvec(gtilde, coords)
    basis = xl.right_kernel([ell])
    x = xl.solve_left(basis, coords)
    if x is None or any(f.denominator != 1 for f in x):
        raise LatticeError("internal error: v does not lie in its own complement")
    x = [int(f) for f in x]
    w = xl.complete_primitive_row(x)
    full = xl.matmul(w, basis)
    assert full[0] == coords
    mlat = mukai_lattice(v.lattice)
    rest = full[1:]
    qgram = [[mlat.pairing(a, b) for b in rest] for a in rest]
    return [list(row) for row in full], IntegerLattice(qgram)


def hyperbolic_completion(v: MukaiVector) -> MukaiVector:
    """A vector w with (v, w) = 1 and (w, w) = 0.

    Existence needs v primitive isotropic and the ambient Mukai lattice even
    unimodular: unimodularity makes x -> (v, x) surjective onto Z, and
    evenness makes the correction w0 - ((w0,w0)/2) v integral.
    """
    _require_primitive_isotropic(v)
    mlat = mukai_lattice(v.lattice)
    inv = lattice_invariants(mlat)
    if not (inv.is_unimodular and inv.is_even):
        raise LatticeError("ambient Mukai lattice must be even unimodular")
    ell = xl.matvec(mukai_gram(v.lattice), list(v.coords))
    g, coeffs = xl.extended_gcd_vector(ell)
    if g != 1:
        raise LatticeError("pairing functional is not surjective; v imprimitive?")
    w0 = from_coords(coeffs, v.lattice)
    norm = mukai_pairing(w0, w0)
    # norm is even; the shift kills (w,w) because (v, w0) = 1 and (v,v) = 0
    half = norm // 2
    coords = [a - half * b for a, b in zip(w0.coords, v.coords)]
    w = from_coords(coords, v.lattice)
    assert mukai_pairing(v, w) == 1 and mukai_pairing(w, w) == 0
    return w
