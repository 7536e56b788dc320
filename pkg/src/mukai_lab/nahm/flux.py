"""Flux data, dual points, grid configuration, and the constant mixed curvature.

The model lives on the flat unit 4-torus.  A rank-1 bundle is specified by an
antisymmetric integer matrix n with curvature F = 2 pi i sum_{mu<nu} n_mn
dx_mu ^ dx_nu.  The family of flat twists is parametrised by xi in [0,1)^4;
with the trivialization used throughout, sections at every xi live in one
fixed space of periodic lattice fields and all xi-dependence sits in the
operators.

Sign conventions (fixed once, used by every consumer):
  * first Chern form of the bundle is -n (so ch2 integrates to the Pfaffian
    n01 n23 - n02 n13 + n03 n12, validated against the Landau-count oracle);
  * the mixed curvature of the family bundle is Omega(d/dx_mu, d/dxi_nu)
    = 2 pi i delta_mn, and its transpose action on the Hom bundle carries
    weight -2 pi i.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..spin4 import COMPLEX_STRUCTURES_R4, OMEGA_FORMS


class NahmError(ValueError):
    """Raised on malformed inputs, excluded cases, and hard check failures."""


TWO_PI_I = 2j * math.pi


def _wedge_volume_int(f, g):
    """Volume coefficient of f ^ g for antisymmetric integer matrices, exact."""
    return (f[0][1] * g[2][3] - f[0][2] * g[1][3] + f[0][3] * g[1][2]
            + g[0][1] * f[2][3] - g[0][2] * f[1][3] + g[0][3] * f[1][2])


@dataclass(frozen=True)
class FluxData:
    """Antisymmetric integer first-Chern coefficients of a rank-1 bundle."""

    n: tuple
    rank: int = 1

    def __post_init__(self):
        n = tuple(tuple(int(x) for x in row) for row in self.n)
        if len(n) != 4 or any(len(row) != 4 for row in n):
            raise NahmError("flux matrix must be 4x4")
        if any(n[i][j] != -n[j][i] for i in range(4) for j in range(4)):
            raise NahmError("flux matrix must be antisymmetric")
        if self.rank != 1:
            raise NahmError("only rank-1 bundles are supported")
        object.__setattr__(self, "n", n)

    @property
    def charge(self) -> int:
        """The ch2 integral: the Pfaffian of the coefficient matrix."""
        n = self.n
        return n[0][1] * n[2][3] - n[0][2] * n[1][3] + n[0][3] * n[1][2]

    def is_zero(self) -> bool:
        return all(x == 0 for row in self.n for x in row)

    def is_asd(self) -> bool:
        """F ^ omega_k = 0 for all three hyperkaehler forms, exactly."""
        return all(_wedge_volume_int(self.n, om) == 0 for om in OMEGA_FORMS)

    def entries(self):
        return [(i, j, self.n[i][j]) for i in range(4) for j in range(i + 1, 4)
                if self.n[i][j] != 0]

    def factor_pairs(self):
        """Split the four directions into two 2-tori carrying the flux.

        Returns ((a, b, q1), (c, d, q2)) with {a,b} u {c,d} = {0,1,2,3}.
        Only fluxes supported on a perfect matching of the directions are
        solvable by the separable route; anything else raises.
        """
        ent = self.entries()
        if len(ent) == 1:
            (a, b, q) = ent[0]
            rest = sorted(set(range(4)) - {a, b})
            return (a, b, q), (rest[0], rest[1], 0)
        if len(ent) == 2:
            (a, b, q1), (c, d, q2) = ent
            if {a, b} & {c, d}:
                raise NahmError("flux couples overlapping direction pairs; "
                                "not separable into two 2-torus factors")
            return (a, b, q1), (c, d, q2)
        raise NahmError("flux is not supported on a pair of complementary "
                        "2-tori; the separable solver cannot handle it")

    def as_dict(self):
        return {"n": [list(row) for row in self.n], "rank": self.rank}


def flux_from_pairs(q12: int, q34: int) -> FluxData:
    n = [[0] * 4 for _ in range(4)]
    n[0][1], n[1][0] = q12, -q12
    n[2][3], n[3][2] = q34, -q34
    return FluxData(tuple(tuple(row) for row in n))


@dataclass(frozen=True)
class DualPoint:
    """Point of the dual torus [0,1)^4; a flat twist of the connection."""

    xi: tuple

    def __post_init__(self):
        xi = tuple(float(x) % 1.0 for x in self.xi)
        if len(xi) != 4:
            raise NahmError("dual point needs 4 coordinates")
        object.__setattr__(self, "xi", xi)

    def __iter__(self):
        return iter(self.xi)


@dataclass
class GridConfig:
    """Discretization and solver parameters.

    n: lattice sites per direction (even); m: dual-grid resolution per
    direction; delta: step for covariant finite differences in xi.
    """

    n: int = 16
    m: int = 4
    cg_tol: float = 1e-8
    eig_tol: float = 1e-10
    delta: float = 0.05
    seed: int = 0
    threads: int = 1
    maxiter: int = 5000
    cg_samples: int = 1

    def __post_init__(self):
        if self.n < 4 or self.n % 2:
            raise NahmError("grid size must be even and at least 4")
        if self.m < 1:
            raise NahmError("dual grid resolution must be positive")
        if self.cg_tol <= 0 or self.eig_tol <= 0 or self.delta <= 0:
            raise NahmError("tolerances and delta must be positive")

    @property
    def spacing(self) -> float:
        return 1.0 / self.n

    def as_dict(self):
        return {"n": self.n, "m": self.m, "cg_tol": self.cg_tol,
                "eig_tol": self.eig_tol, "delta": self.delta,
                "seed": self.seed, "threads": self.threads,
                "maxiter": self.maxiter, "cg_samples": self.cg_samples}


@dataclass(frozen=True)
class PoincareCurvature:
    """Constant mixed curvature of the family bundle on T^4 x dual T^4.

    Only the mixed (x, xi) block is nonzero; the dual-dual block vanishes,
    which kills the second-derivative term of the transformed curvature.
    """

    mixed: tuple = field(default_factory=lambda: tuple(
        tuple(int(i == j) for j in range(4)) for i in range(4)))
    scale: complex = TWO_PI_I

    def omega(self, mu: int, nu: int) -> complex:
        """Omega(d/dx_mu, d/dxi_nu)."""
        return self.scale * self.mixed[mu][nu]

    @property
    def hom_weight(self) -> complex:
        """Transpose action on Hom(family fibre, fixed bundle)."""
        return -self.scale

    def dual_block(self):
        return np.zeros((4, 4))

    def triholomorphy_residual(self) -> int:
        """max |Omega(I_k a, u) + Omega(a, I_k u)| over basis vectors, exact.

        With the diagonal mixed block this reduces to I_k + I_k^T = 0.
        """
        worst = 0
        for ik in COMPLEX_STRUCTURES_R4:
            for mu in range(4):
                for nu in range(4):
                    term = sum(ik[rho][mu] * self.mixed[rho][nu]
                               + self.mixed[mu][rho] * ik[rho][nu]
                               for rho in range(4))
                    worst = max(worst, abs(term))
        return worst

    def metric_check(self):
        """-(1/4 pi^2) sum_rho Tr(i_mu Omega . i_nu Omega) over the dual torus."""
        w = np.asarray(self.mixed, dtype=float)
        coeff = -(self.scale * self.scale).real / (4 * math.pi ** 2)
        return coeff * (w @ w.T)


def poincare_curvature() -> PoincareCurvature:
    return PoincareCurvature()
