"""Magnetic Laplacian on a discretized 2-torus with integer flux.

Landau gauge on the unit torus: the gauge potential 2 pi q x_a dx_b gives
link phases exp(2 pi i q x_a h) in the b direction, and the transition
function at the x_a = 1 seam puts exp(-2 pi i q x_b) on the wrapping links.
Every plaquette then carries the uniform phase exp(2 pi i q h^2).  A flat
twist (xi_a, xi_b) multiplies every link in direction mu by
exp(-2 pi i xi_mu h).

The continuum ground space is the lowest Landau level: |q| states at energy
2 pi |q|, with the next level at 3 * 2 pi |q|.  The lattice reproduces the
multiplicity exactly and the energies to O(h^2).
"""

from __future__ import annotations

import math

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .flux import NahmError

TWO_PI = 2.0 * math.pi


def landau_count(q: int) -> int:
    """Ground multiplicity of the flux-q magnetic Laplacian (the oracle)."""
    return abs(int(q))


def link_phases(n: int, q: int, xi=(0.0, 0.0)):
    """(U_a, U_b) arrays of shape (n, n) indexed by (i, j) = (x_a, x_b)/h."""
    h = 1.0 / n
    i_idx = np.arange(n).reshape(n, 1)
    j_idx = np.arange(n).reshape(1, n)
    ua = np.ones((n, n), dtype=complex)
    ua[n - 1, :] = np.exp(-TWO_PI * 1j * q * (np.arange(n) * h))
    ub = np.exp(TWO_PI * 1j * q * i_idx * h * h) * np.ones((1, n))
    ua = ua * np.exp(-TWO_PI * 1j * xi[0] * h)
    ub = ub * np.exp(-TWO_PI * 1j * xi[1] * h)
    return ua, ub


class MagneticFactor:
    """Sparse gauged Laplacian on one 2-torus factor and its low spectrum."""

    def __init__(self, n: int, q: int, xi=(0.0, 0.0)):
        if q == 0:
            raise NahmError("zero flux on a factor: magnetic gap vanishes")
        self.n = int(n)
        self.q = int(q)
        self.xi = (float(xi[0]), float(xi[1]))
        self.h = 1.0 / self.n
        self.ua, self.ub = link_phases(self.n, self.q, self.xi)
        self._matrix = None

    def matrix(self) -> sp.csr_matrix:
        if self._matrix is None:
            n, h = self.n, self.h
            size = n * n
            idx = np.arange(size).reshape(n, n)
            rows, cols, vals = [], [], []

            def hop(dest, src, amp):
                rows.append(dest.ravel())
                cols.append(src.ravel())
                vals.append(amp.ravel())

            inv_h2 = 1.0 / (h * h)
            diag = np.full(size, 4.0 * inv_h2, dtype=complex)
            rows.append(np.arange(size))
            cols.append(np.arange(size))
            vals.append(diag)
            # -U_a(x) u(x+e_a) and its conjugate transpose
            hop(idx, np.roll(idx, -1, axis=0), -inv_h2 * self.ua)
            hop(np.roll(idx, -1, axis=0), idx, -inv_h2 * np.conj(self.ua))
            hop(idx, np.roll(idx, -1, axis=1), -inv_h2 * self.ub)
            hop(np.roll(idx, -1, axis=1), idx, -inv_h2 * np.conj(self.ub))
            mat = sp.coo_matrix(
                (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                shape=(size, size),
            )
            self._matrix = mat.tocsr()
        return self._matrix

    def apply(self, field2d):
        """Laplacian acting on an (n, n) field, matrix-free."""
        u = field2d
        h2 = self.h * self.h
        out = 4.0 * u.astype(complex)
        out -= self.ua * np.roll(u, -1, axis=0)
        out -= np.conj(np.roll(self.ua, 1, axis=0)) * np.roll(u, 1, axis=0)
        out -= self.ub * np.roll(u, -1, axis=1)
        out -= np.conj(np.roll(self.ub, 1, axis=1)) * np.roll(u, 1, axis=1)
        return out / h2

    def lowest(self, count: int, tol: float = 1e-10, seed: int = 0):
        """(eigenvalues, eigenvectors) of the `count` lowest states.

        Deterministic: the Lanczos start vector is seeded.  Eigenvectors are
        l2-orthonormal columns, ascending eigenvalues.
        """
        size = self.n * self.n
        count = min(count, size - 2)
        rng = np.random.default_rng(seed)
        v0 = rng.standard_normal(size) + 1j * rng.standard_normal(size)
        vals, vecs = spla.eigsh(self.matrix(), k=count, sigma=0.0, which="LM",
                                v0=v0, tol=tol)
        order = np.argsort(vals)
        return vals[order], vecs[:, order]

    def ground(self, tol: float = 1e-10, extra: int = 3, seed: int = 0):
        """Ground multiplet: (values, vectors, gap_ratio).

        The multiplicity is |q|; the spectral gap to the next level is
        validated against the Landau gap and a jump raises.
        """
        k = landau_count(self.q)
        vals, vecs = self.lowest(k + extra, tol=tol, seed=seed)
        gap = vals[k] - vals[k - 1]
        spread = vals[k - 1] - vals[0]
        if gap < TWO_PI * abs(self.q):
            raise NahmError("magnetic factor gap collapsed: kernel dimension jump")
        if spread > 0.5 * gap:
            raise NahmError("ground multiplet is not well separated")
        return vals[:k], vecs[:, :k], gap / max(spread, 1e-300)

    def full_spectrum(self):
        """Dense eigendecomposition; used by the Green-kernel assembly."""
        dense = self.matrix().toarray()
        vals, vecs = np.linalg.eigh(dense)
        return vals, vecs
