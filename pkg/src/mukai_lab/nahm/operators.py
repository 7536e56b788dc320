"""Matrix-free gauged operators on the N^4 lattice.

Fields are complex arrays of shape (N, N, N, N); spinor-valued fields stack
components on a leading axis.  The connection is the factor-pair Landau
gauge from `magnetic` plus the flat twist, so the xi-dependence of every
operator sits in constant per-direction phases.  The scalar Bochner
Laplacian is the standard single-step gauged stencil; first-order covariant
derivatives are central differences (exactly anti-self-adjoint, and exactly
proportional to the xi-derivative of the Laplacian, which the operator
identity checks rely on).
"""

from __future__ import annotations

import math

import numpy as np
from scipy.sparse.linalg import LinearOperator, cg

from ..spin4 import CLIFFORD, to_numpy
from .flux import FluxData, NahmError
from .magnetic import link_phases

TWO_PI = 2.0 * math.pi

_CLIFF_NP = [to_numpy(c) for c in CLIFFORD]


def clifford_blocks():
    """(minus_to_plus, plus_to_minus) blocks of the four generators."""
    m2p = [c[:2, 2:] for c in _CLIFF_NP]   # act on S- components, land in S+
    p2m = [c[2:, :2] for c in _CLIFF_NP]
    return m2p, p2m


class LatticeOperators:
    """Gauged lattice operators for a factor-pair flux at a fixed twist."""

    def __init__(self, flux: FluxData, xi, n: int):
        self.flux = flux
        self.xi = tuple(float(x) for x in xi)
        self.n = int(n)
        self.h = 1.0 / self.n
        (a, b, q1), (c, d, q2) = flux.factor_pairs()
        if q1 == 0 or q2 == 0:
            raise NahmError("kernel jumps / excluded case: zero flux factor")
        self.pairs = ((a, b, q1), (c, d, q2))
        self.links = self._build_links()

    def _build_links(self):
        n = self.n
        links = [None] * 4
        for (a, b, q) in self.pairs:
            ua, ub = link_phases(n, q, (self.xi[a], self.xi[b]))
            links[a] = self._broadcast_pair(ua, a, b)
            links[b] = self._broadcast_pair(ub, a, b)
        return links

    def _broadcast_pair(self, u2d, a, b):
        n = self.n
        shape = [1, 1, 1, 1]
        shape[a] = n
        shape[b] = n
        arr = u2d.reshape(shape)
        return np.broadcast_to(arr, (n, n, n, n))

    # -- scalar operators ---------------------------------------------------

    def laplacian(self, u):
        """Positive single-step gauged Laplacian (the Green operator inverts this)."""
        h2 = self.h * self.h
        out = 8.0 * u.astype(complex, copy=True)
        for mu in range(4):
            v = self.links[mu]
            out -= v * np.roll(u, -1, axis=mu)
            out -= np.conj(np.roll(v, 1, axis=mu)) * np.roll(u, 1, axis=mu)
        return out / h2

    def nabla_c(self, mu, u):
        """Central covariant difference; equals d(Laplacian)/d(xi_mu) / (4 pi i)."""
        v = self.links[mu]
        fwd = v * np.roll(u, -1, axis=mu)
        bwd = np.conj(np.roll(v, 1, axis=mu)) * np.roll(u, 1, axis=mu)
        return (fwd - bwd) / (2.0 * self.h)

    def shift_sym(self, mu, u):
        """Symmetrized covariant shift (identity + O(h^2))."""
        v = self.links[mu]
        fwd = v * np.roll(u, -1, axis=mu)
        bwd = np.conj(np.roll(v, 1, axis=mu)) * np.roll(u, 1, axis=mu)
        return 0.5 * (fwd + bwd)

    # -- Dirac blocks (central differences; applied, never inverted) --------

    def dirac_minus(self, psi_minus):
        """D-: sections of S- (x) Hom to sections of S+ (x) Hom."""
        m2p, _ = clifford_blocks()
        out = np.zeros_like(psi_minus)
        for mu in range(4):
            der = np.stack([self.nabla_c(mu, psi_minus[k]) for k in range(2)])
            out += np.einsum("st,t...->s...", m2p[mu], der)
        return out

    def dirac_plus(self, psi_plus):
        """D+: sections of S+ (x) Hom to sections of S- (x) Hom."""
        _, p2m = clifford_blocks()
        out = np.zeros_like(psi_plus)
        for mu in range(4):
            der = np.stack([self.nabla_c(mu, psi_plus[k]) for k in range(2)])
            out += np.einsum("st,t...->s...", p2m[mu], der)
        return out

    # -- Green operator -----------------------------------------------------

    def _precond_symbol(self):
        n, h = self.n, self.h
        ks = [np.arange(n).reshape([n if ax == mu else 1 for ax in range(4)])
              for mu in range(4)]
        sym = np.zeros((n, n, n, n))
        for mu in range(4):
            ang = TWO_PI * (ks[mu] - self.xi[mu]) / n
            sym = sym + (2.0 / (h * h)) * (1.0 - np.cos(ang))
        (a, b, q1), (c, d, q2) = self.pairs
        mass = TWO_PI * (abs(q1) + abs(q2))
        return sym + mass

    def green_apply(self, source, tol=1e-8, maxiter=5000, x0=None):
        """Solve Laplacian u = source by preconditioned conjugate gradients.

        The preconditioner is the inverse of the twist-shifted free symbol
        plus the Landau-gap mass, applied via FFTs.  Returns (u, iterations);
        raises on non-convergence.  A zero source short-circuits to zero.
        """
        n = self.n
        shape = (n, n, n, n)
        size = n ** 4
        bnorm = float(np.linalg.norm(source))
        if bnorm == 0.0:
            return np.zeros(shape, dtype=complex), 0
        sym = self._precond_symbol()

        def matvec(x):
            return self.laplacian(x.reshape(shape)).ravel()

        def psolve(x):
            freq = np.fft.fftn(x.reshape(shape))
            return np.fft.ifftn(freq / sym).ravel()

        op = LinearOperator((size, size), matvec=matvec, dtype=complex)
        pre = LinearOperator((size, size), matvec=psolve, dtype=complex)
        iters = [0]

        def count(_):
            iters[0] += 1

        u, info = cg(op, source.ravel(), rtol=tol, atol=0.0,
                     x0=None if x0 is None else x0.ravel(),
                     maxiter=maxiter, M=pre, callback=count)
        if info != 0:
            raise NahmError(f"Green solve failed to converge: info={info} "
                            f"after {iters[0]} iterations")
        return u.reshape(shape), iters[0]

    def green_apply_spinor(self, source, tol=1e-8, maxiter=5000, rng=None):
        """Componentwise Green solve for stacked spinor sections.

        When `rng` is given, each component starts from an independent random
        guess; this decorrelates the per-call solver errors so downstream
        residuals genuinely reflect the requested tolerance instead of
        cancelling between proportional sources.
        """
        comps = []
        total = 0
        for k in range(source.shape[0]):
            x0 = None
            if rng is not None and np.linalg.norm(source[k]) > 0:
                scale = 5.0 * float(np.max(np.abs(source[k])))
                x0 = scale * (rng.standard_normal(source[k].shape)
                              + 1j * rng.standard_normal(source[k].shape))
            u, it = self.green_apply(source[k], tol=tol, maxiter=maxiter, x0=x0)
            comps.append(u)
            total += it
        return np.stack(comps), total


def l2_inner(u, v, h):
    """Integral inner product sum conj(u) v h^4; conjugate-linear first slot."""
    return complex(np.vdot(u, v) * h ** 4)


def l2_norm(u, h):
    return math.sqrt(max(np.vdot(u, u).real, 0.0) * h ** 4)
