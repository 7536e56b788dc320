"""Exact linear algebra over Z and Q.

Everything here operates on plain nested lists of Python ints (or Fractions),
so results are exact at any size.  This backs the lattice-theoretic modules;
nothing in this file touches floating point.
"""

from __future__ import annotations

from fractions import Fraction


def identity_matrix(n):
    return [[int(i == j) for j in range(n)] for i in range(n)]


def transpose(a):
    return [list(col) for col in zip(*a)]


def matmul(a, b):
    bt = list(zip(*b))
    return [[sum(x * y for x, y in zip(row, col)) for col in bt] for row in a]


def matvec(a, v):
    return [sum(x * y for x, y in zip(row, v)) for row in a]


def is_symmetric(a):
    n = len(a)
    return all(len(row) == n for row in a) and all(
        a[i][j] == a[j][i] for i in range(n) for j in range(i + 1, n)
    )


def bareiss_determinant(m):
    """Exact determinant of a square integer matrix (fraction-free Bareiss)."""
    n = len(m)
    if n == 0:
        return 1
    a = [[int(x) for x in row] for row in m]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            pivot = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if pivot is None:
                return 0
            a[k], a[pivot] = a[pivot], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            a[i][k] = 0
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def inertia(gram):
    """Sylvester inertia (n_plus, n_minus, n_zero) of a symmetric matrix.

    Computed by exact congruence diagonalization over Q; the zero-diagonal
    case uses the standard row+column addition trick, which preserves the
    congruence class.
    """
    n = len(gram)
    a = [[Fraction(x) for x in row] for row in gram]
    active = list(range(n))
    pos = neg = zero = 0
    while active:
        piv = next((i for i in active if a[i][i] != 0), None)
        if piv is None:
            pair = None
            for i in active:
                for j in active:
                    if i != j and a[i][j] != 0:
                        pair = (i, j)
                        break
                if pair:
                    break
            if pair is None:
                zero += len(active)
                break
            i, j = pair
            for t in range(n):
                a[i][t] += a[j][t]
            for t in range(n):
                a[t][i] += a[t][j]
            piv = i
        d = a[piv][piv]
        if d > 0:
            pos += 1
        else:
            neg += 1
        active.remove(piv)
        for i in active:
            f = a[i][piv] / d
            if f:
                for t in range(n):
                    a[i][t] -= f * a[piv][t]
                for t in range(n):
                    a[t][i] -= f * a[t][piv]
    return pos, neg, zero


def column_hermite(mat):
    """Column-style Hermite reduction: returns (h, v) with mat @ v = h.

    v is unimodular.  Pivot columns come first in staircase order with
    positive pivots; columns beyond the rank are identically zero.
    """
    m = len(mat)
    n = len(mat[0]) if m else 0
    h = [[int(x) for x in row] for row in mat]
    v = identity_matrix(n)

    def axpy(dst, src, q):
        if q == 0:
            return
        for r in range(m):
            h[r][dst] -= q * h[r][src]
        for r in range(n):
            v[r][dst] -= q * v[r][src]

    def swap(i, j):
        if i == j:
            return
        for r in range(m):
            h[r][i], h[r][j] = h[r][j], h[r][i]
        for r in range(n):
            v[r][i], v[r][j] = v[r][j], v[r][i]

    def negate(i):
        for r in range(m):
            h[r][i] = -h[r][i]
        for r in range(n):
            v[r][i] = -v[r][i]

    col = 0
    for row in range(m):
        if col >= n:
            break
        while True:
            nz = [j for j in range(col, n) if h[row][j] != 0]
            if not nz:
                break
            j0 = min(nz, key=lambda j: abs(h[row][j]))
            swap(col, j0)
            clean = True
            for j in range(col + 1, n):
                if h[row][j] != 0:
                    axpy(j, col, h[row][j] // h[row][col])
                    if h[row][j] != 0:
                        clean = False
            if clean:
                break
        if col < n and h[row][col] != 0:
            if h[row][col] < 0:
                negate(col)
            col += 1
    return h, v


def right_kernel(mat):
    """Basis (list of integer vectors) of {x in Z^n : mat @ x = 0}.

    The basis is saturated: every integer kernel vector is an integer
    combination of the returned vectors.
    """
    m = len(mat)
    n = len(mat[0]) if m else 0
    h, v = column_hermite(mat)
    basis = []
    for j in range(n):
        if all(h[r][j] == 0 for r in range(m)):
            basis.append([v[r][j] for r in range(n)])
    return basis


def invert_unimodular(v):
    """Exact inverse of an integer matrix with determinant +-1."""
    n = len(v)
    a = [[Fraction(v[i][j]) for j in range(n)] + [Fraction(int(i == j)) for j in range(n)]
         for i in range(n)]
    for k in range(n):
        piv = next(i for i in range(k, n) if a[i][k] != 0)
        a[k], a[piv] = a[piv], a[k]
        d = a[k][k]
        a[k] = [x / d for x in a[k]]
        for i in range(n):
            if i != k and a[i][k] != 0:
                f = a[i][k]
                a[i] = [x - f * y for x, y in zip(a[i], a[k])]
    out = [[a[i][n + j] for j in range(n)] for i in range(n)]
    for row in out:
        for x in row:
            if x.denominator != 1:
                raise ValueError("matrix is not unimodular")
    return [[int(x) for x in row] for row in out]


def complete_primitive_row(c):
    """Unimodular integer matrix whose first row is the primitive vector c."""
    from math import gcd
    g = 0
    for x in c:
        g = gcd(g, x)
    if g != 1:
        raise ValueError("vector is not primitive")
    h, v = column_hermite([list(c)])
    # c @ v = (1, 0, ..., 0), so the first row of v^{-1} is c itself
    return invert_unimodular(v)


def solve_left(basis, target):
    """Solve x @ basis = target over Q; returns list of Fractions or None."""
    rows = len(basis)
    cols = len(basis[0]) if rows else 0
    # Solve basis^T y = target^T by Gaussian elimination with the augmented column.
    a = [[Fraction(basis[r][c]) for r in range(rows)] + [Fraction(target[c])]
         for c in range(cols)]
    pivots = []
    r = 0
    for k in range(rows):
        piv = next((i for i in range(r, cols) if a[i][k] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        d = a[r][k]
        a[r] = [x / d for x in a[r]]
        for i in range(cols):
            if i != r and a[i][k] != 0:
                f = a[i][k]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(k)
        r += 1
    sol = [Fraction(0)] * rows
    for idx, k in enumerate(pivots):
        sol[k] = a[idx][rows]
    # consistency: rows of a beyond r must have zero augmented entry
    for i in range(r, cols):
        if a[i][rows] != 0:
            return None
    return sol


def extended_gcd_vector(ell):
    """Coefficients x with sum(x_i * ell_i) = gcd(ell) (gcd taken positive)."""
    from math import gcd

    def ext(a, b):
        if b == 0:
            return (abs(a), (1 if a >= 0 else -1), 0)
        g, x, y = ext(b, a % b)
        return (g, y, x - (a // b) * y)

    n = len(ell)
    coeffs = [0] * n
    g = 0
    for i, val in enumerate(ell):
        if val == 0:
            continue
        if g == 0:
            g = abs(val)
            coeffs = [0] * n
            coeffs[i] = 1 if val > 0 else -1
            continue
        gg, x, y = ext(g, val)
        coeffs = [x * c for c in coeffs]
        coeffs[i] += y
        g = gg
    if g == 0:
        raise ValueError("zero vector has no gcd representation")
    assert sum(c * v for c, v in zip(coeffs, ell)) == g
    return g, coeffs
