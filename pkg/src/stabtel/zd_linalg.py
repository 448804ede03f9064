"""Exact linear algebra over the residue rings Z_N (N need not be prime).

Vectors and matrices are stored as least nonnegative residues.  The two
workhorses are a Smith normal form (used for solving and for kernels) and
the Howell form, which is the canonical representative of a row span over
Z_N: two matrices generate the same row module iff their Howell forms agree.

Convention for ``solve_linear_mod``: ``A`` has one row per equation, so the
system is ``A @ x == b (mod N)`` with ``len(b) == A.nrows``.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import gcd
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "ResidueVector",
    "ResidueMatrix",
    "HowellForm",
    "smith_normal_form",
    "solve_linear_mod",
    "kernel_mod",
    "row_span_rank_profile",
    "span_size",
    "in_row_span",
]


def _reduce(values, modulus: int) -> tuple[int, ...]:
    return tuple(int(v) % modulus for v in values)


@dataclass(frozen=True)
class ResidueVector:
    entries: tuple[int, ...]
    modulus: int

    def __init__(self, entries: Iterable[int], modulus: int):
        if modulus < 1:
            raise ValueError(f"modulus must be positive, got {modulus}")
        object.__setattr__(self, "modulus", int(modulus))
        object.__setattr__(self, "entries", _reduce(entries, modulus))

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    def array(self) -> np.ndarray:
        return np.array(self.entries, dtype=np.int64)


@dataclass(frozen=True)
class ResidueMatrix:
    rows: tuple[tuple[int, ...], ...]
    modulus: int
    ncols: int

    def __init__(self, rows: Iterable[Iterable[int]], modulus: int, ncols: int | None = None):
        if modulus < 1:
            raise ValueError(f"modulus must be positive, got {modulus}")
        reduced = tuple(_reduce(r, modulus) for r in rows)
        widths = {len(r) for r in reduced}
        if len(widths) > 1:
            raise ValueError(f"rows have unequal lengths {sorted(widths)}")
        if widths:
            width = widths.pop()
            if ncols is not None and ncols != width:
                raise ValueError(f"declared ncols={ncols} but rows have length {width}")
        else:
            width = 0 if ncols is None else ncols
        object.__setattr__(self, "rows", reduced)
        object.__setattr__(self, "modulus", int(modulus))
        object.__setattr__(self, "ncols", width)

    @classmethod
    def from_array(cls, arr, modulus: int) -> "ResidueMatrix":
        arr = np.asarray(arr, dtype=np.int64)
        if arr.ndim != 2:
            raise ValueError("expected a 2-d array")
        return cls(arr.tolist(), modulus, ncols=arr.shape[1])

    @property
    def nrows(self) -> int:
        return len(self.rows)

    def array(self) -> np.ndarray:
        return np.array(self.rows, dtype=np.int64).reshape(self.nrows, self.ncols)

    def __matmul__(self, other):
        if isinstance(other, ResidueVector):
            _check_modulus(self.modulus, other.modulus)
            return ResidueVector(self.array() @ other.array(), self.modulus)
        if isinstance(other, ResidueMatrix):
            _check_modulus(self.modulus, other.modulus)
            return ResidueMatrix.from_array(self.array() @ other.array() % self.modulus, self.modulus)
        return NotImplemented


def _check_modulus(a: int, b: int) -> None:
    if a != b:
        raise ValueError(f"modulus mismatch: {a} vs {b}")


# -- elementary helpers -------------------------------------------------------

def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, s, t) with s*a + t*b == g == gcd(a, b) over the integers."""
    s0, s1, t0, t1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    return a, s0, t0


def _unit_normalizer(a: int, n: int) -> int:
    """A unit u of Z_n with a*u == gcd(a, n) (mod n)."""
    a %= n
    if a == 0:
        return 1
    g = gcd(a, n)
    ng = n // g
    u0 = pow(a // g, -1, ng) if ng > 1 else 0
    for k in range(g + 1):
        u = (u0 + k * ng) % n
        if gcd(u, n) == 1:
            return u
    raise ArithmeticError("no unit normalizer found")  # unreachable for n >= 1


def _ideal(a: int, n: int) -> int:
    """Generator of the ideal (a) in Z_n as a divisor of n (0 maps to n)."""
    return gcd(a % n, n)


# -- Smith normal form --------------------------------------------------------

def smith_normal_form(A, modulus: int):
    """Smith normal form over Z_N.

    Returns ``(D, U, V)`` as int64 arrays with ``U @ A @ V == D (mod N)``,
    ``U`` and ``V`` invertible over Z_N, and ``D`` diagonal whose entries
    are divisors of N (or 0) satisfying ``D[i,i] | D[i+1,i+1]``.
    """
    N = modulus
    arr = np.asarray(A, dtype=np.int64)
    if arr.ndim != 2:
        raise ValueError("expected a 2-d array")
    m, n = arr.shape
    M = [[int(v) % N for v in row] for row in arr.tolist()]
    U = [[int(i == j) for j in range(m)] for i in range(m)]
    V = [[int(i == j) for j in range(n)] for i in range(n)]

    def row_comb(X, i, j, a, b, c, e):
        # (row_i, row_j) <- (a*row_i + b*row_j, c*row_i + e*row_j)
        ri, rj = X[i], X[j]
        X[i] = [(a * x + b * y) % N for x, y in zip(ri, rj)]
        X[j] = [(c * x + e * y) % N for x, y in zip(ri, rj)]

    def col_comb(X, i, j, a, b, c, e):
        for row in X:
            x, y = row[i], row[j]
            row[i] = (a * x + b * y) % N
            row[j] = (c * x + e * y) % N

    for t in range(min(m, n)):
        # pivot: entry generating the largest ideal in the trailing block
        best = None
        for i in range(t, m):
            for j in range(t, n):
                if M[i][j]:
                    key = _ideal(M[i][j], N)
                    if best is None or key < best[0]:
                        best = (key, i, j)
        if best is None:
            break
        _, pi, pj = best
        M[t], M[pi] = M[pi], M[t]
        U[t], U[pi] = U[pi], U[t]
        for X in (M, V):
            for row in X:
                row[t], row[pj] = row[pj], row[t]

        while True:
            u = _unit_normalizer(M[t][t], N)
            if u != 1:
                M[t] = [(u * x) % N for x in M[t]]
                U[t] = [(u * x) % N for x in U[t]]
            p = M[t][t]
            bezout = False
            for i in range(t + 1, m):
                c = M[i][t]
                if not c:
                    continue
                if c % p == 0:
                    q = c // p
                    row_comb(M, i, t, 1, -q, 0, 1)
                    row_comb(U, i, t, 1, -q, 0, 1)
                else:
                    g, s, r = _xgcd(p, c)
                    row_comb(M, t, i, s, r, -(c // g), p // g)
                    row_comb(U, t, i, s, r, -(c // g), p // g)
                    bezout = True
                    break
            if bezout:
                continue
            for j in range(t + 1, n):
                c = M[t][j]
                if not c:
                    continue
                if c % p == 0:
                    q = c // p
                    col_comb(M, j, t, 1, -q, 0, 1)
                    col_comb(V, j, t, 1, -q, 0, 1)
                else:
                    g, s, r = _xgcd(p, c)
                    col_comb(M, t, j, s, r, -(c // g), p // g)
                    col_comb(V, t, j, s, r, -(c // g), p // g)
                    bezout = True
                    break
            if bezout:
                continue
            # divisibility: the pivot must divide every trailing entry
            bad = next(
                (i for i in range(t + 1, m) for j in range(t + 1, n) if M[i][j] % p),
                None,
            )
            if bad is None:
                break
            row_comb(M, t, bad, 1, 1, 0, 1)
            row_comb(U, t, bad, 1, 1, 0, 1)

    D = np.array(M, dtype=np.int64).reshape(m, n)
    return D, np.array(U, dtype=np.int64).reshape(m, m), np.array(V, dtype=np.int64).reshape(n, n)


def solve_linear_mod(A: ResidueMatrix, b: ResidueVector) -> ResidueVector | None:
    """Some x with ``A @ x == b (mod N)``, or None when the system is unsolvable."""
    _check_modulus(A.modulus, b.modulus)
    if len(b) != A.nrows:
        raise ValueError(f"right-hand side has length {len(b)}, expected {A.nrows}")
    N = A.modulus
    D, U, V = smith_normal_form(A.array(), N)
    c = U @ b.array() % N
    y = np.zeros(A.ncols, dtype=np.int64)
    for i in range(A.nrows):
        di = int(D[i, i]) if i < A.ncols else 0
        ci = int(c[i])
        if di == 0:
            if ci:
                return None
            continue
        if ci % di:
            return None
        y[i] = ci // di
    return ResidueVector(V @ y % N, N)


def kernel_mod(A: ResidueMatrix) -> ResidueMatrix:
    """Generators (as rows) of the solution module of ``A @ x == 0``."""
    N = A.modulus
    D, _, V = smith_normal_form(A.array(), N)
    gens = []
    for j in range(A.ncols):
        dj = int(D[j, j]) if j < A.nrows else 0
        scale = N // gcd(dj, N)
        col = V[:, j] * scale % N
        if col.any():
            gens.append(col)
    return ResidueMatrix(gens, N, ncols=A.ncols)


# -- Howell form ---------------------------------------------------------------

@dataclass(frozen=True)
class HowellForm:
    """Canonical row-span representative over Z_N.

    ``pivots`` lists ``(column, pivot_value)`` per row; each pivot value is
    a proper divisor of N and entries above a pivot lie in ``[0, pivot)``.
    """
    matrix: ResidueMatrix
    pivots: tuple[tuple[int, int], ...]

    @property
    def rank(self) -> int:
        return len(self.pivots)


def row_span_rank_profile(A: ResidueMatrix) -> HowellForm:
    N = A.modulus
    n = A.ncols
    rows = [list(r) for r in A.rows]
    # Howell needs room for annihilator rows
    rows += [[0] * n for _ in range(max(0, n + 1 - len(rows)))]
    r = 0
    pivots: list[tuple[int, int]] = []
    for c in range(n):
        for i in range(r + 1, len(rows)):
            if rows[i][c]:
                g, s, t = _xgcd(rows[r][c], rows[i][c])
                a, e = rows[r][c] // g, rows[i][c] // g
                ri, rk = rows[r], rows[i]
                rows[r] = [(s * x + t * y) % N for x, y in zip(ri, rk)]
                rows[i] = [(-e * x + a * y) % N for x, y in zip(ri, rk)]
        if rows[r][c] == 0:
            continue
        u = _unit_normalizer(rows[r][c], N)
        rows[r] = [(u * x) % N for x in rows[r]]
        p = rows[r][c]
        for i in range(r):
            q = rows[i][c] // p
            if q:
                rows[i] = [(x - q * y) % N for x, y in zip(rows[i], rows[r])]
        ann = [((N // p) * x) % N for x in rows[r]]
        if any(ann):
            rows.append(ann)
        pivots.append((c, p))
        r += 1
        if r >= len(rows):
            rows.append([0] * n)
    return HowellForm(ResidueMatrix(rows[:r], N, ncols=n), tuple(pivots))


def span_size(A: ResidueMatrix) -> int:
    """Number of distinct vectors in the row span of ``A``."""
    size = 1
    for _, p in row_span_rank_profile(A).pivots:
        size *= A.modulus // p
    return size


def in_row_span(A: ResidueMatrix, v: Sequence[int]) -> bool:
    """Whether ``v`` is a Z_N-combination of the rows of ``A``."""
    vec = ResidueVector(v, A.modulus)
    At = ResidueMatrix.from_array(A.array().T.reshape(A.ncols, A.nrows), A.modulus)
    return solve_linear_mod(At, vec) is not None
