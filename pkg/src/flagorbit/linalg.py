"""Dense Gaussian elimination over a prime field F_p.

Matrices are numpy int64 arrays with entries in [0, p). For p < 2^31 every
product of two residues fits in a signed 64-bit integer, which is what the
vectorized row operations rely on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_PRIME = 2**31 - 1
DEFAULT_PRIME = 2**31 - 1


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    # deterministic Miller-Rabin for 64-bit inputs
    d, s = p - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if a % p == 0:
            continue
        x = pow(a, d, p)
        if x in (1, p - 1):
            continue
        for _ in range(s - 1):
            x = x * x % p
            if x == p - 1:
                break
        else:
            return False
    return True


def check_prime(p: int) -> int:
    p = int(p)
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if p > MAX_PRIME:
        raise ValueError(f"prime {p} exceeds 2^31-1; int64 row operations would overflow")
    return p


def rref(M, p: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form of ``M`` over F_p.

    Pivot choice is the first nonzero entry at or below the current row, so
    the result is deterministic in the input.

    Returns:
        (R, pivots): R has the same shape as M; ``pivots`` lists pivot columns.
    """
    R = np.array(M, dtype=np.int64) % p
    rows, cols = R.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(R[r:, c])
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            R[[r, piv]] = R[[piv, r]]
        inv = pow(int(R[r, c]), -1, p)
        R[r] = R[r] * inv % p
        col = R[:, c].copy()
        col[r] = 0
        hit = np.flatnonzero(col)
        if hit.size:
            R[hit] = (R[hit] - np.outer(col[hit], R[r]) % p) % p
        pivots.append(c)
        r += 1
    return R, pivots


def rank(M, p: int) -> int:
    """Rank over F_p via forward elimination only."""
    R = np.array(M, dtype=np.int64) % p
    rows, cols = R.shape
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(R[r:, c])
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            R[[r, piv]] = R[[piv, r]]
        inv = pow(int(R[r, c]), -1, p)
        R[r] = R[r] * inv % p
        below = R[r + 1:, c]
        hit = np.flatnonzero(below)
        if hit.size:
            idx = hit + r + 1
            R[idx] = (R[idx] - np.outer(R[idx, c], R[r]) % p) % p
        r += 1
    return r


def nullspace(M, p: int) -> np.ndarray:
    """Basis of the right kernel {x : M x = 0}, as columns of an (cols x nullity) array."""
    M = np.asarray(M, dtype=np.int64)
    cols = M.shape[1]
    R, pivots = rref(M, p)
    free = [c for c in range(cols) if c not in set(pivots)]
    N = np.zeros((cols, len(free)), dtype=np.int64)
    for j, f in enumerate(free):
        N[f, j] = 1
        for i, pc in enumerate(pivots):
            N[pc, j] = (-R[i, f]) % p
    return N


def left_annihilator(B, p: int) -> np.ndarray:
    """Rows spanning {a : a B = 0}; shape (n - rank B) x n."""
    return nullspace(np.asarray(B, dtype=np.int64).T, p).T


def matmul(A, B, p: int) -> np.ndarray:
    """Product mod p, accumulating one inner index at a time to stay in int64."""
    A = np.asarray(A, dtype=np.int64) % p
    B = np.asarray(B, dtype=np.int64) % p
    out = np.zeros((A.shape[0], B.shape[1]), dtype=np.int64)
    for k in range(A.shape[1]):
        out = (out + np.outer(A[:, k], B[k]) % p) % p
    return out


@dataclass(frozen=True, eq=False)
class PrimeMatrix:
    """A matrix of residues modulo the prime ``p``."""

    entries: np.ndarray
    p: int

    def __post_init__(self):
        check_prime(self.p)
        a = np.array(self.entries, dtype=np.int64)
        if a.ndim != 2:
            raise ValueError("PrimeMatrix needs a 2-d array")
        object.__setattr__(self, "entries", a % self.p)

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    def rank(self) -> int:
        return rank(self.entries, self.p)

    def nullity(self) -> int:
        return self.cols - self.rank()

    def nullspace(self) -> "PrimeMatrix":
        return PrimeMatrix(nullspace(self.entries, self.p), self.p)

    def __matmul__(self, other: "PrimeMatrix") -> "PrimeMatrix":
        if other.p != self.p:
            raise ValueError("moduli differ")
        return PrimeMatrix(matmul(self.entries, other.entries, self.p), self.p)

    def __eq__(self, other):
        return (
            isinstance(other, PrimeMatrix)
            and self.p == other.p
            and np.array_equal(self.entries, other.entries)
        )
