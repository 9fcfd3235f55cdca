"""Flag shapes, products of flag varieties, and their dimension arithmetic.

A ``FlagShape`` is the type of one partial flag variety F(k_1,...,k_r; n).
A ``ProductSpec`` is the diagonal product of several such varieties over a
common ambient dimension n, with factors kept in canonical (sorted) order.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence


@dataclass(frozen=True, order=True)
class FlagShape:
    """Dimension vector ``ks`` of a partial flag in an ``n``-dimensional space.

    ``ks == ()`` is allowed and denotes the point variety F(;n).
    """

    n: int
    ks: tuple[int, ...] = ()

    def __post_init__(self):
        ks = tuple(int(k) for k in self.ks)
        object.__setattr__(self, "ks", ks)
        if self.n < 1:
            raise ValueError(f"ambient dimension must be positive, got {self.n}")
        prev = 0
        for k in ks:
            if k <= prev:
                raise ValueError(f"dimension vector {ks} is not strictly increasing and positive")
            prev = k
        if ks and ks[-1] >= self.n:
            raise ValueError(f"dimension vector {ks} must stay below n={self.n}")

    @property
    def r(self) -> int:
        return len(self.ks)

    @property
    def top(self) -> int:
        """Largest subspace dimension k_r (0 for a point)."""
        return self.ks[-1] if self.ks else 0

    @property
    def bottom(self) -> int:
        return self.ks[0] if self.ks else self.n

    def is_point(self) -> bool:
        return not self.ks

    def __str__(self):
        return f"F({','.join(map(str, self.ks))};{self.n})"


def dim_flag(shape: FlagShape) -> int:
    """sum_i k_i (k_{i+1} - k_i) with k_{r+1} = n."""
    ks = shape.ks + (shape.n,)
    return sum(ks[i] * (ks[i + 1] - ks[i]) for i in range(len(ks) - 1))


def dual_shape(shape: FlagShape) -> FlagShape:
    """Annihilator flag: F(k_1..k_r; n) -> F(n-k_r, ..., n-k_1; n)."""
    return FlagShape(shape.n, tuple(shape.n - k for k in reversed(shape.ks)))


def derived_sequence(ks: Sequence[int], d: int) -> tuple[int, ...]:
    """Dimension vector of a general flag of type ``ks`` cut by a general
    subspace of codimension ``d``.

    Entries k <= d are absorbed, the rest drop by d. Empty when d >= k_r.
    """
    if d < 0:
        raise ValueError("codimension must be nonnegative")
    return tuple(k - d for k in ks if k > d)


@dataclass(frozen=True)
class ProductSpec:
    """Diagonal product of flag varieties sharing ambient dimension ``n``.

    Factors are stored sorted by their dimension vectors. An empty factor
    tuple only arises as the result of rewrites (every factor absorbed) and
    stands for PGL(n) acting on a point.
    """

    n: int
    factors: tuple[FlagShape, ...] = field(default=())

    def __post_init__(self):
        factors = tuple(sorted(self.factors, key=lambda f: f.ks))
        for f in factors:
            if f.n != self.n:
                raise ValueError(f"factor {f} does not live in dimension {self.n}")
        object.__setattr__(self, "factors", factors)

    @classmethod
    def of(cls, n: int, *kss: Iterable[int]) -> "ProductSpec":
        return cls(n, tuple(FlagShape(n, tuple(ks)) for ks in kss))

    @classmethod
    def power(cls, shape: FlagShape, m: int) -> "ProductSpec":
        return cls(shape.n, (shape,) * m)

    @property
    def m(self) -> int:
        return len(self.factors)

    def is_self_product(self) -> bool:
        return self.m > 0 and all(f == self.factors[0] for f in self.factors)

    def base(self) -> FlagShape:
        """The repeated shape of a self-product."""
        if not self.is_self_product():
            raise ValueError(f"{self} is not a self-product")
        return self.factors[0]

    def without_points(self) -> "ProductSpec":
        return ProductSpec(self.n, tuple(f for f in self.factors if not f.is_point()))

    def tops(self) -> list[int]:
        return [f.top for f in self.factors]

    def __str__(self):
        if not self.factors:
            return f"point({self.n})"
        counts = Counter(self.factors)
        parts = []
        for f in sorted(counts, key=lambda f: f.ks):
            c = counts[f]
            parts.append(str(f) if c == 1 else f"{f}^{c}")
        return " x ".join(parts)


@dataclass(frozen=True)
class DimensionBudget:
    dim_group: int
    dim_product: int
    expected_stab: int


def dim_product(spec: ProductSpec) -> int:
    return sum(dim_flag(f) for f in spec.factors)


def expected_stab_dim(spec: ProductSpec) -> int:
    """Expected dimension n^2 - 1 - dim(X) of the generic stabilizer; may be negative."""
    return spec.n * spec.n - 1 - dim_product(spec)


def budget(spec: ProductSpec) -> DimensionBudget:
    dp = dim_product(spec)
    return DimensionBudget(spec.n * spec.n - 1, dp, spec.n * spec.n - 1 - dp)


def is_trivially_sparse(spec: ProductSpec) -> bool:
    return expected_stab_dim(spec) < 0


def dual_product(spec: ProductSpec) -> ProductSpec:
    return ProductSpec(spec.n, tuple(dual_shape(f) for f in spec.factors))


def phi(n: int, m: int, r: int) -> int:
    """Expected stabilizer dimension of F(1,2,...,r; n)^m in closed form."""
    return n * n - 1 - m * (r - 1) * r // 2 - m * r * (n - r)


def full_flag_prefix(r: int, n: int) -> FlagShape:
    """F(1, 2, ..., r; n)."""
    return FlagShape(n, tuple(range(1, r + 1)))


def consecutive_block(ell: int, r: int, n: int) -> FlagShape:
    """F(ell+1, ..., ell+r; n)."""
    return FlagShape(n, tuple(range(ell + 1, ell + r + 1)))


def block_offset(shape: FlagShape) -> int | None:
    """Return ell if ``shape`` is F(ell+1, ..., ell+r; n), else None."""
    ks = shape.ks
    if not ks:
        return None
    if any(b - a != 1 for a, b in zip(ks, ks[1:])):
        return None
    return ks[0] - 1


def all_shapes(n: int) -> list[FlagShape]:
    """Every nonpoint flag shape in ambient dimension n, sorted by ks."""
    out = []
    for mask in range(1, 1 << (n - 1)):
        ks = tuple(k for k in range(1, n) if mask >> (k - 1) & 1)
        out.append(FlagShape(n, ks))
    out.sort(key=lambda f: (f.ks))
    return out
