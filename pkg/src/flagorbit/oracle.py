"""Randomized exact certificates for density of the diagonal action.

For a configuration of flags we compute the dimension of the Lie algebra
{X in gl(n) : X W subset W for every subspace W}, i.e. the stabilizer
dimension plus one for scalars. If a sampled configuration reaches the
expected value n^2 - dim(X), its orbit is dense. Rank mod p never exceeds
the rank in characteristic zero, so a nullity that already equals the
universal lower bound is a proof, not an estimate.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .flags import FlagShape, ProductSpec, dim_flag, dim_product, dual_shape

MIN_ORACLE_PRIME = 2**20
DEFAULT_TRIALS = 3
DEFAULT_SEED = 20240917
MAX_RESAMPLES = 32


class DegenerateSample(RuntimeError):
    """Random bases kept coming out rank deficient; the prime is too small."""


class InvalidParameters(ValueError):
    pass


class OracleVerdict(str, enum.Enum):
    DENSE_CERTIFIED = "DenseCertified"
    SPARSE_EVIDENCE = "SparseEvidence"


@dataclass(frozen=True, eq=False)
class FlagConfig:
    """Concrete flags over F_p.

    ``chains[i]`` is an n x k_r basis matrix for factor i; its first k_j
    columns span the k_j-dimensional member of the flag.
    """

    p: int
    n: int
    shapes: tuple[FlagShape, ...]
    chains: tuple[np.ndarray, ...]

    def __post_init__(self):
        if len(self.shapes) != len(self.chains):
            raise ValueError("one basis matrix per factor")
        for shape, B in zip(self.shapes, self.chains):
            if B.shape != (self.n, shape.top):
                raise ValueError(f"basis for {shape} must be {self.n}x{shape.top}, got {B.shape}")

    def subspaces(self):
        """Yield a basis matrix for every flag member, factor by factor."""
        for shape, B in zip(self.shapes, self.chains):
            for k in shape.ks:
                yield B[:, :k]

    def __eq__(self, other):
        return (
            isinstance(other, FlagConfig)
            and (self.p, self.n, self.shapes) == (other.p, other.n, other.shapes)
            and all(np.array_equal(a, b) for a, b in zip(self.chains, other.chains))
        )


def _trial_seed(seed: int, trial: int) -> int:
    return int(np.random.SeedSequence([seed, trial]).generate_state(1, np.uint64)[0])


def random_flag_config(spec: ProductSpec, p: int = linalg.DEFAULT_PRIME, seed: int = DEFAULT_SEED) -> FlagConfig:
    """Sample general flags of the product's types; deterministic in (spec, p, seed).

    Small primes are accepted (useful for toy cross-checks); oracle verdicts
    insist on a large one.
    """
    p = linalg.check_prime(p)
    rng = np.random.default_rng(seed)
    chains = []
    for shape in spec.factors:
        k = shape.top
        for _ in range(MAX_RESAMPLES):
            B = rng.integers(0, p, size=(spec.n, k), dtype=np.int64)
            if linalg.rank(B, p) == k:
                chains.append(B)
                break
        else:
            raise DegenerateSample(f"no full-rank {spec.n}x{k} basis after {MAX_RESAMPLES} draws mod {p}")
    return FlagConfig(p, spec.n, spec.factors, tuple(chains))


def constraint_rows(B: np.ndarray, p: int) -> np.ndarray:
    """Linear conditions on vec(X) (row-major) expressing X span(B) subset span(B).

    With A a left annihilator of B, the condition is A X B = 0, one row per
    entry: kron(A[a, :], B[:, b]).
    """
    n, k = B.shape
    A = linalg.left_annihilator(B, p)
    return np.einsum("ai,jb->abij", A, B).reshape(A.shape[0] * k, n * n) % p


def stabilizer_system(config: FlagConfig) -> np.ndarray:
    n = config.n
    blocks = [constraint_rows(B, config.p) for B in config.subspaces()]
    if not blocks:
        return np.zeros((0, n * n), dtype=np.int64)
    return np.vstack(blocks)


def stabilizer_nullity(config: FlagConfig) -> int:
    """dim {X in gl(n) : X preserves every flag member}, computed mod p."""
    S = stabilizer_system(config)
    return config.n * config.n - linalg.rank(S, config.p)


def dual_config(config: FlagConfig) -> FlagConfig:
    """Annihilator flags in the dual space, with nested prefix bases."""
    p, n = config.p, config.n
    shapes, chains = [], []
    for shape, B in zip(config.shapes, config.chains):
        dshape = dual_shape(shape)
        cols = np.zeros((n, 0), dtype=np.int64)
        # annihilators grow as the subspace shrinks: W_{k_r}^perp first
        for k in reversed(shape.ks):
            ann = linalg.left_annihilator(B[:, :k], p).T
            for j in range(ann.shape[1]):
                trial = np.hstack([cols, ann[:, j:j + 1]])
                if linalg.rank(trial, p) > cols.shape[1]:
                    cols = trial
        shapes.append(dshape)
        chains.append(cols)
    return FlagConfig(p, n, tuple(shapes), tuple(chains))


@dataclass
class OracleReport:
    spec: str
    p: int
    seed: int
    trials: int
    expected_nullity: int
    nullities: list[int] = field(default_factory=list)
    verdict: OracleVerdict = OracleVerdict.SPARSE_EVIDENCE

    @property
    def trivially_sparse(self) -> bool:
        return self.expected_nullity < 1

    @property
    def min_nullity(self) -> int | None:
        return min(self.nullities) if self.nullities else None

    @property
    def rigorous(self) -> bool:
        """A density certificate is a proof, and so is sparsity by dimension count.
        Any other sparsity evidence is probabilistic."""
        return self.verdict is OracleVerdict.DENSE_CERTIFIED or self.trivially_sparse

    def to_json(self) -> dict:
        return {
            "spec": self.spec,
            "prime": self.p,
            "seed": self.seed,
            "trials": self.trials,
            "nullities": list(self.nullities),
            "min_nullity": self.min_nullity,
            "expected_nullity": self.expected_nullity,
            "verdict": self.verdict.value,
            "rigorous": self.rigorous,
            "trivially_sparse": self.trivially_sparse,
        }


def oracle_density(
    spec: ProductSpec,
    p: int = linalg.DEFAULT_PRIME,
    trials: int = DEFAULT_TRIALS,
    seed: int = DEFAULT_SEED,
) -> OracleReport:
    """Sample ``trials`` general configurations and compare the minimal nullity
    with the expected one.

    Trivially sparse products are sampled too; their nullity always exceeds
    the (nonpositive) expected value, so they report sparsity evidence.
    """
    p = linalg.check_prime(p)
    if p < MIN_ORACLE_PRIME:
        raise ValueError(f"oracle verdicts need p >= 2^20, got {p}")
    if trials < 1:
        raise ValueError("need at least one trial")
    expected = spec.n * spec.n - dim_product(spec)
    report = OracleReport(str(spec), p, seed, trials, expected)
    for t in range(trials):
        config = random_flag_config(spec, p, _trial_seed(seed, t))
        nullity = stabilizer_nullity(config)
        if nullity < max(1, expected):
            raise AssertionError(f"nullity {nullity} below the lower bound {max(1, expected)} for {spec}")
        report.nullities.append(nullity)
    if report.min_nullity == expected:
        report.verdict = OracleVerdict.DENSE_CERTIFIED
    return report


# -- explicit witness for F(t, n-1; n)^(t+1) ------------------------------------


def witness_formula(t: int, n: int) -> int:
    """Dimension of the witness stabilizer in PGL(n): t + (n-t-1)(n-t(t+1))."""
    return t + (n - t - 1) * (n - t * (t + 1))


def _witness_subspaces(t: int, n: int):
    """Coordinate t-spaces U_i and hyperplane normals f_i (0-based coordinates)."""
    blocks, normals = [], []
    for i in range(1, t + 2):
        blocks.append(list(range((i - 1) * t, i * t)))
        f = np.zeros(n, dtype=np.int64)
        for mm in range(0, i - 1):
            f[mm * t + i - 2] = 1
        for mm in range(i, t + 1):
            f[mm * t + i - 1] = 1
        normals.append(f)
    return blocks, normals


def witness_config(t: int, n: int, p: int = linalg.DEFAULT_PRIME) -> FlagConfig:
    if t < 3 or n < t * (t + 1):
        raise InvalidParameters(f"witness needs t >= 3 and n >= t(t+1); got t={t}, n={n}")
    p = linalg.check_prime(p)
    shape = FlagShape(n, (t, n - 1))
    blocks, normals = _witness_subspaces(t, n)
    chains = []
    for block, f in zip(blocks, normals):
        U = np.zeros((n, t), dtype=np.int64)
        for j, s in enumerate(block):
            U[s, j] = 1
        if np.any(f @ U):
            raise AssertionError("coordinate block not inside its hyperplane")
        H = linalg.nullspace(f.reshape(1, n), p)
        cols = U
        for j in range(H.shape[1]):
            trial = np.hstack([cols, H[:, j:j + 1]])
            if linalg.rank(trial, p) > cols.shape[1]:
                cols = trial
        chains.append(cols)
    return FlagConfig(p, n, (shape,) * (t + 1), tuple(chains))


def _witness_direct_nullity(t: int, n: int, p: int) -> int:
    """Nullity from the coordinate description of the witness.

    Unknowns are X (n^2, row-major) plus one eigenvalue per hyperplane:
    X keeps a coordinate block iff the off-block rows of its columns vanish,
    and keeps {f x = 0} iff f X = lambda f.
    """
    blocks, normals = _witness_subspaces(t, n)
    nvar = n * n + len(normals)
    rows = []
    for block in blocks:
        inside = set(block)
        for s in block:
            for u in range(n):
                if u not in inside:
                    row = np.zeros(nvar, dtype=np.int64)
                    row[u * n + s] = 1
                    rows.append(row)
    for i, f in enumerate(normals):
        for v in range(n):
            row = np.zeros(nvar, dtype=np.int64)
            for u in np.flatnonzero(f):
                row[u * n + v] = f[u]
            row[n * n + i] = (-f[v]) % p
            rows.append(row)
    return nvar - linalg.rank(np.array(rows), p)


@dataclass(frozen=True)
class WitnessResult:
    t: int
    n: int
    config: FlagConfig
    nullity: int
    formula: int

    @property
    def matches(self) -> bool:
        return self.nullity == self.formula + 1


def special_witness(t: int, n: int, p: int = linalg.DEFAULT_PRIME) -> WitnessResult:
    """Build the explicit configuration for F(t, n-1; n)^(t+1) and return its
    exact stabilizer nullity (PGL stabilizer dimension plus one)."""
    config = witness_config(t, n, p)
    nullity = _witness_direct_nullity(t, n, config.p)
    return WitnessResult(t, n, config, nullity, witness_formula(t, n))


def expected_nullity(spec: ProductSpec) -> int:
    return spec.n * spec.n - dim_product(spec)


def factor_constraint_rank(shape: FlagShape, B: np.ndarray, p: int) -> int:
    """Rank of one flag's constraints; equals dim F for a full-rank basis."""
    blocks = [constraint_rows(B[:, :k], p) for k in shape.ks]
    if not blocks:
        return 0
    return linalg.rank(np.vstack(blocks), p)


__all__ = [
    "DegenerateSample",
    "FlagConfig",
    "InvalidParameters",
    "OracleReport",
    "OracleVerdict",
    "WitnessResult",
    "dim_flag",
    "dual_config",
    "expected_nullity",
    "oracle_density",
    "random_flag_config",
    "special_witness",
    "stabilizer_nullity",
    "witness_config",
    "witness_formula",
]
