import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from flagorbit import linalg, oracle
from flagorbit.flags import FlagShape, ProductSpec, dim_flag
from flagorbit.notation import parse_product
from flagorbit.oracle import (
    MIN_ORACLE_PRIME,
    DegenerateSample,
    FlagConfig,
    InvalidParameters,
    OracleVerdict,
    constraint_rows,
    dual_config,
    expected_nullity,
    factor_constraint_rank,
    oracle_density,
    random_flag_config,
    special_witness,
    stabilizer_nullity,
    stabilizer_system,
    witness_config,
    witness_formula,
)

P = linalg.DEFAULT_PRIME


def preserves(X, B, p):
    """Direct check that X maps span(B) into span(B)."""
    k = linalg.rank(B, p)
    return linalg.rank(np.hstack([B, linalg.matmul(X, B, p)]), p) == k


def brute_count(config):
    """Number of X in gl(n, F_p) keeping every flag member; exhaustive."""
    p, n = config.p, config.n
    grid = np.array(list(itertools.product(range(p), repeat=n * n)), dtype=np.int64).reshape(-1, n, n)
    ok = np.ones(len(grid), dtype=bool)
    for W in config.subspaces():
        A = linalg.left_annihilator(W, p)
        # A X W == 0 for every sampled X
        prod = np.einsum("ai,sij,jb->sab", A, grid, W) % p
        ok &= ~prod.reshape(len(grid), -1).any(axis=1)
    return int(ok.sum())


@pytest.mark.parametrize(
    "text",
    ["F(1;2)^3", "F(1;2)^2", "F(1;3)^4", "F(1,2;3)^2", "F(1;3) x F(2;3)^2", "F(1,2;3)^3"],
)
def test_nullity_matches_exhaustive_count_f5(text):
    spec = parse_product(text)
    config = random_flag_config(spec, 5, seed=3)
    assert brute_count(config) == 5 ** stabilizer_nullity(config)


@pytest.mark.parametrize("text", ["F(1,2;4)^3", "F(2;4)^3", "F(1,3;4)^3"])
def test_nullity_on_subspace_slice_n4(text):
    p = 5
    spec = parse_product(text)
    config = random_flag_config(spec, p, seed=11)
    rng = np.random.default_rng(0)
    S = rng.integers(0, p, size=(16, 6))
    # count X = S c over all c in F_5^6 that keep every member
    count = 0
    for c in itertools.product(range(p), repeat=6):
        X = (S @ np.array(c)).reshape(4, 4) % p
        count += all(preserves(X, W, p) for W in config.subspaces())
    sol = linalg.nullspace(linalg.matmul(stabilizer_system(config), S, p), p)
    assert count == p ** sol.shape[1]


@pytest.mark.parametrize(
    "text, verdict, min_nullity",
    [
        ("F(1,2;4)^3", OracleVerdict.DENSE_CERTIFIED, 1),
        ("F(1,3;4)^3", OracleVerdict.SPARSE_EVIDENCE, 2),
        ("F(1,2;7)^4", OracleVerdict.DENSE_CERTIFIED, 5),
        ("F(2,3;6)^3", OracleVerdict.DENSE_CERTIFIED, 3),
        ("Gr(2,4)^4", OracleVerdict.SPARSE_EVIDENCE, 2),
    ],
)
def test_oracle_known_values(text, verdict, min_nullity):
    report = oracle_density(parse_product(text))
    assert report.verdict is verdict
    assert report.min_nullity == min_nullity
    assert len(report.nullities) == report.trials


def test_oracle_deterministic():
    spec = parse_product("F(1,3;4)^3")
    a = oracle_density(spec, trials=5, seed=7).to_json()
    b = oracle_density(spec, trials=5, seed=7).to_json()
    assert a == b


def test_oracle_rigour_flags():
    dense = oracle_density(parse_product("F(1,2;4)^3"))
    assert dense.rigorous and not dense.trivially_sparse
    trivial = oracle_density(parse_product("Gr(2,4)^4"))
    assert trivial.rigorous and trivial.trivially_sparse
    evidence = oracle_density(parse_product("F(1,3;4)^3"))
    assert not evidence.rigorous


def test_oracle_parameter_checks():
    spec = parse_product("F(1;3)^2")
    with pytest.raises(ValueError):
        oracle_density(spec, p=65537)
    with pytest.raises(ValueError):
        oracle_density(spec, p=MIN_ORACLE_PRIME + 1)  # not prime
    with pytest.raises(ValueError):
        oracle_density(spec, trials=0)


def test_degenerate_sample_small_prime(monkeypatch):
    # over F_2 a random 6x5 matrix has full column rank with probability ~0.58,
    # so one draw per factor fails quickly across 40 factors
    monkeypatch.setattr(oracle, "MAX_RESAMPLES", 1)
    spec = ProductSpec.power(FlagShape(6, (5,)), 40)
    with pytest.raises(DegenerateSample):
        random_flag_config(spec, 2, seed=1)


@st.composite
def products(draw, max_n=6, max_m=4):
    n = draw(st.integers(2, max_n))
    m = draw(st.integers(1, max_m))
    fs = []
    for _ in range(m):
        ks = draw(st.sets(st.integers(1, n - 1), min_size=1, max_size=n - 1))
        fs.append(FlagShape(n, tuple(sorted(ks))))
    return ProductSpec(n, tuple(fs))


@given(products(), st.integers(0, 2**32))
@settings(max_examples=60, deadline=None)
def test_nullity_lower_bound(spec, seed):
    config = random_flag_config(spec, P, seed)
    assert stabilizer_nullity(config) >= max(1, expected_nullity(spec))


@given(products(), st.integers(0, 2**32))
@settings(max_examples=40, deadline=None)
def test_dual_config_same_nullity(spec, seed):
    config = random_flag_config(spec, P, seed)
    dual = dual_config(config)
    assert dual.shapes == tuple(FlagShape(spec.n, tuple(spec.n - k for k in reversed(s.ks))) for s in spec.factors)
    assert stabilizer_nullity(dual) == stabilizer_nullity(config)


@given(products(), st.integers(0, 2**32))
@settings(max_examples=40, deadline=None)
def test_constraint_rows_and_factor_rank(spec, seed):
    config = random_flag_config(spec, P, seed)
    n = spec.n
    expected_rows = sum((n - k) * k for s in spec.factors for k in s.ks)
    assert stabilizer_system(config).shape == (expected_rows, n * n)
    for shape, B in zip(config.shapes, config.chains):
        assert factor_constraint_rank(shape, B, P) == dim_flag(shape)


def test_constraint_rows_describe_invariance():
    p = 7
    B = np.array([[1, 0], [0, 1], [0, 0]])
    rows = constraint_rows(B, p)
    X_good = np.array([[1, 2, 3], [4, 5, 6], [0, 0, 1]])
    X_bad = np.array([[1, 0, 0], [0, 1, 0], [1, 0, 1]])
    assert not np.any(rows @ X_good.reshape(-1) % p)
    assert np.any(rows @ X_bad.reshape(-1) % p)


def test_flag_config_validation():
    with pytest.raises(ValueError):
        FlagConfig(5, 3, (FlagShape(3, (1,)),), (np.zeros((3, 2), dtype=np.int64),))


@pytest.mark.parametrize("t, n, expected", [(3, 12, 4), (3, 13, 13), (4, 20, 5)])
def test_witness_nullity(t, n, expected):
    res = special_witness(t, n)
    assert res.nullity == expected
    assert res.matches
    assert stabilizer_nullity(res.config) == res.nullity


@pytest.mark.parametrize("t, n", [(3, 14), (4, 21), (5, 30)])
def test_witness_formula_more(t, n):
    res = special_witness(t, n)
    assert res.nullity == witness_formula(t, n) + 1
    assert stabilizer_nullity(res.config) == res.nullity


def test_witness_members_nested():
    config = witness_config(3, 12)
    for shape, B in zip(config.shapes, config.chains):
        assert shape.ks == (3, 11)
        assert linalg.rank(B, P) == 11


@pytest.mark.parametrize("t, n", [(2, 10), (3, 11)])
def test_witness_rejects(t, n):
    with pytest.raises(InvalidParameters):
        witness_config(t, n)
