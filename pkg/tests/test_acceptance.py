"""Acceptance criteria, one test each, with wall-clock limits.

Every test prints a single PASS/FAIL line. Run directly with
``python3 tests/test_acceptance.py`` for the same lines without pytest.
"""

import itertools
import random
import time

import pytest

from flagorbit import cli
from flagorbit.classifier import CATALOG, Answer, classify, first_hit, rule_hits
from flagorbit.flags import (
    FlagShape,
    ProductSpec,
    all_shapes,
    dual_product,
    expected_stab_dim,
    is_trivially_sparse,
)
from flagorbit.notation import parse_product
from flagorbit.oracle import (
    OracleVerdict,
    expected_nullity,
    oracle_density,
    random_flag_config,
    special_witness,
    stabilizer_nullity,
)
from flagorbit.reduction import contract_top, normalize

P = 2**31 - 1
_reporter = None


@pytest.fixture(autouse=True)
def _grab_reporter(request):
    global _reporter
    _reporter = request.config.pluginmanager.getplugin("terminalreporter")


def _line(text):
    if _reporter is not None:
        _reporter.write_line(text)
    else:
        print(text)


def run_criterion(number, title, limit, body):
    start = time.perf_counter()
    try:
        body()
        elapsed = time.perf_counter() - start
        ok = elapsed < limit
        note = f"{elapsed:.1f}s / {limit}s"
        err = None if ok else AssertionError(f"criterion {number} took {elapsed:.1f}s, limit {limit}s")
    except AssertionError as exc:
        elapsed = time.perf_counter() - start
        ok, note, err = False, f"{elapsed:.1f}s: {exc}", exc
    _line(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} ({note})")
    if err is not None:
        raise err


def dense_certified(spec):
    return oracle_density(spec, P, 3).verdict is OracleVerdict.DENSE_CERTIFIED


# -- 1 ----------------------------------------------------------------------------------


def two_step_triples():
    for n in range(3, 9):
        for k1, k2 in itertools.combinations(range(1, n), 2):
            yield k1, k2, n


def criterion_1():
    count = 0
    for k1, k2, n in two_step_triples():
        spec = ProductSpec.power(FlagShape(n, (k1, k2)), 3)
        expect = k1 + k2 != n and not is_trivially_sparse(spec)
        got = classify(spec).answer
        assert got is (Answer.DENSE if expect else Answer.SPARSE), f"{spec}: {got.value}"
        assert dense_certified(spec) == expect, f"oracle disagrees on {spec}"
        count += 1
    assert count == sum(len(list(itertools.combinations(range(1, n), 2))) for n in range(3, 9))


def test_criterion_1_two_step_triples():
    run_criterion(1, "two-step triples F(k1,k2;n)^3, n <= 8", 30, criterion_1)


# -- 2 ----------------------------------------------------------------------------------


def initial_segment_law(r, n, m):
    """The four cases as stated, one branch per case."""
    if m <= 2:
        return True
    if r == 1 and n >= m - 1:
        return True
    if m == 3 and r > 1 and n >= 3 * r - 2:
        return True
    if m > 3 and r > 1 and n >= m * r - 1:
        return True
    return False


def criterion_2():
    for r in range(1, 5):
        for m in range(3, 7):
            for n in range(r + 1, 15):
                spec = ProductSpec.power(FlagShape(n, tuple(range(1, r + 1))), m)
                expect = initial_segment_law(r, n, m)
                got = classify(spec).answer
                assert got is (Answer.DENSE if expect else Answer.SPARSE), f"{spec}: {got.value}"
                if n <= 8:
                    assert dense_certified(spec) == expect, f"oracle disagrees on {spec}"
    report = oracle_density(parse_product("F(1,2;7)^4"), P, 3)
    assert report.verdict is OracleVerdict.DENSE_CERTIFIED
    assert report.min_nullity == 49 - 44 == 5


def test_criterion_2_initial_segments():
    run_criterion(2, "F(1..r;n)^m classification, r <= 4, 3 <= m <= 6, n <= 14", 120, criterion_2)


# -- 3 ----------------------------------------------------------------------------------


def block_law(ell, r, n):
    """Cases (1)-(4) for n >= 2l+r+1, reached through duality otherwise.

    The case list omits n = 3l+3r-1, where the reduction ends at a point
    (dense); it is added here as its own branch.
    """
    if r == 1:
        return True
    if n < 2 * ell + r + 1:
        return block_law(n - ell - r - 1, r, n)
    if 3 * ell + 3 * r <= n:
        return True
    if n == 3 * ell + 3 * r - 2:
        return True
    if 2 * ell + 2 * r <= n <= 3 * ell + 2 * r and (r == 2 or 3 * ell + 5 >= n):
        return True
    if n == 3 * ell + 3 * r - 1:
        return True
    return False


def criterion_3():
    checked = 0
    for ell in range(0, 4):
        for r in range(1, 5):
            for n in range(ell + r + 1, 15):
                spec = ProductSpec.power(FlagShape(n, tuple(range(ell + 1, ell + r + 1))), 3)
                expect = block_law(ell, r, n)
                got = classify(spec).answer
                assert got is (Answer.DENSE if expect else Answer.SPARSE), f"{spec}: {got.value}"
                if n <= 8:
                    assert dense_certified(spec) == expect, f"oracle disagrees on {spec}"
                checked += 1
    assert checked > 100
    assert dense_certified(parse_product("F(2,3;6)^3"))
    # the omitted boundary case, certified directly
    assert dense_certified(parse_product("F(2,3;8)^3"))


def test_criterion_3_consecutive_blocks():
    run_criterion(3, "F(l+1..l+r;n)^3, l <= 3, r <= 4, n <= 14", 60, criterion_3)


# -- 4 ----------------------------------------------------------------------------------


def criterion_4():
    spec = parse_product("F(1,8;10)^4")
    assert classify(spec).answer is Answer.SPARSE
    report = oracle_density(spec, P, 3)
    assert report.expected_nullity == 8
    assert report.verdict is OracleVerdict.SPARSE_EVIDENCE
    assert report.min_nullity >= 9

    spec = parse_product("F(2,3,5;6)^3")
    assert 2 * 2 + 3 + 5 == 2 * 6
    assert classify(spec).answer is Answer.SPARSE
    without_count = tuple(r for r in CATALOG if r.id != "R1")
    hit = first_hit(spec, without_count)
    assert hit is not None and hit.rule.id == "R12" and hit.answer is Answer.SPARSE
    assert oracle_density(spec, P, 3).verdict is OracleVerdict.SPARSE_EVIDENCE

    # instances of the same pattern that survive the dimension count
    for text in ("F(2,7,9;10)^3", "F(2,8,10;11)^3"):
        spec = parse_product(text)
        assert expected_stab_dim(spec) >= 0
        assert any(h.rule.id == "R12" and h.answer is Answer.SPARSE for h in rule_hits(spec))
        assert classify(spec).answer is Answer.SPARSE
        assert oracle_density(spec, P, 3).verdict is OracleVerdict.SPARSE_EVIDENCE


def test_criterion_4_sparsity_patterns():
    run_criterion(4, "F(1,8;10)^4 and 2k_h+k_i+k_j = 2n obstructions", 30, criterion_4)


# -- 5 ----------------------------------------------------------------------------------


def criterion_5():
    for t, n in [(3, 12), (3, 13), (4, 20)]:
        res = special_witness(t, n, P)
        assert res.nullity == res.formula + 1, f"t={t}, n={n}: {res.nullity} vs {res.formula} + 1"
        assert stabilizer_nullity(res.config) == res.nullity


def test_criterion_5_witness_family():
    run_criterion(5, "explicit witness nullity = formula + 1", 10, criterion_5)


# -- 6 ----------------------------------------------------------------------------------


def criterion_6():
    code = cli.main(["sweep", "--max-n", "7", "--max-m", "5", "--self-only", "--oracle", "--out", _sweep_path])
    assert code == 0, f"sweep exit status {code}"
    with open(_sweep_path, encoding="utf-8") as fh:
        rows = fh.read().splitlines()
    assert len(rows) > 1
    assert not any(line.endswith(",False") for line in rows[1:])


_sweep_path = "acceptance_sweep.csv"


def test_criterion_6_global_sweep(tmp_path, capsys):
    global _sweep_path
    _sweep_path = str(tmp_path / "sweep.csv")
    run_criterion(6, "sweep --max-n 7 --max-m 5 --self-only --oracle: 0 disagreements", 300, criterion_6)
    err = capsys.readouterr().err
    assert "disagreements: 0" in err


# -- 7 ----------------------------------------------------------------------------------


def criterion_7():
    # duality involution and verdict equivariance
    for n in range(2, 11):
        for shape in all_shapes(n):
            for m in range(1, 7):
                spec = ProductSpec.power(shape, m)
                dual = dual_product(spec)
                assert dual_product(dual) == spec
                assert classify(spec).answer is classify(dual).answer, str(spec)
    for n in range(2, 6):
        for m in range(2, 4):
            for combo in itertools.combinations_with_replacement(all_shapes(n), m):
                spec = ProductSpec(n, combo)
                assert classify(spec).answer is classify(dual_product(spec)).answer, str(spec)

    rng = random.Random(31)
    # contract_top keeps the expected stabilizer dimension
    for _ in range(200):
        m = rng.randint(3, 8)
        top = rng.randint(1, 15)
        ks = tuple(sorted(rng.sample(range(1, top), rng.randint(0, top - 1)))) + (top,)
        spec = ProductSpec.power(FlagShape((m - 1) * top, ks), m)
        assert expected_stab_dim(contract_top(spec)) == expected_stab_dim(spec)

    # nullity lower bounds on sampled configurations
    for _ in range(150):
        n = rng.randint(2, 7)
        shapes = all_shapes(n)
        spec = ProductSpec(n, tuple(rng.choice(shapes) for _ in range(rng.randint(1, 6))))
        config = random_flag_config(spec, P, rng.getrandbits(32))
        assert stabilizer_nullity(config) >= max(1, expected_nullity(spec))

    # normalize terminates within n + sum r_i
    for _ in range(1000):
        n = rng.randint(2, 50)
        m = rng.randint(1, 8)
        if rng.random() < 0.5:
            top = rng.randint(1, max(1, min(n - 1, 2 * n // m + 1)))
            ks = tuple(sorted(rng.sample(range(1, top + 1), rng.randint(1, top))))
            spec = ProductSpec.power(FlagShape(n, ks), m)
        else:
            spec = ProductSpec(n, tuple(
                FlagShape(n, tuple(sorted(rng.sample(range(1, n), rng.randint(1, min(5, n - 1))))))
                for _ in range(m)
            ))
        bound = spec.n + sum(f.r for f in spec.factors)
        _, chain = normalize(spec, max_steps=bound)
        assert len(chain) <= bound


def test_criterion_7_property_suites():
    run_criterion(7, "duality, contraction, lower bounds, termination", 120, criterion_7)


if __name__ == "__main__":
    import tempfile

    _sweep_path = tempfile.mktemp(suffix=".csv")
    for number, title, limit, body in [
        (1, "two-step triples", 30, criterion_1),
        (2, "initial segments", 120, criterion_2),
        (3, "consecutive blocks", 60, criterion_3),
        (4, "sparsity patterns", 30, criterion_4),
        (5, "witness family", 10, criterion_5),
        (6, "global sweep", 300, criterion_6),
        (7, "property suites", 120, criterion_7),
    ]:
        try:
            run_criterion(number, title, limit, body)
        except AssertionError:
            pass
