"""Rule engine deciding density of the diagonal PGL(n) action.

``classify`` rewrites the input with :func:`normalize` (and from its dual),
then tries a fixed catalog of rules on every product met along the way,
cheapest first. A rule either proves Dense, proves Sparse, or stays silent;
the first decisive hit wins. When nothing fires the answer is Unknown.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

from .flags import (
    FlagShape,
    ProductSpec,
    block_offset,
    dual_product,
    dual_shape,
    expected_stab_dim,
    is_trivially_sparse,
)
from .reduction import EquivalenceChain, Step, normalize


class Answer(str, enum.Enum):
    DENSE = "dense"
    SPARSE = "sparse"
    UNKNOWN = "unknown"


Outcome = Optional[tuple[Answer, str]]


@dataclass(frozen=True)
class Rule:
    id: str
    name: str
    citation: str
    check: Callable[[ProductSpec], Outcome]
    self_only: bool = False


@dataclass(frozen=True)
class Hit:
    rule: Rule
    answer: Answer
    detail: str
    spec: ProductSpec


@dataclass
class Verdict:
    answer: Answer
    spec: ProductSpec
    normalized: ProductSpec
    rule: Rule | None = None
    detail: str = ""
    decided_on: ProductSpec | None = None
    steps: list[Step] = field(default_factory=list)

    @property
    def decisive(self) -> bool:
        return self.answer is not Answer.UNKNOWN

    def summary(self) -> str:
        if self.rule is None:
            return f"UNKNOWN (no rule applies to {self.normalized})"
        return f"{self.answer.value.upper()} via {self.rule.name} ({self.detail})"


# -- helpers ----------------------------------------------------------------------


def _both(shape: FlagShape):
    yield shape
    d = dual_shape(shape)
    if d != shape:
        yield d


def _dense(detail: str) -> Outcome:
    return Answer.DENSE, detail


def _sparse(detail: str) -> Outcome:
    return Answer.SPARSE, detail


def _grassmannian_ks(spec: ProductSpec) -> list[int] | None:
    if spec.m == 0 or any(f.r != 1 for f in spec.factors):
        return None
    return [f.ks[0] for f in spec.factors]


# -- the catalog --------------------------------------------------------------------


def r1_trivially_sparse(spec: ProductSpec) -> Outcome:
    if is_trivially_sparse(spec):
        return _sparse(f"dim {spec.n * spec.n - 1 - expected_stab_dim(spec)} > n^2-1 = {spec.n * spec.n - 1}")
    return None


def r2_few_factors(spec: ProductSpec) -> Outcome:
    if spec.m <= 2:
        return _dense(f"m = {spec.m} <= 2, finitely many orbits")
    return None


def r3_easydense(spec: ProductSpec) -> Outcome:
    tops = sum(f.top for f in spec.factors)
    if tops <= spec.n:
        return _dense(f"sum of tops {tops} <= n = {spec.n}")
    dual_tops = sum(spec.n - f.bottom for f in spec.factors)
    if dual_tops <= spec.n:
        return _dense(f"dual sum of tops {dual_tops} <= n = {spec.n}")
    return None


def r4_projective_points(spec: ProductSpec) -> Outcome:
    base = spec.base()
    n, m = spec.n, spec.m
    if base.ks not in ((1,), (n - 1,)):
        return None
    if m <= n + 1:
        return _dense(f"{m} general points of P^{n - 1}, m <= n+1")
    return _sparse(f"{m} points of P^{n - 1}, m > n+1")


def r5_grassmannians(spec: ProductSpec) -> Outcome:
    ks = _grassmannian_ks(spec)
    if ks is None or spec.m > 4:
        return None
    if spec.m == 4 and sum(ks) == 2 * spec.n:
        return _sparse(f"four Grassmannians with sum k = {sum(ks)} = 2n")
    return _dense(f"{spec.m} Grassmannians, not four with sum k = 2n")


def r6_adjacent_grassmannians(spec: ProductSpec) -> Outcome:
    ks = _grassmannian_ks(spec)
    if ks is None:
        return None
    lo, hi = min(ks), max(ks)
    if hi - lo > 1:
        return None
    n = spec.n
    if is_trivially_sparse(spec):
        return _sparse("adjacent Grassmannians, trivially sparse")
    if n % 2 == 1 and ks.count((n - 1) // 2) == 2 and ks.count((n + 1) // 2) == 2 and len(ks) == 4:
        k = (n + 1) // 2
        return _sparse(f"the exception Gr({k - 1},{n})^2 x Gr({k},{n})^2")
    return _dense("adjacent Grassmannians, not trivially sparse, not the exception")


def r7_two_step_triple(spec: ProductSpec) -> Outcome:
    base = spec.base()
    if spec.m != 3 or base.r != 2:
        return None
    k1, k2 = base.ks
    if k1 + k2 == spec.n:
        return _sparse("k1+k2 = n")
    return _dense("k1+k2 != n")


def r8_complementary_pair(spec: ProductSpec) -> Outcome:
    if spec.m < 3:
        return None
    n = spec.n
    for a in range(1, (n + 1) // 2):
        b = n - a
        holders = sum(1 for f in spec.factors if a in f.ks and b in f.ks)
        if holders >= 3:
            return _sparse(f"{holders} factors contain k_i = {a}, k_j = {b} with k_i + k_j = n")
    return None


def initial_segment_dense(r: int, n: int, m: int) -> bool:
    """Density of F(1, ..., r; n)^m, r < n."""
    if m <= 2:
        return True
    if r == 1:
        return n >= m - 1
    if m == 3:
        return n >= 3 * r - 2
    return n >= m * r - 1


def r9_initial_segment(spec: ProductSpec) -> Outcome:
    for shape in _both(spec.base()):
        r = shape.r
        if shape.ks == tuple(range(1, r + 1)):
            dense = initial_segment_dense(r, spec.n, spec.m)
            what = f"F(1..{r};{spec.n})^{spec.m}" + ("" if shape == spec.base() else " (dual)")
            return (Answer.DENSE if dense else Answer.SPARSE), what
    return None


def block_triple(ell: int, r: int, n: int) -> bool | None:
    """Density of F(ell+1, ..., ell+r; n)^3 from the reduction argument.

    Returns None outside the range the argument covers (never, for n > ell + r).
    """
    if r == 1:
        return True
    if n < 2 * ell + r + 1:
        # dual block has offset n - ell - r - 1 and lands in the range below
        return block_triple(n - ell - r - 1, r, n)
    if n < 2 * ell + 2 * r:
        return False
    if n >= 3 * ell + 3 * r:
        return True
    j = n - 2 * ell - 2 * r
    if j <= ell:
        return r == 2 or 3 * ell + 5 >= n
    # reduces to F(1..ell+r-j-1; ell+r-j)^3, dense iff ell+r-j <= 2
    return n >= 3 * ell + 3 * r - 2


def block_many(ell: int, r: int, n: int, m: int) -> bool | None:
    """Density of F(ell+1, ..., ell+r; n)^m for m >= 4 and n >= (m-1)(ell+r)."""
    top = ell + r
    if m < 4 or n < (m - 1) * top:
        return None
    if n >= m * top:
        return True
    if r == 1:
        return m * (ell + 1) * (n - ell - 1) < n * n
    j = n - (m - 1) * top
    if j < ell:
        if r == 2:
            return m <= ell - j + r + 1
        return ell - j + r >= m * r - m - 1
    # reduces to F(1..top-j-1; top-j)^m: only the point case top-j = 1 is dense
    return j == top - 1


def r10_consecutive_block(spec: ProductSpec) -> Outcome:
    for shape in _both(spec.base()):
        ell = block_offset(shape)
        if ell is None:
            continue
        r, n, m = shape.r, spec.n, spec.m
        if m == 3:
            dense = block_triple(ell, r, n)
        else:
            dense = block_many(ell, r, n, m)
        if dense is None:
            continue
        return (Answer.DENSE if dense else Answer.SPARSE), f"block ell={ell}, r={r}, m={m}"
    return None


@dataclass(frozen=True)
class GapProfile:
    """j_l(m), s_l (l = 1..r, stored in ascending order) and l_0."""

    shape: FlagShape
    m: int
    js: tuple[int, ...]
    ss: tuple[int, ...]
    ell0: int

    def j(self, ell: int) -> int:
        return self.js[ell - 1]

    def s(self, ell: int) -> int:
        return self.ss[ell - 1]

    def tail(self, ell: int) -> int:
        """sum_{t >= ell} j_t."""
        return sum(self.js[ell - 1:])


def gap_profile(shape: FlagShape, m: int) -> GapProfile:
    if m < 3 or shape.r < 1:
        raise ValueError("gap profile needs m >= 3 and r >= 1")
    ks, n, r = shape.ks, shape.n, shape.r
    k = lambda i: ks[i - 1]  # noqa: E731  1-based access
    js = [0] * (r + 1)
    js[r] = n - (m - 1) * k(r)
    for ell in range(r - 1, 0, -1):
        js[ell] = k(ell + 1) - (m - 1) * k(ell) + (m - 2) * sum(js[ell + 1:])
    ss = [0] * (r + 1)
    for ell in range(1, r + 1):
        J = sum(js[ell:])
        if k(ell) - J > 0:
            ss[ell] = min(i for i in range(1, ell + 1) if k(i) - J > 0)
        else:
            ss[ell] = ell
    ell0 = max(ell for ell in range(1, r + 1) if ss[ell] >= ell - 1)
    return GapProfile(shape, m, tuple(js[1:]), tuple(ss[1:]), ell0)


def large_gap_dense(shape: FlagShape, m: int) -> str | None:
    """The three sufficient conditions of the large-gap recursion; returns
    which one holds, or None."""
    g = gap_profile(shape, m)
    r, l0 = shape.r, g.ell0
    ks = shape.ks
    if any(g.j(ell) < 0 for ell in range(l0, r + 1)):
        return None
    for t in range(l0, r + 1):
        if g.j(t) >= ks[t - 1] - g.tail(t + 1):
            return f"condition (1) at t={t}"
    if g.s(l0) >= l0:
        return f"condition (2), s_l0 = l0 = {l0}"
    if g.s(l0) == l0 - 1:
        J = g.tail(l0)
        a, b = ks[l0 - 2], ks[l0 - 1]
        if m * (a - J) * (b - a) < (b - J) ** 2:
            return f"condition (3) at l0={l0}"
    return None


def r11_large_gaps(spec: ProductSpec) -> Outcome:
    m = spec.m
    if m < 3:
        return None
    for shape in _both(spec.base()):
        ks, n, r = shape.ks, shape.n, shape.r
        ext = ks + (n,)
        if all(ext[i] >= (m - 1) * ext[i - 1] for i in range(1, r + 1)):
            return _dense(f"k_i >= (m-1) k_(i-1) throughout {shape}")
        if r == 2 and m > 3 and n >= (m - 1) * ks[1]:
            k1, k2 = ks
            j = n - (m - 1) * k2
            dense = k1 <= j or m * (k1 - j) * (k2 - k1) < (k2 - j) ** 2
            return (Answer.DENSE if dense else Answer.SPARSE), f"two-step, m={m}, j_2={j}"
        if r == 3 and m == 3 and n >= 2 * ks[2]:
            k1, k2, k3 = ks
            j = n - 2 * k3
            dense = k1 <= j or k1 + k2 != k3 + j
            return (Answer.DENSE if dense else Answer.SPARSE), f"three-step triple, j_3={j}"
        which = large_gap_dense(shape, m)
        if which:
            return _dense(f"gap recursion on {shape}: {which}")
    return None


def prop_sparse_pair(shape: FlagShape, m: int) -> str | None:
    """k_j = n - (t k_i + u) obstructions; returns a description or None."""
    n, ks = shape.n, shape.ks
    for a, b in itertools.combinations(ks, 2):
        s = n - b
        if s < a:
            continue
        t, u = divmod(s, a)
        if u == 0 and m >= max(t + 2, 4):
            return f"k_j = n - {t} k_i with (k_i,k_j)=({a},{b})"
        if 0 < u and 2 * u <= a and t >= 3 and m >= t + 2:
            return f"k_j = n - ({t} k_i + {u}) with (k_i,k_j)=({a},{b})"
        if 2 * u > a and u < a and t >= 2 and m >= t + 3:
            return f"k_j = n - ({t} k_i + {u}) with (k_i,k_j)=({a},{b})"
    return None


def triple_obstruction(shape: FlagShape) -> str | None:
    for a, b, c in itertools.combinations(shape.ks, 3):
        if 2 * a + b + c == 2 * shape.n:
            return f"2*{a}+{b}+{c} = 2n"
    return None


def r12_sparsity_patterns(spec: ProductSpec) -> Outcome:
    m = spec.m
    if m < 3:
        return None
    for shape in _both(spec.base()):
        tag = "" if shape == spec.base() else " (dual)"
        hit = prop_sparse_pair(shape, m)
        if hit:
            return _sparse(hit + tag)
        hit = triple_obstruction(shape)
        if hit:
            return _sparse(hit + tag)
    return None


def r14_witness_family(spec: ProductSpec) -> Outcome:
    n, m = spec.n, spec.m
    t = m - 1
    if t < 3 or n < t * (t + 1):
        return None
    for shape in _both(spec.base()):
        if shape.ks == (t, n - 1):
            return _dense(f"explicit witness, t={t}, n={n} >= t(t+1)")
    return None


R1 = Rule("R1", "trivially-sparse", "dimension count: dim X > dim PGL(n) rules out a dense orbit", r1_trivially_sparse)
R2 = Rule("R2", "few-factors", "at most two flag varieties: finitely many orbits", r2_few_factors)
R3 = Rule("R3", "easy-dense", "sum of top dimensions <= n: block diagonal stabilizer", r3_easydense)
R4 = Rule("R4", "projective-points", "m points of P^(n-1) are dense iff m <= n+1", r4_projective_points, True)
R5 = Rule("R5", "four-grassmannians", "at most four Grassmannians are sparse iff m = 4 and sum k_i = 2n", r5_grassmannians)
R6 = Rule(
    "R6",
    "adjacent-grassmannians",
    "Gr(k-1,n)^a x Gr(k,n)^b is dense iff not trivially sparse and not Gr(k-1,2k-1)^2 x Gr(k,2k-1)^2",
    r6_adjacent_grassmannians,
)
R7 = Rule("R7", "two-step-triple", "F(k1,k2;n)^3 is dense iff k1+k2 != n", r7_two_step_triple, True)
R8 = Rule("R8", "complementary-pair", "three flags sharing k_i + k_j = n are sparse", r8_complementary_pair)
R9 = Rule("R9", "initial-segment", "classification of F(1,...,r;n)^m", r9_initial_segment, True)
R10 = Rule("R10", "consecutive-block", "classification of F(l+1,...,l+r;n)^m for m = 3 or n >= (m-1)(l+r)", r10_consecutive_block, True)
R11 = Rule("R11", "large-gaps", "descending gap recursion j_l(m), s_l, l_0 and its corollaries", r11_large_gaps, True)
R12 = Rule("R12", "sparsity-patterns", "k_j = n - (t k_i + u) and 2k_h + k_i + k_j = 2n obstructions", r12_sparsity_patterns, True)
R13 = Rule("R13", "monotone-closure", "a sparse equivariant projection forces sparsity", lambda spec: None)
R14 = Rule("R14", "witness-family", "F(t,n-1;n)^(t+1) is dense for n >= t(t+1)", r14_witness_family, True)

CATALOG: tuple[Rule, ...] = (R1, R2, R3, R4, R5, R6, R7, R8, R9, R10, R11, R12, R14)


def rule_hits(spec: ProductSpec, rules=CATALOG) -> list[Hit]:
    """Every catalog rule that decides ``spec`` directly (no rewriting)."""
    spec = spec.without_points()
    hits = []
    selfp = spec.is_self_product()
    for rule in rules:
        if rule.self_only and not selfp:
            continue
        out = rule.check(spec)
        if out is not None:
            hits.append(Hit(rule, out[0], out[1], spec))
    return hits


def first_hit(spec: ProductSpec, rules=CATALOG) -> Hit | None:
    spec = spec.without_points()
    selfp = spec.is_self_product()
    for rule in rules:
        if rule.self_only and not selfp:
            continue
        out = rule.check(spec)
        if out is not None:
            return Hit(rule, out[0], out[1], spec)
    return None


def _candidates(spec: ProductSpec) -> list[tuple[ProductSpec, list[Step]]]:
    """Products equivalent to ``spec`` with the steps reaching them, input first."""
    spec = spec.without_points()
    dual = dual_product(spec)
    to_dual = [Step("duality", spec, dual)] if dual != spec else []
    out = [(spec, [])]
    if to_dual:
        out.append((dual, to_dual))
    for start, prefix in ((spec, []), (dual, to_dual)):
        _, chain = normalize(start)
        for i, step in enumerate(chain.steps):
            out.append((step.after, prefix + chain.steps[: i + 1]))
    seen, uniq = set(), []
    for s, steps in out:
        if s not in seen:
            seen.add(s)
            uniq.append((s, steps))
    return uniq


@lru_cache(maxsize=1 << 16)
def _base(spec: ProductSpec) -> tuple[Hit | None, tuple[Step, ...]]:
    for cand, steps in _candidates(spec):
        hit = first_hit(cand)
        if hit is not None:
            return hit, tuple(steps)
    return None, ()


def classify_base(spec: ProductSpec) -> Answer:
    """Catalog plus rewriting, without the projection closure."""
    hit, _ = _base(spec.without_points())
    return hit.answer if hit else Answer.UNKNOWN


def projections(spec: ProductSpec):
    """Equivariant images used by the closure: fewer factors, and for
    self-products coarser flags keeping 2 or 3 of the indices."""
    spec = spec.without_points()
    m = spec.m
    if spec.is_self_product():
        base = spec.base()
        subs = [base]
        for size in (2, 3):
            if size < base.r:
                subs += [FlagShape(spec.n, c) for c in itertools.combinations(base.ks, size)]
        for shape in subs:
            for mm in range(3, m + 1):
                if shape == base and mm == m:
                    continue
                yield ProductSpec.power(shape, mm)
    else:
        for size in range(3, m):
            for idx in itertools.combinations(range(m), size):
                yield ProductSpec(spec.n, tuple(spec.factors[i] for i in idx))


def grassmannian_obstruction(spec: ProductSpec) -> str | None:
    """Four factors projecting to Grassmannians with sum k = 2n."""
    n = spec.n
    fs = spec.without_points().factors
    if len(fs) < 4:
        return None
    for quad in itertools.combinations(range(len(fs)), 4):
        for choice in itertools.product(*(fs[i].ks for i in quad)):
            if sum(choice) == 2 * n:
                return f"Gr projections {choice} of four factors sum to 2n"
    return None


def _closure(spec: ProductSpec) -> tuple[str, ProductSpec | None] | None:
    for sub in (spec, dual_product(spec)):
        hit = grassmannian_obstruction(sub)
        if hit:
            return hit, None
    for proj in projections(spec):
        if classify_base(proj) is Answer.SPARSE:
            return f"projection {proj} is sparse", proj
    return None


@lru_cache(maxsize=1 << 14)
def _classify(spec: ProductSpec) -> Verdict:
    normalized, _ = normalize(spec)
    hit, steps = _base(spec)
    if hit is not None:
        return Verdict(hit.answer, spec, normalized, hit.rule, hit.detail, hit.spec, list(steps))
    closed = _closure(spec)
    if closed is not None:
        return Verdict(Answer.SPARSE, spec, normalized, R13, closed[0], spec, [])
    _, chain = normalize(spec)
    return Verdict(Answer.UNKNOWN, spec, normalized, steps=list(chain.steps))


def classify(spec: ProductSpec) -> Verdict:
    """Dense / Sparse when some rule proves it, else Unknown."""
    return _classify(spec.without_points())


def monotone_conflicts(spec: ProductSpec) -> list[ProductSpec]:
    """Projections classified Sparse although ``spec`` is classified Dense."""
    if classify(spec).answer is not Answer.DENSE:
        return []
    return [p for p in projections(spec) if classify(p).answer is Answer.SPARSE]


def decisive_disagreements(spec: ProductSpec) -> list[tuple[Hit, Hit]]:
    """Pairs of rule hits on ``spec`` that contradict each other."""
    hits = rule_hits(spec)
    return [(a, b) for a, b in itertools.combinations(hits, 2) if a.answer != b.answer]


def trace_json(verdict: Verdict) -> list[dict]:
    out = [s.to_json() for s in verdict.steps]
    if verdict.rule is not None:
        out.append(
            {
                "rule": verdict.rule.id,
                "name": verdict.rule.name,
                "citation": verdict.rule.citation,
                "detail": verdict.detail,
                "on": str(verdict.decided_on),
                "answer": verdict.answer.value,
            }
        )
    return out


__all__ = [
    "Answer",
    "CATALOG",
    "EquivalenceChain",
    "GapProfile",
    "Verdict",
    "block_many",
    "block_triple",
    "classify",
    "classify_base",
    "decisive_disagreements",
    "gap_profile",
    "monotone_conflicts",
    "projections",
    "rule_hits",
    "initial_segment_dense",
]
