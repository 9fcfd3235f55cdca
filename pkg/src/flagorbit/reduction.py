"""Density-preserving rewrites between products, recorded as a chain.

Three rewrites are used, each turning a product X into a product Y such
that X is dense exactly when Y is:

* ``duality``      replace every flag by its annihilator flag;
* ``reduce``       intersect one factor with the span of the other factors'
                   top spaces (requires sum of other tops < n < sum of all tops);
* ``contract_top`` F(k_1..k_r; (m-1)k_r)^m  ->  F(k_1..k_{r-1}; k_r)^m.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .flags import FlagShape, ProductSpec, derived_sequence, dual_product

RULE_CITATIONS = {
    "duality": "duality: annihilators turn F(k_1..k_r;n) into F(n-k_r..n-k_1;n)",
    "reduce": "reduction: cut one flag by the span of the others' top spaces",
    "contract_top": "top contraction: F(k_1..k_r;(m-1)k_r)^m <=> F(k_1..k_{r-1};k_r)^m",
}


class NotApplicable(ValueError):
    """A rewrite's precondition does not hold."""


@dataclass(frozen=True)
class Step:
    rule: str
    before: ProductSpec
    after: ProductSpec

    @property
    def citation(self) -> str:
        return RULE_CITATIONS[self.rule]

    def to_json(self) -> dict:
        return {
            "rule": self.rule,
            "citation": self.citation,
            "before": str(self.before),
            "after": str(self.after),
        }


@dataclass
class EquivalenceChain:
    steps: list[Step] = field(default_factory=list)

    def append(self, step: Step) -> None:
        if self.steps and self.steps[-1].after != step.before:
            raise ValueError("chain steps must compose")
        if step.rule not in RULE_CITATIONS:
            raise ValueError(f"unknown rule {step.rule!r}")
        self.steps.append(step)

    def specs(self) -> list[ProductSpec]:
        """Every product visited, starting with the input."""
        if not self.steps:
            return []
        return [self.steps[0].before] + [s.after for s in self.steps]

    def __len__(self):
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)

    def to_json(self) -> list[dict]:
        return [s.to_json() for s in self.steps]


def _reduce_ordered(n: int, factors: list[tuple[int, ...]], pivot: int) -> tuple[int, list[tuple[int, ...]]]:
    """Positions are preserved; absorbed factors come back as empty tuples."""
    tops = [ks[-1] if ks else 0 for ks in factors]
    total = sum(tops)
    n_new = total - tops[pivot]
    if not (n_new <= n < total):
        raise NotApplicable(f"need sum of other tops {n_new} <= n={n} < {total}")
    if n_new >= n:
        raise NotApplicable("reduction would not lower the ambient dimension")
    out = []
    for i, ks in enumerate(factors):
        if i == pivot:
            out.append(derived_sequence(ks, n - n_new))
        else:
            # a top space equal to the whole new ambient space carries no data
            out.append(tuple(k for k in ks if k < n_new))
    return n_new, out


def _spec(n: int, factors: list[tuple[int, ...]]) -> ProductSpec:
    return ProductSpec(n, tuple(FlagShape(n, ks) for ks in factors if ks))


def reduce_step(spec: ProductSpec, pivot: int) -> ProductSpec:
    """Cut factor ``pivot`` (0-based, canonical order) by the span of the other
    factors' top spaces.

    Raises NotApplicable unless sum_{i != pivot} k_{i,r_i} < n < sum_i k_{i,r_i}.
    """
    if not 0 <= pivot < spec.m:
        raise NotApplicable(f"no factor {pivot} in {spec}")
    n_new, fs = _reduce_ordered(spec.n, [f.ks for f in spec.factors], pivot)
    return _spec(n_new, fs)


def contract_top(spec: ProductSpec) -> ProductSpec:
    """F(k_1..k_r; (m-1)k_r)^m -> F(k_1..k_{r-1}; k_r)^m, for m >= 3.

    With r = 1 the result is m copies of a point.
    """
    if spec.m < 3 or not spec.is_self_product():
        raise NotApplicable(f"{spec} is not a self-product with at least 3 factors")
    base = spec.base()
    if base.is_point() or spec.n != (spec.m - 1) * base.top:
        raise NotApplicable(f"{spec}: n is not (m-1) k_r")
    shape = FlagShape(base.top, base.ks[:-1])
    return ProductSpec.power(shape, spec.m)


def should_dualize(spec: ProductSpec) -> bool:
    """Dualize when it strictly lowers the sum of top dimensions."""
    tops = sum(f.top for f in spec.factors)
    dual_tops = sum(spec.n - f.bottom for f in spec.factors)
    return tops > dual_tops


def _reduce_round(spec: ProductSpec) -> list[Step] | None:
    """Apply ``reduce`` once with each original factor as pivot, in order.

    Returns None unless every step of the round is applicable.
    """
    n = spec.n
    factors = [f.ks for f in spec.factors]
    steps = []
    before = spec
    for pivot in range(len(factors)):
        if not factors[pivot]:
            continue
        try:
            n, factors = _reduce_ordered(n, factors, pivot)
        except NotApplicable:
            return None
        after = _spec(n, factors)
        steps.append(Step("reduce", before, after))
        before = after
    return steps


def normalize(spec: ProductSpec, max_steps: int | None = None) -> tuple[ProductSpec, EquivalenceChain]:
    """Rewrite to a fixpoint: duality (when it lowers the top sum), then
    ``contract_top``, then full reduction rounds.

    Every rewrite either lowers n or is a duality, and duality never fires
    twice in a row, so this terminates.
    """
    chain = EquivalenceChain()
    cur = spec.without_points()
    while True:
        if max_steps is not None and len(chain) >= max_steps:
            raise RuntimeError(f"normalize exceeded {max_steps} steps on {spec}")
        if should_dualize(cur):
            nxt = dual_product(cur)
            chain.append(Step("duality", cur, nxt))
            cur = nxt
            continue
        try:
            nxt = contract_top(cur).without_points()
        except NotApplicable:
            pass
        else:
            chain.append(Step("contract_top", cur, nxt))
            cur = nxt
            continue
        steps = _reduce_round(cur) if cur.m >= 2 else None
        if steps:
            for s in steps:
                chain.append(s)
            cur = steps[-1].after
            continue
        return cur, chain
