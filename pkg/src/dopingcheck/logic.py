"""STL formula trees with Boolean and quantitative semantics.

The core grammar is deliberately small: truth, threshold atoms of the
form f > 0, negation, conjunction, until. Everything else (finally,
globally, weak until, disjunction, implication) expands into the core
before evaluation, so there is exactly one semantics to trust.

A second layer quantifies trace variables over a finite trace set.
Threshold functions in a quantified body receive one value per bound
variable, packaged as a tuple in prefix declaration order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping

from .traces import GeneralizedTimedTrace, ext_neg

INF = math.inf


class Formula:
    """Base class; concrete nodes are the dataclasses below."""

    __slots__ = ()

    def render(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class Top(Formula):
    def render(self) -> str:
        return "TRUE"


TOP = Top()


@dataclass(frozen=True)
class Threshold(Formula):
    """Atomic predicate f > 0 where f maps the value at time t to an
    extended real. The label is the stable rendered name."""

    fn: Callable
    label: str

    def render(self) -> str:
        return f"({self.label} > 0)"


@dataclass(frozen=True)
class StdMember(Formula):
    """Trace-level atom: the trace bound at a variable position is one
    of the listed standard traces.

    Threshold atoms only see the value at a single instant, which
    cannot express whole-trace membership, so this leaf carries the
    variable's component index and compares the assigned trace against
    the standard list by exact equality. Robustness is +/- infinity.
    """

    component: int
    std: tuple
    label: str

    def render(self) -> str:
        return f"({self.label} > 0)"


@dataclass(frozen=True)
class Not(Formula):
    child: Formula

    def render(self) -> str:
        return f"!{self.child.render()}"


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula

    def render(self) -> str:
        return f"({self.left.render()} & {self.right.render()})"


@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    right: Formula

    def render(self) -> str:
        return f"({self.left.render()} U {self.right.render()})"


def finally_(phi: Formula) -> Formula:
    return Until(TOP, phi)


def globally(phi: Formula) -> Formula:
    return Not(Until(TOP, Not(phi)))


def or_(a: Formula, b: Formula) -> Formula:
    return Not(And(Not(a), Not(b)))


def implies(a: Formula, b: Formula) -> Formula:
    return or_(Not(a), b)


def weak_until(phi: Formula, psi: Formula) -> Formula:
    return or_(Until(phi, psi), globally(phi))


def conjunction(parts: Iterable[Formula]) -> Formula:
    """Right-folded conjunction; empty input collapses to TRUE."""
    items = list(parts)
    if not items:
        return TOP
    out = items[-1]
    for item in reversed(items[:-1]):
        out = And(item, out)
    return out


def disjunction(parts: Iterable[Formula]) -> Formula:
    items = list(parts)
    if not items:
        return Not(TOP)
    out = items[-1]
    for item in reversed(items[:-1]):
        out = or_(item, out)
    return out


# ---------------------------------------------------------------------------
# Threshold vocabulary
#
# Contract files never carry code; formulas are assembled from a closed
# set of threshold families registered here by name.

_THRESHOLD_FAMILIES: dict[str, Callable] = {}


def register_threshold_family(name: str, factory: Callable) -> None:
    if name in _THRESHOLD_FAMILIES and _THRESHOLD_FAMILIES[name] is not factory:
        raise ValueError(f"threshold family {name!r} already registered")
    _THRESHOLD_FAMILIES[name] = factory


def make_threshold(family: str, label: str, *args, **kwargs) -> Threshold:
    try:
        factory = _THRESHOLD_FAMILIES[family]
    except KeyError:
        raise ValueError(f"unknown threshold family {family!r}") from None
    return Threshold(factory(*args, **kwargs), label)


def _affine(a: float, b: float):
    return lambda v: a * float(v) + b


def _constant(c: float):
    return lambda v: c


register_threshold_family("affine", _affine)
register_threshold_family("constant", _constant)


# ---------------------------------------------------------------------------
# Evaluation


@dataclass(frozen=True)
class EvalResult:
    """Boolean verdict paired with the robustness estimate.

    A strictly positive robustness implies the Boolean verdict is true
    and a strictly negative one implies false; zero promises nothing.
    """

    boolean: bool
    robustness: float

    @property
    def conclusive(self) -> bool:
        return self.robustness != 0

    def describe(self) -> str:
        if self.robustness == 0:
            return "inconclusive (robustness 0)"
        word = "satisfied" if self.boolean else "violated"
        return f"{word} (robustness {self.robustness})"


def _check_time(w, t: int) -> None:
    if not 0 <= t < w.horizon:
        raise ValueError(f"time {t} outside horizon {w.horizon}")


def _components_of(w):
    components = getattr(w, "components", None)
    if components is None:
        raise TypeError(
            "standard-membership atoms need a composite trace with components"
        )
    return components


def eval_bool(phi: Formula, w, t: int = 0) -> bool:
    """Boolean satisfaction of phi on w at time t."""
    _check_time(w, t)
    if isinstance(phi, Top):
        return True
    if isinstance(phi, Threshold):
        return phi.fn(w.value_at(t)) > 0
    if isinstance(phi, StdMember):
        return _components_of(w)[phi.component] in phi.std
    if isinstance(phi, Not):
        return not eval_bool(phi.child, w, t)
    if isinstance(phi, And):
        return eval_bool(phi.left, w, t) and eval_bool(phi.right, w, t)
    if isinstance(phi, Until):
        for t2 in range(t, w.horizon):
            if eval_bool(phi.right, w, t2):
                return True
            if not eval_bool(phi.left, w, t2):
                return False
        return False
    raise TypeError(f"not a formula node: {phi!r}")


def eval_quant(phi: Formula, w, t: int = 0) -> float:
    """Robustness estimate of phi on w at time t."""
    _check_time(w, t)
    if isinstance(phi, Top):
        return INF
    if isinstance(phi, Threshold):
        return float(phi.fn(w.value_at(t)))
    if isinstance(phi, StdMember):
        return INF if _components_of(w)[phi.component] in phi.std else -INF
    if isinstance(phi, Not):
        return ext_neg(eval_quant(phi.child, w, t))
    if isinstance(phi, And):
        return min(eval_quant(phi.left, w, t), eval_quant(phi.right, w, t))
    if isinstance(phi, Until):
        best = -INF
        left_prefix = INF
        for t2 in range(t, w.horizon):
            best = max(best, min(eval_quant(phi.right, w, t2), left_prefix))
            left_prefix = min(left_prefix, eval_quant(phi.left, w, t2))
        return best
    raise TypeError(f"not a formula node: {phi!r}")


def evaluate(phi: Formula, w, t: int = 0) -> EvalResult:
    return EvalResult(eval_bool(phi, w, t), eval_quant(phi, w, t))


# ---------------------------------------------------------------------------
# Quantified layer


@dataclass(frozen=True)
class HyperFormula:
    """Quantifier prefix over trace variables plus an STL body.

    The body's threshold functions are applied to tuples holding the
    bound traces' values at the current instant, ordered as the prefix
    declares the variables.
    """

    prefix: tuple
    body: Formula

    def __post_init__(self):
        seen = set()
        for quantifier, var in self.prefix:
            if quantifier not in ("forall", "exists"):
                raise ValueError(f"bad quantifier {quantifier!r}")
            if var in seen:
                raise ValueError(f"variable {var!r} bound twice")
            seen.add(var)

    def render(self) -> str:
        head = " ".join(
            ("A" if q == "forall" else "E") + var for q, var in self.prefix
        )
        return f"{head}. {self.body.render()}"


@dataclass(frozen=True)
class CompositeTrace:
    """Tuple-valued trace formed by zipping component traces."""

    components: tuple

    def __post_init__(self):
        if not self.components:
            raise ValueError("composite trace needs at least one component")
        horizons = {c.horizon for c in self.components}
        if len(horizons) != 1:
            raise ValueError(f"components disagree on horizon: {sorted(horizons)}")

    @property
    def horizon(self) -> int:
        return self.components[0].horizon

    def value_at(self, t: int):
        return tuple(c.value_at(t) for c in self.components)


def _resolve(
    psi: HyperFormula,
    traces: tuple,
    assignment: Mapping[str, GeneralizedTimedTrace],
    t: int,
    combine_bool: bool,
):
    """Shared quantifier recursion for both semantics."""

    def rec(i: int, bound: list):
        if i == len(psi.prefix):
            comp = CompositeTrace(tuple(bound))
            if combine_bool:
                return eval_bool(psi.body, comp, t)
            return eval_quant(psi.body, comp, t)
        quantifier, var = psi.prefix[i]
        if var in assignment:
            bound.append(assignment[var])
            result = rec(i + 1, bound)
            bound.pop()
            return result
        results = []
        for candidate in traces:
            bound.append(candidate)
            results.append(rec(i + 1, bound))
            bound.pop()
            # Short-circuit only the Boolean semantics; the
            # quantitative one needs the full extremum.
            if combine_bool and quantifier == "forall" and not results[-1]:
                return False
            if combine_bool and quantifier == "exists" and results[-1]:
                return True
        if combine_bool:
            return quantifier == "forall"
        if not results:
            return INF if quantifier == "forall" else -INF
        return min(results) if quantifier == "forall" else max(results)

    return rec(0, [])


def hyper_eval_bool(
    psi: HyperFormula,
    traces: Iterable[GeneralizedTimedTrace],
    assignment: Mapping[str, GeneralizedTimedTrace] | None = None,
    t: int = 0,
) -> bool:
    """Boolean satisfaction with quantifiers enumerating the trace set.

    ``assignment`` may pre-bind prefix variables; those skip their
    quantifier. An empty trace set makes exists false and forall true.
    """
    return _resolve(psi, tuple(traces), assignment or {}, t, combine_bool=True)


def hyper_eval_quant(
    psi: HyperFormula,
    traces: Iterable[GeneralizedTimedTrace],
    assignment: Mapping[str, GeneralizedTimedTrace] | None = None,
    t: int = 0,
) -> float:
    """Robustness with sup over exists bindings and inf over forall."""
    return _resolve(psi, tuple(traces), assignment or {}, t, combine_bool=False)
