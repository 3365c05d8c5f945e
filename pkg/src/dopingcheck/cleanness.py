"""Cleanness properties: quantified formulas, the self-composition
reduction, and brute-force oracles working straight off the definitions.

Two independent routes to every verdict exist on purpose. The formula
route builds temporal-logic trees and runs the generic evaluator; the
oracle route loops over trace indices with no logic machinery at all.
Property tests hold the two together.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .contracts import FuncContext, RobustContext
from .logic import (
    And,
    Formula,
    HyperFormula,
    Not,
    StdMember,
    Threshold,
    conjunction,
    disjunction,
    eval_bool,
    globally,
    implies,
    register_threshold_family,
    weak_until,
)
from .traces import (
    EqConfig,
    GeneralizedTimedTrace,
    eq_measure,
    ext_sub,
    in_symbol,
    out_symbol,
)

INF = math.inf

PSI_KINDS = ("l-rob", "u-rob", "l-fun", "u-fun")


@dataclass(frozen=True)
class ComposedTrace:
    """A subject trace zipped with every standard trace.

    Component 0 is the subject; components 1..c are the standards in
    declaration order. Values are tuples, so plain STL formulas whose
    thresholds index into the tuple can speak about all components.
    """

    subject: GeneralizedTimedTrace
    standards: tuple

    def __post_init__(self):
        horizons = {self.subject.horizon} | {w.horizon for w in self.standards}
        if len(horizons) != 1:
            raise ValueError(f"components disagree on horizon: {sorted(horizons)}")
        if not self.standards:
            raise ValueError("composition needs at least one standard trace")

    @property
    def components(self) -> tuple:
        return (self.subject,) + self.standards

    @property
    def horizon(self) -> int:
        return self.subject.horizon

    def value_at(self, t: int):
        return tuple(c.value_at(t) for c in self.components)


def self_compose(system: Sequence[GeneralizedTimedTrace], ctx) -> tuple:
    """One composed trace per system trace, standards in context order."""
    return tuple(ComposedTrace(w, tuple(ctx.std)) for w in system)


# ---------------------------------------------------------------------------
# Threshold families over composite values


def _eq_component(i: int, j: int, eq: EqConfig):
    return lambda vals: eq_measure(in_symbol(vals[i]), in_symbol(vals[j]), eq)


def _din_minus_kappa(i: int, j: int, d_in, kappa: float):
    return lambda vals: ext_sub(d_in(in_symbol(vals[i]), in_symbol(vals[j])), kappa)


def _dout_minus_kappa(i: int, j: int, d_out, kappa: float):
    return lambda vals: ext_sub(d_out(out_symbol(vals[i]), out_symbol(vals[j])), kappa)


def _dout_minus_f_of_din(i: int, j: int, fi: int, fj: int, d_out, d_in, f):
    def fn(vals):
        bound = f(d_in(in_symbol(vals[fi]), in_symbol(vals[fj])))
        return ext_sub(d_out(out_symbol(vals[i]), out_symbol(vals[j])), bound)

    return fn


register_threshold_family("eq-component", _eq_component)
register_threshold_family("din-minus-kappa", _din_minus_kappa)
register_threshold_family("dout-minus-kappa", _dout_minus_kappa)
register_threshold_family("dout-minus-f-of-din", _dout_minus_f_of_din)


def _leq0(threshold: Threshold) -> Formula:
    """Encode g <= 0 as the negation of the g > 0 atom."""
    return Not(threshold)


def _eq_atom(i, j, names, eq) -> Formula:
    label = f"eq(in|{names[i]}, in|{names[j]})"
    return _leq0(Threshold(_eq_component(i, j, eq), label))


def _din_atom(i, j, names, d_in, kappa) -> Threshold:
    label = f"dIn(in|{names[i]}, in|{names[j]}) - {kappa!r}"
    return Threshold(_din_minus_kappa(i, j, d_in, kappa), label)


def _dout_atom(i, j, names, d_out, kappa) -> Formula:
    label = f"dOut(out|{names[i]}, out|{names[j]}) - {kappa!r}"
    return _leq0(Threshold(_dout_minus_kappa(i, j, d_out, kappa), label))


def _fun_atom(i, j, names, d_out, d_in, f) -> Formula:
    label = (
        f"dOut(out|{names[i]}, out|{names[j]})"
        f" - f(dIn(in|{names[i]}, in|{names[j]}))"
    )
    return _leq0(Threshold(_dout_minus_f_of_din(i, j, i, j, d_out, d_in, f), label))


def _std_atom(index: int, name: str, std) -> StdMember:
    return StdMember(index, tuple(std), f"Std({name})")


# ---------------------------------------------------------------------------
# The quantified cleanness formulas


def build_psi(kind: str, ctx, contract_form: bool = False) -> HyperFormula:
    """The three-quantifier cleanness formula of the requested flavour.

    The upper variants normally require the witness trace to be
    standard itself; ``contract_form`` drops that conjunct for
    experiments where the standard is given as inputs only.
    """
    if kind not in PSI_KINDS:
        raise ValueError(f"kind must be one of {PSI_KINDS}, got {kind!r}")
    robust = kind.endswith("rob")
    if robust and not isinstance(ctx, RobustContext):
        raise TypeError("robust formulas need a RobustContext")
    if not robust and not isinstance(ctx, FuncContext):
        raise TypeError("func formulas need a FuncContext")
    std = tuple(ctx.std)
    lower = kind.startswith("l-")

    if lower:
        names = ("pi1", "pi2", "pi2p")
        prefix = (("forall", "pi1"), ("forall", "pi2"), ("exists", "pi2p"))
        # The witness mimics the subject pi2; obligations compare it
        # against the standard-side pi1.
        eq_pair, obligation_pair = (1, 2), (0, 2)
    else:
        names = ("pi1", "pi2", "pi1p")
        prefix = (("forall", "pi1"), ("forall", "pi2"), ("exists", "pi1p"))
        # The witness mimics the standard-side pi1; obligations compare
        # it against the subject pi2.
        eq_pair, obligation_pair = (0, 2), (2, 1)

    parts = []
    if not lower and not contract_form:
        parts.append(_std_atom(2, names[2], std))
    parts.append(globally(_eq_atom(*eq_pair, names, ctx.eq)))
    oi, oj = obligation_pair
    if robust:
        parts.append(
            weak_until(
                _dout_atom(oi, oj, names, ctx.d_out, ctx.kappa_out),
                _din_atom(oi, oj, names, ctx.d_in, ctx.kappa_in),
            )
        )
    else:
        parts.append(globally(_fun_atom(oi, oj, names, ctx.d_out, ctx.d_in, ctx.f)))

    body = implies(_std_atom(0, names[0], std), conjunction(parts))
    return HyperFormula(prefix, body)


def _composition_names(count: int) -> tuple:
    return ("w",) + tuple(f"std{i}" for i in range(1, count + 1))


def build_phi_u_rob(ctx: RobustContext) -> Formula:
    """Upper robust cleanness as a plain STL formula over compositions."""
    c = len(ctx.std)
    names = _composition_names(c)
    conjuncts = []
    for a in range(1, c + 1):
        branches = []
        for b in range(1, c + 1):
            branches.append(
                And(
                    globally(_eq_atom(a, b, names, ctx.eq)),
                    weak_until(
                        _dout_atom(b, 0, names, ctx.d_out, ctx.kappa_out),
                        _din_atom(b, 0, names, ctx.d_in, ctx.kappa_in),
                    ),
                )
            )
        conjuncts.append(disjunction(branches))
    return conjunction(conjuncts)


def build_phi_u_fun(ctx: FuncContext) -> Formula:
    """Upper func cleanness over compositions; the output bound tracks
    the pointwise input distance through f."""
    c = len(ctx.std)
    names = _composition_names(c)
    conjuncts = []
    for a in range(1, c + 1):
        branches = []
        for b in range(1, c + 1):
            branches.append(
                And(
                    globally(_eq_atom(a, b, names, ctx.eq)),
                    globally(_fun_atom(b, 0, names, ctx.d_out, ctx.d_in, ctx.f)),
                )
            )
        conjuncts.append(disjunction(branches))
    return conjunction(conjuncts)


def satisfies_phi(system: Sequence[GeneralizedTimedTrace], ctx, phi: Formula) -> bool:
    """Model relation for the composition route: every composed trace
    must satisfy phi at time zero."""
    return all(eval_bool(phi, comp, 0) for comp in self_compose(system, ctx))


# ---------------------------------------------------------------------------
# Definition-level oracles


@dataclass(frozen=True)
class CleannessViolation:
    """Diagnosis of one failed clause.

    ``standard`` and ``subject`` are the first failing universally
    quantified pair in enumeration order. ``best_alternative`` is the
    existential candidate that survives longest, ``fail_time`` the step
    at which even it breaks its bound, and ``witness_pair`` the two
    traces whose outputs demonstrate the violation.
    """

    clause: str
    standard: GeneralizedTimedTrace
    subject: GeneralizedTimedTrace
    best_alternative: GeneralizedTimedTrace
    fail_time: int
    witness_pair: tuple


@dataclass(frozen=True)
class CleannessVerdict:
    clean: bool
    violation: CleannessViolation | None = None


def _input_projection_equal(a: GeneralizedTimedTrace, b: GeneralizedTimedTrace) -> bool:
    return all(
        in_symbol(a.value_at(t)) == in_symbol(b.value_at(t)) for t in range(a.horizon)
    )


def _first_failure(
    premise_ok: Callable[[int], bool], consequent_ok: Callable[[int], bool], horizon: int
) -> int | None:
    """First step where the premise holds so far but the bound breaks."""
    for k in range(horizon):
        if not premise_ok(k):
            # Premises are prefix-closed here, so nothing later binds.
            return None
        if not consequent_ok(k):
            return k
    return None


def _clause_check(
    sigma: GeneralizedTimedTrace,
    subject: GeneralizedTimedTrace,
    candidates: Sequence[GeneralizedTimedTrace],
    candidate_matches,
    premise_ok,
    consequent_ok,
    horizon: int,
):
    """Shared exists-a-candidate scan. Returns None when some candidate
    satisfies its obligation, else the best-surviving candidate and its
    failure time."""
    best = None
    best_time = -1
    for cand in candidates:
        if not candidate_matches(cand):
            continue
        fail = _first_failure(
            lambda k: premise_ok(k),
            lambda k, _c=cand: consequent_ok(_c, k),
            horizon,
        )
        if fail is None:
            return None
        if fail > best_time:
            best, best_time = cand, fail
    if best is None:
        raise AssertionError("no eligible candidate; reflexive candidate missing")
    return best, best_time


def _robust_premise(ctx: RobustContext, sigma, subject):
    def ok(k: int) -> bool:
        d = ctx.d_in(in_symbol(sigma.value_at(k)), in_symbol(subject.value_at(k)))
        return d <= ctx.kappa_in

    return ok


def _scan_pairs(system, std, check_pair):
    for sigma in std:
        for subject in system:
            violation = check_pair(sigma, subject)
            if violation is not None:
                return violation
    return None


def oracle_robustly_clean(
    system: Sequence[GeneralizedTimedTrace], ctx: RobustContext, clause: str = "both"
) -> CleannessVerdict:
    """Exhaustive check of robust cleanness straight off the definition.

    With clause="both" each universally quantified pair is checked for
    the lower and the upper obligation; when both fail, the one whose
    best candidate survives longer is reported, since that diagnosis
    names the tightest near-miss.
    """
    _require_std_subset(system, ctx)
    horizon = ctx.std[0].horizon

    def check_l(sigma, subject):
        premise = _robust_premise(ctx, sigma, subject)
        result = _clause_check(
            sigma,
            subject,
            system,
            lambda cand: _input_projection_equal(subject, cand),
            premise,
            lambda cand, k: ctx.d_out(
                out_symbol(sigma.value_at(k)), out_symbol(cand.value_at(k))
            )
            <= ctx.kappa_out,
            horizon,
        )
        if result is None:
            return None
        best, fail = result
        return CleannessViolation("l", sigma, subject, best, fail, (sigma, best))

    def check_u(sigma, subject):
        premise = _robust_premise(ctx, sigma, subject)
        result = _clause_check(
            sigma,
            subject,
            ctx.std,
            lambda cand: _input_projection_equal(sigma, cand),
            premise,
            lambda cand, k: ctx.d_out(
                out_symbol(subject.value_at(k)), out_symbol(cand.value_at(k))
            )
            <= ctx.kappa_out,
            horizon,
        )
        if result is None:
            return None
        best, fail = result
        return CleannessViolation("u", sigma, subject, best, fail, (best, subject))

    return _run_clauses(system, ctx, clause, check_l, check_u)


def oracle_func_clean(
    system: Sequence[GeneralizedTimedTrace], ctx: FuncContext, clause: str = "both"
) -> CleannessVerdict:
    """Exhaustive func-cleanness check; the bound at step k is f applied
    to the input distance between the standard and the subject at k."""
    _require_std_subset(system, ctx)
    horizon = ctx.std[0].horizon

    def bound_at(sigma, subject, k):
        return ctx.f(ctx.d_in(in_symbol(sigma.value_at(k)), in_symbol(subject.value_at(k))))

    def check_l(sigma, subject):
        result = _clause_check(
            sigma,
            subject,
            system,
            lambda cand: _input_projection_equal(subject, cand),
            lambda k: True,
            lambda cand, k: ctx.d_out(
                out_symbol(sigma.value_at(k)), out_symbol(cand.value_at(k))
            )
            <= bound_at(sigma, subject, k),
            horizon,
        )
        if result is None:
            return None
        best, fail = result
        return CleannessViolation("l", sigma, subject, best, fail, (sigma, best))

    def check_u(sigma, subject):
        result = _clause_check(
            sigma,
            subject,
            ctx.std,
            lambda cand: _input_projection_equal(sigma, cand),
            lambda k: True,
            lambda cand, k: ctx.d_out(
                out_symbol(subject.value_at(k)), out_symbol(cand.value_at(k))
            )
            <= bound_at(sigma, subject, k),
            horizon,
        )
        if result is None:
            return None
        best, fail = result
        return CleannessViolation("u", sigma, subject, best, fail, (best, subject))

    return _run_clauses(system, ctx, clause, check_l, check_u)


def _run_clauses(system, ctx, clause, check_l, check_u) -> CleannessVerdict:
    if clause not in ("both", "l", "u"):
        raise ValueError(f"clause must be both, l or u, got {clause!r}")

    def check_pair(sigma, subject):
        l_violation = check_l(sigma, subject) if clause in ("both", "l") else None
        u_violation = check_u(sigma, subject) if clause in ("both", "u") else None
        if l_violation is None:
            return u_violation
        if u_violation is None:
            return l_violation
        return u_violation if u_violation.fail_time > l_violation.fail_time else l_violation

    violation = _scan_pairs(system, ctx.std, check_pair)
    if violation is None:
        return CleannessVerdict(True)
    return CleannessVerdict(False, violation)


def _require_std_subset(system, ctx) -> None:
    for w in ctx.std:
        if w not in tuple(system):
            raise ValueError("standard traces must be part of the checked system")


@dataclass(frozen=True)
class DeterministicContract:
    """Standard inputs, distances and bound for stateless systems that
    map one input to one output."""

    std_in: tuple
    d_in: Callable
    d_out: Callable
    f: Callable


@dataclass(frozen=True)
class DetViolation:
    standard_input: object
    other_input: object
    output_distance: float
    bound: float


@dataclass(frozen=True)
class DetVerdict:
    clean: bool
    violation: DetViolation | None = None


def oracle_func_clean_det(
    P: Callable, contract: DeterministicContract, grid: Iterable
) -> DetVerdict:
    """Func cleanness for a deterministic system over a finite grid:
    every output must stay within f of the input distance from every
    standard input. Returns the first violating pair found."""
    grid = tuple(grid)
    for i in contract.std_in:
        base = P(i)
        for j in grid:
            d = contract.d_out(base, P(j))
            bound = contract.f(contract.d_in(i, j))
            if d > bound:
                return DetVerdict(False, DetViolation(i, j, d, bound))
    return DetVerdict(True)
