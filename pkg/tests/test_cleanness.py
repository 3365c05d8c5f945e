"""Cleanness formulas and the exhaustive oracles.

The two fixture scenarios were worked out on paper first; the frozen
values below (clause, failing step, witness robustness) come from that
derivation, not from running the code.
"""
from __future__ import annotations

import random

import pytest

from dopingcheck import (
    ComposedTrace,
    DeterministicContract,
    DistanceFn,
    EqConfig,
    FuncContext,
    MixedIn,
    MixedOut,
    Not,
    PairIO,
    PiecewiseLinear,
    RobustContext,
    Threshold,
    build_phi_u_fun,
    build_phi_u_rob,
    build_psi,
    eval_bool,
    eval_quant,
    hyper_eval_bool,
    in_symbol,
    oracle_func_clean,
    oracle_func_clean_det,
    oracle_robustly_clean,
    out_symbol,
    satisfies_phi,
    self_compose,
    trace,
    weak_until,
)


def test_interleaved_subject_accepted(interleaved):
    ctx, subject = interleaved
    phi = build_phi_u_rob(ctx)
    assert eval_bool(phi, ComposedTrace(subject, ctx.std), 0) is True


def test_interleaved_clause_robustness_by_hand(interleaved):
    """Rebuild the two obligation clauses from raw thresholds.

    Against the first standard the output gap peaks at 1 (outputs 7 vs
    6), leaving a margin of 5 under the tolerance of 6.  Against the
    second the input projections diverge hard at step 3, releasing the
    obligation with the full margin of 6.
    """
    ctx, subject = interleaved
    comp = ComposedTrace(subject, ctx.std)

    def clause(k):
        lhs = Not(
            Threshold(
                lambda vals, k=k: ctx.d_out(
                    out_symbol(vals[k]), out_symbol(vals[0])
                )
                - ctx.kappa_out,
                "gap",
            )
        )
        rhs = Threshold(
            lambda vals, k=k: ctx.d_in(in_symbol(vals[k]), in_symbol(vals[0]))
            - ctx.kappa_in,
            "drift",
        )
        return weak_until(lhs, rhs)

    assert eval_quant(clause(1), comp, 0) == 5.0
    assert eval_quant(clause(2), comp, 0) == 6.0
    # the full formula bottoms out at the eq-guard equality, hence zero
    assert eval_quant(build_phi_u_rob(ctx), comp, 0) == 0.0


def test_lockstep_system_is_clean_until_the_offender_joins(lockstep):
    ctx = lockstep["ctx"]
    assert oracle_robustly_clean(lockstep["clean"], ctx).clean
    verdict = oracle_robustly_clean(lockstep["dirty"], ctx)
    assert not verdict.clean
    violation = verdict.violation
    assert violation.clause == "u"
    assert violation.fail_time == 3
    assert violation.witness_pair == (lockstep["w1"], lockstep["offender"])


def test_lockstep_hyper_formulas_flip_on_the_offender(lockstep):
    ctx = lockstep["ctx"]
    for kind in ("l-rob", "u-rob"):
        psi = build_psi(kind, ctx)
        assert hyper_eval_bool(psi, lockstep["clean"]) is True
    assert hyper_eval_bool(build_psi("u-rob", ctx), lockstep["dirty"]) is False


def test_composed_formula_route_matches_the_oracle(lockstep):
    ctx = lockstep["ctx"]
    phi = build_phi_u_rob(ctx)
    assert satisfies_phi(lockstep["clean"], ctx, phi) is True
    assert satisfies_phi(lockstep["dirty"], ctx, phi) is False


def test_self_composition_pairs_every_subject_with_the_standards(lockstep):
    ctx = lockstep["ctx"]
    composed = self_compose(lockstep["clean"], ctx)
    assert len(composed) == 4
    assert all(isinstance(c, ComposedTrace) for c in composed)
    assert composed[0].components[0] is lockstep["clean"][0]
    assert composed[0].components[1:] == tuple(ctx.std)


def test_composed_trace_checks_horizons(lockstep):
    short = trace([PairIO(1.0, 1.0)], 1)
    with pytest.raises(ValueError):
        ComposedTrace(short, lockstep["ctx"].std)


def test_psi_render_shape(lockstep):
    psi = build_psi("u-rob", lockstep["ctx"])
    assert psi.render().startswith("Api1 Api2 Epi1p. ")
    lower = build_psi("l-rob", lockstep["ctx"])
    assert lower.render().startswith("Api1 Api2 Epi2p. ")


def test_psi_contract_form_drops_the_membership_conjunct(lockstep):
    ctx = lockstep["ctx"]
    strict = build_psi("u-rob", ctx)
    relaxed = build_psi("u-rob", ctx, contract_form=True)
    assert strict != relaxed
    # both agree on the fixture system either way
    assert hyper_eval_bool(relaxed, lockstep["clean"]) is True
    assert hyper_eval_bool(relaxed, lockstep["dirty"]) is False


def test_psi_kind_and_context_type_are_validated(lockstep):
    ctx = lockstep["ctx"]
    with pytest.raises(ValueError):
        build_psi("upper", ctx)
    with pytest.raises(TypeError):
        build_psi("u-fun", ctx)
    fun_ctx = FuncContext(
        std=ctx.std,
        d_in=ctx.d_in,
        d_out=ctx.d_out,
        eq=ctx.eq,
        f=PiecewiseLinear(((0.0, 1.0, 1.0, 2.0),)),
    )
    with pytest.raises(TypeError):
        build_psi("u-rob", fun_ctx)


def test_oracle_requires_standards_inside_the_system(lockstep):
    ctx = lockstep["ctx"]
    with pytest.raises(ValueError):
        oracle_robustly_clean(lockstep["clean"][2:], ctx)


def test_oracle_clause_selection(lockstep):
    ctx = lockstep["ctx"]
    dirty = lockstep["dirty"]
    assert not oracle_robustly_clean(dirty, ctx, clause="u").clean
    assert not oracle_robustly_clean(dirty, ctx, clause="l").clean
    with pytest.raises(ValueError):
        oracle_robustly_clean(dirty, ctx, clause="upper")


def test_func_oracle_on_the_lockstep_system(lockstep):
    ctx = lockstep["ctx"]
    generous = FuncContext(
        std=ctx.std,
        d_in=ctx.d_in,
        d_out=ctx.d_out,
        eq=ctx.eq,
        f=PiecewiseLinear(((0.0, 1.0, 0.0, 100.0),)),
    )
    assert oracle_func_clean(lockstep["dirty"], generous).clean
    tight = FuncContext(
        std=ctx.std,
        d_in=ctx.d_in,
        d_out=ctx.d_out,
        eq=ctx.eq,
        f=PiecewiseLinear(((0.0, 1.0, 0.0, 3.0),)),
    )
    verdict = oracle_func_clean(lockstep["dirty"], tight)
    assert not verdict.clean
    assert verdict.violation.witness_pair[1] is lockstep["offender"]


# --- three-route agreement on random small systems -------------------------


def _random_mixed_system(rng):
    horizon = rng.randint(2, 6)
    count = rng.randint(2, 5)
    std_count = rng.randint(1, min(3, count))

    def make():
        values = []
        for _ in range(rng.randint(1, horizon)):
            value = float(rng.randint(0, 3))
            values.append(MixedIn(value) if rng.random() < 0.6 else MixedOut(value))
        return trace(values, horizon)

    system = [make() for _ in range(count)]
    # duplicate-input standards exercise the eq guard's escape routes
    if rng.random() < 0.4 and count >= 2:
        system[1] = system[0]
    return tuple(system), tuple(system[:std_count])


def _random_robust_ctx(rng, std):
    d_in = DistanceFn("abs-diff-mixed-in")
    return RobustContext(
        std=std,
        d_in=d_in,
        d_out=DistanceFn("abs-diff-mixed-out"),
        kappa_in=rng.choice([0.5, 1.0, 2.0]),
        kappa_out=rng.choice([0.5, 1.0, 2.0]),
        eq=EqConfig(d_in),
    )


def test_routes_agree_on_random_systems():
    rng = random.Random(99)
    verdicts = set()
    for _ in range(60):
        system, std = _random_mixed_system(rng)
        ctx = _random_robust_ctx(rng, std)
        by_phi = satisfies_phi(system, ctx, build_phi_u_rob(ctx))
        by_psi = hyper_eval_bool(build_psi("u-rob", ctx), system)
        by_oracle = oracle_robustly_clean(system, ctx, clause="u").clean
        assert by_phi == by_psi == by_oracle
        verdicts.add(by_oracle)
    assert verdicts == {True, False}


def test_func_routes_agree_on_random_systems():
    rng = random.Random(101)
    verdicts = set()
    for _ in range(40):
        system, std = _random_mixed_system(rng)
        base = _random_robust_ctx(rng, std)
        ctx = FuncContext(
            std=std,
            d_in=base.d_in,
            d_out=base.d_out,
            eq=base.eq,
            f=PiecewiseLinear(((0.0, 2.0, rng.choice([0.0, 1.0]), rng.choice([0.5, 1.0, 2.0])),)),
        )
        by_phi = satisfies_phi(system, ctx, build_phi_u_fun(ctx))
        by_psi = hyper_eval_bool(build_psi("u-fun", ctx), system)
        by_oracle = oracle_func_clean(system, ctx, clause="u").clean
        assert by_phi == by_psi == by_oracle
        verdicts.add(by_oracle)
    assert verdicts == {True, False}


# --- deterministic single-output systems -----------------------------------


def test_deterministic_func_cleanness():
    contract = DeterministicContract(
        std_in=(0.0,),
        d_in=DistanceFn("abs-diff-scalar"),
        d_out=DistanceFn("abs-diff-scalar"),
        f=PiecewiseLinear(((0.0, 10.0, 1.0, 0.1),)),
    )
    gentle = lambda x: 0.5 * x
    verdict = oracle_func_clean_det(gentle, contract, [0.0, 1.0, 2.0, 5.0])
    assert verdict.clean

    step = lambda x: 0.0 if x < 3.0 else 10.0
    verdict = oracle_func_clean_det(step, contract, [0.0, 1.0, 2.0, 5.0])
    assert not verdict.clean
    assert verdict.violation.other_input == 5.0
    # gap 10 versus allowance f(5) = 5.1
    assert verdict.violation.output_distance == 10.0
    assert verdict.violation.bound == pytest.approx(5.1)
