"""Monte-Carlo falsification with Metropolis acceptance.

The search walks a Markov chain over candidate traces, always remembering
the lowest robustness seen so far.  A negative value is a counterexample;
the chain stops as soon as the current state goes negative, or when the
iteration budget runs out.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from .traces import GeneralizedTimedTrace, ext_sub, in_symbol


class SearchError(Exception):
    """A proposal left the domain of the robustness function.

    Carries the offending trace on ``.trace`` so callers can log or
    reproduce the failing input.
    """

    def __init__(self, message: str, trace):
        super().__init__(message)
        self.trace = trace


@dataclass(frozen=True)
class Adaptation:
    """Multiply beta by `factor` after `window` iterations without a new minimum."""

    window: int
    factor: float

    def __post_init__(self) -> None:
        if self.window < 1:
            raise ValueError("adaptation window must be at least 1")
        if self.factor <= 0:
            raise ValueError("adaptation factor must be positive")


@dataclass(frozen=True)
class FalsifierConfig:
    beta: float = 1.0
    max_iterations: int = 1000
    rng_seed: int = 0
    adaptation: Optional[Adaptation] = None

    def __post_init__(self) -> None:
        if self.beta <= 0:
            raise ValueError("beta must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if not 0 <= self.rng_seed < 2**64:
            raise ValueError("rng_seed must fit in 64 unsigned bits")


@dataclass(frozen=True)
class FalsificationOutcome:
    """What a falsification run observed.

    ``robustness_history`` starts with the initial state's robustness and
    then has one entry per proposal, accepted or not; ``accepted_history``
    is the parallel list of acceptance flags (the initial entry is True).
    """

    min_robustness: float
    argmin: object
    iterations_used: int
    falsified: bool
    robustness_history: tuple = ()
    accepted_history: tuple = ()

    def __post_init__(self) -> None:
        if self.robustness_history:
            assert self.min_robustness == min(self.robustness_history)
        assert self.falsified == (self.min_robustness < 0)


def falsify(
    R: Callable[[object], float],
    initial,
    propose: Callable[[object, random.Random], object],
    cfg: FalsifierConfig,
) -> FalsificationOutcome:
    """Search for a trace with negative robustness, Metropolis style.

    Each step proposes ``w' = propose(w, rng)``, draws a uniform ``r`` and
    accepts iff ``r <= exp(-beta * (R(w') - R(w)))``; downhill moves are
    therefore always taken.  The global minimum is tracked over every
    evaluated proposal, so a rejected excursion can still be the reported
    counterexample.  The walk stops once the *current* state is strictly
    negative (a zero keeps the search going) or the budget is spent.
    """
    rng = random.Random(cfg.rng_seed)
    beta = cfg.beta

    current = initial
    rho_current = _evaluate(R, initial)
    best_rho, best_trace = rho_current, initial
    history = [rho_current]
    accepted = [True]

    iterations = 0
    stale = 0
    while rho_current >= 0 and iterations < cfg.max_iterations:
        candidate = propose(current, rng)
        r = rng.random()
        rho_new = _evaluate(R, candidate)
        iterations += 1

        if rho_new < best_rho:
            best_rho, best_trace = rho_new, candidate
            stale = 0
        else:
            stale += 1
            if cfg.adaptation is not None and stale >= cfg.adaptation.window:
                beta *= cfg.adaptation.factor
                stale = 0

        delta = ext_sub(rho_new, rho_current)
        take = True if delta <= 0 else r <= math.exp(-beta * delta)
        history.append(rho_new)
        accepted.append(take)
        if take:
            current, rho_current = candidate, rho_new

    return FalsificationOutcome(
        min_robustness=best_rho,
        argmin=best_trace,
        iterations_used=iterations,
        falsified=best_rho < 0,
        robustness_history=tuple(history),
        accepted_history=tuple(accepted),
    )


def _evaluate(R, w) -> float:
    try:
        value = R(w)
    except Exception as exc:
        raise SearchError(f"robustness undefined on proposed trace: {exc}", w) from exc
    if value != value:  # NaN
        raise SearchError("robustness evaluated to NaN", w)
    return float(value)


def merge_restarts(outcomes: Sequence[FalsificationOutcome]) -> FalsificationOutcome:
    """Pick the best outcome of several independent restarts.

    Lowest minimum robustness wins; on a tie, the earliest restart in the
    given order (restarts are seeded in seed order, so this is the
    lowest-seed run).
    """
    if not outcomes:
        raise ValueError("merge_restarts needs at least one outcome")
    best = outcomes[0]
    for candidate in outcomes[1:]:
        if candidate.min_robustness < best.min_robustness:
            best = candidate
    return best


# ---------------------------------------------------------------------------
# Restricted input space


def _profile_values(w) -> tuple:
    if isinstance(w, GeneralizedTimedTrace):
        return w.values
    return tuple(w)


@dataclass(frozen=True)
class RestrictedInputSpace:
    """Inputs within the kappa_in tube of at least one standard trace."""

    std: tuple
    kappa_in: float
    d_in: Callable[[object, object], float]
    horizon: int

    def __post_init__(self) -> None:
        if not self.std:
            raise ValueError("restricted input space needs a non-empty standard set")
        if self.kappa_in < 0:
            raise ValueError("kappa_in must be non-negative")
        for ref in self.std:
            if len(_profile_values(ref)) != self.horizon:
                raise ValueError("standard trace length differs from the space horizon")


def _within_tube(values, ref, space: RestrictedInputSpace) -> bool:
    return all(
        space.d_in(in_symbol(a), in_symbol(b)) <= space.kappa_in
        for a, b in zip(values, _profile_values(ref))
    )


def membership(w, space: RestrictedInputSpace) -> bool:
    """True iff some standard trace is index-wise within kappa_in of `w`.

    The boundary counts as inside.
    """
    values = _profile_values(w)
    if len(values) != space.horizon:
        raise ValueError(
            f"trace has length {len(values)}, space horizon is {space.horizon}"
        )
    return any(_within_tube(values, ref, space) for ref in space.std)


def _witness_standard(values, space: RestrictedInputSpace):
    for ref in space.std:
        if _within_tube(values, ref, space):
            return _profile_values(ref)
    raise ValueError("profile is outside the restricted input space")


def propose_profile(
    w,
    space: RestrictedInputSpace,
    step_bound: float,
    rng: random.Random,
    max_window: int | None = None,
) -> tuple:
    """Shift one contiguous window of a speed profile by a random offset.

    Draws, in order: a window length, a window start, and a uniform offset
    in [-step_bound, step_bound].  Every touched sample is clamped back
    into the kappa_in tube around the standard trace that witnessed `w`'s
    membership, intersected with [0, oo), so the result stays inside the
    space by construction.
    """
    if step_bound < 0:
        raise ValueError("step_bound must be non-negative")
    if max_window is not None and max_window < 1:
        raise ValueError("max_window must be at least 1")
    values = list(_profile_values(w))
    if len(values) != space.horizon:
        raise ValueError("profile length differs from the space horizon")
    ref = _witness_standard(values, space)

    limit = len(values) if max_window is None else min(max_window, len(values))
    length = rng.randint(1, limit)
    start = rng.randint(0, len(values) - length)
    offset = rng.uniform(-step_bound, step_bound)

    for t in range(start, start + length):
        lo = max(0.0, ref[t] - space.kappa_in)
        hi = ref[t] + space.kappa_in
        shifted = min(hi, max(lo, values[t] + offset))
        # rounding in ref + kappa_in can overshoot the tube by an ulp
        while space.d_in(in_symbol(shifted), in_symbol(ref[t])) > space.kappa_in:
            shifted = math.nextafter(shifted, ref[t])
        values[t] = shifted
    return tuple(values)


# ---------------------------------------------------------------------------
# Surrogate-model loop


@dataclass(frozen=True)
class SurrogateRound:
    index: int
    outcome: FalsificationOutcome
    validator_robustness: Optional[float]
    verdict: str


@dataclass(frozen=True)
class SurrogateReport:
    rounds: tuple

    @property
    def final_verdict(self) -> str:
        return self.rounds[-1].verdict


def surrogate_loop(
    model,
    validator,
    build_r: Callable[[object], Callable[[object], float]],
    initial,
    propose: Callable[[object, random.Random], object],
    cfg: FalsifierConfig,
    max_rounds: int = 5,
) -> SurrogateReport:
    """Falsify a cheap model, then confirm hits on a reference system.

    ``build_r(system)`` must return the robustness function for that
    system.  When the model run finds a counterexample and a validator is
    available, the same input is re-scored on the validator.  Agreement
    (validator also negative) confirms the finding.  On disagreement the
    validated observation is fed to the model's ``absorb(input, output)``
    hook, if it has one, and the search restarts; a model without the hook
    cannot learn, so the disagreement is reported as final.

    With no validator the result is flagged "model-only", mirroring a test
    bench where the reference measurement is out of reach.
    """
    if max_rounds < 1:
        raise ValueError("max_rounds must be at least 1")
    rounds = []
    for index in range(max_rounds):
        outcome = falsify(build_r(model), initial, propose, cfg)
        if not outcome.falsified:
            rounds.append(SurrogateRound(index, outcome, None, "clean-within-budget"))
            break
        if validator is None:
            rounds.append(SurrogateRound(index, outcome, None, "model-only"))
            break
        rho_validated = build_r(validator)(outcome.argmin)
        if rho_validated < 0:
            rounds.append(SurrogateRound(index, outcome, rho_validated, "confirmed"))
            break
        rounds.append(SurrogateRound(index, outcome, rho_validated, "disagreement"))
        absorb = getattr(model, "absorb", None)
        if absorb is None:
            break
        absorb(outcome.argmin, validator(outcome.argmin))
    return SurrogateReport(rounds=tuple(rounds))
