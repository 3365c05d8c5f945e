"""Individual-fairness scoring and monitoring.

The fairness score of a pair of inputs is the contract bound minus the
observed output distance; negative means the pair witnesses unfair
treatment.  The monitor walks the input space looking for the worst such
pair for a set of actual inputs, and the aware wrapper turns that into a
normalized per-decision verdict.  Two piecewise-linear HR scoring systems
ship as reference subjects.
"""
from __future__ import annotations

import csv
import math
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence, Tuple

from .contracts import FairnessContract, PiecewiseLinear
from .falsify import FalsifierConfig
from .traces import INF, DataError, DistanceFn, ext_sub


class MonitoringError(Exception):
    """The monitored system failed to evaluate an input.

    ``offending_input`` holds the input that triggered the failure.
    """

    def __init__(self, message: str, offending_input):
        super().__init__(message)
        self.offending_input = offending_input


def _call(P, i):
    try:
        return P(i)
    except Exception as exc:
        raise MonitoringError(f"system evaluation failed on {i!r}: {exc}", i) from exc


@dataclass(frozen=True)
class FairnessScoreTriple:
    score: float
    actual: tuple
    synthetic: tuple


@dataclass(frozen=True)
class FairnessVerdict:
    """One decision plus the fairness evidence gathered for it.

    ``normalized_score`` divides the worst raw score by the contract
    bound at the witnessing pair; -inf is the sentinel for a violated
    bound of zero.  ``counterpart`` is the (input, output) of the
    synthetic individual that witnessed the minimum.
    """

    system_output: float
    score: float
    f_of_din: float
    d_out: float
    normalized_score: float
    counterpart: tuple

    @property
    def maximally_unfair(self) -> bool:
        return self.normalized_score == -INF


def fairness_score(P, c: FairnessContract, i_r, i_s) -> float:
    """Contract bound at the input distance, minus the output distance."""
    bound = c.f(c.d_in(i_r, i_s))
    gap = c.d_out(_call(P, i_r), _call(P, i_s))
    return ext_sub(bound, gap)


def fairness_score_min(P, c: FairnessContract, inputs: Sequence, i_s) -> FairnessScoreTriple:
    """Worst score of one synthetic input against a whole set of actual ones.

    Ties keep the earliest actual input in enumeration order.
    """
    if not inputs:
        raise ValueError("at least one actual input is required")
    best: Optional[FairnessScoreTriple] = None
    for i_r in inputs:
        triple = FairnessScoreTriple(fairness_score(P, c, i_r, i_s), tuple(i_r), tuple(i_s))
        if best is None or triple.score < best.score:
            best = triple
    return best


def vector_proposal(step_bound: float, ranges: Sequence[Tuple[float, float]]):
    """Default proposal scheme for fixed-length input vectors.

    Picks one component uniformly, shifts it by a uniform step within
    ``step_bound``, and clamps to that component's declared range.  The
    system output of the current synthetic input is accepted and ignored;
    custom schemes may make use of it.
    """
    if step_bound < 0:
        raise ValueError("step_bound must be non-negative")
    frozen = tuple((float(lo), float(hi)) for lo, hi in ranges)
    for lo, hi in frozen:
        if lo > hi:
            raise ValueError(f"empty component range ({lo}, {hi})")

    def propose(i_s, _output, rng: random.Random):
        if len(i_s) != len(frozen):
            raise ValueError(f"expected {len(frozen)} components, got {len(i_s)}")
        index = rng.randrange(len(frozen))
        lo, hi = frozen[index]
        shifted = i_s[index] + rng.uniform(-step_bound, step_bound)
        out = list(i_s)
        out[index] = min(hi, max(lo, shifted))
        return tuple(out)

    return propose


def fairness_monitor(
    P,
    c: FairnessContract,
    inputs: Sequence,
    cfg: FalsifierConfig,
    proposal=None,
    probe_log: Optional[list] = None,
) -> FairnessScoreTriple:
    """Minimize the fairness score over synthetic counterparts.

    The chain starts at the first actual input.  Each proposed synthetic
    input is scored against every actual input, the worst pair updates the
    global minimum before the Metropolis acceptance step, and the run
    always uses its full iteration budget: even without a violation the
    returned minimum says how close to the bound the set of individuals
    sits.  When ``probe_log`` is given, every probed (actual, synthetic)
    pair is appended as a scored triple.
    """
    actuals = tuple(tuple(i) for i in inputs)
    if not actuals:
        raise ValueError("at least one actual input is required")
    if proposal is None:
        proposal = vector_proposal(0.1, ((0.0, 1.0),) * len(actuals[0]))
    rng = random.Random(cfg.rng_seed)
    beta = cfg.beta
    out_actual = tuple(_call(P, i) for i in actuals)

    def min_triple(i_s, out_s) -> FairnessScoreTriple:
        best = None
        for i_r, o_r in zip(actuals, out_actual):
            score = ext_sub(c.f(c.d_in(i_r, i_s)), c.d_out(o_r, out_s))
            if probe_log is not None:
                probe_log.append(FairnessScoreTriple(score, i_r, i_s))
            if best is None or score < best.score:
                best = FairnessScoreTriple(score, i_r, i_s)
        return best

    i_s = actuals[0]
    out_s = out_actual[0]
    current = min_triple(i_s, out_s)
    global_min = current

    stale = 0
    for _ in range(cfg.max_iterations):
        i_new = tuple(proposal(i_s, out_s, rng))
        r = rng.random()
        out_new = _call(P, i_new)
        candidate = min_triple(i_new, out_new)

        if candidate.score < global_min.score:
            global_min = candidate
            stale = 0
        else:
            stale += 1
            if cfg.adaptation is not None and stale >= cfg.adaptation.window:
                beta *= cfg.adaptation.factor
                stale = 0

        delta = ext_sub(candidate.score, current.score)
        if delta <= 0 or r <= math.exp(-beta * delta):
            i_s, out_s, current = i_new, out_new, candidate
    return global_min


def fairness_aware(
    P,
    c: FairnessContract,
    i_r,
    cfg: Optional[FalsifierConfig] = None,
    proposal=None,
) -> FairnessVerdict:
    """Decide one input and report how fairly it was treated.

    Runs the monitor with just this individual as the actual input, then
    normalizes the minimal score by the contract bound at the witnessing
    pair.  A bound of zero cannot normalize: a zero score then stays 0
    (the edge of unfair) and a negative one becomes -inf, rendered as
    maximally unfair, because any positive output gap breaks a zero
    tolerance infinitely hard.
    """
    if cfg is None:
        cfg = FalsifierConfig(max_iterations=10_000)
    actual = tuple(i_r)
    triple = fairness_monitor(P, c, (actual,), cfg, proposal)
    own_output = _call(P, actual)
    counter_output = _call(P, triple.synthetic)
    bound = c.f(c.d_in(actual, triple.synthetic))
    gap = c.d_out(own_output, counter_output)
    if bound > 0:
        normalized = triple.score / bound
    elif triple.score == 0:
        normalized = 0.0
    else:
        normalized = -INF
    return FairnessVerdict(
        system_output=own_output,
        score=triple.score,
        f_of_din=bound,
        d_out=gap,
        normalized_score=normalized,
        counterpart=(triple.synthetic, counter_output),
    )


# ---------------------------------------------------------------------------
# Lipschitz-style checking


@dataclass(frozen=True)
class LipschitzSpec:
    L: float

    def __post_init__(self) -> None:
        if self.L <= 0:
            raise ValueError("Lipschitz constant must be positive")


@dataclass(frozen=True)
class LipschitzReport:
    clean: bool
    max_ratio: float
    witness: Optional[tuple]


def lipschitz_check(P, d_in, d_out, spec: LipschitzSpec, grid: Iterable) -> LipschitzReport:
    """Exhaustive pairwise slope check over a finite grid.

    Reports the steepest output-to-input distance ratio and the pair that
    produced it.  Two inputs at distance zero with differing outputs force
    an infinite ratio; at identical outputs they impose no constraint.
    """
    points = tuple(tuple(i) for i in grid)
    outputs = [_call(P, i) for i in points]
    max_ratio = 0.0
    witness: Optional[tuple] = None
    for a in range(len(points)):
        for b in range(a + 1, len(points)):
            din = d_in(points[a], points[b])
            dout = d_out(outputs[a], outputs[b])
            if din == 0:
                if dout == 0:
                    continue
                ratio = INF
            else:
                ratio = dout / din
            if witness is None or ratio > max_ratio:
                max_ratio = ratio
                witness = (points[a], points[b])
    return LipschitzReport(clean=max_ratio <= spec.L, max_ratio=max_ratio, witness=witness)


# ---------------------------------------------------------------------------
# Reference HR scorers and bound


#: Demonstration bound for the HR examples: tight for near-identical
#: applicants, looser as profiles drift apart, extrapolating its last
#: slope beyond distance 1.
REFERENCE_BOUND = PiecewiseLinear((
    (0.0, 0.01, 8.0, 0.001),
    (0.01, 0.1, 4.0, 0.001),
    (0.1, 1.0, 2.0, 0.001),
))

#: Ready-made applicant profiles used by examples and tests: identical
#: average marks everywhere except the skill component.
JOHN = (0.5, 0.5, 0.5, 0.5, 0.2)
SYNTHIA = (0.5, 0.5, 0.5, 0.5, 0.19)
SYNCLAIR = (0.5, 0.5, 0.5, 0.5, 0.13)

_COMMON_ANCHORS = ((0.0, 0.12), (0.5, 0.12), (1.0, 0.2))
_SKILL_ANCHORS = {
    # A modest step around a skill mark of 0.2.
    "mild": ((0.0, 0.0), (0.19, 0.02), (0.2, 0.05), (1.0, 0.2)),
    # A cliff just above 0.13: tiny skill differences there swing the
    # subscore by 0.17, which is what makes the scorer unfair.
    "steep": ((0.0, 0.0), (0.13, 0.01), (0.14, 0.18), (0.2, 0.19), (1.0, 0.2)),
}

HR_VARIANTS = tuple(sorted(_SKILL_ANCHORS))


def _piecewise_anchor(anchors, x: float) -> float:
    if x <= anchors[0][0]:
        return anchors[0][1]
    for (x0, y0), (x1, y1) in zip(anchors, anchors[1:]):
        if x <= x1:
            return y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    return anchors[-1][1]


def hr_reference_system(variant: str) -> Callable[[Sequence[float]], float]:
    """A scorer summing five subscores over marks in [0, 1].

    Education, experience, personality, and interview share one rubric:
    base credit 0.12 for anything up to the midpoint, rising to 0.2 for
    excellence beyond it.  The skill mark uses the variant-specific curve.
    "mild" rewards skill with a small step near 0.2, "steep" adds a sharp
    reward cliff just above 0.13.  Every subscore stays within [0, 0.2],
    so totals live in [0, 1].
    """
    try:
        skill_anchors = _SKILL_ANCHORS[variant]
    except KeyError:
        raise ValueError(
            f"unknown variant {variant!r}, expected one of {HR_VARIANTS}"
        ) from None

    def score(marks: Sequence[float]) -> float:
        marks = tuple(marks)
        if len(marks) != 5:
            raise ValueError(f"expected five marks, got {len(marks)}")
        for m in marks:
            if not 0.0 <= m <= 1.0:
                raise ValueError(f"mark {m!r} outside [0, 1]")
        total = sum(_piecewise_anchor(_COMMON_ANCHORS, m) for m in marks[:4])
        return total + _piecewise_anchor(skill_anchors, marks[4])

    return score


def hr_contract() -> FairnessContract:
    """The contract paired with the reference scorers: normalized Euclidean
    distance over the five marks against absolute score difference, bounded
    by REFERENCE_BOUND."""
    return FairnessContract(
        d_in=DistanceFn("euclid-normalized", (5,)),
        d_out=DistanceFn("abs-diff-scalar"),
        f=REFERENCE_BOUND,
    )


# ---------------------------------------------------------------------------
# Table-backed systems


class TableSystem:
    """A finite system given literally as rows of (input vector, output).

    Lookup is exact; asking for an input outside the table is an error,
    which keeps monitoring honest about the system's actual domain.
    """

    def __init__(self, rows: Iterable[Tuple[Sequence[float], float]]):
        mapping = {}
        for inp, out in rows:
            mapping[tuple(float(x) for x in inp)] = float(out)
        if not mapping:
            raise ValueError("table system needs at least one row")
        widths = {len(k) for k in mapping}
        if len(widths) != 1:
            raise ValueError("all table rows must have the same input width")
        self._map = mapping
        self.inputs = tuple(mapping)

    def __len__(self) -> int:
        return len(self._map)

    def __call__(self, i) -> float:
        key = tuple(i)
        try:
            return self._map[key]
        except KeyError:
            raise KeyError(f"input not in table: {key!r}") from None


def table_proposal(table: TableSystem):
    """Proposal scheme that jumps to a uniformly chosen table row."""

    def propose(_i_s, _output, rng: random.Random):
        return table.inputs[rng.randrange(len(table.inputs))]

    return propose


def load_table_system(path) -> TableSystem:
    """Read a table system from CSV: all-numeric rows, output in the last column."""
    path = Path(path)
    rows = []
    with path.open(newline="") as fh:
        for row_no, row in enumerate(csv.reader(fh), start=1):
            if not row:
                continue
            if len(row) < 2:
                raise DataError(f"{path}: row {row_no}: need at least one input and an output")
            try:
                values = [float(cell) for cell in row]
            except ValueError as exc:
                raise DataError(f"{path}: row {row_no}: {exc}") from None
            rows.append((tuple(values[:-1]), values[-1]))
    if not rows:
        raise DataError(f"{path}: table file has no rows")
    return TableSystem(rows)
