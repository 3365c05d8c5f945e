"""Timed traces over mixed input/output alphabets.

A trace is a finite sequence of values indexed by natural-number time.
Values may be tagged input or output symbols, quiescence (the
distinguished "no output this step" symbol), input/output pairs, or
untagged numbers and vectors. Projections replace symbols of the
opposite kind with mask sentinels so pointwise distances stay total.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, Iterable

INF = math.inf


class DataError(Exception):
    """Malformed external data (trace files, contracts, trip logs)."""


class _Sentinel:
    """Interned marker symbol. Equality is identity."""

    __slots__ = ("name",)

    def __init__(self, name: str):
        self.name = name

    def __repr__(self) -> str:
        return self.name

    def __deepcopy__(self, memo):
        return self


#: No output was produced at this step.
QUIESCENCE = _Sentinel("quiescent")
#: Input-projection placeholder for a step that carried an output.
MASK_IN = _Sentinel("mask-in")
#: Output-projection placeholder for a step that carried an input.
MASK_OUT = _Sentinel("mask-out")


@dataclass(frozen=True)
class MixedIn:
    """An input symbol in a mixed-IO trace."""

    value: float

    def __repr__(self) -> str:
        return f"{self.value}i"


@dataclass(frozen=True)
class MixedOut:
    """An output symbol in a mixed-IO trace."""

    value: float

    def __repr__(self) -> str:
        return f"{self.value}o"


@dataclass(frozen=True)
class PairIO:
    """Simultaneous input and output, for reactive-style traces."""

    input: object
    output: object


#: Vectors are plain tuples of floats.
RealVec = tuple


@dataclass(frozen=True)
class GeneralizedTimedTrace:
    """Finite trace over discrete time 0..horizon-1.

    ``values`` always has exactly ``horizon`` entries; the ``trace``
    factory below pads short value lists with quiescence, which is how
    an infinite quiescent suffix is represented.
    """

    values: tuple
    horizon: int

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("trace horizon must be at least 1")
        if len(self.values) != self.horizon:
            raise ValueError(
                f"trace has {len(self.values)} values but horizon {self.horizon}"
            )

    def value_at(self, t: int):
        if not 0 <= t < self.horizon:
            raise ValueError(f"time {t} outside horizon {self.horizon}")
        return self.values[t]

    def __len__(self) -> int:
        return self.horizon


def trace(values: Iterable, horizon: int | None = None) -> GeneralizedTimedTrace:
    """Build a trace, padding with quiescence up to ``horizon`` if given."""
    vals = tuple(values)
    if horizon is None:
        horizon = len(vals)
    if horizon < len(vals):
        raise ValueError(f"horizon {horizon} shorter than {len(vals)} recorded values")
    if horizon > len(vals):
        vals = vals + (QUIESCENCE,) * (horizon - len(vals))
    return GeneralizedTimedTrace(vals, horizon)


def in_symbol(v):
    """Input projection of a single symbol."""
    if isinstance(v, MixedIn):
        return v.value
    if isinstance(v, MixedOut) or v is QUIESCENCE:
        return MASK_IN
    if isinstance(v, PairIO):
        return v.input
    return v


def out_symbol(v):
    """Output projection of a single symbol. Quiescence is kept."""
    if isinstance(v, MixedOut):
        return v.value
    if isinstance(v, MixedIn):
        return MASK_OUT
    if isinstance(v, PairIO):
        return v.output
    return v


def project_inputs(w: GeneralizedTimedTrace) -> GeneralizedTimedTrace:
    return GeneralizedTimedTrace(tuple(in_symbol(v) for v in w.values), w.horizon)


def project_outputs(w: GeneralizedTimedTrace) -> GeneralizedTimedTrace:
    return GeneralizedTimedTrace(tuple(out_symbol(v) for v in w.values), w.horizon)


def mixed_in_distance(a, b) -> float:
    """Distance on input projections: masks match masks, else infinite."""
    if a is MASK_IN and b is MASK_IN:
        return 0.0
    if a is MASK_IN or b is MASK_IN:
        return INF
    return abs(float(a) - float(b))


def mixed_out_distance(a, b) -> float:
    """Distance on output projections.

    Two proper outputs compare by absolute difference; two masks or two
    quiescence symbols are at distance zero; any cross-kind comparison
    is infinitely far apart.
    """
    a_mask = a is MASK_OUT or a is QUIESCENCE
    b_mask = b is MASK_OUT or b is QUIESCENCE
    if a_mask and b_mask:
        return 0.0 if a is b else INF
    if a_mask or b_mask:
        return INF
    return abs(float(a) - float(b))


def _euclid_normalized(params, a, b) -> float:
    n = params[0]
    if len(a) != n or len(b) != n:
        raise ValueError(f"expected {n}-component vectors, got {len(a)} and {len(b)}")
    return math.sqrt(sum((x - y) ** 2 for x, y in zip(a, b)) / n)


def _custom_table(params, a, b) -> float:
    if a == b:
        return 0.0
    for x, y, d in params:
        if (x == a and y == b) or (x == b and y == a):
            return float(d)
    return INF


_DISTANCE_KINDS: dict[str, Callable] = {
    "abs-diff-mixed-in": lambda params, a, b: mixed_in_distance(a, b),
    "abs-diff-mixed-out": lambda params, a, b: mixed_out_distance(a, b),
    "abs-diff-scalar": lambda params, a, b: abs(float(a) - float(b)),
    "euclid-normalized": _euclid_normalized,
    "custom-table": _custom_table,
}


@dataclass(frozen=True)
class DistanceFn:
    """Named, serializable distance function.

    Kinds: abs-diff-mixed-in, abs-diff-mixed-out, abs-diff-scalar,
    euclid-normalized (params: vector length), custom-table (params:
    symmetric (a, b, d) entries; unlisted unequal pairs are infinite).
    """

    kind: str
    params: tuple = ()

    def __post_init__(self):
        if self.kind not in _DISTANCE_KINDS:
            raise ValueError(f"unknown distance kind {self.kind!r}")
        if self.kind == "euclid-normalized":
            if len(self.params) != 1 or int(self.params[0]) < 1:
                raise ValueError("euclid-normalized needs a positive length parameter")

    def __call__(self, a, b) -> float:
        return _DISTANCE_KINDS[self.kind](self.params, a, b)


@dataclass(frozen=True)
class EqConfig:
    """Sharpened input comparison used inside the eq measure."""

    base: DistanceFn
    epsilon: float = 0.001

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be strictly positive")


def eq_measure(a, b, cfg: EqConfig) -> float:
    """Zero exactly on equal symbols, base distance plus epsilon on
    unequal proper inputs, infinite when a mask meets anything else."""
    if a == b:
        return 0.0
    if isinstance(a, _Sentinel) or isinstance(b, _Sentinel):
        return INF
    return cfg.base(a, b) + cfg.epsilon


def ext_sub(a: float, b: float) -> float:
    """Subtraction on extended reals; two like-signed infinities give 0."""
    if math.isinf(a) and math.isinf(b) and a == b:
        return 0.0
    return a - b


def ext_neg(a: float) -> float:
    return -a


_TRACE_KINDS = ("in", "out", "quiescent", "pair")


def load_trace_csv(path) -> GeneralizedTimedTrace:
    """Read a trace file with columns t, kind, value.

    Kinds are in/out/quiescent/pair; a pair value is written as
    ``input;output``. Times must run 0, 1, 2, ... without gaps.
    """
    values = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DataError(f"{path}: empty trace file")
        if [h.strip() for h in header] != ["t", "kind", "value"]:
            raise DataError(f"{path}: expected header t,kind,value, got {header}")
        for rownum, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 3:
                raise DataError(f"{path}: row {rownum}: expected 3 columns, got {len(row)}")
            t_text, kind, value = (c.strip() for c in row)
            try:
                t = int(t_text)
            except ValueError:
                raise DataError(f"{path}: row {rownum}: bad time index {t_text!r}") from None
            if t != len(values):
                raise DataError(
                    f"{path}: row {rownum}: time {t} out of order, expected {len(values)}"
                )
            if kind not in _TRACE_KINDS:
                raise DataError(f"{path}: row {rownum}: unknown kind {kind!r}")
            try:
                if kind == "in":
                    values.append(MixedIn(float(value)))
                elif kind == "out":
                    values.append(MixedOut(float(value)))
                elif kind == "quiescent":
                    values.append(QUIESCENCE)
                else:
                    left, sep, right = value.partition(";")
                    if not sep:
                        raise ValueError("missing ';' separator")
                    values.append(PairIO(float(left), float(right)))
            except ValueError as exc:
                raise DataError(f"{path}: row {rownum}: bad value {value!r} ({exc})") from None
    if not values:
        raise DataError(f"{path}: trace file has no samples")
    return trace(values)


def save_trace_csv(w: GeneralizedTimedTrace, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "kind", "value"])
        for t, v in enumerate(w.values):
            if isinstance(v, MixedIn):
                writer.writerow([t, "in", repr(v.value)])
            elif isinstance(v, MixedOut):
                writer.writerow([t, "out", repr(v.value)])
            elif v is QUIESCENCE:
                writer.writerow([t, "quiescent", ""])
            elif isinstance(v, PairIO):
                writer.writerow([t, "pair", f"{v.input!r};{v.output!r}"])
            else:
                raise DataError(f"cannot serialize value {v!r} at time {t}")
