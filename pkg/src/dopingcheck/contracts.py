"""Cleanness and fairness contract objects plus their file format.

A contract file is a JSON document. Robust contracts carry the two
tolerances, func and fairness contracts carry piecewise-linear bound
segments written as [lo, hi, slope, intercept] rows. Standard traces
are referenced by relative file path and loaded eagerly. Saving a
loaded contract reproduces the document byte for byte.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

from .traces import (
    DataError,
    DistanceFn,
    EqConfig,
    load_trace_csv,
)

INF = math.inf


@dataclass(frozen=True)
class PiecewiseLinear:
    """Piecewise-linear bound on [0, inf).

    Segments are (lo, hi, slope, intercept) with ascending,
    non-overlapping breakpoints starting at 0. A query beyond the last
    breakpoint extrapolates with the last segment's coefficients.
    """

    segments: tuple

    def __post_init__(self):
        if not self.segments:
            raise ValueError("need at least one segment")
        prev_hi = None
        for lo, hi, slope, intercept in self.segments:
            if not hi > lo:
                raise ValueError(f"segment [{lo}, {hi}] is not increasing")
            if prev_hi is None:
                if lo != 0:
                    raise ValueError("first segment must start at 0")
            elif lo < prev_hi:
                raise ValueError("segments overlap")
            prev_hi = hi

    def __call__(self, d: float) -> float:
        if d < 0:
            raise ValueError(f"bound queried at negative distance {d}")
        chosen = self.segments[-1]
        for seg in self.segments:
            if d <= seg[1]:
                chosen = seg
                break
        _, _, slope, intercept = chosen
        if math.isinf(d):
            return intercept if slope == 0 else INF * slope
        return slope * d + intercept


@dataclass(frozen=True)
class RobustContext:
    """Everything robust cleanness is judged against: the standard
    traces, the two distances, both tolerances and the eq sharpening."""

    std: tuple
    d_in: DistanceFn
    d_out: DistanceFn
    kappa_in: float
    kappa_out: float
    eq: EqConfig

    def __post_init__(self):
        _check_std(self.std)
        if self.kappa_in < 0 or self.kappa_out < 0:
            raise ValueError("tolerances must be non-negative")


@dataclass(frozen=True)
class FuncContext:
    """Like RobustContext but the output bound is a function of the
    input distance instead of a constant."""

    std: tuple
    d_in: DistanceFn
    d_out: DistanceFn
    eq: EqConfig
    f: PiecewiseLinear

    def __post_init__(self):
        _check_std(self.std)


@dataclass(frozen=True)
class FairnessContract:
    """Distance pair and bound for individual-fairness monitoring.

    Deliberately does not name any set of evaluated individuals; those
    arrive per monitoring run.
    """

    d_in: DistanceFn
    d_out: DistanceFn
    f: PiecewiseLinear


def _check_std(std: tuple) -> None:
    if not std:
        raise ValueError("standard trace set must be non-empty")
    horizons = {w.horizon for w in std}
    if len(horizons) != 1:
        raise ValueError(f"standard traces disagree on horizon: {sorted(horizons)}")


@dataclass(frozen=True)
class LoadedContract:
    """A contract plus the bookkeeping needed to write it back."""

    kind: str
    context: object
    std_refs: tuple = ()
    epsilon: float | None = None


def _distance_to_doc(d: DistanceFn) -> dict:
    return {"name": d.kind, "params": [list(p) if isinstance(p, tuple) else p for p in d.params]}


def _distance_from_doc(doc, where: str) -> DistanceFn:
    try:
        name = doc["name"]
        params = tuple(
            tuple(p) if isinstance(p, list) else p for p in doc.get("params", [])
        )
        return DistanceFn(name, params)
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"{where}: bad distance entry ({exc})") from None


def _kappa_to_doc(v: float):
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


def _kappa_from_doc(v, where: str) -> float:
    if v == "inf":
        return INF
    if v == "-inf":
        return -INF
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return float(v)
    raise DataError(f"{where}: tolerance must be a number or \"inf\", got {v!r}")


def _segments_from_doc(rows, where: str) -> PiecewiseLinear:
    try:
        segments = tuple(
            (_kappa_from_doc(lo, where), _kappa_from_doc(hi, where),
             _kappa_from_doc(slope, where), _kappa_from_doc(intercept, where))
            for lo, hi, slope, intercept in rows
        )
        return PiecewiseLinear(segments)
    except (TypeError, ValueError) as exc:
        raise DataError(f"{where}: bad f segments ({exc})") from None


def _segments_to_doc(f: PiecewiseLinear) -> list:
    return [[_kappa_to_doc(x) for x in seg] for seg in f.segments]


def load_contract(path) -> LoadedContract:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except FileNotFoundError:
        raise DataError(f"{path}: contract file not found") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise DataError(f"{path}: contract document must be an object")
    kind = doc.get("kind")
    if kind not in ("robust", "func", "fairness"):
        raise DataError(f"{path}: kind must be robust, func or fairness, got {kind!r}")

    d_in = _distance_from_doc(doc.get("d_in", {}), f"{path}: d_in")
    d_out = _distance_from_doc(doc.get("d_out", {}), f"{path}: d_out")

    if kind == "fairness":
        if "f_segments" not in doc:
            raise DataError(f"{path}: fairness contract needs f_segments")
        f = _segments_from_doc(doc["f_segments"], str(path))
        return LoadedContract("fairness", FairnessContract(d_in, d_out, f))

    epsilon = doc.get("epsilon", 0.001)
    refs = doc.get("std_traces", [])
    if not refs:
        raise DataError(f"{path}: contract needs std_traces references")
    std = tuple(load_trace_csv(path.parent / ref) for ref in refs)
    eq = EqConfig(d_in, epsilon)

    if kind == "robust":
        for key in ("kappa_in", "kappa_out"):
            if key not in doc:
                raise DataError(f"{path}: robust contract needs {key}")
        ctx = RobustContext(
            std=std,
            d_in=d_in,
            d_out=d_out,
            kappa_in=_kappa_from_doc(doc["kappa_in"], f"{path}: kappa_in"),
            kappa_out=_kappa_from_doc(doc["kappa_out"], f"{path}: kappa_out"),
            eq=eq,
        )
    else:
        if "f_segments" not in doc:
            raise DataError(f"{path}: func contract needs f_segments")
        ctx = FuncContext(
            std=std,
            d_in=d_in,
            d_out=d_out,
            eq=eq,
            f=_segments_from_doc(doc["f_segments"], str(path)),
        )
    return LoadedContract(kind, ctx, tuple(refs), epsilon)


def contract_document(loaded: LoadedContract) -> str:
    """Canonical textual form; stable key order, repr-faithful floats."""
    ctx = loaded.context
    doc: dict = {"kind": loaded.kind}
    doc["d_in"] = _distance_to_doc(ctx.d_in)
    doc["d_out"] = _distance_to_doc(ctx.d_out)
    if loaded.kind == "robust":
        doc["kappa_in"] = _kappa_to_doc(ctx.kappa_in)
        doc["kappa_out"] = _kappa_to_doc(ctx.kappa_out)
    if loaded.kind in ("func", "fairness"):
        doc["f_segments"] = _segments_to_doc(ctx.f)
    if loaded.kind != "fairness":
        doc["epsilon"] = loaded.epsilon
        doc["std_traces"] = list(loaded.std_refs)
    return json.dumps(doc, indent=2) + "\n"


def save_contract(loaded: LoadedContract, path) -> None:
    Path(path).write_text(contract_document(loaded))
