"""Emissions workbench.

Trip ingestion, a neighbourhood-average NOx predictor, per-kilometre
aggregation over 1 Hz speed profiles, and the falsification driver that
searches for test cycles staying close to the standard one while emitting
far more.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .falsify import (
    FalsificationOutcome,
    FalsifierConfig,
    RestrictedInputSpace,
    falsify,
    membership,
    propose_profile,
)
from .traces import INF, DataError, DistanceFn


class NoDataError(Exception):
    """The predictor has no recorded sample within tolerance of a query.

    ``gaps`` lists the uncovered seconds (time indices) when the query was
    a whole profile; for a single point it is empty and the message names
    the point.
    """

    def __init__(self, message: str, gaps: Sequence[int] = ()):
        super().__init__(message)
        self.gaps = tuple(gaps)


class UndefinedRateError(ValueError):
    """Per-kilometre rate requested for a cycle that covers no distance."""


class RestrictionError(ValueError):
    """A cycle left the allowed tube around the standard cycle."""


def accelerations(speeds: Sequence[float]) -> Tuple[float, ...]:
    """Finite-difference acceleration in m/s² for a 1 Hz km/h profile.

    The first sample has no predecessor and is pinned to 0.
    """
    out = [0.0]
    for prev, cur in zip(speeds, speeds[1:]):
        out.append((cur - prev) / 3.6)
    return tuple(out)


@dataclass(frozen=True)
class TripRecording:
    """One recorded drive at 1 Hz: (speed km/h, accel m/s², NOx mg) per second."""

    samples: Tuple[Tuple[float, float, float], ...]

    def __post_init__(self) -> None:
        if not self.samples:
            raise DataError("a trip needs at least one sample")
        for idx, (v, _a, _n) in enumerate(self.samples):
            if v < 0:
                raise DataError(f"sample {idx}: negative speed {v!r}")

    def __len__(self) -> int:
        return len(self.samples)


_TRIP_HEADER = ["t_s", "speed_kmh", "accel_ms2", "nox_mg"]
_TRIP_HEADER_NO_ACCEL = ["t_s", "speed_kmh", "nox_mg"]


def load_trips(path) -> TripRecording:
    """Read one trip CSV.

    The acceleration column is optional; when it is missing the values are
    recomputed from the speed deltas (km/h per second divided by 3.6).
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty trip file") from None
        if header == _TRIP_HEADER:
            has_accel = True
        elif header == _TRIP_HEADER_NO_ACCEL:
            has_accel = False
        else:
            raise DataError(f"{path}: unexpected header {header!r}")
        width = 4 if has_accel else 3

        speeds: list = []
        accels: list = []
        noxes: list = []
        for row_no, row in enumerate(reader, start=1):
            if len(row) != width:
                raise DataError(
                    f"{path}: row {row_no}: expected {width} fields, got {len(row)}"
                )
            try:
                t = int(row[0])
                v = float(row[1])
                if has_accel:
                    accels.append(float(row[2]))
                n = float(row[-1])
            except ValueError as exc:
                raise DataError(f"{path}: row {row_no}: {exc}") from None
            if t != row_no - 1:
                raise DataError(f"{path}: row {row_no}: expected t_s {row_no - 1}, got {t}")
            if v < 0:
                raise DataError(f"{path}: row {row_no}: negative speed {v!r}")
            speeds.append(v)
            noxes.append(n)
    if not speeds:
        raise DataError(f"{path}: trip file has no samples")
    if not has_accel:
        accels = list(accelerations(speeds))
    return TripRecording(tuple(zip(speeds, accels, noxes)))


def load_trip_dir(path) -> Tuple[TripRecording, ...]:
    """Every *.csv under `path`, sorted by file name."""
    files = sorted(Path(path).glob("*.csv"))
    if not files:
        raise DataError(f"{path}: no trip files (*.csv) found")
    return tuple(load_trips(f) for f in files)


class NoxPredictor:
    """Average-of-neighbours NOx model.

    A query (v, a) is answered with the mean NOx over every recorded
    sample whose speed is within ``tolerance_v`` km/h and acceleration
    within ``tolerance_a`` m/s² of the query, boundaries included.  No
    matching sample means no answer; the caller decides the fallback.
    The sample store is frozen at construction, so concurrent queries are
    safe.
    """

    def __init__(
        self,
        trips: Iterable[TripRecording],
        tolerance_v: float = 2.0,
        tolerance_a: float = 2.0,
    ):
        if tolerance_v < 0 or tolerance_a < 0:
            raise ValueError("tolerances must be non-negative")
        rows = [sample for trip in trips for sample in trip.samples]
        if not rows:
            raise ValueError("predictor needs at least one sample")
        self.tolerance_v = float(tolerance_v)
        self.tolerance_a = float(tolerance_a)
        data = np.asarray(rows, dtype=float)
        self._speed = data[:, 0]
        self._accel = data[:, 1]
        self._nox = data[:, 2]

    def __len__(self) -> int:
        return int(self._nox.size)

    def predict(self, v: float, a: float) -> float:
        mask = (np.abs(self._speed - v) <= self.tolerance_v) & (
            np.abs(self._accel - a) <= self.tolerance_a
        )
        if not mask.any():
            raise NoDataError(f"no sample within tolerance of (v={v}, a={a})")
        return float(self._nox[mask].mean())

    def predict_profile(self, speeds: Sequence[float]) -> np.ndarray:
        """Per-second emissions for a whole profile, acceleration implied.

        Raises NoDataError listing every uncovered second if any query
        falls outside the data.
        """
        v = np.asarray(speeds, dtype=float)
        a = np.asarray(accelerations(speeds))
        near_v = np.abs(v[:, None] - self._speed[None, :]) <= self.tolerance_v
        near_a = np.abs(a[:, None] - self._accel[None, :]) <= self.tolerance_a
        match = near_v & near_a
        counts = match.sum(axis=1)
        if (counts == 0).any():
            missing = np.flatnonzero(counts == 0)
            raise NoDataError(
                f"no data for {missing.size} of {v.size} samples "
                f"(first at t={int(missing[0])}, v={float(v[missing[0]])})",
                gaps=tuple(int(i) for i in missing),
            )
        totals = match.astype(float) @ self._nox
        return totals / counts


class CycleEmissions(NamedTuple):
    total_mg: float
    distance_km: float
    mg_per_km: float


def cycle_emissions(p: NoxPredictor, cycle: Sequence[float]) -> CycleEmissions:
    """Total NOx, distance covered, and the per-kilometre rate of a profile.

    A bare list of speeds fully describes a cycle: acceleration is
    recomputed from the deltas, distance integrates speed at 1 Hz.
    """
    speeds = tuple(float(v) for v in cycle)
    if not speeds:
        raise ValueError("cycle must not be empty")
    per_second = p.predict_profile(speeds)
    total = float(per_second.sum())
    distance = float(sum(speeds)) / 3600.0
    if distance == 0:
        raise UndefinedRateError("cycle covers no distance, mg/km undefined")
    return CycleEmissions(total, distance, total / distance)


@dataclass(frozen=True)
class EmissionContext:
    """A frozen emissions contract: the reference cycle, what the system
    emitted on it, and how far inputs and outputs may stray."""

    standard_cycle: Tuple[float, ...]
    std_output: float
    kappa_in: float
    kappa_out: float

    def __post_init__(self) -> None:
        if not self.standard_cycle:
            raise ValueError("standard cycle must not be empty")
        if self.kappa_in <= 0 or self.kappa_out <= 0:
            raise ValueError("kappa_in and kappa_out must be positive")

    def input_space(self) -> RestrictedInputSpace:
        return RestrictedInputSpace(
            std=(self.standard_cycle,),
            kappa_in=self.kappa_in,
            d_in=DistanceFn("abs-diff-scalar"),
            horizon=len(self.standard_cycle),
        )


def standard_context(
    p: NoxPredictor,
    cycle: Sequence[float],
    kappa_in: float = 15.0,
    kappa_out: float = 88.0,
) -> EmissionContext:
    """Measure the standard cycle on the predictor and freeze the contract.

    The reference output is whatever the system shows on the official
    test, not a number from a type certificate.
    """
    measured = cycle_emissions(p, cycle)
    return EmissionContext(
        standard_cycle=tuple(float(v) for v in cycle),
        std_output=measured.mg_per_km,
        kappa_in=kappa_in,
        kappa_out=kappa_out,
    )


def nedc_robustness(ctx: EmissionContext, p: NoxPredictor, cycle) -> float:
    """kappa_out minus the output gap to the standard measurement.

    Negative means this cycle, despite staying inside the allowed input
    tube, moves emissions more than kappa_out mg/km away from the official
    result: a cleanness violation.
    """
    if not membership(cycle, ctx.input_space()):
        raise RestrictionError("cycle leaves the kappa_in tube around the standard cycle")
    measured = cycle_emissions(p, cycle)
    return ctx.kappa_out - abs(ctx.std_output - measured.mg_per_km)


def falsify_emissions(
    ctx: EmissionContext,
    p: NoxPredictor,
    cfg: Optional[FalsifierConfig] = None,
    *,
    step_bound: float = 5.0,
    max_window: Optional[int] = 60,
    membership_log: Optional[list] = None,
    plot_path=None,
) -> FalsificationOutcome:
    """Search for a high-emission cycle inside the allowed tube.

    Proposals nudge one window of the current profile and are clamped back
    into the tube, so every cycle the predictor scores is a legal test.
    Predictor gaps score +inf: a cycle we have no data for is discarded,
    never counted as a violation.  When ``membership_log`` is given, the
    tube check result of every scored cycle is appended to it.  With
    ``plot_path`` set, the standard and best candidate profiles are
    written side by side for plotting.
    """
    if cfg is None:
        cfg = FalsifierConfig(max_iterations=3000)
    space = ctx.input_space()

    def score(cycle) -> float:
        if membership_log is not None:
            membership_log.append(membership(cycle, space))
        try:
            return nedc_robustness(ctx, p, cycle)
        except NoDataError:
            return INF

    def next_cycle(cycle, rng):
        return propose_profile(cycle, space, step_bound, rng, max_window=max_window)

    outcome = falsify(score, ctx.standard_cycle, next_cycle, cfg)
    if plot_path is not None:
        write_profile_plot(plot_path, ctx.standard_cycle, outcome.argmin)
    return outcome


def write_profile_plot(path, std_cycle: Sequence[float], candidate: Sequence[float]) -> None:
    """Per-second standard vs candidate speeds as CSV, for any plotting tool."""
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t_s", "std_speed", "candidate_speed"])
        for t, (s, c) in enumerate(zip(std_cycle, candidate)):
            writer.writerow([t, repr(float(s)), repr(float(c))])


def load_cycle(path) -> Tuple[float, ...]:
    """A cycle file: one km/h value per line, blank lines ignored."""
    path = Path(path)
    speeds = []
    for line_no, line in enumerate(path.read_text().splitlines(), start=1):
        text = line.strip()
        if not text:
            continue
        try:
            v = float(text)
        except ValueError:
            raise DataError(f"{path}: line {line_no}: not a speed: {text!r}") from None
        if v < 0:
            raise DataError(f"{path}: line {line_no}: negative speed {v!r}")
        speeds.append(v)
    if not speeds:
        raise DataError(f"{path}: cycle file has no samples")
    return tuple(speeds)


def synthetic_cycle() -> Tuple[float, ...]:
    """A deterministic 300-second stand-in for a regulatory test cycle.

    Urban stop-and-go segments first, then a long high-speed plateau,
    then a ramp back to rest.  Piecewise linear, km/h at 1 Hz.
    """
    anchor_t = (0, 20, 50, 60, 80, 120, 150, 250, 290, 299)
    anchor_v = (0.0, 30.0, 30.0, 15.0, 50.0, 50.0, 70.0, 70.0, 0.0, 0.0)
    t = np.arange(300)
    return tuple(float(v) for v in np.interp(t, anchor_t, anchor_v))


def standard_cycle() -> Tuple[float, ...]:
    """The packaged regulatory cycle when present, else the synthetic one.

    Drop the official profile (one speed per line) into
    ``data/nedc_speeds.txt`` next to this module to use it.
    """
    packaged = Path(__file__).with_name("data") / "nedc_speeds.txt"
    if packaged.exists():
        return load_cycle(packaged)
    return synthetic_cycle()
