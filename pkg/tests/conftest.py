"""Shared fixtures: two small hand-checkable trace scenarios, the HR
reference scorers, and a synthetic emissions bench with a known dirty
band planted above the cycle's top speed."""
from __future__ import annotations

import pytest

from dopingcheck import (
    DistanceFn,
    EqConfig,
    MixedIn,
    MixedOut,
    NoxPredictor,
    PairIO,
    RobustContext,
    TripRecording,
    hr_contract,
    hr_reference_system,
    synthetic_cycle,
    trace,
)


@pytest.fixture
def interleaved():
    """Two standards and a compliant subject over interleaved symbols.

    The subject's inputs sit exactly one unit below the first standard's
    and it answers 6 where that standard answered 7; against the second
    standard the symbol kinds stop lining up two steps before the end.
    With tolerances (1, 6) the subject should pass.
    """
    horizon = 6
    w1 = trace([MixedIn(1), MixedIn(2), MixedIn(3), MixedOut(7), MixedIn(0)], horizon)
    w2 = trace([MixedIn(0), MixedIn(1), MixedIn(2), MixedIn(3), MixedOut(6)], horizon)
    subject = trace(
        [MixedIn(0), MixedIn(1), MixedIn(2), MixedOut(6), MixedIn(0)], horizon
    )
    d_in = DistanceFn("abs-diff-mixed-in")
    ctx = RobustContext(
        std=(w1, w2),
        d_in=d_in,
        d_out=DistanceFn("abs-diff-mixed-out"),
        kappa_in=1.0,
        kappa_out=6.0,
        eq=EqConfig(d_in),
    )
    return ctx, subject


def _lockstep(fin, fout, horizon=8):
    return trace(
        [PairIO(float(fin(t)), float(fout(t))) for t in range(horizon)], horizon
    )


@pytest.fixture
def lockstep():
    """Input/output pairs in lockstep: a copying system plus an offender.

    w0 and w1 are the standards (same ramp input; one stays silent, one
    echoes).  wa/wb scale the ramp by 1.3 and stay within both tubes.
    The offender drifts its output by 1.7 per step while keeping its
    input within 0.5 of the first ramp, so it breaks the output
    tolerance of 2 at step 3 without ever leaving the input tube.
    """
    w0 = _lockstep(lambda t: t + 1, lambda t: 0)
    w1 = _lockstep(lambda t: t + 1, lambda t: t + 1)
    wa = _lockstep(lambda t: 1.3 * (t + 1), lambda t: 0)
    wb = _lockstep(lambda t: 1.3 * (t + 1), lambda t: 1.3 * (t + 1))
    offender = _lockstep(lambda t: 1.5 + t, lambda t: 1.5 + 1.7 * t)
    d_in = DistanceFn("abs-diff-mixed-in")
    ctx = RobustContext(
        std=(w0, w1),
        d_in=d_in,
        d_out=DistanceFn("abs-diff-mixed-out"),
        kappa_in=1.0,
        kappa_out=2.0,
        eq=EqConfig(d_in),
    )
    return {
        "ctx": ctx,
        "clean": (w0, w1, wa, wb),
        "dirty": (w0, w1, wa, wb, offender),
        "w1": w1,
        "offender": offender,
    }


@pytest.fixture(scope="session")
def hr():
    return {
        "mild": hr_reference_system("mild"),
        "steep": hr_reference_system("steep"),
        "contract": hr_contract(),
    }


@pytest.fixture(scope="session")
def band_predictor():
    """Predictor trained on a dense speed/acceleration grid.

    Every grid point emits 1 mg/s except speeds above 80 km/h, which
    emit 101 mg/s.  The bench cycle below never exceeds 70, so the band
    only matters for cycles pushed upward.
    """
    samples = []
    for v in range(0, 87):
        nox = 101.0 if v > 80 else 1.0
        for a in range(-9, 10):
            samples.append((float(v), float(a), nox))
    return NoxPredictor([TripRecording(tuple(samples))])


@pytest.fixture(scope="session")
def bench_cycle():
    return synthetic_cycle()
