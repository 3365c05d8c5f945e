"""Trip ingestion, the neighbourhood NOx predictor, and the cycle bench."""
import pytest

from dopingcheck import (
    DataError,
    EmissionContext,
    FalsifierConfig,
    NoDataError,
    NoxPredictor,
    RestrictionError,
    TripRecording,
    UndefinedRateError,
    accelerations,
    cycle_emissions,
    falsify_emissions,
    load_cycle,
    load_trip_dir,
    load_trips,
    nedc_robustness,
    standard_context,
    synthetic_cycle,
    write_profile_plot,
)


def test_accelerations_from_speed_deltas():
    # km/h per second over 3.6 gives m/s^2; the first sample has no delta
    assert accelerations((0.0, 36.0, 18.0)) == (0.0, 10.0, -5.0)
    assert accelerations((7.0,)) == (0.0,)


def test_trip_recording_validation():
    with pytest.raises(DataError, match="at least one sample"):
        TripRecording(())
    with pytest.raises(DataError, match="negative speed"):
        TripRecording(((10.0, 0.0, 5.0), (-1.0, 0.0, 5.0)))


# --- the predictor ------------------------------------------------------------


def _flat_trip(rows):
    return TripRecording(tuple(rows))


def test_predictor_averages_every_sample_within_tolerance():
    trip = _flat_trip([(10.0, 0.0, 100.0), (12.0, 0.0, 200.0), (14.0, 0.0, 600.0)])
    p = NoxPredictor([trip], tolerance_v=2.0, tolerance_a=2.0)
    assert p.predict(12.0, 0.0) == pytest.approx(300.0)
    assert p.predict(10.0, 0.0) == pytest.approx(150.0)
    assert len(p) == 3


def test_predictor_tolerance_boundaries_are_inclusive():
    trip = _flat_trip([(14.0, 1.0, 600.0)])
    p = NoxPredictor([trip], tolerance_v=2.0, tolerance_a=2.0)
    assert p.predict(16.0, 1.0) == 600.0
    assert p.predict(14.0, 3.0) == 600.0
    with pytest.raises(NoDataError):
        p.predict(16.001, 1.0)
    with pytest.raises(NoDataError):
        p.predict(14.0, 3.001)


def test_predictor_rejects_bad_construction():
    with pytest.raises(ValueError, match="non-negative"):
        NoxPredictor([_flat_trip([(1.0, 0.0, 1.0)])], tolerance_v=-1.0)
    with pytest.raises(ValueError, match="at least one sample"):
        NoxPredictor([])


def test_profile_prediction_matches_the_scalar_path():
    trip = _flat_trip(
        [(v, a, 10.0 * v + a) for v in (0.0, 5.0, 10.0, 15.0) for a in (-2.0, 0.0, 2.0)]
    )
    p = NoxPredictor([trip])
    profile = (5.0, 10.0, 10.0, 7.0)
    accs = accelerations(profile)
    expected = [p.predict(v, a) for v, a in zip(profile, accs)]
    assert list(p.predict_profile(profile)) == pytest.approx(expected)


def test_profile_prediction_reports_every_gap():
    trip = _flat_trip([(10.0, 0.0, 50.0)])
    p = NoxPredictor([trip], tolerance_v=2.0, tolerance_a=2.0)
    with pytest.raises(NoDataError) as exc_info:
        p.predict_profile((10.0, 50.0, 10.0, 90.0))
    assert exc_info.value.gaps == (1, 2, 3)
    assert "3 of 4" in str(exc_info.value)


def test_single_point_gap_has_no_gap_list():
    p = NoxPredictor([_flat_trip([(10.0, 0.0, 50.0)])])
    with pytest.raises(NoDataError) as exc_info:
        p.predict(99.0, 0.0)
    assert exc_info.value.gaps == ()


# --- trip files ---------------------------------------------------------------


def test_trip_file_roundtrip(tmp_path):
    f = tmp_path / "trip.csv"
    f.write_text("t_s,speed_kmh,accel_ms2,nox_mg\n0,10.0,0.0,5.0\n1,12.0,0.55,6.5\n")
    trip = load_trips(f)
    assert trip.samples == ((10.0, 0.0, 5.0), (12.0, 0.55, 6.5))


def test_trip_file_without_accel_column_recomputes_it(tmp_path):
    f = tmp_path / "trip.csv"
    f.write_text("t_s,speed_kmh,nox_mg\n0,0.0,5.0\n1,36.0,5.0\n")
    trip = load_trips(f)
    assert trip.samples == ((0.0, 0.0, 5.0), (36.0, 10.0, 5.0))


@pytest.mark.parametrize(
    "content, message",
    [
        ("", "empty trip file"),
        ("speed,nox\n", "unexpected header"),
        ("t_s,speed_kmh,nox_mg\n0,10.0\n", "expected 3 fields"),
        ("t_s,speed_kmh,nox_mg\n1,10.0,5.0\n", "expected t_s 0"),
        ("t_s,speed_kmh,nox_mg\n0,10.0,5.0\n3,11.0,5.0\n", "expected t_s 1"),
        ("t_s,speed_kmh,nox_mg\n0,-4.0,5.0\n", "negative speed"),
        ("t_s,speed_kmh,nox_mg\n0,fast,5.0\n", "row 1"),
        ("t_s,speed_kmh,nox_mg\n", "no samples"),
    ],
)
def test_trip_file_errors(tmp_path, content, message):
    f = tmp_path / "trip.csv"
    f.write_text(content)
    with pytest.raises(DataError, match=message):
        load_trips(f)


def test_trip_dir_is_sorted_by_name(tmp_path):
    (tmp_path / "b.csv").write_text("t_s,speed_kmh,nox_mg\n0,20.0,1.0\n")
    (tmp_path / "a.csv").write_text("t_s,speed_kmh,nox_mg\n0,10.0,1.0\n")
    trips = load_trip_dir(tmp_path)
    assert [t.samples[0][0] for t in trips] == [10.0, 20.0]
    with pytest.raises(DataError, match="no trip files"):
        load_trip_dir(tmp_path / "empty")


# --- per-cycle aggregation ------------------------------------------------------


@pytest.fixture
def constant_predictor():
    """Answers 100 mg for any reachable query."""
    trip = _flat_trip([(10.0, 0.0, 100.0)])
    return NoxPredictor([trip], tolerance_v=1000.0, tolerance_a=1000.0)


def test_cycle_emissions_by_hand(constant_predictor):
    result = cycle_emissions(constant_predictor, (10.0, 20.0, 30.0))
    assert result.total_mg == pytest.approx(300.0)
    # 60 km/h-seconds is one minute at 60, a sixtieth of a kilometre
    assert result.distance_km == pytest.approx(60.0 / 3600.0)
    assert result.mg_per_km == pytest.approx(18000.0)


def test_cycle_without_distance_has_no_rate(constant_predictor):
    with pytest.raises(UndefinedRateError):
        cycle_emissions(constant_predictor, (0.0, 0.0, 0.0))
    with pytest.raises(ValueError, match="empty"):
        cycle_emissions(constant_predictor, ())


def test_context_validation():
    with pytest.raises(ValueError, match="empty"):
        EmissionContext(standard_cycle=(), std_output=1.0, kappa_in=1.0, kappa_out=1.0)
    with pytest.raises(ValueError, match="positive"):
        EmissionContext(standard_cycle=(1.0,), std_output=1.0, kappa_in=0.0, kappa_out=1.0)
    with pytest.raises(ValueError, match="positive"):
        EmissionContext(standard_cycle=(1.0,), std_output=1.0, kappa_in=1.0, kappa_out=-2.0)


def test_standard_context_freezes_the_measured_rate(constant_predictor):
    ctx = standard_context(constant_predictor, (10.0, 20.0, 30.0), kappa_in=15.0, kappa_out=2000.0)
    assert ctx.std_output == pytest.approx(18000.0)
    assert ctx.input_space().horizon == 3


def test_cycle_robustness_by_hand(constant_predictor):
    ctx = standard_context(constant_predictor, (10.0, 20.0, 30.0), kappa_in=15.0, kappa_out=2000.0)
    probe = (12.0, 22.0, 32.0)
    expected = 2000.0 - abs(18000.0 - 300.0 * 3600.0 / 66.0)
    assert nedc_robustness(ctx, constant_predictor, probe) == pytest.approx(expected)


def test_cycle_outside_the_tube_is_rejected(constant_predictor):
    ctx = standard_context(constant_predictor, (10.0, 20.0, 30.0), kappa_in=15.0, kappa_out=2000.0)
    with pytest.raises(RestrictionError):
        nedc_robustness(ctx, constant_predictor, (50.0, 20.0, 30.0))


# --- the falsification driver ---------------------------------------------------


@pytest.fixture
def stepped_predictor():
    """Flat 1 mg/s everywhere except a 101 mg/s band above 36 km/h.

    The standard cycle sits at 30 km/h with a 15 km/h tube, so the slowest
    legal cycle halves the distance at best: off-band rates stay within
    120 mg/km of the standard 120, under the 150 allowance.  Only the band
    can push the gap past it.
    """
    rows = [
        (float(v), float(a), 101.0 if v > 36 else 1.0)
        for v in range(0, 49, 2)
        for a in range(-6, 7, 2)
    ]
    return NoxPredictor([_flat_trip(rows)], tolerance_v=2.0, tolerance_a=2.0)


def test_falsification_finds_the_high_emission_band(stepped_predictor):
    cycle = (30.0,) * 20
    ctx = standard_context(stepped_predictor, cycle, kappa_in=15.0, kappa_out=150.0)
    log = []
    outcome = falsify_emissions(
        ctx,
        stepped_predictor,
        FalsifierConfig(beta=1.0, max_iterations=500, rng_seed=1),
        step_bound=5.0,
        membership_log=log,
    )
    assert outcome.falsified
    assert outcome.iterations_used <= 500
    # every scored proposal was a legal cycle
    assert log and all(log)
    # a gap this size is only reachable through the planted band
    assert max(outcome.argmin) >= 36.0


def test_falsification_is_reproducible(stepped_predictor):
    cycle = (30.0,) * 20
    ctx = standard_context(stepped_predictor, cycle, kappa_in=15.0, kappa_out=150.0)
    cfg = FalsifierConfig(beta=1.0, max_iterations=500, rng_seed=4)
    assert falsify_emissions(ctx, stepped_predictor, cfg) == falsify_emissions(
        ctx, stepped_predictor, cfg
    )


def test_falsification_writes_the_profile_plot(tmp_path, stepped_predictor):
    cycle = (30.0,) * 20
    ctx = standard_context(stepped_predictor, cycle, kappa_in=15.0, kappa_out=150.0)
    plot = tmp_path / "profiles.csv"
    outcome = falsify_emissions(
        ctx,
        stepped_predictor,
        FalsifierConfig(beta=1.0, max_iterations=200, rng_seed=0),
        plot_path=plot,
    )
    lines = plot.read_text().splitlines()
    assert lines[0] == "t_s,std_speed,candidate_speed"
    assert len(lines) == 21
    assert lines[1].startswith("0,30.0,")
    assert lines[1].endswith(repr(float(outcome.argmin[0])))


def test_profile_plot_golden(tmp_path):
    plot = tmp_path / "two.csv"
    write_profile_plot(plot, (1.0, 2.0), (3.0, 4.5))
    assert plot.read_bytes() == b"t_s,std_speed,candidate_speed\r\n0,1.0,3.0\r\n1,2.0,4.5\r\n"


# --- cycle files and the synthetic bench -----------------------------------------


def test_cycle_file_loading(tmp_path):
    f = tmp_path / "cycle.txt"
    f.write_text("0.0\n\n10.5\n  20\n")
    assert load_cycle(f) == (0.0, 10.5, 20.0)


@pytest.mark.parametrize(
    "content, message",
    [
        ("0.0\nfast\n", "not a speed"),
        ("0.0\n-3.0\n", "negative speed"),
        ("\n\n", "no samples"),
    ],
)
def test_cycle_file_errors(tmp_path, content, message):
    f = tmp_path / "cycle.txt"
    f.write_text(content)
    with pytest.raises(DataError, match=message):
        load_cycle(f)


def test_synthetic_cycle_shape():
    cycle = synthetic_cycle()
    assert len(cycle) == 300
    assert cycle[0] == 0.0
    assert cycle[299] == 0.0
    assert max(cycle) == 70.0
    assert min(cycle) == 0.0
    # plateau anchors
    assert cycle[20] == 30.0
    assert cycle[120] == 50.0
    assert cycle[150] == 70.0
    assert cycle[250] == 70.0
