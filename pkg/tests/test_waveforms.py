import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gwtransient.errors import DomainError, FormatError
from gwtransient.waveforms import (
    CLASS_NAMES,
    GAUSSIAN_TAUS,
    BlackHoleMergerParams,
    BlipParams,
    ChirpingSineGaussianParams,
    CuspParams,
    GaussianParams,
    RingdownParams,
    SineGaussianParams,
    SupernovaParams,
    TimeGrid,
    TimeSeries,
    TransientClass,
    clip_blip,
    cusp_spectrum,
    load_supernova_catalog,
    params_from_slots,
    params_to_slots,
    sample_params,
    synthesize,
)
from oracles import direct_waveform

GRID = TimeGrid()


def test_class_codes_follow_table():
    assert [c.value for c in TransientClass] == list(range(8))
    assert TransientClass(0) is TransientClass.RINGDOWN
    assert TransientClass(5) is TransientClass.BLACK_HOLE_MERGER
    assert CLASS_NAMES[TransientClass.SUPERNOVA] == "Supernova"
    assert TransientClass.coerce(3) is TransientClass.CHIRPING_SINE_GAUSSIAN


@pytest.mark.parametrize("n", [0, 1, 1000, 1023])
def test_grid_rejects_non_power_of_two(n):
    with pytest.raises(DomainError):
        TimeGrid(n)


def test_grid_t0_must_lie_in_window():
    with pytest.raises(DomainError):
        TimeGrid(1024, 4096.0, t0=0.25)
    assert TimeGrid().t0 == pytest.approx(0.125)


def test_time_series_rejects_non_finite():
    bad = np.zeros(1024)
    bad[3] = np.nan
    with pytest.raises(DomainError):
        TimeSeries(bad, GRID)


@pytest.mark.parametrize("seed", range(20))
def test_gaussian_tau_drawn_from_list(seed):
    p = sample_params(TransientClass.GAUSSIAN, np.random.default_rng(seed))
    assert p.tau in GAUSSIAN_TAUS


@pytest.mark.parametrize("cls, ratio", [(TransientClass.SINE_GAUSSIAN, 2.0), (TransientClass.RINGDOWN, 4.0)])
def test_tau_tied_to_frequency(cls, ratio):
    rng = np.random.default_rng(1)
    for _ in range(200):
        p = sample_params(cls, rng)
        assert p.tau == ratio / p.f0
        assert 100.0 <= p.f0 <= 2000.0


def test_merger_parameter_ranges():
    rng = np.random.default_rng(5)
    draws = [sample_params(TransientClass.BLACK_HOLE_MERGER, rng) for _ in range(20000)]
    mc = np.array([d.chirp_mass for d in draws])
    ci = np.array([d.cos_iota for d in draws])
    assert mc.min() >= 20 and mc.max() <= 50
    assert ci.min() >= 0 and ci.max() <= 1


def test_parameter_invariants_enforced():
    with pytest.raises(DomainError):
        GaussianParams(tau=0.0)
    with pytest.raises(DomainError):
        BlackHoleMergerParams(chirp_mass=10.0, cos_iota=0.5)
    with pytest.raises(DomainError):
        BlipParams(f0=100, tau=0.02, clip_fraction=1.0)
    with pytest.raises(DomainError):
        SupernovaParams(model_id=-1)


def test_gaussian_at_one_tau():
    s = synthesize(TransientClass.GAUSSIAN, GaussianParams(0.001), GRID)
    i = int(round((GRID.t0 + 0.001) * GRID.sample_rate))
    # 0.001 s is not a whole number of samples; evaluate the exact offset instead
    dt = GRID.offsets()[i]
    assert s.samples[i] == pytest.approx(math.exp(-((dt / 0.001) ** 2)), abs=1e-15)
    fine = TimeGrid(1024, 8000.0)
    s = synthesize(TransientClass.GAUSSIAN, GaussianParams(0.001), fine)
    i = int(round(fine.t0 * fine.sample_rate)) + 8
    assert s.samples[i] == pytest.approx(math.exp(-1), abs=1e-12)


def test_sine_gaussian_vanishes_at_t0():
    s = synthesize(TransientClass.SINE_GAUSSIAN, SineGaussianParams(300.0, 2 / 300.0), GRID, normalize=False)
    assert s.samples[512] == 0.0


def test_ringdown_causal():
    rng = np.random.default_rng(2)
    for _ in range(50):
        p = sample_params(TransientClass.RINGDOWN, rng)
        s = synthesize(TransientClass.RINGDOWN, p, GRID)
        assert np.all(s.samples[:512] == 0.0)
        assert s.samples[512] != 0.0


def test_csg_value_at_t0():
    s = synthesize(
        TransientClass.CHIRPING_SINE_GAUSSIAN,
        ChirpingSineGaussianParams(f0=50.0, alpha=20.0, tau=0.025),
        GRID,
        normalize=False,
    )
    mpmath = pytest.importorskip("mpmath")
    mpmath.mp.dps = 40
    expected = float((2 * mpmath.pi * mpmath.mpf("0.025") ** 2) ** mpmath.mpf("-0.25"))
    assert s.samples[512] == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("kind", ["gaussian", "sine_gaussian", "ringdown", "csg"])
def test_closed_forms_match_direct_evaluation(kind):
    cls = {
        "gaussian": TransientClass.GAUSSIAN,
        "sine_gaussian": TransientClass.SINE_GAUSSIAN,
        "ringdown": TransientClass.RINGDOWN,
        "csg": TransientClass.CHIRPING_SINE_GAUSSIAN,
    }[kind]
    rng = np.random.default_rng(11)
    for _ in range(10):
        p = sample_params(cls, rng)
        got = synthesize(cls, p, GRID, normalize=False).samples
        ref = direct_waveform(kind, p.__dict__, GRID.n_samples, GRID.sample_rate, GRID.t0)
        np.testing.assert_allclose(got, ref, rtol=0, atol=1e-12)


@pytest.mark.parametrize("cls", list(TransientClass))
def test_every_class_finite_and_unit_peak(cls):
    rng = np.random.default_rng(int(cls) + 100)
    for _ in range(5):
        s = synthesize(cls, sample_params(cls, rng), GRID)
        assert np.all(np.isfinite(s.samples))
        assert np.max(np.abs(s.samples)) == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("cls", list(TransientClass))
def test_synthesis_deterministic(cls):
    p = sample_params(cls, np.random.default_rng(3))
    a = synthesize(cls, p, GRID).samples
    b = synthesize(cls, p, GRID).samples
    assert a.tobytes() == b.tobytes()


@settings(max_examples=40, deadline=None)
@given(
    cls=st.sampled_from([TransientClass.GAUSSIAN, TransientClass.SINE_GAUSSIAN, TransientClass.CHIRPING_SINE_GAUSSIAN]),
    seed=st.integers(0, 2**32 - 1),
    k=st.integers(-64, 64),
)
def test_translation_by_whole_samples(cls, seed, k):
    p = sample_params(cls, np.random.default_rng(seed))
    if getattr(p, "tau", 0) > 0.01:  # long envelopes would wrap around the window edges
        p = type(p)(**{**p.__dict__, "tau": 0.005})
    base = synthesize(cls, p, GRID, normalize=False).samples
    moved = synthesize(cls, p, TimeGrid(1024, 4096.0, GRID.t0 + k / 4096.0), normalize=False).samples
    np.testing.assert_allclose(moved, np.roll(base, k), rtol=0, atol=1e-12)


def test_clip_blip_bounds():
    x = np.tile([1.0, -1.0], 512)
    out = clip_blip(x, 0.5)
    assert np.all(np.abs(out) <= 0.5)


def test_clip_blip_matches_brute_force_count():
    sg = synthesize(TransientClass.SINE_GAUSSIAN, SineGaussianParams(250.0, 2 / 250.0), GRID)
    out = clip_blip(sg, 0.3)
    level = 0.3 * max(abs(v) for v in sg.samples)
    brute = sum(1 for v in sg.samples if abs(v) >= level)
    assert int(np.sum(np.abs(out.samples) == level)) == brute
    assert np.max(np.abs(out.samples)) == pytest.approx(level)


def test_clip_blip_limit_close_to_one():
    sg = synthesize(TransientClass.SINE_GAUSSIAN, SineGaussianParams(250.0, 2 / 250.0), GRID)
    out = clip_blip(sg, 1 - 1e-15)
    np.testing.assert_allclose(out.samples, sg.samples, atol=1e-14)
    with pytest.raises(DomainError):
        clip_blip(sg, 0.0)


def test_blip_is_clipped_sine_gaussian():
    p = BlipParams(f0=300.0, tau=2 / 300.0, clip_fraction=0.2)
    s = synthesize(TransientClass.BLIP, p, GRID)
    sg = synthesize(TransientClass.SINE_GAUSSIAN, SineGaussianParams(300.0, 2 / 300.0), GRID).samples
    np.testing.assert_allclose(s.samples, np.clip(sg, -0.2, 0.2) / 0.2, atol=1e-15)


@pytest.mark.parametrize("f0", [400.0, 1000.0, 2000.0])
def test_cusp_spectral_slope(f0):
    grid = TimeGrid(16384, 4096.0)
    s = synthesize(TransientClass.CUSP, CuspParams(f0), grid, normalize=False).samples
    spec = np.abs(np.fft.rfft(s)) / grid.sample_rate
    freqs = np.fft.rfftfreq(grid.n_samples, 1 / grid.sample_rate)
    band = (freqs >= 50) & (freqs <= f0 / 2)
    slope = np.polyfit(np.log(freqs[band]), np.log(spec[band]), 1)[0]
    assert slope == pytest.approx(-4 / 3, abs=0.05)


def test_cusp_spectrum_shape():
    f = np.array([0.0, 10.0, 100.0, 200.0, 400.0])
    h = cusp_spectrum(f, 100.0)
    assert h[0] == 0.0
    assert h[1] == pytest.approx(10.0 ** (-4 / 3))
    assert h[2] == pytest.approx(100.0 ** (-4 / 3))
    assert h[3] == pytest.approx(100.0 ** (-4 / 3) * math.exp(-1))


def test_merger_peaks_near_t0_and_is_continuous():
    p = BlackHoleMergerParams(30.0, 0.5)
    s = synthesize(TransientClass.BLACK_HOLE_MERGER, p, GRID).samples
    assert abs(int(np.argmax(np.abs(s))) - 512) < 20
    # no jump larger than what a 700 Hz oscillation allows between samples
    assert np.max(np.abs(np.diff(s))) < 2 * math.pi * 700 / 4096 * 1.05
    assert s[0] == 0.0


def test_params_slot_round_trip():
    rng = np.random.default_rng(9)
    for cls in TransientClass:
        p = sample_params(cls, rng)
        tag, slots = params_to_slots(p)
        assert len(slots) == 6
        assert params_from_slots(tag, slots) == p


def test_surrogate_catalog_has_78_models():
    cat = load_supernova_catalog()
    assert len(cat) == 78
    assert cat.model_ids == list(range(78))
    s = synthesize(TransientClass.SUPERNOVA, SupernovaParams(77), GRID, catalog=cat)
    assert np.max(np.abs(s.samples)) == pytest.approx(1.0)


def _write_catalog(path, rows):
    lines = ["# id rate samples"]
    for mid, rate, vals in rows:
        lines.append(" ".join([str(mid), repr(float(rate))] + [repr(float(v)) for v in vals]))
    path.write_text("\n".join(lines) + "\n")


def test_catalog_file_resampled_and_centered(tmp_path):
    n = 2048
    t = np.arange(n) / 16384.0
    wave = np.exp(-(((t - 0.05) / 0.002) ** 2)) * np.sin(2 * np.pi * 300 * t)
    _write_catalog(tmp_path / "sn.txt", [(mid, 16384, wave * (mid + 1)) for mid in range(78)])
    cat = load_supernova_catalog(tmp_path / "sn.txt", GRID)
    assert len(cat) == 78
    from gwtransient.waveforms import resample

    assert len(resample(wave, 16384, 4096)) == n // 4
    s = cat.template(5).samples
    assert int(np.argmax(np.abs(s))) == 512


def test_catalog_parse_error_reports_line(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("# header\n0 4096 1 2 3\n1 4096 1 x 3\n")
    with pytest.raises(FormatError, match="line 3"):
        load_supernova_catalog(path, GRID)


def test_catalog_empty_rejected(tmp_path):
    path = tmp_path / "empty.txt"
    path.write_text("# nothing here\n")
    with pytest.raises(DomainError):
        load_supernova_catalog(path, GRID)


def test_synthesize_rejects_mismatched_params():
    with pytest.raises(DomainError):
        synthesize(TransientClass.RINGDOWN, GaussianParams(0.001), GRID)


def test_support_check_rejects_overlong_envelope():
    with pytest.raises(DomainError):
        synthesize(TransientClass.GAUSSIAN, GaussianParams(0.2), GRID)
    with pytest.raises(DomainError):
        synthesize(TransientClass.RINGDOWN, RingdownParams(10.0, 0.4), GRID)
