"""Synthesis of the eight transient classes on a uniform time grid.

The closed-form classes (Gaussian, sine-Gaussian, ringdown, chirping
sine-Gaussian) are evaluated directly.  Cusps are built in the frequency
domain.  The black-hole merger and supernova classes use analytic
surrogates: a leading-order Newtonian chirp stitched to a damped ringdown,
and a family of 78 core-bounce-like dip-plus-oscillation templates.
Every waveform is normalized to unit peak amplitude unless
``normalize=False`` is requested.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from enum import IntEnum
from fractions import Fraction
from pathlib import Path
from typing import ClassVar

import numpy as np
from scipy.signal import resample_poly

from .errors import DomainError, FormatError

# Fraction of the peak envelope allowed to survive at the window edges.
SUPPORT_TOLERANCE = 0.05

GAUSSIAN_TAUS = (0.0005, 0.001, 0.0025, 0.005, 0.0075, 0.01, 0.02, 0.05)
SG_F0_RANGE = (100.0, 2000.0)
CSG_F0_RANGE = (5.0, 100.0)
CSG_ALPHA_RANGE = (10.0, 100.0)
CSG_TAU_RANGE = (0.001, 0.025)
CUSP_F0_RANGE = (50.0, 2000.0)
CHIRP_MASS_RANGE = (20.0, 50.0)
BLIP_CLIP_RANGE = (0.05, 0.25)
N_SURROGATE_SUPERNOVAE = 78

# Solar mass in seconds (G M_sun / c^3).
MSUN_SECONDS = 4.925490947641267e-6
MERGER_F_LOW = 30.0
MERGER_F_PEAK = 700.0


class TransientClass(IntEnum):
    RINGDOWN = 0
    SINE_GAUSSIAN = 1
    GAUSSIAN = 2
    CHIRPING_SINE_GAUSSIAN = 3
    CUSP = 4
    BLACK_HOLE_MERGER = 5
    BLIP = 6
    SUPERNOVA = 7

    @property
    def display_name(self):
        return CLASS_NAMES[self]

    @classmethod
    def coerce(cls, value):
        try:
            return cls(int(value))
        except (ValueError, TypeError):
            raise DomainError(f"unknown transient class code {value!r}") from None


CLASS_NAMES = {
    TransientClass.RINGDOWN: "Ring Gaussian",
    TransientClass.SINE_GAUSSIAN: "Sine Gaussian",
    TransientClass.GAUSSIAN: "Gaussian",
    TransientClass.CHIRPING_SINE_GAUSSIAN: "Chirping Sine Gaussian",
    TransientClass.CUSP: "Cusp",
    TransientClass.BLACK_HOLE_MERGER: "Binary Black Hole Merger",
    TransientClass.BLIP: "Blip",
    TransientClass.SUPERNOVA: "Supernova",
}

N_CLASSES = len(TransientClass)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform sampling grid; ``t0`` defaults to the window center."""

    n_samples: int = 1024
    sample_rate: float = 4096.0
    t0: float | None = None

    def __post_init__(self):
        n = int(self.n_samples)
        if n < 2 or n & (n - 1):
            raise DomainError(f"n_samples must be a power of two, got {self.n_samples}")
        if not self.sample_rate > 0:
            raise DomainError(f"sample_rate must be positive, got {self.sample_rate}")
        object.__setattr__(self, "n_samples", n)
        object.__setattr__(self, "sample_rate", float(self.sample_rate))
        if self.t0 is None:
            object.__setattr__(self, "t0", 0.5 * n / self.sample_rate)
        if not 0.0 <= self.t0 < self.duration:
            raise DomainError(f"t0={self.t0} lies outside [0, {self.duration})")

    @property
    def duration(self):
        return self.n_samples / self.sample_rate

    @property
    def times(self):
        return np.arange(self.n_samples) / self.sample_rate

    def offsets(self):
        """``t - t0`` at every grid point.

        Computed as ``(i - t0*rate)/rate`` so that moving ``t0`` by a whole
        number of samples shifts the result exactly.
        """
        return (np.arange(self.n_samples) - self.t0 * self.sample_rate) / self.sample_rate


@dataclass(frozen=True)
class TimeSeries:
    samples: np.ndarray
    grid: TimeGrid

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if s.shape != (self.grid.n_samples,):
            raise DomainError(f"expected {self.grid.n_samples} samples, got shape {s.shape}")
        if not np.all(np.isfinite(s)):
            raise DomainError("time series contains non-finite values")
        object.__setattr__(self, "samples", s)

    def __len__(self):
        return self.grid.n_samples


# --- parameter records -------------------------------------------------------


def _positive(name, value):
    if not value > 0:
        raise DomainError(f"{name} must be positive, got {value}")


@dataclass(frozen=True)
class GaussianParams:
    tau: float
    kind: ClassVar[TransientClass] = TransientClass.GAUSSIAN

    def __post_init__(self):
        _positive("tau", self.tau)


@dataclass(frozen=True)
class SineGaussianParams:
    f0: float
    tau: float
    kind: ClassVar[TransientClass] = TransientClass.SINE_GAUSSIAN

    def __post_init__(self):
        _positive("f0", self.f0)
        _positive("tau", self.tau)


@dataclass(frozen=True)
class RingdownParams:
    f0: float
    tau: float
    kind: ClassVar[TransientClass] = TransientClass.RINGDOWN

    def __post_init__(self):
        _positive("f0", self.f0)
        _positive("tau", self.tau)


@dataclass(frozen=True)
class ChirpingSineGaussianParams:
    f0: float
    alpha: float
    tau: float
    kind: ClassVar[TransientClass] = TransientClass.CHIRPING_SINE_GAUSSIAN

    def __post_init__(self):
        _positive("f0", self.f0)
        _positive("tau", self.tau)


@dataclass(frozen=True)
class CuspParams:
    f0: float
    amplitude: float = 1.0
    kind: ClassVar[TransientClass] = TransientClass.CUSP

    def __post_init__(self):
        _positive("f0", self.f0)


@dataclass(frozen=True)
class BlackHoleMergerParams:
    chirp_mass: float
    cos_iota: float
    kind: ClassVar[TransientClass] = TransientClass.BLACK_HOLE_MERGER

    def __post_init__(self):
        lo, hi = CHIRP_MASS_RANGE
        if not lo <= self.chirp_mass <= hi:
            raise DomainError(f"chirp_mass must lie in [{lo}, {hi}], got {self.chirp_mass}")
        if not 0.0 <= self.cos_iota <= 1.0:
            raise DomainError(f"cos_iota must lie in [0, 1], got {self.cos_iota}")


@dataclass(frozen=True)
class BlipParams:
    f0: float
    tau: float
    clip_fraction: float
    kind: ClassVar[TransientClass] = TransientClass.BLIP

    def __post_init__(self):
        _positive("f0", self.f0)
        _positive("tau", self.tau)
        if not 0.0 < self.clip_fraction < 1.0:
            raise DomainError(f"clip_fraction must lie in (0, 1), got {self.clip_fraction}")


@dataclass(frozen=True)
class SupernovaParams:
    model_id: int
    kind: ClassVar[TransientClass] = TransientClass.SUPERNOVA

    def __post_init__(self):
        if int(self.model_id) != self.model_id or self.model_id < 0:
            raise DomainError(f"model_id must be a non-negative integer, got {self.model_id}")
        object.__setattr__(self, "model_id", int(self.model_id))


PARAMS_BY_CLASS = {
    p.kind: p
    for p in (
        GaussianParams,
        SineGaussianParams,
        RingdownParams,
        ChirpingSineGaussianParams,
        CuspParams,
        BlackHoleMergerParams,
        BlipParams,
        SupernovaParams,
    )
}

N_PARAM_SLOTS = 6


def params_to_slots(params):
    """Pack a parameter record into ``(tag, six floats)`` for storage."""
    values = [float(getattr(params, f.name)) for f in fields(params)]
    return int(params.kind), values + [0.0] * (N_PARAM_SLOTS - len(values))


def params_from_slots(tag, slots):
    cls = PARAMS_BY_CLASS[TransientClass.coerce(tag)]
    names = [f.name for f in fields(cls)]
    kwargs = dict(zip(names, slots[: len(names)]))
    if cls is SupernovaParams:
        kwargs["model_id"] = int(kwargs["model_id"])
    return cls(**kwargs)


# --- parameter sampling ------------------------------------------------------


def _log_uniform(rng, lo, hi):
    return float(math.exp(rng.uniform(math.log(lo), math.log(hi))))


def sample_params(cls, rng, catalog=None):
    """Draw a parameter record for ``cls`` from its generation ranges.

    ``catalog`` restricts supernova model ids to the ids it holds; without
    one, ids range over the built-in surrogate family.
    """
    cls = TransientClass.coerce(cls)
    if cls is TransientClass.GAUSSIAN:
        return GaussianParams(tau=GAUSSIAN_TAUS[int(rng.integers(len(GAUSSIAN_TAUS)))])
    if cls is TransientClass.SINE_GAUSSIAN:
        f0 = _log_uniform(rng, *SG_F0_RANGE)
        return SineGaussianParams(f0=f0, tau=2.0 / f0)
    if cls is TransientClass.RINGDOWN:
        f0 = _log_uniform(rng, *SG_F0_RANGE)
        return RingdownParams(f0=f0, tau=4.0 / f0)
    if cls is TransientClass.CHIRPING_SINE_GAUSSIAN:
        return ChirpingSineGaussianParams(
            f0=float(rng.uniform(*CSG_F0_RANGE)),
            alpha=float(rng.uniform(*CSG_ALPHA_RANGE)),
            tau=float(rng.uniform(*CSG_TAU_RANGE)),
        )
    if cls is TransientClass.CUSP:
        return CuspParams(f0=float(rng.uniform(*CUSP_F0_RANGE)))
    if cls is TransientClass.BLACK_HOLE_MERGER:
        return BlackHoleMergerParams(
            chirp_mass=float(rng.uniform(*CHIRP_MASS_RANGE)),
            cos_iota=float(rng.uniform(0.0, 1.0)),
        )
    if cls is TransientClass.BLIP:
        f0 = _log_uniform(rng, *SG_F0_RANGE)
        return BlipParams(f0=f0, tau=2.0 / f0, clip_fraction=float(rng.uniform(*BLIP_CLIP_RANGE)))
    ids = catalog.model_ids if catalog is not None else range(N_SURROGATE_SUPERNOVAE)
    return SupernovaParams(model_id=int(ids[int(rng.integers(len(ids)))]))


# --- synthesis ---------------------------------------------------------------


def _check_support(grid, edge_envelope, what):
    if edge_envelope > SUPPORT_TOLERANCE:
        raise DomainError(
            f"{what} does not fit in a {grid.duration:g} s window "
            f"(envelope at window edge is {edge_envelope:.3g} of peak)"
        )


def _edges(grid):
    dt = grid.offsets()
    return -dt[0], dt[-1]


def _gaussian(params, grid):
    left, right = _edges(grid)
    _check_support(grid, math.exp(-((min(left, right) / params.tau) ** 2)), "gaussian")
    dt = grid.offsets()
    return np.exp(-((dt / params.tau) ** 2))


def _sine_gaussian(params, grid):
    left, right = _edges(grid)
    _check_support(grid, math.exp(-((min(left, right) / params.tau) ** 2)), "sine-gaussian")
    dt = grid.offsets()
    return np.exp(-((dt / params.tau) ** 2)) * np.sin(2.0 * np.pi * params.f0 * dt)


def _ringdown(params, grid):
    _, right = _edges(grid)
    _check_support(grid, math.exp(-right / params.tau), "ringdown")
    dt = grid.offsets()
    out = np.zeros(grid.n_samples)
    on = dt >= 0.0
    out[on] = np.exp(-dt[on] / params.tau) * np.cos(2.0 * np.pi * params.f0 * dt[on])
    return out


def _chirping_sine_gaussian(params, grid):
    left, right = _edges(grid)
    edge = min(left, right)
    _check_support(grid, math.exp(-(edge**2) / (4.0 * params.tau**2)), "chirping sine-gaussian")
    dt = grid.offsets()
    tau2 = params.tau**2
    exponent = -(1.0 - 1j * params.alpha) * dt**2 / (4.0 * tau2) + 2j * np.pi * dt * params.f0
    return (np.exp(exponent) / (2.0 * np.pi * tau2) ** 0.25).real


def cusp_spectrum(freqs, f0, amplitude=1.0):
    """``A f^(-4/3)`` up to ``f0``, continued by an exponential roll-off."""
    freqs = np.asarray(freqs, dtype=float)
    h = np.zeros_like(freqs)
    below = (freqs > 0) & (freqs <= f0)
    above = freqs > f0
    h[below] = freqs[below] ** (-4.0 / 3.0)
    h[above] = f0 ** (-4.0 / 3.0) * np.exp(1.0 - freqs[above] / f0)
    return amplitude * h


def _cusp(params, grid):
    n, rate = grid.n_samples, grid.sample_rate
    freqs = np.fft.rfftfreq(n, 1.0 / rate)
    spectrum = cusp_spectrum(freqs, params.f0, params.amplitude)
    spectrum = spectrum * np.exp(-2j * np.pi * freqs * grid.t0)
    return np.fft.irfft(spectrum, n) * rate


def chirp_time(freq, chirp_mass):
    """Leading-order time to coalescence from gravitational-wave frequency ``freq``."""
    mc = chirp_mass * MSUN_SECONDS
    return 5.0 / 256.0 * mc ** (-5.0 / 3.0) * (np.pi * freq) ** (-8.0 / 3.0)


def _black_hole_merger(params, grid):
    mc = params.chirp_mass * MSUN_SECONDS
    inclination_scale = 0.5 * (1.0 + params.cos_iota**2)
    t_end = chirp_time(MERGER_F_PEAK, params.chirp_mass)
    t_start = chirp_time(MERGER_F_LOW, params.chirp_mass)

    dt = grid.offsets()
    out = np.zeros(grid.n_samples)

    # Inspiral: dt <= 0, time to coalescence T = t_end - dt.
    T = t_end - dt
    inspiral = (dt <= 0.0) & (T <= t_start)
    Ti = T[inspiral]
    freq = (5.0 / (256.0 * Ti)) ** 0.375 * mc ** (-0.625) / np.pi
    phase = -2.0 * (Ti / (5.0 * mc)) ** 0.625
    amp = inclination_scale * (freq / MERGER_F_PEAK) ** (2.0 / 3.0)
    out[inspiral] = amp * np.cos(phase)

    # Ringdown stitched with continuous value and slope at the peak frequency.
    phase_end = -2.0 * (t_end / (5.0 * mc)) ** 0.625
    amp_end = inclination_scale
    omega_end = 2.0 * np.pi * MERGER_F_PEAK
    damp_end = (2.0 / 3.0) * (3.0 / 8.0) / t_end  # a'/a at the end of the inspiral
    value = amp_end * math.cos(phase_end)
    slope = amp_end * (damp_end * math.cos(phase_end) - omega_end * math.sin(phase_end))
    tau_r = 4.0 / MERGER_F_PEAK
    a_cos = value
    a_sin = -(slope + value / tau_r) / omega_end
    post = dt > 0.0
    u = dt[post]
    out[post] = np.exp(-u / tau_r) * (a_cos * np.cos(omega_end * u) - a_sin * np.sin(omega_end * u))

    # Smooth turn-on over the first eighth of the window (or of the inspiral).
    support = np.flatnonzero(inspiral)
    if support.size:
        first = support[0]
        width = max(grid.n_samples // 8, 1)
        ramp = np.arange(width) / width
        stop = min(first + width, grid.n_samples)
        out[first:stop] *= 0.5 - 0.5 * np.cos(np.pi * ramp[: stop - first])
    return out


_GOLDEN3 = 1.2207440846057596  # real root of x^4 = x + 1


def surrogate_supernova_parameters(model_id):
    """(dip width s, oscillation frequency Hz, damping time s) for a surrogate model.

    Ids 0..77 are spread over the parameter box with an additive
    low-discrepancy sequence.
    """
    if not 0 <= model_id < N_SURROGATE_SUPERNOVAE:
        raise DomainError(f"surrogate supernova model_id must lie in [0, 77], got {model_id}")
    u = [((model_id + 0.5) / _GOLDEN3**k) % 1.0 for k in (1, 2, 3)]
    width = 0.5e-3 * 10.0 ** u[0]
    freq = 100.0 + 700.0 * u[1]
    damping = 5e-3 + 25e-3 * u[2]
    return width, freq, damping


def _surrogate_supernova(model_id, grid):
    width, freq, damping = surrogate_supernova_parameters(model_id)
    left, right = _edges(grid)
    _check_support(grid, max(math.exp(-right / damping), math.exp(-(left**2) / (2 * width**2))), "supernova")
    dt = grid.offsets()
    out = -np.exp(-(dt**2) / (2.0 * width**2))
    on = dt >= 0.0
    out[on] += 0.6 * np.exp(-dt[on] / damping) * np.sin(2.0 * np.pi * freq * dt[on])
    return out


def clip_blip(sg, clip_fraction):
    """Hard-limit a waveform to ``±clip_fraction`` of its peak magnitude."""
    if not 0.0 < clip_fraction < 1.0:
        raise DomainError(f"clip_fraction must lie in (0, 1), got {clip_fraction}")
    samples = sg.samples if isinstance(sg, TimeSeries) else np.asarray(sg, dtype=float)
    level = clip_fraction * np.max(np.abs(samples))
    clipped = np.clip(samples, -level, level)
    return TimeSeries(clipped, sg.grid) if isinstance(sg, TimeSeries) else clipped


def _normalize(samples):
    peak = np.max(np.abs(samples))
    if peak == 0.0:
        raise DomainError("waveform is identically zero on this grid")
    return samples / peak


def synthesize(cls, params, grid=None, *, catalog=None, normalize=True):
    """Evaluate the waveform of class ``cls`` on ``grid``.

    With ``normalize=True`` (the default) the result has unit peak
    magnitude.  ``catalog`` supplies supernova templates; without it the
    analytic surrogate family is used.
    """
    cls = TransientClass.coerce(cls)
    grid = grid or TimeGrid()
    if params.kind is not cls:
        raise DomainError(f"{type(params).__name__} does not describe class {cls.name}")

    if cls is TransientClass.GAUSSIAN:
        s = _gaussian(params, grid)
    elif cls is TransientClass.SINE_GAUSSIAN:
        s = _sine_gaussian(params, grid)
    elif cls is TransientClass.RINGDOWN:
        s = _ringdown(params, grid)
    elif cls is TransientClass.CHIRPING_SINE_GAUSSIAN:
        s = _chirping_sine_gaussian(params, grid)
    elif cls is TransientClass.CUSP:
        s = _cusp(params, grid)
    elif cls is TransientClass.BLACK_HOLE_MERGER:
        s = _black_hole_merger(params, grid)
    elif cls is TransientClass.BLIP:
        sg = _normalize(_sine_gaussian(SineGaussianParams(params.f0, params.tau), grid))
        s = clip_blip(sg, params.clip_fraction)
    else:
        if catalog is None:
            s = _surrogate_supernova(params.model_id, grid)
        else:
            s = catalog.template(params.model_id, grid).samples

    if normalize:
        s = _normalize(s)
    return TimeSeries(s, grid)


# --- supernova catalog -------------------------------------------------------


@dataclass(frozen=True)
class SupernovaCatalog:
    """Supernova templates keyed by model id, all sampled on ``grid``."""

    grid: TimeGrid
    templates: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.templates:
            raise DomainError("supernova catalog is empty")

    @property
    def model_ids(self):
        return sorted(self.templates)

    def __len__(self):
        return len(self.templates)

    def template(self, model_id, grid=None):
        if grid is not None and grid != self.grid:
            raise DomainError("catalog was built for a different time grid")
        try:
            return self.templates[model_id]
        except KeyError:
            raise DomainError(f"model_id {model_id} not in supernova catalog") from None


def _place_on_grid(values, grid):
    """Resampled template placed with its peak at ``t0``, zero-padded or cut."""
    out = np.zeros(grid.n_samples)
    peak = int(np.argmax(np.abs(values)))
    target = int(round(grid.t0 * grid.sample_rate))
    start = target - peak
    lo, hi = max(start, 0), min(start + len(values), grid.n_samples)
    if hi > lo:
        out[lo:hi] = values[lo - start : hi - start]
    return out


def resample(values, from_rate, to_rate):
    """Polyphase resampling between two sample rates."""
    if from_rate == to_rate:
        return np.asarray(values, dtype=float)
    ratio = Fraction(to_rate / from_rate).limit_denominator(10_000)
    return resample_poly(np.asarray(values, dtype=float), ratio.numerator, ratio.denominator)


def load_supernova_catalog(path=None, grid=None):
    """Read a plain-text supernova catalog, or build the surrogate family.

    Each non-comment line holds ``model_id sample_rate_hz v0 v1 ...``.
    Templates are resampled to ``grid.sample_rate`` and placed with their
    peak at ``grid.t0``.  ``path=None`` returns the 78 surrogate templates.
    """
    grid = grid or TimeGrid()
    if path is None:
        return SupernovaCatalog(
            grid,
            {m: TimeSeries(_surrogate_supernova(m, grid), grid) for m in range(N_SURROGATE_SUPERNOVAE)},
        )

    templates = {}
    with open(Path(path)) as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            tokens = text.split()
            if len(tokens) < 3:
                raise FormatError("expected 'model_id sample_rate v0 v1 ...'", line=lineno)
            try:
                model_id = int(tokens[0])
                rate = float(tokens[1])
                values = np.array([float(t) for t in tokens[2:]])
            except ValueError as exc:
                raise FormatError(f"bad number: {exc}", line=lineno) from None
            if rate <= 0 or not np.all(np.isfinite(values)):
                raise FormatError("sample rate must be positive and samples finite", line=lineno)
            if model_id in templates:
                raise FormatError(f"duplicate model_id {model_id}", line=lineno)
            if not np.any(values):
                raise FormatError(f"model {model_id} is identically zero", line=lineno)
            placed = _place_on_grid(resample(values, rate, grid.sample_rate), grid)
            templates[model_id] = TimeSeries(placed, grid)
    if not templates:
        raise DomainError(f"supernova catalog {path} contains no waveforms")
    return SupernovaCatalog(grid, templates)
