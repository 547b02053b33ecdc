"""White noise, matched-filter SNR, Welch PSD estimation and whitening."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal as sps

from .errors import DomainError
from .waveforms import TimeSeries

PSD_FLOOR = 1e-10


@dataclass(frozen=True)
class NoiseModel:
    sigma: float = 1.0
    kind: str = "white_gaussian"

    def __post_init__(self):
        if self.kind != "white_gaussian":
            raise DomainError(f"unsupported noise kind {self.kind!r}")
        if not self.sigma > 0:
            raise DomainError(f"sigma must be positive, got {self.sigma}")


@dataclass(frozen=True)
class PsdEstimate:
    """One-sided power spectral density, every bin (DC and Nyquist too) doubled."""

    frequencies: np.ndarray
    power: np.ndarray
    segment_length: int
    sample_rate: float


def _samples(series):
    if isinstance(series, TimeSeries):
        return series.samples
    return np.asarray(series, dtype=float)


def _like(template, samples):
    if isinstance(template, TimeSeries):
        return TimeSeries(samples, template.grid)
    return samples


def white_noise(n, sigma, rng):
    """``n`` i.i.d. zero-mean Gaussian samples with standard deviation ``sigma``."""
    if n < 1:
        raise DomainError(f"n must be at least 1, got {n}")
    if not sigma > 0:
        raise DomainError(f"sigma must be positive, got {sigma}")
    return sigma * rng.standard_normal(int(n))


def matched_filter_snr(signal, noise=NoiseModel()):
    """Optimal white-noise SNR ``||s||_2 / sigma``."""
    s = _samples(signal)
    return float(np.sqrt(np.dot(s, s)) / noise.sigma)


def scale_to_snr(signal, target_snr, noise=NoiseModel()):
    """Rescale ``signal`` so that its matched-filter SNR equals ``target_snr``."""
    if not target_snr > 0:
        raise DomainError(f"target_snr must be positive, got {target_snr}")
    rho = matched_filter_snr(signal, noise)
    if rho == 0.0:
        raise DomainError("cannot scale an identically zero signal")
    return _like(signal, _samples(signal) * (target_snr / rho))


def estimate_psd(series, segment_length, sample_rate=None):
    """Welch PSD: Hann windows, 50 % overlap, no detrending.

    ``sample_rate`` is taken from the series' grid when a ``TimeSeries`` is
    given.
    """
    x = _samples(series)
    if sample_rate is None:
        if not isinstance(series, TimeSeries):
            raise DomainError("sample_rate is required for a bare array")
        sample_rate = series.grid.sample_rate
    segment_length = int(segment_length)
    if segment_length < 2 or segment_length & (segment_length - 1):
        raise DomainError(f"segment_length must be a power of two, got {segment_length}")
    if segment_length > x.size:
        raise DomainError(f"segment_length {segment_length} exceeds series length {x.size}")
    # Two-sided estimate folded by hand so DC and Nyquist carry the same
    # factor of two as every other bin; whitening then divides by a single
    # expression everywhere.
    _, two_sided = sps.welch(
        x,
        fs=sample_rate,
        window="hann",
        nperseg=segment_length,
        noverlap=segment_length // 2,
        detrend=False,
        return_onesided=False,
        scaling="density",
    )
    half = segment_length // 2 + 1
    freqs = np.fft.rfftfreq(segment_length, 1.0 / sample_rate)
    return PsdEstimate(freqs, 2.0 * two_sided[:half], segment_length, float(sample_rate))


def floored(psd, floor=PSD_FLOOR):
    """Copy of ``psd`` with bins below ``floor * max`` raised to that level."""
    level = floor * np.max(psd.power)
    return PsdEstimate(psd.frequencies, np.maximum(psd.power, level), psd.segment_length, psd.sample_rate)


def whiten(series, psd):
    """Divide the spectrum of ``series`` by ``sqrt(psd * rate / 2)``.

    The series length must equal ``psd.segment_length`` so the frequency
    bins line up.  Whitening is linear; unit-variance white noise whitened
    by its own PSD stays (approximately) unit-variance white noise.
    """
    x = _samples(series)
    if x.shape[-1] != psd.segment_length:
        raise DomainError(
            f"series length {x.shape[-1]} does not match PSD segment length {psd.segment_length}"
        )
    if not np.all(psd.power > 0):
        raise DomainError("PSD has non-positive bins; floor it before whitening")
    asd = np.sqrt(psd.power * psd.sample_rate / 2.0)
    out = np.fft.irfft(np.fft.rfft(x, axis=-1) / asd, x.shape[-1], axis=-1)
    return _like(series, out)
