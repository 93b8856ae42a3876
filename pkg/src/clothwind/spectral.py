"""Fixed video front-end: temporal smoothing, spatial Gaussian derivatives,
2x max-pooling and a per-pixel temporal spectral decomposition.

All operations are pure functions over float arrays shaped ``(C, T, H, W)``
(channels, frames, rows, cols). Nothing in this module is trainable.

Filtering convention: correlation with an odd-length tap vector,
``out[i] = sum_j K[j] * f(i + j)`` for ``j in [-r, r]``, with reflect
padding that duplicates the edge sample (numpy's ``symmetric`` pad mode).
Kernels are truncated at three standard deviations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

__all__ = [
    "FrontEndConfig",
    "SpectralMaps",
    "gaussian_kernel",
    "gaussian_derivative_kernel",
    "ramp_gain",
    "temporal_gaussian",
    "spatial_derivatives",
    "maxpool2",
    "periodogram",
    "topk_peaks",
    "spectral_decompose",
    "front_end",
]


@dataclass(frozen=True)
class FrontEndConfig:
    """Hyperparameters of the fixed front-end.

    ``fps`` is the temporal sampling rate of the input clips; peak
    frequencies are reported normalized by the Nyquist rate ``fps / 2``.
    """

    sigma_t: float = 1.0
    sigma_xy: float = 2.0
    pool: int = 2
    k: int = 1
    fps: float = 25.0

    def __post_init__(self):
        if self.sigma_t <= 0 or self.sigma_xy <= 0:
            raise ValueError("filter sigmas must be positive")
        if self.k < 1:
            raise ValueError("peak count k must be >= 1")
        if self.pool not in (1, 2):
            raise ValueError("pool factor must be 1 or 2")
        if self.fps <= 0:
            raise ValueError("fps must be positive")


@dataclass
class SpectralMaps:
    """Per-pixel spectral peaks: log-compressed power and peak frequency.

    ``power`` holds ``log(1 + I)`` at the selected periodogram peaks and
    ``frequency`` the matching frequencies normalized by Nyquist into
    [0, 1]; both are shaped ``(k*C, H, W)`` with the k peaks of channel c
    stored at rows ``c*k .. c*k+k-1``.
    """

    power: np.ndarray
    frequency: np.ndarray

    def __post_init__(self):
        if self.power.shape != self.frequency.shape:
            raise ValueError("power and frequency shapes differ")
        if np.any(self.power < 0):
            raise ValueError("peak power channels must be non-negative")
        if np.any(self.frequency < 0) or np.any(self.frequency > 1):
            raise ValueError("frequencies must be normalized into [0, 1]")

    @property
    def channels(self) -> np.ndarray:
        """Stacked (power then frequency) feature map of shape (2kC, H, W)."""
        return np.concatenate([self.power, self.frequency], axis=0)


def gaussian_kernel(sigma: float) -> np.ndarray:
    """Odd-length Gaussian taps, truncated at 3*sigma, normalized to sum 1."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    r = int(np.ceil(3.0 * sigma))
    x = np.arange(-r, r + 1, dtype=np.float64)
    k = np.exp(-0.5 * (x / sigma) ** 2)
    return k / k.sum()


def gaussian_derivative_kernel(sigma: float) -> np.ndarray:
    """First-order Gaussian derivative taps.

    Orientation: correlating a unit ramp ``f(i) = i`` with these taps yields
    ``+ramp_gain(kernel)`` (close to 1) everywhere in the interior.
    """
    g = gaussian_kernel(sigma)
    r = (len(g) - 1) // 2
    x = np.arange(-r, r + 1, dtype=np.float64)
    return x * g / sigma**2


def ramp_gain(kernel: np.ndarray) -> float:
    """Response of a derivative kernel to a unit ramp along its axis."""
    r = (len(kernel) - 1) // 2
    return float(np.sum(np.arange(-r, r + 1) * kernel))


def _correlate(volume: np.ndarray, kernel: np.ndarray, axis: int) -> np.ndarray:
    out = np.empty_like(volume, dtype=np.float64)
    ndimage.correlate1d(volume.astype(np.float64, copy=False), kernel,
                        axis=axis, mode="reflect", output=out)
    return out


def temporal_gaussian(volume: np.ndarray, sigma_t: float) -> np.ndarray:
    """Smooth along the frame axis with a normalized Gaussian."""
    kernel = gaussian_kernel(sigma_t)
    if volume.shape[1] < len(kernel):
        raise ValueError(
            f"need at least {len(kernel)} frames for sigma_t={sigma_t}, "
            f"got {volume.shape[1]}")
    return _correlate(volume, kernel, axis=1)


def spatial_derivatives(volume: np.ndarray, sigma_xy: float):
    """Separable first-order Gaussian derivative filtering per frame.

    Returns ``(d/dx, d/dy)`` volumes where x runs along the width (last
    axis) and y along the height.
    """
    smooth = gaussian_kernel(sigma_xy)
    deriv = gaussian_derivative_kernel(sigma_xy)
    if volume.shape[2] < len(smooth) or volume.shape[3] < len(smooth):
        raise ValueError(
            f"frames of shape {volume.shape[2:]} are smaller than the "
            f"{len(smooth)}-tap kernel for sigma_xy={sigma_xy}")
    dx = _correlate(_correlate(volume, deriv, axis=3), smooth, axis=2)
    dy = _correlate(_correlate(volume, deriv, axis=2), smooth, axis=3)
    return dx, dy


def maxpool2(volume: np.ndarray) -> np.ndarray:
    """Non-overlapping 2x2 spatial max-pooling per frame and channel."""
    c, t, h, w = volume.shape
    if h % 2 or w % 2:
        raise ValueError(f"spatial size {h}x{w} not even; crop first")
    return volume.reshape(c, t, h // 2, 2, w // 2, 2).max(axis=(3, 5))


def hanning_window(n: int) -> np.ndarray:
    """DFT-even Hanning taper ``0.5 * (1 - cos(2*pi*n/N))``.

    The DFT-even form makes the windowed power of an integer-period
    sinusoid exactly independent of its phase, which the shift-robustness
    contract of the spectral maps relies on.
    """
    return 0.5 * (1.0 - np.cos(2.0 * np.pi * np.arange(n) / n))


def periodogram(signal: np.ndarray) -> np.ndarray:
    """Windowed periodogram of mean-removed signals along the last axis.

    Returns ``I(w) = |F|^2 / N`` at the non-negative frequency bins
    ``0 .. N // 2``, so ``I.shape[-1] == N // 2 + 1``.
    """
    signal = np.asarray(signal, dtype=np.float64)
    n = signal.shape[-1]
    if n < 4:
        raise ValueError(f"need at least 4 samples, got {n}")
    x = signal - signal.mean(axis=-1, keepdims=True)
    spectrum = np.fft.rfft(x * hanning_window(n), axis=-1)
    return (spectrum.real**2 + spectrum.imag**2) / n


def topk_peaks(power: np.ndarray, k: int, fps: float, n_t: int):
    """Top-k periodogram peaks, strongest first.

    ``power`` holds the one-sided periodogram bins along the last axis.
    The DC bin is excluded; ties pick the lower bin. Returns a pair of
    arrays shaped ``power.shape[:-1] + (k,)``: peak powers and peak
    frequencies normalized by Nyquist (bin * fps / n_t scaled by 2 / fps).
    """
    power = np.asarray(power, dtype=np.float64)
    bins = power.shape[-1]
    if not 1 <= k < bins:
        raise ValueError(f"k={k} out of range for {bins} bins")
    ac = power[..., 1:]
    # stable argsort on -power keeps the lower bin first among ties
    order = np.argsort(-ac, axis=-1, kind="stable")[..., :k]
    peak_power = np.take_along_axis(ac, order, axis=-1)
    peak_freq = 2.0 * (order + 1) / n_t
    return peak_power, peak_freq


def spectral_decompose(volume: np.ndarray, config: FrontEndConfig) -> SpectralMaps:
    """Collapse the time axis of a video into per-pixel spectral peaks.

    Maps a ``(C, T, H, W)`` volume to ``SpectralMaps`` whose stacked
    output has ``2 * k * C`` channels: ``log(1 + I)`` at the selected
    peaks followed by the matching normalized frequencies.
    """
    volume = np.asarray(volume, dtype=np.float64)
    if volume.ndim != 4:
        raise ValueError(f"expected (C, T, H, W) volume, got shape {volume.shape}")
    c, t, h, w = volume.shape
    if t < 4:
        raise ValueError(f"need at least 4 frames, got {t}")
    if config.k >= t / 2:
        raise ValueError(f"k={config.k} too large for {t} frames")
    spectra = periodogram(np.moveaxis(volume, 1, -1))        # (C, H, W, B)
    power, freq = topk_peaks(spectra, config.k, config.fps, t)
    power = np.log1p(np.moveaxis(power, -1, 1)).reshape(c * config.k, h, w)
    freq = np.moveaxis(freq, -1, 1).reshape(c * config.k, h, w)
    return SpectralMaps(power=power, frequency=freq)


def front_end(volume: np.ndarray, config: FrontEndConfig) -> np.ndarray:
    """Full fixed pipeline: smooth, differentiate, pool, decompose.

    Returns a ``(4*k*C, H', W')`` feature map holding the stacked spectral
    maps of the x- then y-derivative volumes. Odd spatial sizes are
    cropped by one row/column before pooling.
    """
    smoothed = temporal_gaussian(np.asarray(volume, dtype=np.float64), config.sigma_t)
    dx, dy = spatial_derivatives(smoothed, config.sigma_xy)
    if config.pool == 2:
        h, w = dx.shape[2] & ~1, dx.shape[3] & ~1
        dx = maxpool2(dx[:, :, :h, :w])
        dy = maxpool2(dy[:, :, :h, :w])
    maps_x = spectral_decompose(dx, config)
    maps_y = spectral_decompose(dy, config)
    return np.concatenate([maps_x.channels, maps_y.channels], axis=0)
