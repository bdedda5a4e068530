"""Mel-frequency cepstral coefficients.

Pipeline per frame: radix-2 FFT power spectrum, triangular mel filterbank,
natural-log energies, DCT-II keeping coefficients 1..num_coeffs. Frame-level
coefficients are stretched to a fixed frame count and flattened so every
utterance maps to the same vector length.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .dsp import PreprocessConfig, preprocess, resample_frames
from .errors import DegenerateBank, LengthMismatch, UsageError

LOG_FLOOR = 1e-10


@dataclass(frozen=True)
class MfccConfig:
    num_filters: int = 26
    num_coeffs: int = 12
    target_frames: int = 18
    fmin: float = 0.0
    fmax: float | None = None  # None -> Nyquist

    def __post_init__(self):
        if not 1 <= self.num_coeffs <= self.num_filters:
            raise UsageError("need 1 <= num_coeffs <= num_filters")
        if self.target_frames < 1:
            raise UsageError("target_frames must be >= 1")
        if self.fmin < 0 or (self.fmax is not None and self.fmax <= self.fmin):
            raise UsageError("need 0 <= fmin < fmax")

    @property
    def dim(self) -> int:
        return self.num_coeffs * self.target_frames


@dataclass(frozen=True)
class FilterBank:
    weights: np.ndarray  # (num_filters, n_fft // 2 + 1)
    center_freqs_hz: np.ndarray
    edge_bins: np.ndarray  # num_filters + 2 FFT bin indices
    sample_rate: int


def next_pow2(n: int) -> int:
    return 1 << max(0, int(n - 1).bit_length())


@lru_cache(maxsize=16)
def _bit_reversal(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.int64)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    return rev


def fft_radix2(x) -> np.ndarray:
    """Iterative decimation-in-time FFT along the last axis.

    The length of the last axis must be a power of two.
    """
    a = np.asarray(x, dtype=np.complex128)
    n = a.shape[-1]
    if n & (n - 1) or n == 0:
        raise LengthMismatch(f"FFT length {n} is not a power of two")
    a = a[..., _bit_reversal(n)]
    lead = a.shape[:-1]
    size = 2
    while size <= n:
        half = size // 2
        tw = np.exp(-2j * np.pi * np.arange(half) / size)
        blocks = a.reshape(lead + (n // size, size))
        even = blocks[..., :half]
        odd = blocks[..., half:] * tw
        a = np.concatenate([even + odd, even - odd], axis=-1).reshape(lead + (n,))
        size *= 2
    return a


def dft_power_spectrum(frame, n_fft: int | None = None) -> np.ndarray:
    """One-sided power spectrum ``|Y(k)|^2`` for ``k = 0 .. n_fft/2``.

    The frame (or each row of a 2-D batch) is zero-padded to ``n_fft``,
    which defaults to the next power of two of the frame length.
    """
    x = np.asarray(frame, dtype=np.float64)
    N = x.shape[-1]
    if n_fft is None:
        n_fft = next_pow2(max(N, 2))
    if n_fft < N:
        raise LengthMismatch(f"n_fft {n_fft} shorter than frame {N}")
    if n_fft != N:
        pad = [(0, 0)] * (x.ndim - 1) + [(0, n_fft - N)]
        x = np.pad(x, pad)
    y = fft_radix2(x)[..., : n_fft // 2 + 1]
    return (y * y.conj()).real


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def build_mel_filterbank(cfg: MfccConfig, N: int, sample_rate: int) -> FilterBank:
    """Triangular filters with mel-equispaced centers over ``N``-point FFT bins.

    Filter ``p`` rises from edge ``p-1`` to a peak at its center and falls to
    edge ``p+1``; the height ``2 / (hi - lo)`` gives each triangle unit area
    in bin units.
    """
    fmax = sample_rate / 2.0 if cfg.fmax is None else cfg.fmax
    if fmax > sample_rate / 2.0 + 1e-9:
        raise UsageError(f"fmax {fmax} exceeds Nyquist {sample_rate / 2}")
    P = cfg.num_filters
    edges_hz = mel_to_hz(np.linspace(hz_to_mel(cfg.fmin), hz_to_mel(fmax), P + 2))
    bins = np.round(edges_hz * N / sample_rate).astype(int)
    if np.any(np.diff(bins) <= 0):
        raise DegenerateBank(
            f"{P} filters collapse onto shared FFT bins at N={N}, rate={sample_rate}"
        )
    width = N // 2 + 1
    k = np.arange(width)
    W = np.zeros((P, width))
    for p in range(P):
        lo, c, hi = bins[p], bins[p + 1], bins[p + 2]
        rise = (k >= lo) & (k <= c)
        fall = (k > c) & (k <= hi)
        W[p, rise] = 2.0 * (k[rise] - lo) / ((hi - lo) * (c - lo))
        W[p, fall] = 2.0 * (hi - k[fall]) / ((hi - lo) * (hi - c))
    return FilterBank(W, edges_hz[1:-1], bins, sample_rate)


_bank_cache = lru_cache(maxsize=32)(build_mel_filterbank)


def log_mel_energies(power, bank: FilterBank) -> np.ndarray:
    power = np.asarray(power, dtype=np.float64)
    if power.shape[-1] != bank.weights.shape[1]:
        raise LengthMismatch(
            f"power spectrum width {power.shape[-1]} != bank width {bank.weights.shape[1]}"
        )
    return np.log(power @ bank.weights.T + LOG_FLOOR)


def dct_cepstrum(log_energies, num_coeffs: int) -> np.ndarray:
    """Unnormalized DCT-II over the filter axis, coefficients 1..num_coeffs."""
    L = np.asarray(log_energies, dtype=np.float64)
    P = L.shape[-1]
    if num_coeffs > P:
        raise UsageError("num_coeffs exceeds number of log energies")
    k = np.arange(1, num_coeffs + 1)[:, None]
    basis = np.cos(np.pi * k * (np.arange(P)[None, :] + 0.5) / P)
    return L @ basis.T


def mfcc_frames(signal, pre: PreprocessConfig, cfg: MfccConfig) -> np.ndarray:
    """Per-frame MFCC matrix of shape (T, num_coeffs)."""
    fm = preprocess(signal, pre)
    n_fft = next_pow2(max(fm.frame_len, 2))
    bank = _bank_cache(cfg, n_fft, signal.sample_rate)
    power = dft_power_spectrum(fm.frames, n_fft)
    return dct_cepstrum(log_mel_energies(power, bank), cfg.num_coeffs)


def mfcc_features(signal, pre: PreprocessConfig, cfg: MfccConfig) -> np.ndarray:
    """Fixed-length MFCC vector of ``num_coeffs * target_frames`` values, frame-major."""
    return resample_frames(mfcc_frames(signal, pre, cfg), cfg.target_frames).ravel()
