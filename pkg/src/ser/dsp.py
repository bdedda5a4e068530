"""Pre-emphasis, overlapping framing and windowing."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyAudio, LengthMismatch, UsageError


@dataclass(frozen=True)
class PreprocessConfig:
    pre_emphasis: float = 0.97
    frame_ms: float = 50.0
    hop_fraction: float = 0.5
    window: str = "hamming"

    def __post_init__(self):
        if not 0.0 <= self.pre_emphasis <= 1.0:
            raise UsageError("pre_emphasis must lie in [0, 1]")
        if not 0.0 < self.hop_fraction <= 1.0:
            raise UsageError("hop_fraction must lie in (0, 1]")
        if self.frame_ms <= 0:
            raise UsageError("frame_ms must be positive")
        if self.window not in ("hamming", "rectangular"):
            raise UsageError(f"unknown window {self.window!r}")


@dataclass(frozen=True)
class FrameMatrix:
    frames: np.ndarray  # (T, N)
    frame_len: int
    hop: int
    sample_rate: int


def pre_emphasize(samples, A: float) -> np.ndarray:
    """First-order high-pass FIR ``y[n] = x[n] - A x[n-1]`` with ``y[0] = x[0]``."""
    x = np.asarray(samples, dtype=np.float64)
    y = x.copy()
    y[1:] -= A * x[:-1]
    return y


def hamming_window(N: int) -> np.ndarray:
    if N < 1:
        raise UsageError("window length must be >= 1")
    if N == 1:
        return np.ones(1)
    n = np.arange(N)
    return 0.54 - 0.46 * np.cos(2.0 * np.pi * n / (N - 1))


def make_window(kind: str, N: int) -> np.ndarray:
    return hamming_window(N) if kind == "hamming" else np.ones(N)


def frame_geometry(sample_rate: int, cfg: PreprocessConfig) -> tuple:
    N = max(1, int(round(cfg.frame_ms * sample_rate / 1000.0)))
    hop = max(1, int(round(N * cfg.hop_fraction)))
    return N, hop


def frame_samples(x: np.ndarray, N: int, hop: int) -> np.ndarray:
    """Slice into frames of ``N`` starting every ``hop`` samples.

    Frame count is ``floor((len - N) / hop) + 1``. A signal shorter than
    ``N`` yields a single zero-padded frame.
    """
    L = len(x)
    if L < N:
        out = np.zeros((1, N))
        out[0, :L] = x
        return out
    T = (L - N) // hop + 1
    idx = np.arange(T)[:, None] * hop + np.arange(N)[None, :]
    return x[idx]


def frame_signal(signal, cfg: PreprocessConfig) -> FrameMatrix:
    x = np.asarray(signal.samples, dtype=np.float64)
    if x.size == 0:
        raise EmptyAudio("cannot frame an empty signal")
    N, hop = frame_geometry(signal.sample_rate, cfg)
    return FrameMatrix(frame_samples(x, N, hop), N, hop, signal.sample_rate)


def apply_window(frames: FrameMatrix, window) -> FrameMatrix:
    w = np.asarray(window, dtype=np.float64)
    if w.shape != (frames.frame_len,):
        raise LengthMismatch(f"window length {w.size} != frame length {frames.frame_len}")
    return FrameMatrix(frames.frames * w, frames.frame_len, frames.hop, frames.sample_rate)


def preprocess(signal, cfg: PreprocessConfig) -> FrameMatrix:
    """Pre-emphasis, framing and windowing in one pass."""
    emphasized = type(signal)(
        samples=pre_emphasize(signal.samples, cfg.pre_emphasis),
        sample_rate=signal.sample_rate,
        source_path=signal.source_path,
        label=signal.label,
    )
    fm = frame_signal(emphasized, cfg)
    return apply_window(fm, make_window(cfg.window, fm.frame_len))


def resample_frames(mat, target: int) -> np.ndarray:
    """Stretch a (T, C) per-frame matrix to ``target`` rows by linear
    interpolation over frame index. A single frame is repeated."""
    mat = np.asarray(mat, dtype=np.float64)
    T = mat.shape[0]
    if T == 1:
        return np.repeat(mat, target, axis=0)
    pos = np.linspace(0.0, T - 1, target)
    lo = np.floor(pos).astype(int)
    hi = np.minimum(lo + 1, T - 1)
    frac = (pos - lo)[:, None]
    return mat[lo] + (mat[hi] - mat[lo]) * frac
