"""Linear-prediction features via autocorrelation and Levinson-Durbin."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dsp import PreprocessConfig, preprocess, resample_frames
from .errors import LagTooLarge, NonFiniteFeature, NumericalBreakdown, UsageError


@dataclass(frozen=True)
class LpcConfig:
    order: int = 13
    target_frames: int = 57
    include_gain: bool = False
    # mean and std of per-frame residual power, prepended to the vector
    error_header: bool = True

    def __post_init__(self):
        if self.order < 1 or self.target_frames < 1:
            raise UsageError("order and target_frames must be >= 1")

    @property
    def dim(self) -> int:
        per_frame = self.order + (1 if self.include_gain else 0)
        return per_frame * self.target_frames + (2 if self.error_header else 0)


@dataclass(frozen=True)
class LpcFrameResult:
    coeffs: np.ndarray  # a_1 .. a_M
    error_power: float
    reflection: np.ndarray


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    label: object = None


def autocorrelate(frame, max_lag: int) -> np.ndarray:
    x = np.asarray(frame, dtype=np.float64)
    N = len(x)
    if max_lag >= N:
        raise LagTooLarge(f"max_lag {max_lag} >= frame length {N}")
    return np.array([x[k:] @ x[: N - k] for k in range(max_lag + 1)])


def levinson_durbin(r, order: int) -> LpcFrameResult:
    """Solve the order-``M`` Toeplitz normal equations for the predictor
    ``s[k] ~ sum_j a_j s[k-j]``.

    A zero-energy input (``r[0] == 0``) returns zero coefficients.
    """
    r = np.asarray(r, dtype=np.float64)
    if len(r) < order + 1:
        raise LagTooLarge(f"need {order + 1} autocorrelation lags, got {len(r)}")
    a = np.zeros(order)
    k_refl = np.zeros(order)
    if r[0] <= 0.0:
        return LpcFrameResult(a, 0.0, k_refl)

    err = r[0]
    for i in range(order):
        acc = r[i + 1] - a[:i] @ r[i:0:-1]
        k = acc / err
        prev = a[:i].copy()
        a[:i] = prev - k * prev[::-1]
        a[i] = k
        k_refl[i] = k
        err *= 1.0 - k * k
        if err <= 0.0:
            raise NumericalBreakdown(
                f"prediction error became {err:.3g} at order {i + 1}; "
                "autocorrelation is not positive definite"
            )
    return LpcFrameResult(a, float(err), k_refl)


def lpc_frames(signal, pre: PreprocessConfig, cfg: LpcConfig) -> tuple:
    """Per-frame coefficient matrix (T, order[+1]) and residual powers (T,)."""
    fm = preprocess(signal, pre)
    if cfg.order >= fm.frame_len:
        raise UsageError(f"LPC order {cfg.order} needs frames longer than {fm.frame_len}")
    rows, errs = [], []
    for frame in fm.frames:
        res = levinson_durbin(autocorrelate(frame, cfg.order), cfg.order)
        row = res.coeffs
        if cfg.include_gain:
            row = np.append(row, res.error_power)
        rows.append(row)
        errs.append(res.error_power)
    return np.array(rows), np.array(errs)


def lpc_features(signal, pre: PreprocessConfig, cfg: LpcConfig) -> np.ndarray:
    coeffs, errs = lpc_frames(signal, pre, cfg)
    body = resample_frames(coeffs, cfg.target_frames).ravel()
    if not cfg.error_header:
        return body
    return np.concatenate([[errs.mean(), errs.std()], body])


def concat_features(mfcc, lpc, label=None) -> FeatureVector:
    parts = [np.asarray(mfcc, dtype=np.float64).ravel(), np.asarray(lpc, dtype=np.float64).ravel()]
    values = np.concatenate(parts)
    if not np.all(np.isfinite(values)):
        raise NonFiniteFeature("feature vector contains NaN or Inf")
    return FeatureVector(values, label)


def extract_features(signal, pre: PreprocessConfig, mfcc_cfg=None, lpc_cfg: Optional[LpcConfig] = None) -> FeatureVector:
    """MFCC and/or LPC vector for one utterance; a ``None`` config disables that stage."""
    from .mfcc import mfcc_features

    m = mfcc_features(signal, pre, mfcc_cfg) if mfcc_cfg is not None else np.empty(0)
    l = lpc_features(signal, pre, lpc_cfg) if lpc_cfg is not None else np.empty(0)
    return concat_features(m, l, signal.label)
