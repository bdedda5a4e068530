"""Seeded synthetic corpora for tests, demos and acceptance runs."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .audio_io import write_wav
from .classifiers import Dataset


@dataclass
class InformativeNoiseCorpus:
    data: Dataset
    informative: np.ndarray  # column indices carrying class signal

    @property
    def informative_mask(self) -> np.ndarray:
        m = np.zeros(self.data.rows.shape[1], dtype=bool)
        m[self.informative] = True
        return m


def informative_noise_corpus(n_samples: int = 300, n_classes: int = 3, n_features: int = 200,
                             n_informative: int = 20, separation: float = 0.8,
                             seed: int = 0) -> InformativeNoiseCorpus:
    """Balanced Gaussian classes that differ only on ``n_informative`` columns.

    On each informative column the class means are a seeded permutation of
    ``separation * linspace(-1, 1, n_classes)``, so every informative column
    carries the same amount of signal. Every column carries unit-variance
    Gaussian noise. Informative columns are scattered at seeded positions.
    """
    rng = np.random.default_rng(seed)
    labels = np.arange(n_samples) % n_classes
    rows = rng.standard_normal((n_samples, n_features))
    levels = separation * np.linspace(-1.0, 1.0, n_classes)
    centers = np.stack([rng.permutation(levels) for _ in range(n_informative)], axis=1)
    informative = np.sort(rng.choice(n_features, size=n_informative, replace=False))
    rows[:, informative] += centers[labels]
    return InformativeNoiseCorpus(Dataset(rows, labels, n_classes), informative)


def tone_utterance(rng, class_id: int, sample_rate: int, seconds: float) -> np.ndarray:
    """Noisy harmonic burst whose pitch and brightness depend on the class."""
    n = int(seconds * sample_rate)
    t = np.arange(n) / sample_rate
    f0 = 120.0 + 60.0 * class_id + rng.normal(0, 5)
    x = np.zeros(n)
    for h in range(1, 6):
        x += np.sin(2 * np.pi * f0 * h * t + rng.uniform(0, 2 * np.pi)) / h ** (1.0 + 0.2 * class_id)
    envelope = np.sin(np.pi * np.linspace(0, 1, n)) ** 0.5
    x = x * envelope + 0.05 * rng.standard_normal(n)
    return 0.8 * x / np.max(np.abs(x))


def write_tone_corpus(root, n_per_class: int = 5, class_codes=("a", "h"), sample_rate: int = 16000,
                      seed: int = 0, convention: str = "savee", min_seconds: float = 0.4,
                      max_seconds: float = 1.2) -> list:
    """Write a small labeled WAV corpus following a filename convention.

    ``savee`` names files ``<code><nn>.wav``; ``manifest`` names them
    ``utt<nnn>.wav`` and writes ``manifest.csv`` with the codes as labels.
    Returns the written paths.
    """
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    paths, rows = [], []
    k = 0
    for cid, code in enumerate(class_codes):
        for i in range(n_per_class):
            dur = rng.uniform(min_seconds, max_seconds)
            x = tone_utterance(rng, cid, sample_rate, dur)
            name = f"{code}{i + 1:02d}.wav" if convention == "savee" else f"utt{k:03d}.wav"
            write_wav(root / name, x, sample_rate)
            paths.append(root / name)
            rows.append((name, code))
            k += 1
    if convention == "manifest":
        with open(root / "manifest.csv", "w", encoding="utf-8") as fh:
            fh.write("path,label\n")
            for name, code in rows:
                fh.write(f"{name},{code}\n")
    return paths
