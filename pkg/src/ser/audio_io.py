"""WAV ingestion, peak normalization and corpus label conventions."""

from __future__ import annotations

import csv
import os
import re
import struct
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import (
    EmptyAudio,
    EmptyCorpus,
    MalformedHeader,
    UnrecognizedLabelCode,
    UnsupportedCodec,
    UsageError,
)

WAVE_FORMAT_PCM = 0x0001
WAVE_FORMAT_IEEE_FLOAT = 0x0003
WAVE_FORMAT_EXTENSIBLE = 0xFFFE

# Label tables: code -> class name, in class-id order.
SAVEE_CODES = {
    "a": "anger",
    "d": "disgust",
    "f": "fear",
    "h": "happiness",
    "n": "neutral",
    "sa": "sadness",
    "su": "surprise",
}
# Emo-DB: 6th character of the stem (German initial of the emotion).
EMODB_CODES = {
    "W": "anger",  # Wut / Aerger
    "L": "boredom",  # Langeweile
    "E": "disgust",  # Ekel
    "A": "fear",  # Angst
    "F": "happiness",  # Freude
    "T": "sadness",  # Trauer
    "N": "neutral",
}
CONVENTIONS = ("savee", "emodb", "manifest")
_ALIASES = {"csv-manifest": "manifest", "csv": "manifest"}

_SAVEE_RE = re.compile(r"^(?:[A-Za-z]{2}_)?(sa|su|a|d|f|h|n)(\d+)$")


@dataclass(frozen=True)
class EmotionLabel:
    class_id: int
    class_name: str


@dataclass(frozen=True)
class AudioSignal:
    samples: np.ndarray
    sample_rate: int
    source_path: str = ""
    label: Optional[EmotionLabel] = None

    def __len__(self):
        return len(self.samples)


@dataclass
class CorpusManifest:
    entries: list  # of (path, EmotionLabel)
    convention: str
    class_names: list
    errors: list = field(default_factory=list)  # (path, message) for unlabeled files

    @property
    def class_counts(self) -> dict:
        return dict(sorted(Counter(lab.class_id for _, lab in self.entries).items()))


def class_names_for(convention: str) -> list:
    if convention == "savee":
        return list(SAVEE_CODES.values())
    if convention == "emodb":
        return list(EMODB_CODES.values())
    raise UsageError(f"convention {convention!r} has no fixed class table")


def _label(name: str, names: list) -> EmotionLabel:
    return EmotionLabel(names.index(name), name)


def parse_label(path, convention: str, manifest_labels: Optional[dict] = None) -> EmotionLabel:
    """Map a corpus filename to its emotion label.

    ``manifest_labels`` is only consulted for the ``manifest`` convention and
    maps path -> class name; class ids follow the sorted set of names in it.
    """
    convention = _ALIASES.get(convention, convention)
    stem = Path(path).stem
    if convention == "savee":
        m = _SAVEE_RE.match(stem)
        if not m:
            raise UnrecognizedLabelCode(f"{path}: no SAVEE emotion code in {stem!r}")
        return _label(SAVEE_CODES[m.group(1)], class_names_for("savee"))
    if convention == "emodb":
        code = stem[5] if len(stem) >= 6 else ""
        if code not in EMODB_CODES:
            raise UnrecognizedLabelCode(f"{path}: no Emo-DB emotion code in {stem!r}")
        return _label(EMODB_CODES[code], class_names_for("emodb"))
    if convention == "manifest":
        if not manifest_labels or str(path) not in manifest_labels:
            raise UnrecognizedLabelCode(f"{path}: not listed in manifest")
        names = sorted(set(manifest_labels.values()))
        return _label(manifest_labels[str(path)], names)
    raise UsageError(f"unknown label convention {convention!r}")


def read_manifest_csv(path) -> dict:
    """Read a ``path,label`` manifest; relative paths resolve against its directory."""
    base = Path(path).parent
    out = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"path", "label"} <= set(reader.fieldnames):
            raise MalformedHeader(f"{path}: manifest header must be 'path,label'")
        for row in reader:
            p = Path(row["path"])
            if not p.is_absolute():
                p = base / p
            out[str(p)] = row["label"].strip()
    return out


def scan_corpus(root_dir, convention: str, manifest_path=None) -> CorpusManifest:
    """Collect labeled WAV files under ``root_dir`` in sorted path order.

    Files whose names carry no recognizable label are recorded in
    ``manifest.errors`` rather than aborting the scan.
    """
    convention = _ALIASES.get(convention, convention)
    root = Path(root_dir)
    if not root.is_dir():
        raise EmptyCorpus(f"{root}: not a directory")

    if convention == "manifest":
        if manifest_path is None:
            manifest_path = root / "manifest.csv"
        labels = read_manifest_csv(manifest_path)
        paths = sorted(labels)
        names = sorted(set(labels.values()))
    else:
        labels = None
        paths = sorted(
            str(p) for p in root.rglob("*") if p.is_file() and p.suffix.lower() == ".wav"
        )
        names = class_names_for(convention)

    entries, errors = [], []
    for p in paths:
        if not os.path.isfile(p):
            errors.append((p, "file not found"))
            continue
        try:
            entries.append((p, parse_label(p, convention, labels)))
        except UnrecognizedLabelCode as exc:
            errors.append((p, str(exc)))
    if not entries:
        raise EmptyCorpus(f"{root}: no labeled WAV files found")
    return CorpusManifest(entries=entries, convention=convention, class_names=names, errors=errors)


def _decode(raw: bytes, fmt: int, bits: int, channels: int) -> np.ndarray:
    width = bits // 8
    frame_bytes = width * channels
    n_frames = len(raw) // frame_bytes
    raw = raw[: n_frames * frame_bytes]
    if fmt == WAVE_FORMAT_PCM:
        if bits == 8:
            data = (np.frombuffer(raw, dtype=np.uint8).astype(np.float64) - 128.0) / 128.0
        elif bits == 16:
            data = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0
        elif bits == 24:
            b = np.frombuffer(raw, dtype=np.uint8).reshape(-1, 3).astype(np.int32)
            ints = b[:, 0] | (b[:, 1] << 8) | (b[:, 2] << 16)
            ints = np.where(ints >= 1 << 23, ints - (1 << 24), ints)
            data = ints.astype(np.float64) / float(1 << 23)
        elif bits == 32:
            data = np.frombuffer(raw, dtype="<i4").astype(np.float64) / float(1 << 31)
        else:
            raise UnsupportedCodec(f"unsupported PCM bit depth {bits}")
    elif fmt == WAVE_FORMAT_IEEE_FLOAT:
        if bits == 32:
            data = np.frombuffer(raw, dtype="<f4").astype(np.float64)
        elif bits == 64:
            data = np.frombuffer(raw, dtype="<f8").astype(np.float64)
        else:
            raise UnsupportedCodec(f"unsupported float bit depth {bits}")
    else:
        raise UnsupportedCodec(f"unsupported WAV format tag 0x{fmt:04x}")
    data = data[: n_frames * channels].reshape(n_frames, channels)
    return data.mean(axis=1)


def read_wav(path) -> AudioSignal:
    """Read a RIFF/WAVE file into a mono float signal in [-1, 1).

    Stereo is downmixed by the channel mean. Chunks other than ``fmt `` and
    ``data`` are skipped.
    """
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 12 or blob[:4] != b"RIFF" or blob[8:12] != b"WAVE":
        raise MalformedHeader(f"{path}: not a RIFF/WAVE file")

    pos = 12
    fmt_info = None
    raw = None
    while pos + 8 <= len(blob):
        cid, size = struct.unpack("<4sI", blob[pos : pos + 8])
        body = blob[pos + 8 : pos + 8 + size]
        if cid == b"fmt ":
            if len(body) < 16:
                raise MalformedHeader(f"{path}: truncated fmt chunk")
            tag, channels, rate, _, _, bits = struct.unpack("<HHIIHH", body[:16])
            if tag == WAVE_FORMAT_EXTENSIBLE:
                if len(body) < 40:
                    raise MalformedHeader(f"{path}: truncated extensible fmt chunk")
                tag = struct.unpack("<H", body[24:26])[0]
            fmt_info = (tag, channels, rate, bits)
        elif cid == b"data":
            raw = body
        pos += 8 + size + (size & 1)

    if fmt_info is None or raw is None:
        raise MalformedHeader(f"{path}: missing fmt or data chunk")
    tag, channels, rate, bits = fmt_info
    if tag not in (WAVE_FORMAT_PCM, WAVE_FORMAT_IEEE_FLOAT):
        raise UnsupportedCodec(f"{path}: format tag 0x{tag:04x} is not PCM")
    if channels not in (1, 2):
        raise UnsupportedCodec(f"{path}: {channels} channels")
    if rate <= 0 or bits % 8:
        raise MalformedHeader(f"{path}: invalid rate/bit depth")

    samples = _decode(raw, tag, bits, channels)
    if samples.size == 0:
        raise EmptyAudio(f"{path}: no sample frames")
    return AudioSignal(samples=samples, sample_rate=int(rate), source_path=str(path))


def write_wav(path, samples, sample_rate: int) -> None:
    """Write mono 16-bit PCM; values are clipped to [-1, 1)."""
    x = np.clip(np.asarray(samples, dtype=np.float64), -1.0, 32767 / 32768)
    pcm = np.round(x * 32768.0).astype("<i2").tobytes()
    header = struct.pack(
        "<4sI4s4sIHHIIHH4sI",
        b"RIFF", 36 + len(pcm), b"WAVE",
        b"fmt ", 16, WAVE_FORMAT_PCM, 1, sample_rate, sample_rate * 2, 2, 16,
        b"data", len(pcm),
    )
    with open(path, "wb") as fh:
        fh.write(header + pcm)


def normalize_peak(signal: AudioSignal) -> AudioSignal:
    peak = float(np.max(np.abs(signal.samples))) if signal.samples.size else 0.0
    if peak == 0.0:
        return signal
    return replace(signal, samples=signal.samples / peak)


def load_labeled(entry) -> AudioSignal:
    path, label = entry
    return replace(normalize_peak(read_wav(path)), label=label)


def worker_count() -> int:
    try:
        n = int(os.environ.get("SER_THREADS", "0"))
    except ValueError:
        n = 0
    return n if n > 0 else min(8, os.cpu_count() or 1)


def parallel_map(fn, items) -> list:
    """Ordered map capped by ``SER_THREADS``; results follow input order."""
    items = list(items)
    workers = worker_count()
    if workers == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
