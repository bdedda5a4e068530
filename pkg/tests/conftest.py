import wave

import numpy as np
import pytest


class ScriptedRng:
    """Stand-in for a numpy Generator that replays fixed values.

    Each ``random(size)`` call consumes the next scripted value and broadcasts
    it to ``size``.
    """

    def __init__(self, values):
        self.values = list(values)

    def random(self, size=None):
        v = self.values.pop(0)
        return float(v) if size is None else np.full(size, float(v))


@pytest.fixture
def scripted():
    return ScriptedRng


def write_pcm(path, frames, sample_rate=16000, sampwidth=2, channels=1):
    """Write integer PCM through the stdlib writer (independent of ser's reader)."""
    frames = np.asarray(frames)
    dtype = {1: np.uint8, 2: "<i2", 4: "<i4"}[sampwidth]
    with wave.open(str(path), "wb") as w:
        w.setnchannels(channels)
        w.setsampwidth(sampwidth)
        w.setframerate(sample_rate)
        w.writeframes(frames.astype(dtype).tobytes())


@pytest.fixture
def pcm_writer():
    return write_pcm


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[n])
