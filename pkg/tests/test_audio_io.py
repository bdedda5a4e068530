import struct

import numpy as np
import pytest

from ser.audio_io import (
    AudioSignal,
    normalize_peak,
    parse_label,
    read_wav,
    scan_corpus,
    write_wav,
)
from ser.errors import EmptyAudio, EmptyCorpus, MalformedHeader, UnrecognizedLabelCode, UnsupportedCodec


def _riff(chunks):
    body = b"WAVE" + b"".join(cid + struct.pack("<I", len(data)) + data + (b"\0" if len(data) % 2 else b"")
                              for cid, data in chunks)
    return b"RIFF" + struct.pack("<I", len(body)) + body


def _fmt(tag=1, channels=1, rate=8000, bits=16):
    block = channels * bits // 8
    return struct.pack("<HHIIHH", tag, channels, rate, rate * block, block, bits)


class TestReadWav:
    def test_16bit_full_scale_division(self, tmp_path, pcm_writer):
        p = tmp_path / "a.wav"
        pcm_writer(p, [16384, -16384])
        sig = read_wav(p)
        np.testing.assert_array_equal(sig.samples, [0.5, -0.5])
        assert sig.sample_rate == 16000

    def test_stereo_downmix_is_channel_mean(self, tmp_path, pcm_writer):
        p = tmp_path / "s.wav"
        L, R = round(0.2 * 32768), round(0.4 * 32768)
        pcm_writer(p, [L, R], channels=2)
        sig = read_wav(p)
        assert sig.samples.shape == (1,)
        assert sig.samples[0] == pytest.approx(0.3, abs=1 / 32768)

    def test_zero_frames_is_empty_audio(self, tmp_path, pcm_writer):
        p = tmp_path / "e.wav"
        pcm_writer(p, np.zeros(0, dtype=int))
        with pytest.raises(EmptyAudio):
            read_wav(p)

    def test_8bit_unsigned_and_32bit(self, tmp_path, pcm_writer):
        p8 = tmp_path / "b8.wav"
        pcm_writer(p8, [0, 128, 192], sampwidth=1)
        np.testing.assert_array_equal(read_wav(p8).samples, [-1.0, 0.0, 0.5])
        p32 = tmp_path / "b32.wav"
        pcm_writer(p32, [-(2 ** 31), 2 ** 30], sampwidth=4)
        np.testing.assert_array_equal(read_wav(p32).samples, [-1.0, 0.5])

    def test_24bit(self, tmp_path):
        vals = [-(2 ** 23), 2 ** 22, -1]
        raw = b"".join(v.to_bytes(3, "little", signed=True) for v in vals)
        p = tmp_path / "b24.wav"
        p.write_bytes(_riff([(b"fmt ", _fmt(bits=24)), (b"data", raw)]))
        np.testing.assert_allclose(read_wav(p).samples, [-1.0, 0.5, -1 / 2 ** 23])

    def test_float32_and_unknown_chunks_skipped(self, tmp_path):
        raw = np.array([0.25, -0.75], dtype="<f4").tobytes()
        p = tmp_path / "f.wav"
        p.write_bytes(_riff([(b"LIST", b"junk!"), (b"fmt ", _fmt(tag=3, bits=32)), (b"data", raw)]))
        np.testing.assert_array_equal(read_wav(p).samples, [0.25, -0.75])

    def test_non_pcm_rejected(self, tmp_path):
        p = tmp_path / "alaw.wav"
        p.write_bytes(_riff([(b"fmt ", _fmt(tag=6, bits=8)), (b"data", b"\x01\x02")]))
        with pytest.raises(UnsupportedCodec):
            read_wav(p)

    @pytest.mark.parametrize("blob", [b"", b"RIFF\0\0\0\0WAVX", _riff([(b"data", b"\0\0")])])
    def test_malformed(self, tmp_path, blob):
        p = tmp_path / "m.wav"
        p.write_bytes(blob)
        with pytest.raises(MalformedHeader):
            read_wav(p)

    def test_roundtrip_within_one_quantization_step(self, tmp_path):
        rng = np.random.default_rng(3)
        x = rng.uniform(-0.99, 0.99, 2000)
        p = tmp_path / "rt.wav"
        write_wav(p, x, 22050)
        sig = read_wav(p)
        assert sig.sample_rate == 22050
        assert np.max(np.abs(sig.samples - x)) <= 1 / 32768


class TestNormalize:
    @pytest.mark.parametrize("x, expected", [
        ([0.5, -0.25], [1.0, -0.5]),
        ([0.0, 0.0, 0.0], [0.0, 0.0, 0.0]),
        ([-0.8], [-1.0]),
    ])
    def test_examples(self, x, expected):
        out = normalize_peak(AudioSignal(np.array(x), 8000))
        np.testing.assert_array_equal(out.samples, expected)

    def test_idempotent(self):
        rng = np.random.default_rng(0)
        s = AudioSignal(rng.normal(size=500), 8000)
        once = normalize_peak(s)
        np.testing.assert_array_equal(normalize_peak(once).samples, once.samples)
        assert np.max(np.abs(once.samples)) == 1.0


class TestLabels:
    def test_emodb_happiness(self):
        # Emo-DB key: position 6 of the stem, F = Freude (happiness)
        assert parse_label("03a01Fa.wav", "emodb").class_name == "happiness"

    @pytest.mark.parametrize("name, emotion", [
        ("03a01Wa.wav", "anger"), ("08b02La.wav", "boredom"), ("11a05Ec.wav", "disgust"),
        ("10a07Ab.wav", "fear"), ("13b09Tb.wav", "sadness"), ("16b10Nb.wav", "neutral"),
    ])
    def test_emodb_table(self, name, emotion):
        assert parse_label(name, "emodb").class_name == emotion

    @pytest.mark.parametrize("name, emotion", [
        ("sa01.wav", "sadness"), ("su15.wav", "surprise"), ("a03.wav", "anger"),
        ("d01.wav", "disgust"), ("f12.wav", "fear"), ("h07.wav", "happiness"),
        ("n30.wav", "neutral"), ("DC_sa01.wav", "sadness"),
    ])
    def test_savee_table(self, name, emotion):
        assert parse_label(name, "savee").class_name == emotion

    def test_class_ids_bijective(self):
        for conv, names in (("savee", ["a01", "d01", "f01", "h01", "n01", "sa01", "su01"]),
                            ("emodb", [f"03a01{c}a" for c in "WLEAFTN"])):
            labels = [parse_label(n + ".wav", conv) for n in names]
            assert sorted(l.class_id for l in labels) == list(range(7))
            assert len({l.class_name for l in labels}) == 7

    @pytest.mark.parametrize("name, conv", [("x01.wav", "savee"), ("03a01Xa.wav", "emodb"), ("ab.wav", "emodb")])
    def test_unrecognized(self, name, conv):
        with pytest.raises(UnrecognizedLabelCode):
            parse_label(name, conv)


class TestScanCorpus:
    def test_empty_directory(self, tmp_path):
        with pytest.raises(EmptyCorpus):
            scan_corpus(tmp_path, "savee")

    def test_counts_and_sorted_order(self, tmp_path):
        # written in shuffled order; output must be sorted regardless
        names = [f"a{i:02d}.wav" for i in range(5)] + [f"d{i:02d}.wav" for i in range(5)]
        for n in np.random.default_rng(1).permutation(names):
            write_wav(tmp_path / n, np.full(100, 0.1), 8000)
        m = scan_corpus(tmp_path, "savee")
        assert len(m.entries) == 10
        assert [e[0] for e in m.entries] == sorted(str(tmp_path / n) for n in names)
        assert m.class_counts == {0: 5, 1: 5}

    def test_bad_names_collected_not_fatal(self, tmp_path):
        write_wav(tmp_path / "a01.wav", np.ones(10) * 0.1, 8000)
        write_wav(tmp_path / "zz.wav", np.ones(10) * 0.1, 8000)
        m = scan_corpus(tmp_path, "savee")
        assert len(m.entries) == 1
        assert len(m.errors) == 1 and m.errors[0][0].endswith("zz.wav")

    def test_manifest_convention(self, tmp_path):
        for n in ("u1.wav", "u2.wav", "u3.wav"):
            write_wav(tmp_path / n, np.ones(10) * 0.1, 8000)
        (tmp_path / "manifest.csv").write_text("path,label\nu1.wav,calm\nu2.wav,angry\nu3.wav,calm\n")
        m = scan_corpus(tmp_path, "csv-manifest")
        assert m.class_names == ["angry", "calm"]
        assert [l.class_name for _, l in m.entries] == ["calm", "angry", "calm"]
        assert m.class_counts == {0: 1, 1: 2}
