import io
import struct

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from driftmeter.errors import (
    EmptyTrackError,
    InsufficientInputError,
    PitchCsvError,
    UnsupportedFormatError,
    WavFormatError,
)
from driftmeter.pitch_io import (
    AudioBuffer,
    PitchTrack,
    YinConfig,
    estimate_pitch,
    frame_count,
    load_pitch_csv,
    load_wav,
    pitch_csv_text,
    write_wav,
)
from driftmeter.synth import sine_audio

SR = 44100


def wav_bytes(payload: bytes, channels=1, bits=16, rate=SR, code=1, declared=None):
    block = channels * bits // 8
    fmt = struct.pack("<HHIIHH", code, channels, rate, rate * block, block, bits)
    size = len(payload) if declared is None else declared
    body = b"fmt " + struct.pack("<I", len(fmt)) + fmt + b"data" + struct.pack("<I", size) + payload
    return b"RIFF" + struct.pack("<I", 4 + len(body)) + b"WAVE" + body


def cents_error(f, ref):
    return np.abs(1200 * np.log2(np.asarray(f) / ref))


class TestLoadWav:
    def test_16bit_scaling(self):
        payload = np.array([0, 16384, -16384, 32767], "<i2").tobytes()
        audio = load_wav(io.BytesIO(wav_bytes(payload)))
        assert audio.sample_rate_hz == SR
        np.testing.assert_allclose(audio.samples, [0.0, 0.5, -0.5, 32767 / 32768])

    def test_stereo_is_averaged(self):
        payload = np.array([32767, 0] * 4, "<i2").tobytes()
        audio = load_wav(wav_bytes(payload, channels=2))
        np.testing.assert_allclose(audio.samples, 32767 / 32768 / 2)

    def test_stereo_float_channels(self):
        payload = np.array([1.0, 0.0] * 3, "<f4").tobytes()
        audio = load_wav(wav_bytes(payload, channels=2, bits=32, code=3))
        np.testing.assert_allclose(audio.samples, 0.5)

    def test_8bit_unsigned(self):
        audio = load_wav(wav_bytes(bytes([128, 255, 0, 192]), bits=8))
        np.testing.assert_allclose(audio.samples, [0.0, 127 / 128, -1.0, 0.5])

    def test_24bit(self):
        vals = [0, 1 << 22, -(1 << 22), (1 << 23) - 1]
        payload = b"".join(struct.pack("<i", v)[:3] for v in vals)
        audio = load_wav(wav_bytes(payload, bits=24))
        np.testing.assert_allclose(audio.samples, [0, 0.5, -0.5, ((1 << 23) - 1) / (1 << 23)])

    def test_32bit_int(self):
        payload = np.array([0, 1 << 30, -(1 << 31)], "<i4").tobytes()
        audio = load_wav(wav_bytes(payload, bits=32))
        np.testing.assert_allclose(audio.samples, [0, 0.5, -1.0])

    def test_truncated_data_chunk(self):
        payload = np.zeros(4, "<i2").tobytes()
        with pytest.raises(WavFormatError):
            load_wav(wav_bytes(payload, declared=100))

    def test_not_riff(self):
        with pytest.raises(WavFormatError):
            load_wav(b"OggS" + b"\0" * 40)

    def test_compressed_codec(self):
        with pytest.raises(UnsupportedFormatError):
            load_wav(wav_bytes(b"\0" * 8, code=0x0055))

    def test_roundtrip_writer(self, tmp_path):
        audio = sine_audio(440, 0.1)
        path = tmp_path / "a.wav"
        write_wav(path, audio)
        back = load_wav(path)
        assert back.sample_rate_hz == SR
        assert np.max(np.abs(back.samples - audio.samples)) <= 1 / 32768


class TestLoadCsv:
    def test_two_rows(self):
        track = load_pitch_csv(io.StringIO("0.000,220.0\n0.005,220.5\n"))
        assert len(track) == 2
        assert track.voiced.all()
        assert track.hop_sec == pytest.approx(0.005)

    def test_gap_materialisation(self):
        track = load_pitch_csv(io.StringIO("0.000,220\n1.000,220\n"), hop_hint_sec=0.005)
        inserted = track.times[~track.voiced]
        assert inserted[0] == pytest.approx(0.005)
        assert inserted[-1] == pytest.approx(0.995)
        assert inserted.size == 199
        assert np.allclose(np.diff(track.times), 0.005)

    def test_non_numeric_row(self):
        with pytest.raises(PitchCsvError) as exc:
            load_pitch_csv(io.StringIO("abc,220\n"))
        assert exc.value.row == 1
        assert "row 1" in str(exc.value)

    def test_header_skipped(self):
        track = load_pitch_csv(io.StringIO("time,f0\n0.0,220\n0.01,221\n"))
        assert len(track) == 2
        track = load_pitch_csv(io.StringIO("# exported\n0.0,220\n0.01,221\n"))
        assert len(track) == 2

    def test_parse_error_reports_physical_row(self):
        with pytest.raises(PitchCsvError) as exc:
            load_pitch_csv(io.StringIO("0.0,220\n0.01,x\n"))
        assert exc.value.row == 2

    def test_non_monotonic(self):
        with pytest.raises(PitchCsvError):
            load_pitch_csv(io.StringIO("0.0,220\n0.01,220\n0.005,220\n"))

    def test_empty(self):
        with pytest.raises(EmptyTrackError):
            load_pitch_csv(io.StringIO(""))

    def test_confidence_column_and_default(self):
        track = load_pitch_csv(io.StringIO("0.0,220,0.4\n0.01,220\n"))
        np.testing.assert_allclose(track.confidence, [0.4, 1.0])

    def test_out_of_band_becomes_unvoiced(self):
        track = load_pitch_csv(io.StringIO("0.0,30\n0.01,220\n0.02,-220\n0.03,2000\n"))
        assert track.voiced.tolist() == [False, True, False, False]

    @settings(max_examples=100, deadline=None)
    @given(
        st.lists(st.floats(60, 1500, allow_nan=False), min_size=1, max_size=40),
        st.floats(0.001, 0.05),
        st.floats(0, 100),
    )
    def test_roundtrip(self, f0s, hop, t0):
        times = t0 + hop * np.arange(len(f0s))
        track = PitchTrack(times, np.array(f0s), np.ones(len(f0s)), hop)
        back = load_pitch_csv(io.StringIO(pitch_csv_text(track)), hop_hint_sec=hop)
        v = back.voiced
        np.testing.assert_allclose(back.times[v], times, atol=1e-9, rtol=0)
        np.testing.assert_allclose(back.f0_hz[v], f0s, atol=1e-6, rtol=0)


class TestEstimatePitch:
    def test_sine_440(self):
        track = estimate_pitch(sine_audio(440.0, 1.0))
        f0 = track.f0_hz[1:-1]
        assert np.isfinite(f0).all()
        assert cents_error(f0, 440.0).max() <= 2.0

    def test_silence_is_unvoiced(self):
        track = estimate_pitch(AudioBuffer(SR, np.zeros(SR // 2)))
        assert not track.voiced.any()

    def test_fundamental_beats_partial(self):
        t = np.arange(SR) / SR
        x = 0.5 * np.sin(2 * np.pi * 100 * t) + 0.25 * np.sin(2 * np.pi * 300 * t)
        track = estimate_pitch(AudioBuffer(SR, x))
        f0 = track.f0_hz[1:-1]
        assert np.isfinite(f0).all()
        assert cents_error(f0, 100.0).max() <= 5.0

    def test_too_short(self):
        with pytest.raises(InsufficientInputError):
            estimate_pitch(AudioBuffer(SR, np.zeros(1000)))

    @pytest.mark.parametrize("n", [2048, 2049, 2048 + 255, 2048 + 256, 44100, 12345])
    def test_frame_count(self, n):
        track = estimate_pitch(AudioBuffer(SR, np.zeros(n)))
        assert len(track) == (n - 2048) // 256 + 1 == frame_count(n, 2048, 256)

    @settings(max_examples=30, deadline=None)
    @given(st.floats(80, 1000))
    def test_sine_accuracy_property(self, freq):
        track = estimate_pitch(sine_audio(freq, 0.3))
        f0 = track.f0_hz[1:-1]
        good = np.isfinite(f0) & (cents_error(np.nan_to_num(f0, nan=1.0), freq) <= 2.0)
        assert good.mean() >= 0.99

    @settings(max_examples=30, deadline=None)
    @given(st.floats(20, 4000), st.floats(100, 300), st.floats(600, 1500))
    def test_never_outside_band(self, freq, lo, hi):
        cfg = YinConfig(f0_min_hz=lo, f0_max_hz=hi)
        rng = np.random.default_rng(int(freq))
        t = np.arange(SR // 4) / SR
        x = 0.4 * np.sin(2 * np.pi * freq * t) + 0.05 * rng.standard_normal(t.size)
        f0 = estimate_pitch(AudioBuffer(SR, np.clip(x, -1, 1)), cfg).f0_hz
        v = f0[np.isfinite(f0)]
        assert np.all((v >= lo) & (v <= hi))

    def test_frame_times_and_hop(self):
        track = estimate_pitch(sine_audio(220.0, 0.5))
        assert track.hop_sec == pytest.approx(256 / SR)
        assert track.times[0] == pytest.approx(1024 / SR)
        assert np.allclose(np.diff(track.times), 256 / SR)
