# Pitch tracking: from a WAV file to a frame-level f0 track.
import numpy as np

from driftmeter import estimate_pitch, load_wav, write_wav
from driftmeter.synth import sine_audio

# two seconds of A3, written to disk and read back like any recording
write_wav("a3.wav", sine_audio(220.0, 2.0))
audio = load_wav("a3.wav")
print(audio.sample_rate_hz, audio.samples.shape)

track = estimate_pitch(audio)  # 2048-sample frames, 256-sample hop
print(len(track), "frames,", round(1 / track.hop_sec), "frames per second")
print("first frame at", round(track.times[0], 4), "s")

# every interior frame should sit on 220 Hz
err = 1200 * np.log2(track.f0_hz[1:-1] / 220.0)
print("worst error (cents):", np.abs(err).max())

# silence comes back unvoiced (NaN)
quiet = estimate_pitch(type(audio)(44100, np.zeros(44100)))
print("voiced frames in silence:", int(quiet.voiced.sum()))
