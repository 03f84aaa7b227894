"""Mono 16-bit PCM WAV reading/writing, silence padding, and flaw flags.

Leading/trailing silence padding mitigates boundary cutoffs in datasets
whose clips were split exactly at word edges. Flags are deterministic
functions of the samples and thresholds:

* boundary cutoff: the first/last window is nearly as loud as the clip's
  median windowed level, i.e. speech runs right into the edge
* clipping: a run of full-scale samples
* too short: below a minimum duration
"""

import array
import math
import statistics
import wave
from dataclasses import dataclass

from .errors import DataError

FULL_SCALE = 32767


class EmptyClip(DataError):
    pass


class UnsupportedAudio(DataError):
    pass


@dataclass(frozen=True)
class AudioClip:
    sample_rate: int
    samples: tuple[int, ...]

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate


@dataclass(frozen=True)
class AudioFlags:
    boundary_cutoff_start: bool
    boundary_cutoff_end: bool
    clipping: bool
    too_short: bool

    def any(self) -> bool:
        return (self.boundary_cutoff_start or self.boundary_cutoff_end
                or self.clipping or self.too_short)


@dataclass(frozen=True)
class QcThresholds:
    window_s: float = 0.05
    margin_db: float = 10.0
    min_duration_s: float = 0.3
    clipping_run: int = 4


def read_wav(path: str) -> AudioClip:
    """Read a mono 16-bit linear PCM RIFF/WAVE file."""
    try:
        with wave.open(path, "rb") as wav:
            channels = wav.getnchannels()
            width = wav.getsampwidth()
            compression = wav.getcomptype()
            rate = wav.getframerate()
            frames = wav.readframes(wav.getnframes())
    except wave.Error as exc:
        raise UnsupportedAudio(f"{path}: not a readable WAV file ({exc})") from exc
    if channels != 1 or width != 2 or compression != "NONE":
        raise UnsupportedAudio(
            f"{path}: only mono 16-bit linear PCM is supported "
            f"(got {channels} channel(s), {8 * width}-bit, {compression})")
    samples = array.array("h")
    samples.frombytes(frames)
    return AudioClip(sample_rate=rate, samples=tuple(samples))


def write_wav(path: str, clip: AudioClip) -> None:
    data = array.array("h", clip.samples)
    with wave.open(path, "wb") as wav:
        wav.setnchannels(1)
        wav.setsampwidth(2)
        wav.setframerate(clip.sample_rate)
        wav.writeframes(data.tobytes())


def pad_silence(clip: AudioClip, pad_s: float) -> AudioClip:
    """Add pad_s seconds of zeros at both ends; original samples untouched."""
    if pad_s < 0:
        raise DataError(f"padding must be non-negative, got {pad_s}")
    pad = (0,) * round(pad_s * clip.sample_rate)
    return AudioClip(clip.sample_rate, pad + clip.samples + pad)


def _rms(samples: tuple[int, ...]) -> float:
    return math.sqrt(sum(s * s for s in samples) / len(samples))


def _db(value: float) -> float:
    return -math.inf if value <= 0 else 20.0 * math.log10(value / (FULL_SCALE + 1))


def qc_flags(clip: AudioClip, thresholds: QcThresholds = QcThresholds()) -> AudioFlags:
    """Deterministic flaw flags for one clip."""
    if not clip.samples:
        raise EmptyClip("cannot run QC on an empty clip")
    window = max(1, round(thresholds.window_s * clip.sample_rate))
    windows = [clip.samples[i:i + window] for i in range(0, len(clip.samples), window)]
    median_db = _db(statistics.median(_rms(w) for w in windows))
    start_db = _db(_rms(clip.samples[:window]))
    end_db = _db(_rms(clip.samples[-window:]))
    floor = median_db - thresholds.margin_db

    run = longest = 0
    for sample in clip.samples:
        run = run + 1 if abs(sample) >= FULL_SCALE else 0
        longest = max(longest, run)

    return AudioFlags(
        boundary_cutoff_start=start_db > floor,
        boundary_cutoff_end=end_db > floor,
        clipping=longest >= thresholds.clipping_run,
        too_short=clip.duration_s < thresholds.min_duration_s,
    )
