"""Rhythm analysis and waveform decimation for the viewer dialog boxes.

QRS detection runs a Pan-Tompkins-style pipeline (band-pass, derivative,
squaring, moving-window integration, adaptive dual-threshold picking).
Thresholds are all derived from the data, so detection is invariant to
positive amplitude scaling.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import signal as sps

from .errors import WindowOutOfRange

REFRACTORY_S = 0.2
BANDPASS_LOW_HZ = 5.0
BANDPASS_HIGH_HZ = 15.0
INTEGRATION_WINDOW_S = 0.150

# suggestion rule thresholds; textbook limits, overridable per call
BRADYCARDIA_BPM = 60.0
TACHYCARDIA_BPM = 100.0
IRREGULAR_RR_CV = 0.15
IRREGULAR_MIN_BEATS = 8

BUILTIN_RHYTHM_CODES = frozenset({"BRADY", "TACHY", "IRREG", "NSR", "NODATA"})


@dataclass(frozen=True)
class QrsDetection:
    beat_indices: np.ndarray
    analyzed_lead: str
    refractory: float = REFRACTORY_S

    @property
    def n_beats(self) -> int:
        return int(self.beat_indices.size)


@dataclass(frozen=True)
class RhythmFeatures:
    mean_hr: float
    rr_mean: float
    rr_std: float
    rr_cv: float
    n_beats: int


@dataclass(frozen=True)
class AutoSuggestion:
    code: str
    display_text: str
    rule_id: str


@dataclass(frozen=True)
class SegmentBuckets:
    lead_name: str
    t_start: float
    t_end: float
    bucket_width: int
    extrema: np.ndarray  # shape (k, 2): (min, max) per bucket, in mV


def _bandpass(x: np.ndarray, fs: float) -> np.ndarray:
    nyq = fs / 2.0
    b, a = sps.butter(2, [BANDPASS_LOW_HZ / nyq, BANDPASS_HIGH_HZ / nyq], "bandpass")
    return sps.filtfilt(b, a, x)


def _five_point_derivative(x: np.ndarray) -> np.ndarray:
    kernel = np.array([2.0, 1.0, 0.0, -1.0, -2.0]) / 8.0
    return np.convolve(x, kernel, mode="same")


def _integrate(x: np.ndarray, window: int) -> np.ndarray:
    return np.convolve(x, np.ones(window) / window, mode="same")


def detect_qrs(samples, fs: float, lead_name: str = "lead0") -> QrsDetection:
    """Detect R peaks; returns an empty detection for signals under 2 s."""
    x = np.asarray(samples, dtype=np.float64)
    refractory = int(round(REFRACTORY_S * fs))
    empty = QrsDetection(np.empty(0, dtype=np.int64), lead_name)
    if x.size < 2 * fs or refractory < 1:
        return empty

    filtered = _bandpass(x, fs)
    energy = _integrate(
        _five_point_derivative(filtered) ** 2,
        max(1, int(round(INTEGRATION_WINDOW_S * fs))),
    )
    candidates, _ = sps.find_peaks(energy, distance=refractory)
    if candidates.size == 0:
        return empty

    marks = _pick_beats(candidates, energy, fs, refractory)
    if not marks:
        return empty

    # refine each fiducial mark to the strongest filtered deflection nearby
    half = int(round(0.075 * fs))
    refined = sorted(
        {
            max(0, p - half) + int(np.argmax(np.abs(filtered[max(0, p - half) : p + half + 1])))
            for p in marks
        }
    )
    beats: list[int] = []
    for i in refined:
        if not beats or i - beats[-1] >= refractory:
            beats.append(i)
    return QrsDetection(np.asarray(beats, dtype=np.int64), lead_name)


def _pick_beats(
    peaks: np.ndarray, energy: np.ndarray, fs: float, refractory: int
) -> list[int]:
    """Adaptive dual-threshold peak classification with search-back."""
    learn = energy[: int(2 * fs)]
    sig_level = float(learn.max())
    noise_level = float(learn.mean())
    thr = noise_level + 0.25 * (sig_level - noise_level)

    beats: list[int] = []
    rejected: list[int] = []
    rr_history: list[int] = []
    for p in peaks:
        v = float(energy[p])
        if v > thr:
            if beats:
                rr_history.append(p - beats[-1])
            beats.append(int(p))
            sig_level = 0.125 * v + 0.875 * sig_level
            rejected.clear()
        else:
            rejected.append(int(p))
            noise_level = 0.125 * v + 0.875 * noise_level
        thr = noise_level + 0.25 * (sig_level - noise_level)

        # search back with the lower threshold when a beat seems missed
        if beats and len(rr_history) >= 2:
            rr_avg = float(np.mean(rr_history[-8:]))
            if p - beats[-1] > 1.66 * rr_avg and rejected:
                viable = [q for q in rejected if q - beats[-1] >= refractory]
                if viable:
                    best = max(viable, key=lambda q: energy[q])
                    if energy[best] > 0.5 * thr:
                        rr_history.append(best - beats[-1])
                        beats.append(best)
                        sig_level = 0.25 * float(energy[best]) + 0.75 * sig_level
                        rejected = [q for q in rejected if q - best >= refractory]
                        beats.sort()
    return beats


def compute_features(detection: QrsDetection, fs: float) -> RhythmFeatures | None:
    """RR statistics; None when fewer than two beats were found."""
    idx = detection.beat_indices
    if idx.size < 2:
        return None
    rr = np.diff(idx) / fs
    rr_mean = float(rr.mean())
    rr_std = float(rr.std())
    return RhythmFeatures(
        mean_hr=60.0 / rr_mean,
        rr_mean=rr_mean,
        rr_std=rr_std,
        rr_cv=rr_std / rr_mean,
        n_beats=int(idx.size),
    )


def auto_diagnose(
    features: RhythmFeatures | None,
    *,
    brady_bpm: float = BRADYCARDIA_BPM,
    tachy_bpm: float = TACHYCARDIA_BPM,
    irregular_cv: float = IRREGULAR_RR_CV,
) -> list[AutoSuggestion]:
    """Deterministic rule-based suggestions, ordered by rule_id.

    Suggestions are advisory only; the display text always carries a
    "suggested" marker and nothing here is ever committed as an annotation.
    """
    fired: list[AutoSuggestion] = []
    if features is None:
        fired.append(
            AutoSuggestion("NODATA", "insufficient signal for suggestions", "no_signal")
        )
        return fired
    if features.mean_hr < brady_bpm:
        fired.append(AutoSuggestion("BRADY", "sinus bradycardia (suggested)", "rate_low"))
    if features.mean_hr > tachy_bpm:
        fired.append(AutoSuggestion("TACHY", "sinus tachycardia (suggested)", "rate_high"))
    if features.rr_cv > irregular_cv and features.n_beats >= IRREGULAR_MIN_BEATS:
        fired.append(
            AutoSuggestion(
                "IRREG",
                "irregular rhythm - possible atrial fibrillation (suggested)",
                "rhythm_irregular",
            )
        )
    if brady_bpm <= features.mean_hr <= tachy_bpm and features.rr_cv <= irregular_cv:
        fired.append(
            AutoSuggestion("NSR", "no rhythm abnormality suggested", "rhythm_regular")
        )
    return sorted(fired, key=lambda s: s.rule_id)


def window_indices(t_start: float, t_end: float, fs: float, n_total: int) -> tuple[int, int]:
    """Sample index range [i0, i1) covered by the time window [t_start, t_end).

    The small epsilon keeps t_end falling exactly on a sample boundary from
    pulling in the next sample.
    """
    duration = n_total / fs
    if t_start < 0 or t_start >= t_end or t_end > duration + 1e-9:
        raise WindowOutOfRange(
            f"window [{t_start}, {t_end}) outside record of {duration:.6g} s"
        )
    i0 = int(math.ceil(t_start * fs - 1e-9))
    i1 = min(int(math.ceil(t_end * fs - 1e-9)), n_total)
    return i0, i1


def downsample_minmax(
    samples,
    t_start: float,
    t_end: float,
    fs: float,
    max_buckets: int,
    lead_name: str = "",
) -> SegmentBuckets:
    """Split [t_start, t_end) into at most max_buckets equal-width sample
    buckets and report the exact (min, max) of each bucket.
    """
    if max_buckets < 1:
        raise ValueError(f"max_buckets must be >= 1, got {max_buckets}")
    x = np.asarray(samples, dtype=np.float64)
    i0, i1 = window_indices(t_start, t_end, fs, x.size)
    window = x[i0:i1]
    m = window.size
    if m == 0:
        return SegmentBuckets(lead_name, t_start, t_end, 1, np.empty((0, 2)))
    width = math.ceil(m / max_buckets)
    starts = np.arange(0, m, width)
    mins = np.minimum.reduceat(window, starts)
    maxs = np.maximum.reduceat(window, starts)
    return SegmentBuckets(
        lead_name=lead_name,
        t_start=t_start,
        t_end=t_end,
        bucket_width=width,
        extrema=np.stack([mins, maxs], axis=1),
    )


_RHYTHM_LEAD_NAMES = {"II", "MLII", "LEAD II"}


def pick_analysis_lead(lead_names: list[str]) -> int:
    """Lead II (or its MLII variant) when present, otherwise the first lead."""
    for i, name in enumerate(lead_names):
        if name.strip().upper() in _RHYTHM_LEAD_NAMES:
            return i
    return 0


@dataclass(frozen=True)
class RecordAnalysis:
    """Ingestion-time cache served by the record analysis endpoint."""
    analyzed_lead: str
    n_beats: int
    features: RhythmFeatures | None
    suggestions: list[AutoSuggestion] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "analyzed_lead": self.analyzed_lead,
            "n_beats": self.n_beats,
            "features": None
            if self.features is None
            else {
                "mean_hr": self.features.mean_hr,
                "rr_mean": self.features.rr_mean,
                "rr_std": self.features.rr_std,
                "rr_cv": self.features.rr_cv,
                "n_beats": self.features.n_beats,
            },
            "suggestions": [
                {"code": s.code, "display_text": s.display_text, "rule_id": s.rule_id}
                for s in self.suggestions
            ],
        }


def analyze_record(record) -> RecordAnalysis:
    """Run the full ingestion-time analysis over an EcgRecord."""
    idx = pick_analysis_lead(record.lead_names)
    lead = record.leads[idx]
    detection = detect_qrs(
        lead.physical(), record.sampling_frequency, lead_name=lead.lead_name
    )
    features = compute_features(detection, record.sampling_frequency)
    return RecordAnalysis(
        analyzed_lead=lead.lead_name,
        n_beats=detection.n_beats,
        features=features,
        suggestions=auto_diagnose(features),
    )
