"""WFDB record ingestion: text headers, binary signal files, calibration.

Supports single-segment records in storage formats 16 (little-endian
16-bit two's complement) and 212 (two 12-bit samples packed into three
bytes). Everything else is rejected loudly. Raw ADC integers are the
ground truth; physical millivolts are derived on read as
(sample - baseline) / adc_gain.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import (
    DuplicateRecordName,
    InconsistentHeader,
    MalformedHeader,
    MissingSignalFile,
    NonPositiveGain,
    TruncatedSignalFile,
    UnsupportedFormat,
)

SUPPORTED_FORMATS = (16, 212)

DEFAULT_SAMPLING_FREQUENCY = 250.0
DEFAULT_ADC_GAIN = 200.0
DEFAULT_ADC_RESOLUTION = 12

# gain token: "<gain>", "<gain>(<baseline>)", optionally "/<units>"
_GAIN_RE = re.compile(
    r"(?P<gain>-?\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)"
    r"(?:\((?P<baseline>-?\d+)\))?"
    r"(?:/(?P<units>\S*))?"
)
# format token: digits, optionally adorned with xSPF / :skew / +offset
_FORMAT_RE = re.compile(r"(?P<fmt>\d+)(?P<extra>[x:+].*)?")
_FS_RE = re.compile(r"(?P<fs>\d+(?:\.\d+)?)(?:/\S*)?")


@dataclass(frozen=True)
class SignalSpec:
    file_name: str
    storage_format: int
    adc_gain: float = DEFAULT_ADC_GAIN
    baseline: int = 0
    adc_zero: int = 0
    adc_resolution: int = DEFAULT_ADC_RESOLUTION
    initial_value: int = 0
    lead_name: str = ""


@dataclass(frozen=True)
class RecordHeader:
    record_name: str
    n_signals: int
    sampling_frequency: float
    n_samples: int | None  # None: not declared, infer from file size
    signal_specs: tuple[SignalSpec, ...]


@dataclass(frozen=True)
class LeadSignal:
    lead_name: str
    adc_gain: float
    baseline: int
    samples: np.ndarray  # raw ADC integers, int32

    def physical(self) -> np.ndarray:
        return adc_to_physical(self.samples, self.adc_gain, self.baseline)


@dataclass(frozen=True)
class EcgRecord:
    record_id: str
    name: str
    sampling_frequency: float
    duration: float
    leads: tuple[LeadSignal, ...]

    @property
    def n_samples(self) -> int:
        return int(self.leads[0].samples.size)

    @property
    def lead_names(self) -> list[str]:
        return [lead.lead_name for lead in self.leads]


@dataclass(frozen=True)
class DatasetManifest:
    name: str
    records: tuple[EcgRecord, ...] = field(default_factory=tuple)

    @property
    def record_ids(self) -> list[str]:
        return [r.record_id for r in self.records]


def _int_field(token: str, what: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise MalformedHeader(f"non-numeric {what}: {token!r}") from None


def parse_header(header_text: str) -> RecordHeader:
    """Parse a WFDB text header into a RecordHeader.

    Record line: "<name> <n_signals> [fs [n_samples]]"; trailing base
    time/date tokens are ignored. Each following non-comment line is one
    signal spec: "<file> <format> [<gain>[(baseline)][/units]
    [<adc_res> [<adc_zero> [<init> [<checksum> [<blocksize>
    [<description...>]]]]]]]".
    """
    if not header_text or not header_text.strip():
        raise MalformedHeader("empty header")
    lines = [
        ln.strip()
        for ln in header_text.splitlines()
        if ln.strip() and not ln.lstrip().startswith("#")
    ]
    if not lines:
        raise MalformedHeader("header has no non-comment lines")

    rec_tokens = lines[0].split()
    if len(rec_tokens) < 2:
        raise MalformedHeader(f"record line needs name and signal count: {lines[0]!r}")
    record_name = rec_tokens[0]
    if "/" in record_name:
        # "<name>/<n_segments>": multi-segment records are out of support
        raise UnsupportedFormat(f"multi-segment record {record_name!r} not supported")
    n_signals = _int_field(rec_tokens[1], "signal count")
    if n_signals < 1:
        raise MalformedHeader(f"signal count must be positive, got {n_signals}")

    fs = DEFAULT_SAMPLING_FREQUENCY
    if len(rec_tokens) >= 3:
        m = _FS_RE.fullmatch(rec_tokens[2])
        if not m:
            raise MalformedHeader(f"non-numeric sampling frequency: {rec_tokens[2]!r}")
        fs = float(m.group("fs"))
        if fs <= 0:
            raise MalformedHeader("sampling frequency must be positive")

    n_samples: int | None = None
    if len(rec_tokens) >= 4:
        n_samples = _int_field(rec_tokens[3], "sample count")
        if n_samples < 0:
            raise MalformedHeader("sample count must be non-negative")

    spec_lines = lines[1:]
    if len(spec_lines) != n_signals:
        raise InconsistentHeader(
            f"header declares {n_signals} signals but has {len(spec_lines)} spec lines"
        )

    specs = []
    file_formats: dict[str, int] = {}
    for idx, line in enumerate(spec_lines):
        spec = _parse_signal_line(line, idx)
        prior = file_formats.setdefault(spec.file_name, spec.storage_format)
        if prior != spec.storage_format:
            raise InconsistentHeader(
                f"file {spec.file_name!r} declared with formats {prior} and "
                f"{spec.storage_format}"
            )
        specs.append(spec)

    return RecordHeader(
        record_name=record_name,
        n_signals=n_signals,
        sampling_frequency=fs,
        n_samples=n_samples,
        signal_specs=tuple(specs),
    )


def _parse_signal_line(line: str, index: int) -> SignalSpec:
    tokens = line.split()
    if len(tokens) < 2:
        raise MalformedHeader(f"signal line needs file and format: {line!r}")
    file_name = tokens[0]

    m = _FORMAT_RE.fullmatch(tokens[1])
    if not m:
        raise MalformedHeader(f"non-numeric storage format: {tokens[1]!r}")
    if m.group("extra"):
        raise UnsupportedFormat(
            f"samples-per-frame/skew/offset adornments not supported: {tokens[1]!r}"
        )
    storage_format = int(m.group("fmt"))
    if storage_format not in SUPPORTED_FORMATS:
        raise UnsupportedFormat(f"storage format {storage_format} not supported")

    gain = DEFAULT_ADC_GAIN
    baseline: int | None = None
    if len(tokens) >= 3:
        gm = _GAIN_RE.fullmatch(tokens[2])
        if not gm:
            raise MalformedHeader(f"bad gain field: {tokens[2]!r}")
        gain = float(gm.group("gain"))
        if gain < 0:
            raise MalformedHeader(f"negative gain: {gain}")
        if gain == 0:
            gain = DEFAULT_ADC_GAIN  # 0 means "default" in WFDB headers
        if gm.group("baseline") is not None:
            baseline = int(gm.group("baseline"))

    adc_resolution = DEFAULT_ADC_RESOLUTION
    if len(tokens) >= 4:
        adc_resolution = _int_field(tokens[3], "ADC resolution")
    adc_zero = 0
    if len(tokens) >= 5:
        adc_zero = _int_field(tokens[4], "ADC zero")
    initial_value = 0
    if len(tokens) >= 6:
        initial_value = _int_field(tokens[5], "initial value")
    if len(tokens) >= 7:
        _int_field(tokens[6], "checksum")  # parsed, not verified
    if len(tokens) >= 8:
        _int_field(tokens[7], "block size")
    lead_name = " ".join(tokens[8:]) if len(tokens) > 8 else f"lead{index}"

    return SignalSpec(
        file_name=file_name,
        storage_format=storage_format,
        adc_gain=gain,
        baseline=baseline if baseline is not None else adc_zero,
        adc_zero=adc_zero,
        adc_resolution=adc_resolution,
        initial_value=initial_value,
        lead_name=lead_name,
    )


def decode_format_16(data: bytes, n_samples_total: int) -> np.ndarray:
    """Decode little-endian 16-bit two's-complement samples."""
    needed = 2 * n_samples_total
    if len(data) < needed:
        raise TruncatedSignalFile(
            f"need {needed} bytes for {n_samples_total} samples, have {len(data)}"
        )
    return np.frombuffer(data, dtype="<i2", count=n_samples_total).astype(np.int32)


def decode_format_212(data: bytes, n_samples_total: int) -> np.ndarray:
    """Decode format 212: two 12-bit two's-complement samples per 3 bytes.

    s1 = ((b1 & 0x0F) << 8) | b0 and s2 = ((b1 & 0xF0) << 4) | b2, each
    mapped to the signed range [-2048, 2047].
    """
    needed = math.ceil(3 * n_samples_total / 2)
    if len(data) < needed:
        raise TruncatedSignalFile(
            f"need {needed} bytes for {n_samples_total} samples, have {len(data)}"
        )
    out = np.empty(n_samples_total, dtype=np.int32)
    pairs = n_samples_total // 2
    if pairs:
        raw = np.frombuffer(data, dtype=np.uint8, count=pairs * 3).astype(np.int32)
        b0, b1, b2 = raw[0::3], raw[1::3], raw[2::3]
        out[0 : 2 * pairs : 2] = ((b1 & 0x0F) << 8) | b0
        out[1 : 2 * pairs : 2] = ((b1 & 0xF0) << 4) | b2
    if n_samples_total % 2:
        b0, b1 = data[3 * pairs], data[3 * pairs + 1]
        out[-1] = ((b1 & 0x0F) << 8) | b0
    out[out > 2047] -= 4096
    return out


_DECODERS = {16: decode_format_16, 212: decode_format_212}


def _bytes_for(storage_format: int, n_samples_total: int) -> int:
    if storage_format == 16:
        return 2 * n_samples_total
    return math.ceil(3 * n_samples_total / 2)


def adc_to_physical(sample, gain: float, baseline: int):
    """Convert raw ADC value(s) to millivolts: (sample - baseline) / gain."""
    if gain <= 0:
        raise NonPositiveGain(f"gain must be positive, got {gain}")
    if isinstance(sample, np.ndarray):
        return (sample.astype(np.float64) - baseline) / gain
    return (sample - baseline) / gain


def ingest_record(
    header_text: str,
    signal_files: Mapping[str, bytes],
    dataset_name: str = "",
) -> EcgRecord:
    """Decode a full record: parse header, decode each signal file,
    de-interleave channels, keep raw ADC plus calibration per lead.
    """
    header = parse_header(header_text)

    # channels grouped per file, in header order
    by_file: dict[str, list[int]] = {}
    for ch, spec in enumerate(header.signal_specs):
        by_file.setdefault(spec.file_name, []).append(ch)

    for file_name in by_file:
        if file_name not in signal_files:
            raise MissingSignalFile(f"signal file {file_name!r} not provided")

    n_per_lead = header.n_samples
    if n_per_lead is None:
        first = next(iter(by_file))
        fmt = header.signal_specs[by_file[first][0]].storage_format
        nsig = len(by_file[first])
        n_per_lead = _infer_samples(len(signal_files[first]), fmt, nsig)

    lead_arrays: dict[int, np.ndarray] = {}
    for file_name, channels in by_file.items():
        fmt = header.signal_specs[channels[0]].storage_format
        nsig = len(channels)
        total = n_per_lead * nsig
        data = signal_files[file_name]
        expected = _bytes_for(fmt, total)
        if len(data) < expected:
            raise TruncatedSignalFile(
                f"{file_name!r}: need {expected} bytes, have {len(data)}"
            )
        if len(data) > expected + 1:
            raise TruncatedSignalFile(
                f"{file_name!r}: {len(data)} bytes exceeds expected {expected} "
                "by more than one pad byte"
            )
        flat = _DECODERS[fmt](data, total)
        frames = flat.reshape(n_per_lead, nsig) if total else flat.reshape(0, nsig)
        for k, ch in enumerate(channels):
            lead_arrays[ch] = np.ascontiguousarray(frames[:, k])

    leads = tuple(
        LeadSignal(
            lead_name=spec.lead_name,
            adc_gain=spec.adc_gain,
            baseline=spec.baseline,
            samples=lead_arrays[ch],
        )
        for ch, spec in enumerate(header.signal_specs)
    )
    record_id = (
        f"{dataset_name}/{header.record_name}" if dataset_name else header.record_name
    )
    return EcgRecord(
        record_id=record_id,
        name=header.record_name,
        sampling_frequency=header.sampling_frequency,
        duration=n_per_lead / header.sampling_frequency,
        leads=leads,
    )


def _infer_samples(n_bytes: int, storage_format: int, n_signals: int) -> int:
    """Largest per-lead sample count the file can hold."""
    if storage_format == 16:
        total = n_bytes // 2
    else:
        total = (2 * n_bytes) // 3
    return total // n_signals


def ingest_dataset(
    name: str,
    records: list[tuple[str, Mapping[str, bytes]]],
) -> DatasetManifest:
    """Ingest many records into one manifest, ordered lexicographically by
    record name so resume cursors are deterministic.
    """
    ingested: dict[str, EcgRecord] = {}
    for header_text, signal_files in records:
        record = ingest_record(header_text, signal_files, dataset_name=name)
        if record.name in ingested:
            raise DuplicateRecordName(f"record name {record.name!r} appears twice")
        ingested[record.name] = record
    ordered = tuple(ingested[k] for k in sorted(ingested))
    return DatasetManifest(name=name, records=ordered)
