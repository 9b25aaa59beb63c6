#!/usr/bin/env python3
"""Write a directory of synthetic multi-lead WFDB records.

Records are format 16 (little-endian int16, samples interleaved across
leads), one .hea + one .dat per record, ready for `ecganno ingest`.
"""
import argparse
from pathlib import Path

import numpy as np

TWELVE_LEADS = ("I", "II", "III", "aVR", "aVL", "aVF",
                "V1", "V2", "V3", "V4", "V5", "V6")
GAIN = 200.0
ADC_RESOLUTION = 16


def synth_lead(rng, fs, duration, bpm, scale):
    """One lead in mV: gaussian P/QRS/T bumps per beat plus wander and
    measurement noise."""
    n = int(round(duration * fs))
    t = np.arange(n) / fs
    x = 0.05 * scale * np.sin(2 * np.pi * 0.25 * t + rng.uniform(0, 6.28))
    rr = 60.0 / bpm
    beat = rng.uniform(0.1, rr)
    while beat < duration - 0.4:
        for offset, width, amp in ((-0.17, 0.025, 0.12), (0.0, 0.012, 1.0), (0.22, 0.06, 0.25)):
            center = beat + offset
            x += amp * scale * np.exp(-0.5 * ((t - center) / width) ** 2)
        beat += rr * rng.uniform(0.95, 1.05)
    x += rng.normal(0.0, 0.015, n)
    return x


def write_record(out_dir, name, fs, duration, bpm, leads, rng):
    adc = []
    for k, _ in enumerate(leads):
        scale = rng.uniform(0.6, 1.4) * (1 if k != 3 else -0.8)  # aVR points down
        mv = synth_lead(rng, fs, duration, bpm, scale)
        adc.append(np.clip(np.round(mv * GAIN), -32768, 32767).astype(np.int16))
    n = adc[0].size
    interleaved = np.empty(n * len(leads), dtype="<i2")
    for k, samples in enumerate(adc):
        interleaved[k::len(leads)] = samples
    (out_dir / f"{name}.dat").write_bytes(interleaved.tobytes())
    lines = [f"{name} {len(leads)} {fs:g} {n}"]
    for k, lead in enumerate(leads):
        lines.append(
            f"{name}.dat 16 {GAIN:g}(0)/mV {ADC_RESOLUTION} 0 {adc[k][0]} 0 0 {lead}"
        )
    (out_dir / f"{name}.hea").write_text("\n".join(lines) + "\n")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--records", type=int, default=10)
    parser.add_argument("--fs", type=float, default=250.0)
    parser.add_argument("--duration", type=float, default=30.0, help="seconds")
    parser.add_argument("--leads", type=int, default=12, choices=range(1, 13))
    parser.add_argument("--seed", type=int, default=42)
    args = parser.parse_args()

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(args.seed)
    leads = TWELVE_LEADS[: args.leads]
    for i in range(args.records):
        bpm = float(rng.uniform(55, 115))
        write_record(out_dir, f"rec{i:04d}", args.fs, args.duration, bpm, leads, rng)
    print(f"wrote {args.records} records ({args.leads} leads, {args.fs:g} Hz, "
          f"{args.duration:g}s) to {out_dir}")


if __name__ == "__main__":
    main()
