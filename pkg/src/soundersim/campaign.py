"""Campaign orchestration and the capture file format.

:func:`run_campaign` wires the whole simulator together: it validates
the sounder/channel pairing, builds the waveform and transmit frame,
derives the receiver alignment from the trigger schedule, pushes every
trigger window through the channel and the select-and-average stage,
and returns the snapshots plus provenance as a :class:`Capture`.

The transmitter replays one frame forever, so the steady-state link is
periodic with the frame length and each snapshot can be simulated from
a single frame: the channel is applied to the frame extended by its own
tail (circular wrap), which is exact for every sample of the window.
Only the noise and interferer phases differ between snapshots; noise
for snapshot k comes from an independent PCG64 stream spawned from the
channel seed with key (k,), so any snapshot can be reproduced without
generating its predecessors.

Capture files are a fixed 10-byte prologue, a JSON header, then the raw
snapshot payload::

    bytes 0..3   magic "CSND"
    bytes 4..5   format version, uint16 LE (currently 1)
    bytes 6..9   header length in bytes, uint32 LE
    header       UTF-8 JSON: config, channel digest, PRNG name + seed,
                 creation time, saturation count
    payload      per snapshot, signal_len records of int16 LE I then Q

With the standard configuration a snapshot is 4 KiB every 5 ms, about
0.8 MB/s of sustained capture rate.
"""

from __future__ import annotations

import json
import os
import struct
from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np

from .averager import Snapshot, select_and_average
from .channel import (
    ChannelModel,
    apply_channel,
    channel_digest,
    validate_config,
)
from .config import SounderConfig, config_from_dict, config_to_dict
from .errors import CaptureFormatError, ValidationError
from .fixedpoint import SAMPLE_DTYPE
from .sync import PpsSchedule, receiver_offset
from .waveform import build_sounding_symbol, build_tx_frame, occupied_bins

MAGIC = b"CSND"
FORMAT_VERSION = 1
_PROLOGUE = struct.Struct("<4sHI")


@dataclass
class Capture:
    """All snapshots of one campaign plus their provenance.

    ``channel_digest`` fingerprints the channel model file so captures
    can be traced back to the exact propagation scenario; ``created``
    is an ISO 8601 UTC timestamp.  The trigger schedule is deliberately
    not part of a capture: under flank-independent scheduling the start
    flanks leave no trace in the data, so captures taken at different
    flanks are byte-identical.
    """

    config: SounderConfig
    channel_digest: str
    prng: str
    seed: int
    created: str
    clipped_components: int
    snapshots: list[Snapshot]

    @property
    def payload_bytes(self) -> int:
        """Size of the snapshot payload on disk."""
        return len(self.snapshots) * self.config.signal_len * SAMPLE_DTYPE.itemsize


def _timestamp(created: str | None) -> str:
    """Resolve the capture timestamp.

    Explicit value wins; otherwise the SOURCE_DATE_EPOCH environment
    variable (for reproducible output), otherwise the current time.
    """
    if created is not None:
        return created
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch is not None:
        stamp = datetime.fromtimestamp(int(epoch), tz=timezone.utc)
    else:
        stamp = datetime.now(tz=timezone.utc)
    return stamp.isoformat(timespec="seconds")


def snapshot_rng(seed: int, snapshot_index: int) -> np.random.Generator:
    """The noise generator for one snapshot of a campaign."""
    seq = np.random.SeedSequence(entropy=seed, spawn_key=(snapshot_index,))
    return np.random.Generator(np.random.PCG64(seq))


def run_campaign(
    cfg: SounderConfig,
    model: ChannelModel,
    schedule: PpsSchedule | None = None,
    *,
    created: str | None = None,
) -> Capture:
    """Simulate a full campaign: ``cfg.num_snapshots`` averaged snapshots.

    Args:
        cfg: sounder configuration.
        model: channel between TX and RX.
        schedule: trigger schedule; defaults to both devices on flank 0
            with zero timing error.
        created: capture timestamp override (ISO 8601).  With a fixed
            value the output is bit-reproducible.

    Raises:
        ValidationError: the configuration cannot measure this channel.
        SchedulingError: the schedule is not flank-independent.
    """
    report = validate_config(cfg, model)
    if not report.passed:
        raise ValidationError(f"configuration cannot measure channel:\n{report}")
    if schedule is None:
        schedule = PpsSchedule(
            rep_period_s=cfg.rep_period_s, sample_period_s=cfg.sample_period_s
        )
    elif (schedule.rep_period_s != cfg.rep_period_s
          or schedule.sample_period_s != cfg.sample_period_s):
        raise ValidationError("schedule and config disagree on periods")
    offset = receiver_offset(schedule)

    wf = build_sounding_symbol(cfg.zc, cfg.signal_len, cfg.backoff)
    frame = build_tx_frame(wf, cfg)
    frame_len = cfg.frame_len
    acfg = cfg.averager_config()

    # The receiver sees frame[(n - offset) mod frame_len]; prepend the
    # rolled frame's tail so the tapped delay line wraps circularly.
    rx_frame = np.roll(frame, offset)
    tail = model.max_delay
    extended = np.concatenate([rx_frame[frame_len - tail:], rx_frame])

    snapshots: list[Snapshot] = []
    clipped = 0
    for k in range(cfg.num_snapshots):
        rng = snapshot_rng(model.seed, k)
        result = apply_channel(
            extended, model, start_index=k * frame_len - tail, rng=rng
        )
        stream = result.samples[tail : tail + frame_len]
        clipped += result.clipped_components
        snapshots.append(select_and_average(stream, acfg, snapshot_index=k))

    return Capture(
        config=cfg,
        channel_digest=channel_digest(model),
        prng="pcg64",
        seed=model.seed,
        created=_timestamp(created),
        clipped_components=clipped,
        snapshots=snapshots,
    )


def report_reduction(cfg: SounderConfig) -> float:
    """On-device data reduction factor: input samples per stored sample."""
    return cfg.frame_len / cfg.signal_len


def storage_rate_bytes(cfg: SounderConfig) -> float:
    """Sustained capture output rate in bytes per second."""
    return cfg.signal_len * SAMPLE_DTYPE.itemsize / cfg.rep_period_s


def _header_dict(capture: Capture) -> dict:
    dc_included = bool(0 in occupied_bins(capture.config.zc.length,
                                          capture.config.signal_len))
    return {
        "format": MAGIC.decode("ascii"),
        "version": FORMAT_VERSION,
        "config": config_to_dict(capture.config),
        "channel_digest": capture.channel_digest,
        "prng": capture.prng,
        "seed": capture.seed,
        "created": capture.created,
        "clipped_components": capture.clipped_components,
        "dc_bin_included": dc_included,
        "snapshot_count": len(capture.snapshots),
    }


def write_capture(path, capture: Capture) -> None:
    """Write a capture file (see module docstring for the layout)."""
    header = json.dumps(_header_dict(capture), sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_PROLOGUE.pack(MAGIC, FORMAT_VERSION, len(header)))
        fh.write(header)
        for snap in capture.snapshots:
            fh.write(snap.data.tobytes())


def read_capture(path) -> Capture:
    """Read a capture file back into a :class:`Capture`.

    Raises:
        CaptureFormatError: bad magic, unsupported version, malformed
            header, or payload size mismatch.
    """
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _PROLOGUE.size:
        raise CaptureFormatError(f"file too short for prologue: {len(raw)} bytes")
    magic, version, header_len = _PROLOGUE.unpack_from(raw)
    if magic != MAGIC:
        raise CaptureFormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != FORMAT_VERSION:
        raise CaptureFormatError(
            f"unsupported format version {version}, expected {FORMAT_VERSION}"
        )
    header_end = _PROLOGUE.size + header_len
    if len(raw) < header_end:
        raise CaptureFormatError("file too short for declared header length")
    try:
        header = json.loads(raw[_PROLOGUE.size : header_end].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CaptureFormatError(f"malformed capture header: {exc}") from exc
    try:
        cfg = config_from_dict(header["config"])
        count = int(header["snapshot_count"])
        meta = {
            "channel_digest": header["channel_digest"],
            "prng": header["prng"],
            "seed": int(header["seed"]),
            "created": header["created"],
            "clipped_components": int(header["clipped_components"]),
        }
    except (KeyError, TypeError, ValueError) as exc:
        raise CaptureFormatError(f"capture header missing fields: {exc}") from exc

    record_bytes = cfg.signal_len * SAMPLE_DTYPE.itemsize
    expected = count * record_bytes
    payload = raw[header_end:]
    if len(payload) != expected:
        raise CaptureFormatError(
            f"payload is {len(payload)} bytes, expected {expected} "
            f"({count} snapshots x {record_bytes})"
        )
    acfg = cfg.averager_config()
    snapshots = []
    for k in range(count):
        chunk = payload[k * record_bytes : (k + 1) * record_bytes]
        data = np.frombuffer(chunk, dtype=SAMPLE_DTYPE).copy()
        snapshots.append(Snapshot(data=data, snapshot_index=k, config=acfg))
    return Capture(
        config=cfg,
        snapshots=snapshots,
        **meta,
    )
