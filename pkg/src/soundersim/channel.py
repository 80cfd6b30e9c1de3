"""Tapped delay line channel with noise and narrowband interferers.

The propagation model is deliberately simple and exactly reproducible:

* multipath as a tapped delay line with integer-sample delays and
  complex gains,
* additive white Gaussian noise, independent per I/Q component,
* optional continuous-wave interferers whose phase is a function of the
  absolute sample index, so consecutive stream chunks join seamlessly.

Outputs are quantized back to the 16-bit sample domain, counting
saturated components, because that is what the receiver hardware would
digitize.

The module also hosts the deployment feasibility checks that relate a
sounder configuration to a channel: the symbol must be longer than the
channel's delay spread (otherwise echoes of one symbol bleed past the
circular window), and the post-trigger discard must cover the first
arrival plus one settling symbol (otherwise averaging starts on a
partial symbol).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from . import fixedpoint
from .errors import ConfigurationError

if TYPE_CHECKING:  # pragma: no cover - import cycle guard, typing only
    from .config import SounderConfig


@dataclass(frozen=True)
class Interferer:
    """One continuous-wave interferer at the receiver input.

    Attributes:
        freq: tone frequency in cycles per sample, in (-0.5, 0.5].
        amplitude: peak amplitude as a fraction of full scale (>= 0).
        phase: phase in radians at absolute sample index 0.
    """

    freq: float
    amplitude: float
    phase: float = 0.0

    def __post_init__(self) -> None:
        if not -0.5 < self.freq <= 0.5:
            raise ConfigurationError(
                f"interferer freq must be in (-0.5, 0.5] cycles/sample, got {self.freq}"
            )
        if self.amplitude < 0:
            raise ConfigurationError(
                f"interferer amplitude must be >= 0, got {self.amplitude}"
            )


@dataclass(frozen=True)
class ChannelModel:
    """Static description of everything between TX DAC and RX ADC.

    Attributes:
        taps: (delay_samples, complex gain) pairs; delays are unique
            integers >= 0.
        noise_std: per-component standard deviation of the additive
            Gaussian noise, in full-scale units.
        interferers: continuous-wave interferers.
        seed: base seed for the noise generator (PCG64); snapshot k of
            a campaign uses the child stream spawned with key (k,).
    """

    taps: tuple[tuple[int, complex], ...]
    noise_std: float = 0.0
    interferers: tuple[Interferer, ...] = ()
    seed: int = 0

    def __post_init__(self) -> None:
        taps = tuple((int(d), complex(g)) for d, g in self.taps)
        object.__setattr__(self, "taps", taps)
        object.__setattr__(self, "interferers", tuple(self.interferers))
        if not taps:
            raise ConfigurationError("channel must have at least one tap")
        delays = [d for d, _ in taps]
        if any(d < 0 for d in delays):
            raise ConfigurationError(f"tap delays must be >= 0, got {delays}")
        if len(set(delays)) != len(delays):
            raise ConfigurationError(f"tap delays must be unique, got {delays}")
        if self.noise_std < 0:
            raise ConfigurationError(f"noise_std must be >= 0, got {self.noise_std}")
        if not 0 <= self.seed < 2**64:
            raise ConfigurationError(f"seed must be an unsigned 64-bit int, got {self.seed}")

    @property
    def first_arrival(self) -> int:
        """Delay of the earliest tap, in samples."""
        return min(d for d, _ in self.taps)

    @property
    def max_delay(self) -> int:
        """Delay of the latest tap, in samples."""
        return max(d for d, _ in self.taps)

    @property
    def delay_span(self) -> int:
        """Spread between first and last arrival, in samples."""
        return self.max_delay - self.first_arrival


@dataclass
class ChannelResult:
    """Quantized channel output plus saturation diagnostics."""

    samples: np.ndarray  # SAMPLE_DTYPE
    clipped_components: int


def propagate_float(
    tx: np.ndarray,
    model: ChannelModel,
    start_index: int = 0,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Float-domain channel output, before requantization.

    Args:
        tx: transmit samples (structured int16).
        model: channel description.
        start_index: absolute index of ``tx[0]`` in the transmit
            stream; interferer phases are evaluated against absolute
            indices so chunked processing is seamless.
        rng: noise generator; defaults to a fresh PCG64 seeded with
            ``model.seed``.

    Returns:
        complex128 array of ``len(tx) + model.max_delay`` samples: the
        full convolution tail is kept so no echo is dropped.
    """
    tx_float = fixedpoint.to_float(tx)
    out_len = len(tx) + model.max_delay
    out = np.zeros(out_len, dtype=np.complex128)
    for delay, gain in model.taps:
        out[delay : delay + len(tx)] += gain * tx_float

    if model.interferers:
        index = np.arange(start_index, start_index + out_len, dtype=np.float64)
        for tone in model.interferers:
            # mod 1 before the 2*pi multiply keeps phase accurate at
            # large absolute indices.
            phase = 2.0 * np.pi * np.mod(tone.freq * index, 1.0) + tone.phase
            out += tone.amplitude * np.exp(1j * phase)

    if model.noise_std > 0:
        if rng is None:
            rng = np.random.default_rng(model.seed)
        out += model.noise_std * rng.standard_normal(out_len)
        out += 1j * model.noise_std * rng.standard_normal(out_len)
    return out


def apply_channel(
    tx: np.ndarray,
    model: ChannelModel,
    start_index: int = 0,
    rng: np.random.Generator | None = None,
) -> ChannelResult:
    """Propagate ``tx`` through the channel and requantize.

    Deterministic: the same arguments always produce bit-identical
    samples.  Saturated I/Q components are clipped to the rails and
    counted.
    """
    received = propagate_float(tx, model, start_index=start_index, rng=rng)
    samples, clipped = fixedpoint.quantize_clipped(received)
    return ChannelResult(samples=samples, clipped_components=clipped)


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one feasibility check."""

    name: str
    passed: bool
    margin_samples: int
    detail: str

    def __str__(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return f"{verdict} {self.name} (margin {self.margin_samples} samples): {self.detail}"


@dataclass(frozen=True)
class ValidationReport:
    """All feasibility checks for one sounder/channel pairing."""

    checks: tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __str__(self) -> str:
        return "\n".join(str(c) for c in self.checks)


def validate_config(cfg: "SounderConfig", model: ChannelModel) -> ValidationReport:
    """Check that a sounder configuration can measure a channel.

    Two conditions, both in whole samples:

    * symbol covers delay spread: ``signal_len`` must be strictly
      larger than the spread between first and last arrival, or echoes
      of adjacent symbols alias into the circular window;
    * discard covers settling: the first arrival plus one full symbol
      must fit inside ``discard_len``, so the averaging window starts
      only after every tap is fed by the repeated symbol train.
    """
    span = model.delay_span
    span_margin = cfg.signal_len - span
    settle = model.first_arrival + cfg.signal_len
    settle_margin = cfg.discard_len - settle
    checks = (
        CheckResult(
            name="symbol covers delay spread",
            passed=span_margin > 0,
            margin_samples=span_margin,
            detail=f"signal_len {cfg.signal_len} vs delay span {span}",
        ),
        CheckResult(
            name="discard covers first arrival",
            passed=settle_margin >= 0,
            margin_samples=settle_margin,
            detail=(
                f"discard_len {cfg.discard_len} vs first arrival "
                f"{model.first_arrival} + signal_len {cfg.signal_len}"
            ),
        ),
    )
    return ValidationReport(checks=checks)


def channel_to_dict(model: ChannelModel) -> dict:
    """JSON-ready dict representation (complex values as [re, im])."""
    return {
        "taps": [
            {"delay": d, "gain": [g.real, g.imag]} for d, g in model.taps
        ],
        "noise_std": model.noise_std,
        "interferers": [
            {"freq": t.freq, "amplitude": t.amplitude, "phase": t.phase}
            for t in model.interferers
        ],
        "seed": model.seed,
    }


def channel_from_dict(data: dict) -> ChannelModel:
    """Inverse of :func:`channel_to_dict`."""
    try:
        taps = tuple(
            (int(t["delay"]), complex(t["gain"][0], t["gain"][1]))
            for t in data["taps"]
        )
        interferers = tuple(
            Interferer(
                freq=float(t["freq"]),
                amplitude=float(t["amplitude"]),
                phase=float(t.get("phase", 0.0)),
            )
            for t in data.get("interferers", [])
        )
        return ChannelModel(
            taps=taps,
            noise_std=float(data.get("noise_std", 0.0)),
            interferers=interferers,
            seed=int(data.get("seed", 0)),
        )
    except (KeyError, TypeError, IndexError) as exc:
        raise ConfigurationError(f"malformed channel model: {exc}") from exc


def channel_digest(model: ChannelModel) -> str:
    """SHA-256 over the canonical JSON form; file formatting agnostic."""
    canonical = json.dumps(channel_to_dict(model), sort_keys=True,
                           separators=(",", ":"))
    return hashlib.sha256(canonical.encode("ascii")).hexdigest()


def save_channel(path, model: ChannelModel) -> None:
    """Write a channel model as JSON."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(channel_to_dict(model), fh, indent=2)
        fh.write("\n")


def load_channel(path) -> ChannelModel:
    """Read a channel model written by :func:`save_channel`."""
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"channel file is not valid JSON: {exc}") from exc
    return channel_from_dict(data)
