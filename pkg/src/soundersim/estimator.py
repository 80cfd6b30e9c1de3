"""Channel estimation from averaged snapshots.

A snapshot is one averaged sounding symbol.  Estimation is classic
frequency-domain sounding:

1. undo the averager's fixed-point scaling (``2**shift_bits /
   avg_count``),
2. DFT the symbol,
3. divide by the known transmitted spectrum on the occupied bins.

Because the transmitted spectrum carries the full digital amplitude
scale (see :mod:`soundersim.waveform`), the result is an absolute
frequency response: a direct wire between TX DAC and RX ADC estimates
to magnitude ~1 on every occupied bin.

Only ``zc.length`` of ``signal_len`` bins are occupied, so the inverse
DFT of the response is the channel convolved with a narrow band-limit
kernel (the inverse DFT of the occupied mask).  For display this is
fine; for reading exact tap gains at known integer delays,
:func:`read_tap_gains` deconvolves that kernel with a small linear
solve instead of naively sampling the blurred impulse response.

Back-to-back calibration measures the cabled TX->RX response once and
divides later measurements by it, removing the static frequency ripple
of both RF chains.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import diric

from . import fixedpoint
from .averager import Snapshot
from .errors import ConfigurationError, DegenerateWaveformError
from .waveform import SoundingWaveform

_log = logging.getLogger(__name__)

#: Occupied bins with smaller magnitude than this cannot be inverted.
DEGENERATE_BIN_TOL = 1e-12


@dataclass(frozen=True)
class FrequencyResponse:
    """Channel frequency response on the occupied subcarriers.

    ``bins`` is full DFT length with zeros outside ``occupied_mask``.
    """

    bins: np.ndarray  # complex128, length fft_size
    occupied_mask: np.ndarray  # bool, length fft_size

    @property
    def fft_size(self) -> int:
        return len(self.bins)


@dataclass(frozen=True)
class ImpulseResponse:
    """Band-limited channel impulse response (one tap per sample)."""

    taps: np.ndarray  # complex128, length fft_size


@dataclass(frozen=True)
class PowerDelayProfile:
    """Tap powers in dB over delay."""

    delay_s: np.ndarray  # float64, length fft_size
    power_db: np.ndarray  # float64, length fft_size


#: PDP floor for zero (or vanishing) taps, in dB.
PDP_FLOOR_DB = -200.0


def rescale_snapshot(snapshot: Snapshot) -> np.ndarray:
    """Averaged symbol in float units (full scale = 1.0).

    The averager stores sum(x >> shift_bits); multiplying by
    ``2**shift_bits / avg_count`` recovers the mean symbol amplitude.
    Exact (factor 1.0) when ``avg_count == 2**shift_bits``.
    """
    cfg = snapshot.config
    factor = float(2**cfg.shift_bits) / cfg.avg_count
    return fixedpoint.to_float(snapshot.data) * factor


def estimate_response(
    snapshot: Snapshot, wf: SoundingWaveform
) -> FrequencyResponse:
    """Estimate the frequency response seen by one snapshot.

    Args:
        snapshot: averaged symbol from the receiver.
        wf: the sounding waveform that was transmitted.

    Raises:
        ConfigurationError: snapshot length and waveform DFT size differ.
        DegenerateWaveformError: an occupied bin of ``wf`` is too small
            to divide by.
    """
    if wf.fft_size != snapshot.config.signal_len:
        raise ConfigurationError(
            f"waveform fft_size {wf.fft_size} does not match snapshot "
            f"signal_len {snapshot.config.signal_len}"
        )
    mask = wf.occupied_mask
    occupied = wf.freq_bins[mask]
    weakest = np.abs(occupied).min() if occupied.size else 0.0
    if occupied.size == 0 or weakest < DEGENERATE_BIN_TOL:
        raise DegenerateWaveformError(
            f"weakest occupied bin magnitude {weakest:.3e} is below "
            f"{DEGENERATE_BIN_TOL:.0e}; cannot invert waveform"
        )
    spectrum = np.fft.fft(rescale_snapshot(snapshot))
    bins = np.zeros(wf.fft_size, dtype=np.complex128)
    bins[mask] = spectrum[mask] / occupied
    return FrequencyResponse(bins=bins, occupied_mask=mask.copy())


def to_cir(response: FrequencyResponse) -> ImpulseResponse:
    """Inverse DFT of the response: the band-limited impulse response."""
    return ImpulseResponse(taps=np.fft.ifft(response.bins))


def power_delay_profile(
    cir: ImpulseResponse, sample_period_s: float
) -> PowerDelayProfile:
    """Tap power versus delay in dB, floored at -200 dB."""
    mag = np.abs(cir.taps)
    power_db = np.full(mag.shape, PDP_FLOOR_DB)
    nonzero = mag > 0
    np.log10(mag, out=power_db, where=nonzero)
    power_db[nonzero] = np.maximum(20.0 * power_db[nonzero], PDP_FLOOR_DB)
    delay_s = np.arange(len(mag)) * sample_period_s
    return PowerDelayProfile(delay_s=delay_s, power_db=power_db)


def band_limit_kernel(occupied_mask: np.ndarray) -> np.ndarray:
    """Inverse DFT of the occupied mask.

    This is the shape every physical tap takes in the band-limited
    impulse response; its peak value is (occupied bins / fft_size).
    """
    return np.fft.ifft(occupied_mask.astype(np.float64))


def read_tap_gains(
    cir: ImpulseResponse, occupied_mask: np.ndarray, delays
) -> np.ndarray:
    """Read complex tap gains at known integer delays.

    Each tap appears in the band-limited impulse response as the
    band-limit kernel centered on its delay, so nearby taps leak into
    each other's bins.  Solving the small kernel system removes that
    leakage and returns the underlying gains.

    Args:
        cir: band-limited impulse response.
        occupied_mask: occupied-bin mask of the sounding waveform.
        delays: integer sample delays at which taps are present.

    Returns:
        complex gain per delay, same order as ``delays``.
    """
    delays = np.asarray(delays, dtype=np.int64)
    if delays.size == 0:
        return np.zeros(0, dtype=np.complex128)
    size = len(cir.taps)
    if np.any(delays < 0) or np.any(delays >= size):
        raise ConfigurationError(f"delays must be in [0, {size}), got {delays}")
    if len(np.unique(delays)) != delays.size:
        raise ConfigurationError(f"delays must be unique, got {delays}")
    kernel = band_limit_kernel(occupied_mask)
    matrix = kernel[np.mod(delays[:, None] - delays[None, :], size)]
    try:
        return np.linalg.solve(matrix, cir.taps[delays])
    except np.linalg.LinAlgError as exc:
        raise ConfigurationError(
            f"band-limit kernel is singular at delays {delays}: {exc}"
        ) from exc


def averaging_suppression(
    freq_cycles_per_sample: float, signal_len: int, avg_count: int
) -> float:
    """Amplitude factor averaging applies to an asynchronous tone.

    A tone at ``f`` cycles/sample advances ``f * signal_len`` cycles
    between averaged symbols; summing ``avg_count`` rotated copies
    scales its amplitude by \\|sin(pi f L M) / (M sin(pi f L))\\| -- the
    periodic-sinc magnitude, 1.0 when the tone is symbol-periodic.
    """
    if avg_count < 1:
        raise ConfigurationError(f"avg_count must be >= 1, got {avg_count}")
    return float(abs(diric(2.0 * np.pi * freq_cycles_per_sample * signal_len,
                           avg_count)))


@dataclass(frozen=True)
class CalibrationProfile:
    """Back-to-back reference response plus inversion threshold.

    Occupied reference bins with magnitude below ``threshold`` cannot
    be divided by; :func:`apply_calibration` zeroes them in the output
    and drops them from its mask.
    """

    reference: FrequencyResponse
    threshold: float = 1e-3

    def __post_init__(self) -> None:
        if self.threshold <= 0:
            raise ConfigurationError(
                f"threshold must be positive, got {self.threshold}"
            )
        occ = self.reference.bins[self.reference.occupied_mask]
        weak = int(np.count_nonzero(np.abs(occ) < self.threshold))
        if weak:
            _log.warning(
                "calibration reference has %d occupied bins below %.3e",
                weak, self.threshold,
            )


def build_calibration(
    responses, threshold: float = 1e-3
) -> CalibrationProfile:
    """Average back-to-back responses into a calibration profile.

    All responses must share one occupied mask; their complex mean
    becomes the reference.
    """
    responses = list(responses)
    if not responses:
        raise ConfigurationError("need at least one response to calibrate")
    mask = responses[0].occupied_mask
    for r in responses[1:]:
        if not np.array_equal(r.occupied_mask, mask):
            raise ConfigurationError("calibration responses have differing masks")
    mean_bins = np.mean([r.bins for r in responses], axis=0)
    reference = FrequencyResponse(bins=mean_bins, occupied_mask=mask.copy())
    return CalibrationProfile(reference=reference, threshold=threshold)


def apply_calibration(
    response: FrequencyResponse, profile: CalibrationProfile
) -> FrequencyResponse:
    """Divide a measured response by the back-to-back reference.

    Occupied bins where the reference is weaker than the profile
    threshold are zeroed and removed from the output mask (and
    counted in a log record).
    """
    mask = response.occupied_mask
    if not np.array_equal(mask, profile.reference.occupied_mask):
        raise ConfigurationError(
            "response and calibration profile have differing occupied masks"
        )
    ref = profile.reference.bins
    weak = mask & (np.abs(ref) < profile.threshold)
    n_weak = int(np.count_nonzero(weak))
    if n_weak:
        _log.warning("calibration zeroed %d weak bins", n_weak)
    good = mask & ~weak
    bins = np.zeros_like(response.bins)
    bins[good] = response.bins[good] / ref[good]
    return FrequencyResponse(bins=bins, occupied_mask=good)


def calibration_to_dict(profile: CalibrationProfile) -> dict:
    """JSON-ready dict; only occupied bins are stored."""
    mask = profile.reference.occupied_mask
    indices = np.flatnonzero(mask)
    values = profile.reference.bins[indices]
    return {
        "fft_size": int(len(mask)),
        "threshold": profile.threshold,
        "occupied": indices.tolist(),
        "real": values.real.tolist(),
        "imag": values.imag.tolist(),
    }


def calibration_from_dict(data: dict) -> CalibrationProfile:
    """Inverse of :func:`calibration_to_dict`."""
    try:
        size = int(data["fft_size"])
        indices = np.asarray(data["occupied"], dtype=np.int64)
        bins = np.zeros(size, dtype=np.complex128)
        bins[indices] = np.asarray(data["real"]) + 1j * np.asarray(data["imag"])
        mask = np.zeros(size, dtype=bool)
        mask[indices] = True
        reference = FrequencyResponse(bins=bins, occupied_mask=mask)
        return CalibrationProfile(reference=reference,
                                  threshold=float(data["threshold"]))
    except (KeyError, TypeError, IndexError, ValueError) as exc:
        raise ConfigurationError(f"malformed calibration profile: {exc}") from exc


def save_calibration(path, profile: CalibrationProfile) -> None:
    """Write a calibration profile as JSON."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(calibration_to_dict(profile), fh)
        fh.write("\n")


def load_calibration(path) -> CalibrationProfile:
    """Read a profile written by :func:`save_calibration`."""
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(
                f"calibration file is not valid JSON: {exc}"
            ) from exc
    return calibration_from_dict(data)
