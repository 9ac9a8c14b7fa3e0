"""PER-to-PER mapping between links under flat Rayleigh fading with AWGN.

A reference link with a measured packet error rate is turned into a bit
error rate, then into a receiver SNR via the QPSK/Rayleigh BER curve. The
SNR is rescaled by transmit energy and distance (``SNR ~ E_t / d**kappa``)
and mapped back to a packet error rate for the target link.

All functions accept scalars or numpy arrays and return the same shape.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "DEFAULT_KAPPA",
    "ReferenceLink",
    "TargetLink",
    "ber_from_per",
    "ber_from_snr",
    "dbm_to_ratio",
    "derive_per",
    "per_from_ber",
    "scale_snr",
    "snr_from_ber",
]

DEFAULT_KAPPA = 3.0


def dbm_to_ratio(dbm):
    """Transmit power in dBm as a linear ratio relative to 0 dBm."""
    return 10.0 ** (np.asarray(dbm, dtype=float) / 10.0)


def _check_positive(name, value):
    if np.any(np.asarray(value) <= 0) or np.any(np.isnan(value)):
        raise ValueError(f"{name} must be > 0, got {value!r}")


def _check_kappa(kappa):
    if not np.isfinite(kappa) or kappa < 2:
        raise ValueError(f"path loss exponent must be >= 2, got {kappa!r}")


@dataclass(frozen=True)
class ReferenceLink:
    """Link with a known packet error rate.

    ``tx_energy`` is a linear ratio, 1.0 meaning 0 dBm.
    """

    per: float
    packet_length: int
    distance: float
    tx_energy: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.per <= 1.0:
            raise ValueError(f"per must lie in [0, 1], got {self.per!r}")
        if int(self.packet_length) != self.packet_length or self.packet_length < 1:
            raise ValueError(f"packet_length must be a positive integer, got {self.packet_length!r}")
        _check_positive("distance", self.distance)
        _check_positive("tx_energy", self.tx_energy)

    @classmethod
    def from_dbm(cls, per, packet_length, distance, tx_power_dbm=0.0):
        return cls(per, packet_length, distance, float(dbm_to_ratio(tx_power_dbm)))


@dataclass(frozen=True)
class TargetLink:
    packet_length: int
    distance: float
    tx_energy: float = 1.0

    def __post_init__(self):
        if int(self.packet_length) != self.packet_length or self.packet_length < 1:
            raise ValueError(f"packet_length must be a positive integer, got {self.packet_length!r}")
        _check_positive("distance", self.distance)
        _check_positive("tx_energy", self.tx_energy)

    @classmethod
    def from_dbm(cls, packet_length, distance, tx_power_dbm=0.0):
        return cls(packet_length, distance, float(dbm_to_ratio(tx_power_dbm)))


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def ber_from_per(per, length):
    """Bit error rate behind a packet error rate, assuming independent bit
    errors and no channel coding: ``1 - (1 - per) ** (1 / length)``."""
    per = np.asarray(per, dtype=float)
    if np.any((per < 0) | (per > 1)) or np.any(np.isnan(per)):
        raise ValueError(f"per must lie in [0, 1], got {per!r}")
    if np.any(per == 1):
        raise ValueError("per = 1 has no finite bit error rate; cap it below 1")
    if length < 1:
        raise ValueError(f"length must be >= 1, got {length!r}")
    return _out(-np.expm1(np.log1p(-per) / length))


def per_from_ber(ber, length):
    ber = np.asarray(ber, dtype=float)
    return _out(-np.expm1(length * np.log1p(-ber)))


def ber_from_snr(snr):
    """QPSK bit error probability in Rayleigh fading,
    ``0.5 * (1 - sqrt(snr / (2 + snr)))``."""
    snr = np.asarray(snr, dtype=float)
    if np.any(snr < 0) or np.any(np.isnan(snr)):
        raise ValueError(f"snr must be >= 0, got {snr!r}")
    # rationalised form of the same expression, free of cancellation at high SNR
    with np.errstate(divide="ignore", invalid="ignore"):
        root = np.sqrt(snr / (2.0 + snr))
        ber = 1.0 / ((2.0 + snr) * (1.0 + root))
    ber = np.where(np.isinf(snr), 0.0, ber)
    return _out(ber)


def snr_from_ber(ber):
    """Inverse of :func:`ber_from_snr` on ``(0, 0.5)``."""
    ber = np.asarray(ber, dtype=float)
    if np.any((ber <= 0) | (ber >= 0.5)) or np.any(np.isnan(ber)):
        raise ValueError(f"ber must lie in (0, 0.5), got {ber!r}")
    # 1 - (1 - 2b)**2 == 4b(1 - b)
    return _out((1.0 - 2.0 * ber) ** 2 / (2.0 * ber * (1.0 - ber)))


def scale_snr(snr_ref, ref, tgt, kappa=DEFAULT_KAPPA):
    """Rescale a reference SNR to the target link's energy and distance.

    ``ref``/``tgt`` may be link objects or ``(distance, tx_energy)`` pairs of
    scalars or arrays.
    """
    _check_kappa(kappa)
    d1, e1 = _geometry(ref)
    d2, e2 = _geometry(tgt)
    _check_positive("distance", d1)
    _check_positive("distance", d2)
    _check_positive("tx_energy", e1)
    _check_positive("tx_energy", e2)
    return _out(np.asarray(snr_ref, dtype=float) * (e2 / e1) * (d1 / d2) ** kappa)


def _geometry(link):
    if isinstance(link, (ReferenceLink, TargetLink)):
        return link.distance, link.tx_energy
    d, e = link
    return np.asarray(d, dtype=float), np.asarray(e, dtype=float)


def derive_per(ref, tgt, kappa=DEFAULT_KAPPA):
    """Packet error rate of ``tgt`` given the measured PER of ``ref``."""
    if not 0.0 < ref.per < 1.0:
        raise ValueError(f"reference per must lie in (0, 1), got {ref.per!r}")
    snr1 = snr_from_ber(ber_from_per(ref.per, ref.packet_length))
    snr2 = scale_snr(snr1, ref, tgt, kappa)
    return per_from_ber(ber_from_snr(snr2), tgt.packet_length)


def derive_per_grid(ref, distance, tx_energy, packet_length=None, kappa=DEFAULT_KAPPA):
    """Vectorised :func:`derive_per` over arrays of target distances/energies."""
    if not 0.0 < ref.per < 1.0:
        raise ValueError(f"reference per must lie in (0, 1), got {ref.per!r}")
    length = ref.packet_length if packet_length is None else packet_length
    snr1 = snr_from_ber(ber_from_per(ref.per, ref.packet_length))
    snr2 = scale_snr(snr1, ref, (distance, tx_energy), kappa)
    return per_from_ber(ber_from_snr(snr2), length)
