"""Wireless reception geometry.

A message transmits at fixed power; a collector can decode it once the
received SNR clears the threshold, which under power-law path loss turns
into a disk of fixed radius around the message location.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import ConfigurationError, Point, ScenarioConfig, distance

# Relative slack applied when testing membership of the reception disk, so a
# collector standing on the computed boundary point is in range despite
# floating-point round-off. Well below any physically meaningful scale.
_RANGE_SLACK = 1e-12


def reception_radius(snr_ref: float, snr_threshold: float,
                     path_loss: float) -> float:
    """Distance at which the received SNR equals the decoding threshold.

    ``snr_ref`` is the linear SNR at unit distance; SNR falls off as
    d**(-path_loss). Radii above and below one distance unit both come out
    of the same expression.
    """
    if not snr_ref > 0 or not snr_threshold > 0:
        raise ConfigurationError("SNR values must be positive")
    if not path_loss > 0:
        raise ConfigurationError("path_loss must be positive")
    return (snr_ref / snr_threshold) ** (1.0 / path_loss)


def in_range(collector: Point, message: Point, radius: float) -> bool:
    """True when the collector can receive a message at this distance."""
    return distance(collector, message) <= radius * (1.0 + _RANGE_SLACK)


def reception_point(collector: Point, message: Point, radius: float) -> Point:
    """Nearest point to the collector from which the message is receivable.

    The collector's own position when already in range, otherwise the point
    on the reception disk boundary along the straight line to the message.
    """
    d = distance(collector, message)
    if d <= radius:
        return collector
    f = (d - radius) / d
    return Point(collector.x + f * (message.x - collector.x),
                 collector.y + f * (message.y - collector.y))


@dataclass(frozen=True, slots=True)
class ReceptionModel:
    """Reception disk radius plus the fixed per-message reception time."""

    radius: float
    reception_time: float

    @classmethod
    def for_scenario(cls, config: ScenarioConfig) -> "ReceptionModel":
        return cls(radius=reception_radius(config.snr_ref, config.snr_threshold,
                                           config.path_loss),
                   reception_time=config.reception_time)
