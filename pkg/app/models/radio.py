"""
Radio Models
Nodes, channel parameters and the MCS rate table
"""

from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import yaml

from app.models.geometry import Point


class NodeRole(str, Enum):
    MAP = 'mAP'
    EXTENDER = 'extender'
    STATION = 'station'


@dataclass(frozen=True)
class RadioNode:
    """
    A managed or unmanaged radio node

    `channel` is the AP channel for an mAP, the backhaul channel for an
    extender and the association channel for a station. Extenders also carry
    `fronthaul_channel`, which may equal the backhaul channel (worst case).
    """

    node_id: str
    role: NodeRole
    location: Point
    tx_power: float = 20.0
    channel: int = 36
    managed: bool = True
    fronthaul_channel: Optional[int] = None

    @property
    def serving_channel(self) -> int:
        """Channel this node transmits on towards its own clients"""
        if self.role == NodeRole.EXTENDER and self.fronthaul_channel is not None:
            return self.fronthaul_channel
        return self.channel

    def moved_to(self, location: Point) -> 'RadioNode':
        return RadioNode(self.node_id, self.role, location, self.tx_power,
                         self.channel, self.managed, self.fronthaul_channel)

    def validate(self) -> Tuple[bool, list]:
        errors = []
        if not self.node_id:
            errors.append("Node id is required")
        if not self.location.is_finite():
            errors.append(f"Node {self.node_id} location must be finite")
        if self.role == NodeRole.EXTENDER and self.fronthaul_channel is None:
            errors.append(f"Extender {self.node_id} needs a fronthaul channel")
        return len(errors) == 0, errors


@dataclass(frozen=True)
class ChannelParams:
    """Carrier, noise and detection thresholds shared by every link"""

    frequency: float = 5180.0
    noise_floor: float = -90.0
    rx_sensitivity: float = -83.0
    cca_threshold: float = -82.0
    pathloss_exponent: float = 2.0

    def validate(self) -> Tuple[bool, list]:
        errors = []
        if self.frequency <= 0:
            errors.append("Frequency must be > 0 MHz")
        if self.pathloss_exponent < 2.0:
            errors.append("Path-loss exponent must be >= 2 (free space)")
        if self.rx_sensitivity > self.cca_threshold:
            errors.append(
                f"Receiver sensitivity {self.rx_sensitivity} dBm must not exceed "
                f"CCA threshold {self.cca_threshold} dBm"
            )
        return len(errors) == 0, errors


@dataclass(frozen=True)
class McsTable:
    """
    Ordered (min_snr dB, rate Mbps) rows for one channel width

    With `fixed_index` set the table behaves as a fixed-MCS link: the rate is
    that row's rate whenever its SNR floor is met.
    """

    rows: Tuple[Tuple[float, float], ...]
    bandwidth: float = 80.0
    fixed_index: Optional[int] = None

    @property
    def max_rate(self) -> float:
        return self.rows[-1][1]

    def validate(self) -> Tuple[bool, list]:
        errors = []
        if not self.rows:
            errors.append("MCS table needs at least one row")
        for previous, current in zip(self.rows, self.rows[1:]):
            if not (current[0] > previous[0] and current[1] > previous[1]):
                errors.append(f"MCS rows must strictly increase: {previous} -> {current}")
        if self.bandwidth <= 0:
            errors.append("MCS bandwidth must be > 0 MHz")
        if self.fixed_index is not None and not 0 <= self.fixed_index < len(self.rows):
            errors.append(f"Fixed MCS index {self.fixed_index} is outside the table")
        return len(errors) == 0, errors

    def with_fixed_index(self, index: Optional[int]) -> 'McsTable':
        return McsTable(self.rows, self.bandwidth, index)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'McsTable':
        rows = tuple((float(row['min_snr_db']), float(row['rate_mbps'])) for row in data.get('rows', []))
        fixed = data.get('fixed_index')
        return cls(rows=rows, bandwidth=float(data.get('bandwidth_mhz', 80.0)),
                   fixed_index=None if fixed is None else int(fixed))

    @classmethod
    def load(cls, path: str) -> 'McsTable':
        with open(Path(path), 'r') as handle:
            return cls.from_dict(yaml.safe_load(handle))
