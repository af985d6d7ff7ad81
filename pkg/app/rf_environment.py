"""
RF Environment
Indoor path loss through walls, SNR-to-rate mapping and the contention-aware
MAC surrogate that stands in for measured link throughput
"""

import logging
import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from app.models.geometry import FloorPlan, Point
from app.models.radio import ChannelParams, McsTable, NodeRole, RadioNode
from config.sim_config import SimConfig

logger = logging.getLogger(__name__)

_EPS = 1e-12


@dataclass(frozen=True)
class TxRadio:
    """One transmitting radio: owner node, position, power and channel"""

    owner_id: str
    location: Point
    tx_power: float
    channel: int


@dataclass(frozen=True)
class Link:
    """A directed link evaluated on one channel"""

    tx: RadioNode
    rx: RadioNode
    channel: int


def wall_count(plan: FloorPlan, a: Point, b: Point) -> Tuple[int, float]:
    """
    Count the walls strictly crossed by the open segment (a, b)

    A wall touched at one of its own endpoints counts; a wall touching the
    segment exactly at a or b does not, so splitting a segment at a non-wall
    point adds up. Collinear overlaps are not crossings.

    Returns:
        (count, total_loss_db)
    """
    walls = plan.wall_array()
    if a == b or walls.shape[0] == 0:
        return 0, 0.0

    rx, ry = b.x - a.x, b.y - a.y
    cx, cy = walls[:, 0] - a.x, walls[:, 1] - a.y
    sx, sy = walls[:, 2] - walls[:, 0], walls[:, 3] - walls[:, 1]

    denom = rx * sy - ry * sx
    parallel = np.abs(denom) < _EPS
    safe = np.where(parallel, 1.0, denom)
    t = (cx * sy - cy * sx) / safe
    u = (cx * ry - cy * rx) / safe

    tol = 1e-9
    hit = (~parallel) & (t > tol) & (t < 1.0 - tol) & (u >= -tol) & (u <= 1.0 + tol)
    return int(np.count_nonzero(hit)), float(walls[hit, 4].sum())


def path_loss(plan: FloorPlan, params: ChannelParams, a: Point, b: Point,
              distance_clamp: Optional[float] = None) -> float:
    """Log-distance loss in dB: free space at 1 m, exponent n beyond, plus walls"""
    clamp = SimConfig.DISTANCE_CLAMP_M if distance_clamp is None else distance_clamp
    d = max(a.distance_to(b), clamp)
    log_d = math.log10(d)
    _, walls_db = wall_count(plan, a, b)
    return (20.0 * log_d + 20.0 * math.log10(params.frequency) - 27.55
            + 10.0 * (params.pathloss_exponent - 2.0) * log_d + walls_db)


def rssi_at(tx: RadioNode, rx_loc: Point, plan: FloorPlan, params: ChannelParams) -> float:
    return tx.tx_power - path_loss(plan, params, tx.location, rx_loc)


def snr_at(tx: RadioNode, rx_loc: Point, plan: FloorPlan, params: ChannelParams) -> float:
    return rssi_at(tx, rx_loc, plan, params) - params.noise_floor


def estimate_phy_rate(snr: float, table: McsTable, snr_cap: Optional[float] = None) -> float:
    """
    Map an SNR to a table rate

    Nearest-rate mode picks, among rows whose SNR floor is met, the rate
    closest to the Shannon bound B * log2(1 + SNR). Fixed-index mode returns
    the pinned row when its floor is met. Below the lowest floor the rate is 0.
    """
    cap = SimConfig.SNR_CAP_DB if snr_cap is None else snr_cap
    if math.isnan(snr):
        return 0.0
    snr = min(snr, cap)

    floors = np.array([row[0] for row in table.rows])
    rates = np.array([row[1] for row in table.rows])

    if table.fixed_index is not None:
        return float(rates[table.fixed_index]) if snr >= floors[table.fixed_index] else 0.0

    eligible = floors <= snr
    if not eligible.any():
        return 0.0
    capacity = table.bandwidth * math.log2(1.0 + 10.0 ** (snr / 10.0))
    gaps = np.where(eligible, np.abs(rates - capacity), np.inf)
    return float(rates[int(np.argmin(gaps))])


def link_phy_rate(tx: RadioNode, rx_loc: Point, plan: FloorPlan, params: ChannelParams,
                  table: McsTable) -> float:
    """PHY rate of a link, zero when the receiver cannot decode the preamble"""
    rssi = rssi_at(tx, rx_loc, plan, params)
    if rssi < params.rx_sensitivity:
        return 0.0
    return estimate_phy_rate(rssi - params.noise_floor, table)


def transmitters(ap: Optional[RadioNode], extenders: Iterable[RadioNode],
                 unmanaged: Iterable[RadioNode] = ()) -> List[TxRadio]:
    """
    Active radios for contention: every AP radio and every extender fronthaul
    radio. Extender backhaul radios are stations and never transmit here.
    """
    radios = []
    for node in ([ap] if ap is not None else []) + list(extenders) + list(unmanaged):
        radios.append(TxRadio(node.node_id, node.location, node.tx_power, node.serving_channel))
    return radios


def contention(link: Link, radios: Sequence[TxRadio], plan: FloorPlan,
               params: ChannelParams) -> Tuple[int, int]:
    """
    Count co-channel contenders heard at the transmitter and hidden nodes
    heard only at the receiver.

    A co-channel radio belonging to the receiving node always counts as a
    contender, however weakly the transmitter hears it.

    Returns:
        (contenders, hidden)
    """
    contenders = 0
    hidden = 0
    for radio in radios:
        if radio.channel != link.channel or radio.owner_id == link.tx.node_id:
            continue
        if radio.owner_id == link.rx.node_id:
            # the receiver's own radio on this channel shares airtime, never collides
            contenders += 1
            continue
        at_tx = radio.tx_power - path_loss(plan, params, radio.location, link.tx.location)
        if at_tx > params.cca_threshold:
            contenders += 1
            continue
        at_rx = radio.tx_power - path_loss(plan, params, radio.location, link.rx.location)
        if at_tx < params.cca_threshold and at_rx > params.rx_sensitivity:
            hidden += 1
    return contenders, hidden


def measured_link_throughput(link: Link, radios: Sequence[TxRadio], plan: FloorPlan,
                             params: ChannelParams, table: McsTable,
                             hidden_penalty: Optional[float] = None,
                             hidden_cap: Optional[float] = None) -> float:
    """
    Surrogate for counter-measured throughput:
    PHY rate x airtime share x (1 - hidden-node loss)
    """
    mac = SimConfig.get_mac_config()
    penalty = mac['hidden_penalty'] if hidden_penalty is None else hidden_penalty
    cap = mac['hidden_cap'] if hidden_cap is None else hidden_cap

    phy = link_phy_rate(link.tx, link.rx.location, plan, params, table)
    if phy == 0.0:
        return 0.0
    contenders, hidden = contention(link, radios, plan, params)
    share = 1.0 / (1.0 + contenders)
    loss = min(max(penalty * hidden, 0.0), cap)
    return phy * share * (1.0 - loss)


def coverage_value(loc: Point, ap: RadioNode, user_locs: Sequence[Point], plan: FloorPlan,
                   params: ChannelParams, tx_power: Optional[float] = None) -> float:
    """Weakest RSSI across the AP->candidate link and every candidate->user link"""
    relay = RadioNode('candidate', NodeRole.EXTENDER, loc,
                      ap.tx_power if tx_power is None else tx_power, ap.channel, True, ap.channel)
    values = [rssi_at(ap, loc, plan, params)]
    values.extend(rssi_at(relay, user_loc, plan, params) for user_loc in user_locs)
    return min(values)
