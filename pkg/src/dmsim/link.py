"""The CC-MC network link: packets, per-channel FIFOs, and the byte-deficit
weighted round-robin arbiter that realizes bandwidth partitioning.

Each link direction serializes at most one packet at a time. In dual-channel
mode the sub-block channel and the page channel share the direction under
deficit round-robin by bytes: per round, channel i receives w_i * base bytes
of credit, where base is the largest head-of-line packet among the non-empty
channels. With equal-size packets this degrades to exact weighted round-robin
(w_sub sub-block grants then w_page page grants per round); with mixed sizes
the long-run byte share converges to w_sub/(w_sub+w_page).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Optional

HEADER_BYTES = 16

# packet kinds
LINE_REQUEST = "line_request"
PAGE_REQUEST = "page_request"
LINE_REPLY = "line_reply"
PAGE_REPLY = "page_reply"
PAGE_WRITEBACK = "page_writeback"
PACKET_KINDS = (LINE_REQUEST, PAGE_REQUEST, LINE_REPLY, PAGE_REPLY, PAGE_WRITEBACK)

# channel names
SUB_CHANNEL = "sub_block"
PAGE_CHANNEL = "page"
SHARED_CHANNEL = "shared"


class LinkError(RuntimeError):
    pass


@dataclass(slots=True)
class Packet:
    kind: str
    page_id: int
    line_in_page: int = -1        # line kinds only
    payload_bytes: int = 0        # requests carry payload 0
    header_bytes: int = HEADER_BYTES
    enqueue_ns: float = 0.0
    src: str = ""
    dst: str = ""
    job_id: int = 0
    free_ride: bool = False       # page-free idealization: no serialization cost

    @property
    def total_bytes(self) -> int:
        return self.payload_bytes + self.header_bytes


@dataclass
class Channel:
    name: str
    weight: int = 1
    queue: deque = field(default_factory=deque)
    deficit: float = 0.0
    head_sent: int = 0   # bytes of the head packet already serialized


class LinkDirection:
    """One direction of a link: channels plus the serialization slot."""

    def __init__(self, channels):
        self.channels = list(channels)
        self.busy_until = 0.0
        # start the rotation on the last channel so the first replenish lands
        # on channel 0 (the prioritized sub-block channel in dual mode)
        self._rr = len(self.channels) - 1
        self._by_name = {c.name: c for c in self.channels}

    def channel(self, name: str) -> Channel:
        return self._by_name[name]

    def has_queued(self) -> bool:
        return any(c.queue for c in self.channels)

    def enqueue(self, channel_name: str, pkt: Packet, now: float) -> None:
        pkt.enqueue_ns = now
        self._by_name[channel_name].queue.append(pkt)

    @staticmethod
    def _head_chunk(ch: Channel, mtu: int) -> int:
        pkt = ch.queue[0]
        remaining = pkt.total_bytes - ch.head_sent
        if pkt.free_ride:
            return remaining   # free-ride transfers never occupy the wire
        return min(mtu, remaining)

    @staticmethod
    def _take_chunk(ch: Channel, chunk: int):
        pkt = ch.queue[0]
        ch.head_sent += chunk
        last = ch.head_sent >= pkt.total_bytes
        if last:
            ch.queue.popleft()
            ch.head_sent = 0
        return ch, pkt, chunk, last

    def arbitrate(self, now: float, mtu: int = 1 << 62):
        """Pick the next wire unit to serialize.

        Packets larger than the wire MTU serialize as a train of chunks so
        that the arbiter can interleave small packets between the fragments
        of a large one; a packet's delivery is keyed to its last chunk.
        Returns (channel, packet, chunk_bytes, is_last_chunk), or
        (None, None, 0, False) when all channels are empty. Pre: the
        direction is idle (now >= busy_until). Work-conserving: if exactly
        one channel is non-empty it is granted.
        """
        if not self.has_queued():
            for c in self.channels:
                c.deficit = 0.0
            return None, None, 0, False
        if len(self.channels) == 1:
            ch = self.channels[0]
            return self._take_chunk(ch, self._head_chunk(ch, mtu))
        for _ in range(2 * len(self.channels) + 2):
            ch = self.channels[self._rr]
            if ch.queue:
                chunk = self._head_chunk(ch, mtu)
                if ch.deficit >= chunk - 1e-9:
                    ch.deficit -= chunk
                    granted = self._take_chunk(ch, chunk)
                    if not ch.queue:
                        ch.deficit = 0.0   # no credit hoarding across idle periods
                    return granted
            else:
                ch.deficit = 0.0
            self._rr = (self._rr + 1) % len(self.channels)
            nxt = self.channels[self._rr]
            if nxt.queue:
                base = max(self._head_chunk(c, mtu)
                           for c in self.channels if c.queue)
                nxt.deficit += nxt.weight * base
        raise LinkError("arbitration made no progress")


class Link:
    """A full-duplex CC<->MC link (one per memory component)."""

    def __init__(self, mc_index: int, dual_channel: bool, weights=(3, 1)):
        self.mc_index = mc_index
        if dual_channel:
            mk = lambda: [Channel(SUB_CHANNEL, weights[0]), Channel(PAGE_CHANNEL, weights[1])]
        else:
            mk = lambda: [Channel(SHARED_CHANNEL, 1)]
        self.to_mc = LinkDirection(mk())
        self.to_cc = LinkDirection(mk())


def serialization_ns(total_bytes: float, cfg, free_ride: bool = False) -> float:
    if free_ride:
        return 0.0
    return total_bytes / cfg.net_bandwidth_bytes_per_ns


def transfer_duration(total_bytes: float, cfg, free_ride: bool = False) -> float:
    """One-way transfer time: propagation plus serialization."""
    if total_bytes < 0:
        raise LinkError("total_bytes must be >= 0")
    return cfg.net_latency_ns + serialization_ns(total_bytes, cfg, free_ride)
