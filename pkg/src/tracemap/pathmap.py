"""Country-to-country segments, MPLS link extraction and last-link filtering.

A segment aggregates every consecutive hop pair whose representative
addresses (first non-star reply) geolocate to two different known
countries. Keys are unordered: the pair is stored alphabetically, so
traffic in both directions lands on one segment.

The delay attached to a segment is the smallest reply RTT observed at the
far hop of any contributing pair (not an RTT difference between hops).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .geodb import load_adjacency  # noqa: F401  (re-exported: adjacency is a pathmap input)
from .ipv4 import ip_to_int


class MplsFlag(enum.IntEnum):
    NONE = 0
    INVISIBLE_CANDIDATE = 1
    EXPLICIT = 2


class Direction(enum.Enum):
    LEAVING = "leaving"
    ENTERING = "entering"


@dataclass(frozen=True, order=True)
class MplsLink:
    ip_a: str
    ip_b: str

    @classmethod
    def of(cls, ip1: str, ip2: str) -> MplsLink:
        if ip1 == ip2:
            raise ValueError("an MPLS link needs two distinct addresses")
        if ip_to_int(ip1) > ip_to_int(ip2):
            ip1, ip2 = ip2, ip1
        return cls(ip1, ip2)

    def sort_key(self):
        return ip_to_int(self.ip_a), ip_to_int(self.ip_b)


@dataclass
class Segment:
    country_a: str
    country_b: str
    x1: int
    y1: int
    x2: int
    y2: int
    occurrences: int = 0
    min_rtt_ms: float | None = None
    mpls: MplsFlag = MplsFlag.NONE

    @property
    def key(self) -> tuple[str, str]:
        return self.country_a, self.country_b


@dataclass
class SegmentSet:
    segments: dict[tuple[str, str], Segment] = field(default_factory=dict)

    @property
    def total_occurrences(self) -> int:
        return sum(s.occurrences for s in self.segments.values())

    def __len__(self):
        return len(self.segments)

    def __iter__(self):
        return iter(self.ordered())

    def get(self, a: str, b: str) -> Segment | None:
        return self.segments.get(tuple(sorted((a, b))))

    def ordered(self) -> list[Segment]:
        return [self.segments[k] for k in sorted(self.segments)]

    def add(self, ca, cb, db, far_rtt, mpls: MplsFlag) -> None:
        if ca > cb:
            ca, cb = cb, ca
        seg = self.segments.get((ca, cb))
        if seg is None:
            (x1, y1), (x2, y2) = db.country_point(ca), db.country_point(cb)
            seg = self.segments[(ca, cb)] = Segment(ca, cb, x1, y1, x2, y2)
        seg.occurrences += 1
        if far_rtt is not None and (seg.min_rtt_ms is None or far_rtt < seg.min_rtt_ms):
            seg.min_rtt_ms = far_rtt
        if mpls > seg.mpls:
            seg.mpls = mpls

    def merge(self, other: SegmentSet) -> SegmentSet:
        out = SegmentSet({k: Segment(**vars(s)) for k, s in self.segments.items()})
        for k, s in other.segments.items():
            mine = out.segments.get(k)
            if mine is None:
                out.segments[k] = Segment(**vars(s))
                continue
            mine.occurrences += s.occurrences
            if s.min_rtt_ms is not None and (mine.min_rtt_ms is None or s.min_rtt_ms < mine.min_rtt_ms):
                mine.min_rtt_ms = s.min_rtt_ms
            mine.mpls = max(mine.mpls, s.mpls)
        return out

    def shares(self) -> dict[tuple[str, str], float]:
        total = self.total_occurrences
        return {k: 100.0 * s.occurrences / total for k, s in self.segments.items()} if total else {}


def extract_explicit_mpls(trace) -> list[MplsLink]:
    """Links into every hop that carries MPLS labels, from its predecessor."""
    links = []
    for prev, hop in zip(trace.hops, trace.hops[1:]):
        if not hop.mpls_labels:
            continue
        a, b = prev.first_ip(), hop.first_ip()
        if a is None or b is None or a == b:
            continue
        link = MplsLink.of(a, b)
        if link not in links:
            links.append(link)
    return links


def _located_pairs(trace, db):
    """(near_cc, far_cc, near_ip, far_ip, far_hop) for each consecutive hop pair with known endpoints."""
    located = []
    for hop in trace.hops:
        ip = hop.first_ip()
        cc = db.geolocate(ip) if ip is not None else None
        if cc is not None and db.country_point(cc) is None:
            cc = None
        located.append((ip, cc, hop))
    for (ip1, c1, _), (ip2, c2, far) in zip(located, located[1:]):
        if c1 is None or c2 is None:
            continue
        yield c1, c2, ip1, ip2, far


def _flag(ip1, ip2, mpls) -> MplsFlag:
    if mpls and ip1 != ip2 and MplsLink.of(ip1, ip2) in mpls:
        return MplsFlag.EXPLICIT
    return MplsFlag.NONE


def build_segments(traces, db, mpls=frozenset()) -> SegmentSet:
    out = SegmentSet()
    for trace in traces:
        for c1, c2, ip1, ip2, far in _located_pairs(trace, db):
            if c1 != c2:
                out.add(c1, c2, db, far.min_rtt(), _flag(ip1, ip2, mpls))
    return out


def filter_last_links(traces, db, focus: str, direction=Direction.LEAVING, mpls=frozenset()) -> SegmentSet:
    """One crossing per trace: the first exit from ``focus`` or the last entry into it."""
    direction = Direction(direction)
    out = SegmentSet()
    for trace in traces:
        chosen = None
        for c1, c2, ip1, ip2, far in _located_pairs(trace, db):
            if direction is Direction.LEAVING:
                if c1 == focus and c2 != focus:
                    chosen = (c1, c2, ip1, ip2, far)
                    break
            elif c2 == focus and c1 != focus:
                chosen = (c1, c2, ip1, ip2, far)
        if chosen:
            c1, c2, ip1, ip2, far = chosen
            out.add(c1, c2, db, far.min_rtt(), _flag(ip1, ip2, mpls))
    return out


def flag_invisible_mpls(segments: SegmentSet, adjacency=None) -> SegmentSet:
    """Mark unlabelled segments between countries with no physical link."""
    out = segments.merge(SegmentSet())
    if adjacency is None:
        return out
    for seg in out.segments.values():
        if seg.mpls is MplsFlag.NONE and frozenset(seg.key) not in adjacency:
            seg.mpls = MplsFlag.INVISIBLE_CANDIDATE
    return out
