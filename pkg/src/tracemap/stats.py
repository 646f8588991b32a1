"""Per-(hop, address) statistics and the five-column statistics file."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .fmt import fixed2
from .ipv4 import ip_to_int


@dataclass
class HopStat:
    hop: int
    ip: str
    occurrences: int = 0
    rtt_sum_ms: float = 0.0
    rtt_count: int = 0
    rtt_min_ms: float | None = None
    country: str | None = None

    @property
    def average_ms(self) -> float | None:
        return self.rtt_sum_ms / self.rtt_count if self.rtt_count else None

    def combine(self, other: HopStat) -> HopStat:
        mins = [m for m in (self.rtt_min_ms, other.rtt_min_ms) if m is not None]
        return HopStat(
            self.hop,
            self.ip,
            self.occurrences + other.occurrences,
            self.rtt_sum_ms + other.rtt_sum_ms,
            self.rtt_count + other.rtt_count,
            min(mins) if mins else None,
            self.country if self.country is not None else other.country,
        )


@dataclass
class StatsTable:
    rows: dict[tuple[int, str], HopStat] = field(default_factory=dict)
    total_traces: int = 0

    def add_trace(self, trace) -> None:
        self.total_traces += 1
        rows = self.rows
        for hop in trace.hops:
            for reply in hop.replies:
                ip = reply.from_ip
                if ip is None:
                    continue
                key = (hop.ttl, ip)
                row = rows.get(key)
                if row is None:
                    row = rows[key] = HopStat(hop.ttl, ip)
                row.occurrences += 1
                rtt = reply.rtt_ms
                if rtt is not None:
                    row.rtt_sum_ms += rtt
                    row.rtt_count += 1
                    if row.rtt_min_ms is None or rtt < row.rtt_min_ms:
                        row.rtt_min_ms = rtt

    def localize(self, db) -> None:
        for row in self.rows.values():
            row.country = db.geolocate(row.ip)

    def sorted_rows(self) -> list[HopStat]:
        return sorted(self.rows.values(), key=lambda r: (r.hop, -r.occurrences, ip_to_int(r.ip)))


def accumulate(traces, db=None) -> StatsTable:
    table = StatsTable()
    for trace in traces:
        table.add_trace(trace)
    if db is not None:
        table.localize(db)
    return table


def merge(a: StatsTable, b: StatsTable) -> StatsTable:
    rows = {k: replace(v) for k, v in a.rows.items()}
    for key, row in b.rows.items():
        rows[key] = rows[key].combine(row) if key in rows else replace(row)
    return StatsTable(rows, a.total_traces + b.total_traces)


def format_row(row: HopStat) -> str:
    avg = row.average_ms
    return " ".join(
        (
            str(row.hop),
            row.ip,
            str(row.occurrences),
            fixed2(avg) if avg is not None else "-",
            row.country or "--",
        )
    )


def write_stats(table: StatsTable, out) -> None:
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        for row in table.sorted_rows():
            fh.write(format_row(row) + "\n")
