"""File-backed geolocation tables.

Two CSV files replace a database server: one maps IPv4 prefixes to ISO
country codes (longest-prefix match), the other places each country at a
pixel of the base map.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass
from pathlib import Path

from .ipv4 import int_to_ip, ip_to_int, mask_of


class GeoDbError(Exception):
    pass


class MissingFile(GeoDbError):
    pass


class BadRow(GeoDbError):
    def __init__(self, path, lineno: int, reason: str):
        self.path, self.lineno, self.reason = path, lineno, reason
        super().__init__(f"{path}:{lineno}: {reason}")


class DuplicateKey(GeoDbError):
    def __init__(self, path, lineno: int, key: str):
        self.path, self.lineno, self.key = path, lineno, key
        super().__init__(f"{path}:{lineno}: duplicate key {key}")


_CC = re.compile(r"^[A-Z]{2}$")

# (network, mask length); addresses inside only geolocate through entries
# at least as specific as the reserved block itself
RESERVED = tuple(
    (ip_to_int(net), length)
    for net, length in [
        ("10.0.0.0", 8),
        ("172.16.0.0", 12),
        ("192.168.0.0", 16),
        ("127.0.0.0", 8),
        ("100.64.0.0", 10),
        ("169.254.0.0", 16),
    ]
)


def reserved_length(addr: int) -> int:
    """Mask length of the reserved block containing ``addr``, else 0."""
    for net, length in RESERVED:
        if addr & mask_of(length) == net:
            return length
    return 0


@dataclass(frozen=True)
class IpPrefixRecord:
    network: int
    length: int
    country: str

    @property
    def cidr(self) -> str:
        return f"{int_to_ip(self.network)}/{self.length}"


@dataclass(frozen=True)
class CountryPoint:
    country: str
    x: int
    y: int


def parse_cidr(text: str) -> tuple[int, int]:
    base, sep, length = text.partition("/")
    if not sep or not length.isdigit():
        raise ValueError(f"bad prefix {text!r}")
    n = int(length)
    if n > 32:
        raise ValueError(f"bad mask length in {text!r}")
    network = ip_to_int(base)
    if network & ~mask_of(n) & 0xFFFFFFFF:
        raise ValueError(f"host bits set in {text!r}")
    return network, n


class GeoDb:
    """Longest-prefix index plus the country -> pixel table.

    The index is one dict per mask length, probed from the most specific
    length down; at most 33 hash lookups per address.
    """

    def __init__(self, prefixes=(), points=()):
        self._by_length: dict[int, dict[int, str]] = {}
        self.points: dict[str, CountryPoint] = {}
        for rec in prefixes:
            table = self._by_length.setdefault(rec.length, {})
            if rec.network in table:
                raise DuplicateKey("<memory>", 0, rec.cidr)
            table[rec.network] = rec.country
        for pt in points:
            if pt.country in self.points:
                raise DuplicateKey("<memory>", 0, pt.country)
            self.points[pt.country] = pt
        self._lengths = sorted(self._by_length, reverse=True)
        self._cache: dict[str, str | None] = {}

    def __len__(self):
        return sum(len(t) for t in self._by_length.values())

    def __getstate__(self):
        return {"by_length": self._by_length, "points": self.points}

    def __setstate__(self, state):
        self._by_length = state["by_length"]
        self.points = state["points"]
        self._lengths = sorted(self._by_length, reverse=True)
        self._cache = {}

    def prefixes(self) -> list[IpPrefixRecord]:
        return [
            IpPrefixRecord(net, length, cc)
            for length, table in self._by_length.items()
            for net, cc in table.items()
        ]

    def lookup_int(self, addr: int) -> str | None:
        floor = reserved_length(addr)
        for length in self._lengths:
            if length < floor:
                break
            cc = self._by_length[length].get(addr & mask_of(length))
            if cc is not None:
                return cc
        return None

    def geolocate(self, ip: str) -> str | None:
        try:
            return self._cache[ip]
        except KeyError:
            pass
        cc = self.lookup_int(ip_to_int(ip))
        if len(self._cache) < 1 << 20:
            self._cache[ip] = cc
        return cc

    def country_point(self, country: str | None) -> tuple[int, int] | None:
        pt = self.points.get(country) if country else None
        return (pt.x, pt.y) if pt else None


def geolocate(ip: str, db: GeoDb) -> str | None:
    """Country of the longest prefix containing ``ip``; None when unknown."""
    return db.geolocate(ip)


def country_point(country: str | None, db: GeoDb) -> tuple[int, int] | None:
    return db.country_point(country)


def _rows(path: Path):
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            for lineno, row in enumerate(csv.reader(fh), 1):
                if not row or not "".join(row).strip():
                    continue
                if row[0].lstrip().startswith("#"):
                    continue
                yield lineno, [c.strip() for c in row]
    except FileNotFoundError:
        raise MissingFile(f"file not found: {path}") from None


def load_prefixes(path) -> list[IpPrefixRecord]:
    path = Path(path)
    out, seen = [], set()
    for lineno, row in _rows(path):
        if len(row) != 2:
            raise BadRow(path, lineno, f"expected 2 fields, got {len(row)}")
        try:
            network, length = parse_cidr(row[0])
        except ValueError as e:
            raise BadRow(path, lineno, str(e)) from None
        if not _CC.match(row[1]):
            raise BadRow(path, lineno, f"bad country code {row[1]!r}")
        if (network, length) in seen:
            raise DuplicateKey(path, lineno, row[0])
        seen.add((network, length))
        out.append(IpPrefixRecord(network, length, row[1]))
    return out


def load_points(path, bounds: tuple[int, int] | None = None) -> list[CountryPoint]:
    path = Path(path)
    out, seen = [], set()
    for lineno, row in _rows(path):
        if len(row) != 3:
            raise BadRow(path, lineno, f"expected 3 fields, got {len(row)}")
        cc, xs, ys = row
        if not _CC.match(cc):
            raise BadRow(path, lineno, f"bad country code {cc!r}")
        try:
            x, y = int(xs), int(ys)
        except ValueError:
            raise BadRow(path, lineno, "coordinates must be integers") from None
        if x < 0 or y < 0 or (bounds and (x >= bounds[0] or y >= bounds[1])):
            raise BadRow(path, lineno, f"point ({x}, {y}) outside the map raster")
        if cc in seen:
            raise DuplicateKey(path, lineno, cc)
        seen.add(cc)
        out.append(CountryPoint(cc, x, y))
    return out


def load_geodb(prefix_file, points_file, bounds: tuple[int, int] | None = None) -> GeoDb:
    return GeoDb(load_prefixes(prefix_file), load_points(points_file, bounds))


def dump_geodb(db: GeoDb, prefix_file, points_file) -> None:
    with open(prefix_file, "w", encoding="utf-8", newline="\n") as fh:
        for rec in sorted(db.prefixes(), key=lambda r: (r.network, r.length)):
            fh.write(f"{rec.cidr},{rec.country}\n")
    with open(points_file, "w", encoding="utf-8", newline="\n") as fh:
        for pt in sorted(db.points.values(), key=lambda p: p.country):
            fh.write(f"{pt.country},{pt.x},{pt.y}\n")


def load_adjacency(path) -> set[frozenset]:
    """Country pairs with a physical interconnection, as unordered pairs."""
    path = Path(path)
    pairs = set()
    for lineno, row in _rows(path):
        if len(row) != 2 or not all(_CC.match(c) for c in row):
            raise BadRow(path, lineno, "expected CC,CC")
        if row[0] == row[1]:
            raise BadRow(path, lineno, "a country is not adjacent to itself")
        pairs.add(frozenset(row))
    return pairs


DATA_DIR = Path(__file__).parent / "data"
SAMPLE_PREFIXES = DATA_DIR / "prefixes.csv"
SAMPLE_POINTS = DATA_DIR / "points.csv"
SAMPLE_ADJACENCY = DATA_DIR / "adjacency.csv"
SAMPLE_MAP = DATA_DIR / "world.png"


def load_sample() -> GeoDb:
    return load_geodb(SAMPLE_PREFIXES, SAMPLE_POINTS)
