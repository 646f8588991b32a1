"""Seeded synthetic traceroute corpora with planted defects and MPLS tunnels.

Every generated file holds exactly one measurement (one trace, or for the
``MultipleTraces`` defect two concatenated traces). Alongside the corpus a
hidden JSON-lines manifest (``.manifest.jsonl``, skipped by discovery)
records the ground truth of each file: defect, country path, hops with
their replies, and the MPLS links that were planted.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path

from .clean import Reason
from .geodb import GeoDb, load_sample, reserved_length
from .ingest import ErrorMark, Hop, MplsLabel, Reply, Trace
from .ipv4 import int_to_ip

MANIFEST_NAME = ".manifest.jsonl"

JSON_ONLY = {Reason.CORRUPT_JSON, Reason.LAST_THREE_RTT_ZERO}
PLAIN_ONLY = {Reason.MULTIPLE_TRACES, Reason.UNPARSEABLE_TEXT}

GATEWAY_IP = "192.168.1.1"
SOURCE_IP = "192.168.1.10"
POOL_SIZE = 6


@dataclass
class GenSpec:
    trace_count: int
    country_path_distribution: list  # [(("RE", "FR", "US"), weight), ...]
    defect_rates: dict = field(default_factory=dict)  # Reason -> probability
    rtt_model: dict = field(default_factory=dict)  # (cc, cc) -> (base_ms, jitter_ms), either order
    seed: int = 0
    format: str = "mixed"  # json | plain | mixed
    allocation: str = "random"  # random | exact
    hops_per_country: tuple = (1, 3)
    gateway: bool = True
    inter_rtt: tuple = (20.0, 2.0)
    intra_rtt: tuple = (0.5, 0.2)
    star_rate: float = 0.0
    mpls_pairs: set = field(default_factory=set)  # frozenset({cc, cc}) crossings labelled as MPLS
    mpls_rate: float = 0.0

    def __post_init__(self):
        self.defect_rates = {Reason(k) if not isinstance(k, Reason) else k: v for k, v in self.defect_rates.items()}
        self.country_path_distribution = [(tuple(p), w) for p, w in self.country_path_distribution]
        self.mpls_pairs = {frozenset(p) for p in self.mpls_pairs}
        if self.trace_count < 0:
            raise ValueError("trace_count must be >= 0")
        if not self.country_path_distribution:
            raise ValueError("need at least one country path")
        if any(w <= 0 for _, w in self.country_path_distribution):
            raise ValueError("path weights must be positive")
        if any(not 0 <= p <= 1 for p in self.defect_rates.values()):
            raise ValueError("defect rates must lie in [0, 1]")
        if sum(self.defect_rates.values()) > 1 + 1e-12:
            raise ValueError("defect rates must sum to at most 1")
        if self.format not in ("json", "plain", "mixed"):
            raise ValueError(f"unknown format {self.format!r}")
        if self.allocation not in ("random", "exact"):
            raise ValueError(f"unknown allocation {self.allocation!r}")
        bad = {"json": PLAIN_ONLY, "plain": JSON_ONLY}.get(self.format, set())
        for reason in bad:
            if self.defect_rates.get(reason, 0) > 0:
                raise ValueError(f"{reason.value} cannot be planted in {self.format} files")

    def rtt_for(self, a: str, b: str) -> tuple[float, float]:
        if a == b:
            return self.rtt_model.get((a, a), self.intra_rtt)
        return self.rtt_model.get((a, b)) or self.rtt_model.get((b, a)) or self.inter_rtt


def _apportion(weights, n: int) -> list[int]:
    """Largest-remainder split of ``n`` items by ``weights``."""
    total = sum(weights)
    raw = [w * n / total for w in weights]
    counts = [int(r) for r in raw]
    order = sorted(range(len(weights)), key=lambda i: (-(raw[i] - counts[i]), i))
    for i in order[: n - sum(counts)]:
        counts[i] += 1
    return counts


class _AddressBook:
    """Deterministic router pools per country, drawn from the geodb prefixes."""

    def __init__(self, db: GeoDb, seed: int):
        self.by_country: dict[str, list] = {}
        for rec in sorted(db.prefixes(), key=lambda r: (r.network, r.length)):
            if rec.length > 30 or reserved_length(rec.network):
                continue
            self.by_country.setdefault(rec.country, []).append(rec)
        self.db = db
        self.seed = seed
        self._pools: dict[str, list[str]] = {}

    def _random_in(self, rng: random.Random, cc: str) -> str:
        try:
            recs = self.by_country[cc]
        except KeyError:
            raise ValueError(f"no prefix for country {cc} in the geodb") from None
        for _ in range(64):
            rec = rng.choice(recs)
            host = rng.randrange(1, (1 << (32 - rec.length)) - 1)
            ip = int_to_ip(rec.network + host)
            # a more specific entry could place the address elsewhere
            if self.db.geolocate(ip) == cc:
                return ip
        raise ValueError(f"cannot draw an address located in {cc}")

    def router(self, rng: random.Random, cc: str) -> str:
        pool = self._pools.get(cc)
        if pool is None:
            prng = random.Random(f"{self.seed}/{cc}")
            pool = []
            while len(pool) < POOL_SIZE:
                ip = self._random_in(prng, cc)
                if ip not in pool:
                    pool.append(ip)
            self._pools[cc] = pool
        return rng.choice(pool)

    def host(self, rng: random.Random, cc: str) -> str:
        return self._random_in(rng, cc)


def _rtt(rng, base, jitter) -> float:
    return round(base + jitter * rng.random(), 3)


def _make_trace(spec: GenSpec, book: _AddressBook, rng: random.Random, countries) -> dict:
    """Ground-truth trace as plain data: hops of [ip|None, rtt|None, mark|None] replies."""
    hops = []
    cum = 0.0
    if spec.gateway:
        base, jitter = spec.intra_rtt
        cum += base
        hops.append({"cc": None, "ip": GATEWAY_IP, "rtt": (cum, jitter), "mpls": False})
    prev_cc = None
    for ci, cc in enumerate(countries):
        n = rng.randint(*spec.hops_per_country)
        for k in range(n):
            base, jitter = spec.rtt_for(prev_cc, cc) if prev_cc else spec.intra_rtt
            cum += base
            last = ci == len(countries) - 1 and k == n - 1
            ip = book.host(rng, cc) if last else book.router(rng, cc)
            crossing = prev_cc is not None and prev_cc != cc
            mpls = (crossing and frozenset((prev_cc, cc)) in spec.mpls_pairs) or (
                spec.mpls_rate > 0 and bool(hops) and not last and rng.random() < spec.mpls_rate
            )
            hops.append({"cc": cc, "ip": ip, "rtt": (cum, jitter), "mpls": mpls})
            prev_cc = cc

    out_hops = []
    for ttl, h in enumerate(hops, 1):
        base, jitter = h["rtt"]
        replies = []
        final = ttl == len(hops)
        for _ in range(3):
            if not final and spec.star_rate > 0 and rng.random() < spec.star_rate:
                replies.append([None, None, None])
            else:
                replies.append([h["ip"], _rtt(rng, base, jitter), None])
        # labels ride on an ICMP reply, so a silent hop cannot show them
        mpls = bool(h["mpls"]) and any(ip for ip, _, _ in replies)
        out_hops.append({"ttl": ttl, "cc": h["cc"], "replies": replies, "mpls": mpls})
    return {
        "countries": list(countries),
        "source": SOURCE_IP,
        "destination": hops[-1]["ip"],
        "hops": out_hops,
    }


def _first_ip(hop: dict):
    for ip, _, _ in hop["replies"]:
        if ip is not None:
            return ip
    return None


def planted_links(trace: dict) -> list[list[str]]:
    links = []
    for prev, hop in zip(trace["hops"], trace["hops"][1:]):
        if hop["mpls"]:
            a, b = _first_ip(prev), _first_ip(hop)
            if a and b and a != b:
                pair = sorted((a, b), key=lambda ip: tuple(int(o) for o in ip.split(".")))
                if pair not in links:
                    links.append(pair)
    return links


def to_trace(t: dict, fmt) -> Trace:
    """Trace object for a ground-truth record (used by the writers)."""
    hops = []
    for h in t["hops"]:
        replies = tuple(Reply(ip, rtt, ErrorMark(mark) if mark else None) for ip, rtt, mark in h["replies"])
        labels = (MplsLabel(16000 + h["ttl"], 1, 0, True),) if h["mpls"] else ()
        hops.append(Hop(h["ttl"], replies, labels))
    return Trace(t["destination"], tuple(hops), t.get("source"), None, fmt)


# -- writers ---------------------------------------------------------------------


def _fmt_rtt(rtt: float) -> str:
    s = f"{rtt:.3f}"
    if float(s) != rtt:
        s = f"{rtt:.17f}".rstrip("0")
    return s


def write_plain(trace: Trace) -> str:
    """Canonical classic-traceroute rendering of ``trace``."""
    if trace.source_ip:
        head = (
            f"traceroute [({trace.source_ip}:33456) -> ({trace.destination_ip}:33457)], "
            "protocol udp, algo hopbyhop, duration 1 s\n"
        )
    else:
        head = f"traceroute to {trace.destination_ip} ({trace.destination_ip}), 30 hops max, 60 byte packets\n"
    lines = [head]
    for hop in trace.hops:
        parts = []
        current = None
        for r in hop.replies:
            if r.from_ip is None:
                parts.append("*")
                continue
            if r.from_ip != current:
                parts.append(f"{r.from_ip} ({r.from_ip})")
                current = r.from_ip
            parts.append(f"{_fmt_rtt(r.rtt_ms)} ms")
            if r.error_mark is ErrorMark.WARN:
                parts.append("WARN")
            elif r.error_mark is not None:
                parts.append(r.error_mark.value)
        lines.append(f"{hop.ttl:2d}  " + "  ".join(parts) + "\n")
        for lab in hop.mpls_labels:
            lines.append(
                f"    MPLS Label {lab.label} TTL={lab.ttl_field} Exp={lab.exp} S={int(lab.stack_bottom)}\n"
            )
    return "".join(lines)


_JSON_ERR = {ErrorMark.HOST_UNREACHABLE: "H", ErrorMark.NET_UNREACHABLE: "N"}


def atlas_doc(trace: Trace, msm_id: int = 5001, prb_id: int = 1, timestamp: int = 1467504000) -> dict:
    result = []
    for hop in trace.hops:
        if len(hop.replies) == 1 and hop.replies[0].is_star and hop.replies[0].error_mark is ErrorMark.WARN:
            result.append({"hop": hop.ttl, "error": "sendto failed"})
            continue
        replies = []
        carrier = next((i for i, r in enumerate(hop.replies) if r.from_ip), None)
        for i, r in enumerate(hop.replies):
            if r.from_ip is None:
                replies.append({"x": "*"})
                continue
            obj = {"from": r.from_ip}
            if r.rtt_ms is not None:
                obj["rtt"] = r.rtt_ms
            obj["size"] = 28
            obj["ttl"] = 255 - hop.ttl
            if r.error_mark in _JSON_ERR:
                obj["err"] = _JSON_ERR[r.error_mark]
            if hop.mpls_labels and i == carrier:
                obj["icmpext"] = {
                    "version": 2,
                    "rfc4884": 1,
                    "obj": [
                        {
                            "class": 1,
                            "type": 1,
                            "mpls": [
                                {"exp": lab.exp, "label": lab.label, "s": int(lab.stack_bottom), "ttl": lab.ttl_field}
                                for lab in hop.mpls_labels
                            ],
                        }
                    ],
                }
            replies.append(obj)
        result.append({"hop": hop.ttl, "result": replies})
    doc = {
        "af": 4,
        "dst_addr": trace.destination_ip,
        "dst_name": trace.destination_ip,
        "fw": 4790,
        "msm_id": msm_id,
        "prb_id": prb_id,
        "proto": "ICMP",
        "result": result,
        "timestamp": timestamp,
        "type": "traceroute",
    }
    if trace.source_ip:
        doc["src_addr"] = trace.source_ip
    return doc


def write_json(trace: Trace, **kw) -> str:
    return json.dumps(atlas_doc(trace, **kw), separators=(",", ":"))


# -- corpus ------------------------------------------------------------------------------


def _plant(defect: Reason | None, t: dict, rng: random.Random) -> None:
    last = t["hops"][-1]
    if defect is Reason.LAST_THREE_RTT_ZERO:
        for r in last["replies"]:
            r[1] = 0.0
    elif defect is Reason.THREE_STARS_LAST_HOP:
        last["replies"] = [[None, None, None] for _ in last["replies"]]
        last["mpls"] = False
    elif defect is Reason.UNREACHABLE_MARKER:
        choices = ["!H", "!N"] if t["format"] == "json" else ["!H", "!N", "WARN"]
        mark = rng.choice(choices)
        for r in last["replies"]:
            r[2] = mark


def _choose_format(spec: GenSpec, defect, rng) -> str:
    if defect is Reason.UNKNOWN_FORMAT:
        return "binary"
    if defect in JSON_ONLY:
        return "json"
    if defect in PLAIN_ONLY:
        return "plain"
    if spec.format == "mixed":
        return rng.choice(("json", "plain"))
    return spec.format


def _assign(spec: GenSpec, rng: random.Random, options, weights) -> list:
    n = spec.trace_count
    if spec.allocation == "exact":
        out = []
        for opt, k in zip(options, _apportion(weights, n)):
            out.extend([opt] * k)
        rng.shuffle(out)
        return out
    return rng.choices(options, weights=weights, k=n) if n else []


def generate(spec: GenSpec, out_dir, db: GeoDb | None = None) -> list[dict]:
    """Write ``spec.trace_count`` files into ``out_dir``; returns the manifest records."""
    db = db or load_sample()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = random.Random(spec.seed)
    book = _AddressBook(db, spec.seed)

    paths = [p for p, _ in spec.country_path_distribution]
    path_choice = _assign(spec, rng, list(range(len(paths))), [w for _, w in spec.country_path_distribution])
    reasons = [r for r in Reason if spec.defect_rates.get(r, 0) > 0]
    clean_rate = max(0.0, 1.0 - sum(spec.defect_rates.get(r, 0) for r in reasons))
    defect_choice = _assign(spec, rng, [None] + reasons, [clean_rate] + [spec.defect_rates[r] for r in reasons])
    if not reasons:
        defect_choice = [None] * spec.trace_count

    width = max(6, len(str(spec.trace_count)))
    records = []
    for i in range(spec.trace_count):
        defect = defect_choice[i]
        fmt = _choose_format(spec, defect, rng)
        t = _make_trace(spec, book, rng, paths[path_choice[i]])
        t["format"] = fmt
        _plant(defect, t, rng)
        ext = {"json": "json", "plain": "txt", "binary": "bin"}[fmt]
        name = f"{i:0{width}d}.{ext}"

        if fmt == "binary":
            payload = b"\xff\xfe" + bytes(rng.randrange(256) for _ in range(32))
        elif fmt == "json":
            trace = to_trace(t, None)
            text = write_json(trace, msm_id=5000 + i % 97, prb_id=1 + i % 1000, timestamp=1467504000 + i)
            if defect is Reason.CORRUPT_JSON:
                text = text[: len(text) // 2]
            payload = text.encode()
        else:
            if defect is Reason.UNPARSEABLE_TEXT:
                payload = b"this file holds no traceroute output\nat all\n"
            else:
                text = write_plain(to_trace(t, None))
                if defect is Reason.MULTIPLE_TRACES:
                    other = _make_trace(spec, book, rng, paths[path_choice[i]])
                    text += write_plain(to_trace(other, None))
                payload = text.encode()
        (out_dir / name).write_bytes(payload)

        records.append(
            {
                "file": name,
                "format": fmt,
                "defect": defect.value if defect else None,
                "countries": t["countries"],
                "destination": t["destination"],
                "hops": [{"ttl": h["ttl"], "replies": h["replies"], "mpls": h["mpls"]} for h in t["hops"]],
                "mpls_links": planted_links(t),
            }
        )

    with open(out_dir / MANIFEST_NAME, "w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(json.dumps(rec, separators=(",", ":")) + "\n")
    return records


def read_manifest(corpus_dir) -> list[dict]:
    with open(Path(corpus_dir) / MANIFEST_NAME, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


REUNION_LEAVING = [
    (("RE", "FR", "US"), 40),
    (("RE", "FR", "DE"), 20),
    (("RE", "FR", "GB"), 15),
    (("RE", "FR", "NL", "JP"), 10),
    (("RE", "FR", "AU"), 7),
    (("RE", "MU", "ZA"), 3),
    (("RE", "SG", "IN"), 2),
    (("RE", "US", "BR"), 3),
]
