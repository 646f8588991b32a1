"""Input discovery and traceroute parsers.

Two input families are understood: plain-text output of traceroute and
Paris-traceroute (one measurement per file), and Atlas-style JSON result
documents (one object or an array of objects per file).

Parse failures are raised as :class:`ParseError` carrying a
:class:`ParseErrorKind`; the cleaning stage turns them into rejection
reasons.
"""

from __future__ import annotations

import enum
import json
import os
import re
from dataclasses import dataclass, field
from pathlib import Path

from .ipv4 import is_ipv4


class MissingFolder(Exception):
    pass


class Format(enum.Enum):
    PLAIN = "PlainText"
    JSON = "Json"
    UNKNOWN = "Unknown"


class ErrorMark(enum.Enum):
    HOST_UNREACHABLE = "!H"
    NET_UNREACHABLE = "!N"
    WARN = "WARN"


class ParseErrorKind(enum.Enum):
    MULTIPLE_TRACES = "MultipleTraces"
    MALFORMED = "Malformed"
    EMPTY = "Empty"
    CORRUPT_JSON = "CorruptJson"
    SCHEMA_MISMATCH = "SchemaMismatch"
    UNKNOWN_FORMAT = "UnknownFormat"


class ParseError(Exception):
    def __init__(self, kind: ParseErrorKind, detail: str = "", path=None):
        self.kind = kind
        self.detail = detail
        self.path = path
        super().__init__(f"{kind.value}: {detail}" if detail else kind.value)

    def __eq__(self, other):
        return (
            isinstance(other, ParseError)
            and (self.kind, self.detail, self.path) == (other.kind, other.detail, other.path)
        )

    def __hash__(self):
        return hash((self.kind, self.detail, self.path))

    def __reduce__(self):
        return (ParseError, (self.kind, self.detail, self.path))


@dataclass(frozen=True)
class RawInput:
    path: Path
    data: bytes
    format: Format


@dataclass(frozen=True)
class MplsLabel:
    label: int
    ttl_field: int
    exp: int
    stack_bottom: bool


@dataclass(frozen=True)
class Reply:
    """One probe answer. ``from_ip`` is None for a star (no response)."""

    from_ip: str | None
    rtt_ms: float | None = None
    error_mark: ErrorMark | None = None

    @property
    def is_star(self) -> bool:
        return self.from_ip is None


STAR = Reply(None)


@dataclass(frozen=True)
class Hop:
    ttl: int
    replies: tuple[Reply, ...]
    mpls_labels: tuple[MplsLabel, ...] = ()

    def first_ip(self) -> str | None:
        """Representative address: the first non-star reply."""
        for r in self.replies:
            if r.from_ip is not None:
                return r.from_ip
        return None

    def min_rtt(self) -> float | None:
        rtts = [r.rtt_ms for r in self.replies if r.rtt_ms is not None]
        return min(rtts) if rtts else None


@dataclass(frozen=True)
class Trace:
    destination_ip: str
    hops: tuple[Hop, ...]
    source_ip: str | None = None
    origin_file: Path | None = field(default=None, compare=False)
    format: Format = Format.PLAIN


def sniff_format(data: bytes) -> Format:
    head = data.lstrip()
    if head[:1] in (b"{", b"["):
        return Format.JSON
    try:
        data.decode("utf-8")
    except UnicodeDecodeError:
        return Format.UNKNOWN
    return Format.PLAIN


def list_input_paths(folder) -> list[Path]:
    """Non-hidden regular files under ``folder``, recursively, sorted by path bytes."""
    root = Path(folder)
    if not root.is_dir():
        raise MissingFolder(f"input folder not found: {folder}")
    paths = []
    for dirpath, dirnames, filenames in os.walk(root):
        dirnames[:] = [d for d in dirnames if not d.startswith(".")]
        for name in filenames:
            if name.startswith("."):
                continue
            p = Path(dirpath) / name
            if p.is_file():
                paths.append(p)
    paths.sort(key=os.fsencode)
    return paths


def read_input(path) -> RawInput:
    try:
        data = Path(path).read_bytes()
    except OSError:
        return RawInput(Path(path), b"", Format.UNKNOWN)
    return RawInput(Path(path), data, sniff_format(data))


def discover_inputs(folder) -> list[RawInput]:
    return [read_input(p) for p in list_input_paths(folder)]


# -- plain text ---------------------------------------------------------------

_HEADER = re.compile(r"^traceroute\s+to\s+(\S+)\s+\((\d+\.\d+\.\d+\.\d+)\)")
# paris-traceroute: traceroute [(10.0.0.2:33456) -> (8.8.8.8:33457)], protocol udp, ...
_PARIS_HEADER = re.compile(
    r"^traceroute\s+\[\((\d+\.\d+\.\d+\.\d+)(?::\d+)?\)\s*->\s*\((\d+\.\d+\.\d+\.\d+)(?::\d+)?\)\]"
)
_HOP = re.compile(r"^\s*(\d+)\s+(.*)$")
_MPLS = re.compile(
    r"^\s*MPLS\s+Label[=:\s]\s*(\d+)\s+TTL[=:\s]\s*(\d+)\s+Exp[=:\s]\s*(\d+)\s+S[=:\s]\s*([01])\s*$",
    re.IGNORECASE,
)
_PAREN_IP = re.compile(r"^\((\d+\.\d+\.\d+\.\d+)\)$")
_NUMBER = re.compile(r"^\d+(?:\.\d+)?$")


def _mark_of(token: str) -> ErrorMark | None:
    if token == "!H":
        return ErrorMark.HOST_UNREACHABLE
    if token == "!N":
        return ErrorMark.NET_UNREACHABLE
    if "WARN" in token:
        return ErrorMark.WARN
    return None


def _parse_hop_fields(text: str, lineno: int) -> list[Reply]:
    tokens = text.split()
    replies: list[Reply] = []
    current_ip = None
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if tok == "*":
            replies.append(STAR)
        elif _NUMBER.match(tok) and i + 1 < len(tokens) and tokens[i + 1] == "ms":
            if current_ip is None:
                raise ParseError(ParseErrorKind.MALFORMED, f"line {lineno}: rtt without address")
            replies.append(Reply(current_ip, float(tok)))
            i += 1
        elif tok.startswith("!") or "WARN" in tok:
            mark = _mark_of(tok)
            if not replies:
                raise ParseError(ParseErrorKind.MALFORMED, f"line {lineno}: mark before any reply")
            if mark is not None:
                last = replies[-1]
                replies[-1] = Reply(last.from_ip, last.rtt_ms, mark)
        elif i + 1 < len(tokens) and (m := _PAREN_IP.match(tokens[i + 1])):
            current_ip = m.group(1)
            i += 1
        elif is_ipv4(tok):
            current_ip = tok
        else:
            raise ParseError(ParseErrorKind.MALFORMED, f"line {lineno}: unexpected token {tok!r}")
        i += 1
    if not replies:
        raise ParseError(ParseErrorKind.MALFORMED, f"line {lineno}: hop without replies")
    return replies


def parse_plain(raw: RawInput) -> Trace:
    try:
        text = raw.data.decode("utf-8")
    except UnicodeDecodeError:
        raise ParseError(ParseErrorKind.UNKNOWN_FORMAT, "not UTF-8", raw.path) from None

    lines = text.splitlines()
    if sum(1 for ln in lines if _HEADER.match(ln) or _PARIS_HEADER.match(ln)) > 1:
        raise ParseError(ParseErrorKind.MULTIPLE_TRACES, "more than one header", raw.path)
    destination = source = None
    headers = 0
    hops: list[Hop] = []
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        if line.startswith("traceroute"):
            m = _HEADER.match(line)
            pm = None if m else _PARIS_HEADER.match(line)
            if not (m or pm):
                raise ParseError(ParseErrorKind.MALFORMED, f"line {lineno}: bad header", raw.path)
            headers += 1
            if headers > 1:
                raise ParseError(ParseErrorKind.MULTIPLE_TRACES, f"line {lineno}", raw.path)
            if m:
                destination = m.group(2)
            else:
                source, destination = pm.group(1), pm.group(2)
            continue
        m = _MPLS.match(line)
        if m:
            if not hops:
                raise ParseError(ParseErrorKind.MALFORMED, f"line {lineno}: MPLS before hop", raw.path)
            label = MplsLabel(int(m.group(1)), int(m.group(2)), int(m.group(3)), m.group(4) == "1")
            prev = hops[-1]
            hops[-1] = Hop(prev.ttl, prev.replies, prev.mpls_labels + (label,))
            continue
        m = _HOP.match(line)
        if not m or headers == 0:
            raise ParseError(ParseErrorKind.MALFORMED, f"line {lineno}: not a hop line", raw.path)
        ttl = int(m.group(1))
        if ttl < 1 or (hops and ttl <= hops[-1].ttl):
            raise ParseError(ParseErrorKind.MALFORMED, f"line {lineno}: ttl out of order", raw.path)
        try:
            replies = _parse_hop_fields(m.group(2), lineno)
        except ParseError as e:
            raise ParseError(e.kind, e.detail, raw.path) from None
        hops.append(Hop(ttl, tuple(replies)))

    if headers == 0 and not hops:
        raise ParseError(ParseErrorKind.EMPTY, "no traceroute content", raw.path)
    if not hops:
        raise ParseError(ParseErrorKind.EMPTY, "no hop lines", raw.path)
    if destination is None or not is_ipv4(destination):
        raise ParseError(ParseErrorKind.MALFORMED, "missing or bad destination", raw.path)
    return Trace(destination, tuple(hops), source, raw.path, Format.PLAIN)


# -- Atlas JSON -----------------------------------------------------------------

_JSON_MARKS = {"H": ErrorMark.HOST_UNREACHABLE, "N": ErrorMark.NET_UNREACHABLE}


def _json_labels(reply: dict) -> tuple[MplsLabel, ...]:
    ext = reply.get("icmpext")
    if not isinstance(ext, dict):
        return ()
    labels = []
    for obj in ext.get("obj") or ():
        for entry in obj.get("mpls") or () if isinstance(obj, dict) else ():
            labels.append(
                MplsLabel(
                    int(entry.get("label", 0)),
                    int(entry.get("ttl", 0)),
                    int(entry.get("exp", 0)),
                    bool(entry.get("s", 0)),
                )
            )
    return tuple(labels)


def _json_reply(obj) -> tuple[Reply, tuple[MplsLabel, ...]]:
    if not isinstance(obj, dict):
        raise ValueError("reply is not an object")
    frm = obj.get("from")
    if frm is None or "x" in obj and "rtt" not in obj:
        return STAR, ()
    if not is_ipv4(frm):
        raise ValueError(f"bad reply address {frm!r}")
    rtt = obj.get("rtt")
    if rtt is not None:
        rtt = float(rtt)
        if rtt < 0:
            raise ValueError("negative rtt")
    mark = _JSON_MARKS.get(obj.get("err"))
    return Reply(frm, rtt, mark), _json_labels(obj)


def _json_trace(doc, path) -> Trace:
    if not isinstance(doc, dict) or not isinstance(doc.get("result"), list):
        raise ParseError(ParseErrorKind.SCHEMA_MISMATCH, "missing hop array", path)
    dst = doc.get("dst_addr")
    src = doc.get("src_addr") or doc.get("from") or None
    if not isinstance(dst, str) or not is_ipv4(dst):
        raise ParseError(ParseErrorKind.SCHEMA_MISMATCH, "missing or bad dst_addr", path)
    if src is not None and not (isinstance(src, str) and is_ipv4(src)):
        src = None
    hops = []
    try:
        for h in doc["result"]:
            ttl = int(h["hop"])
            if ttl < 1 or (hops and ttl <= hops[-1].ttl):
                raise ValueError("hop numbers not increasing")
            if "result" not in h and "error" in h:
                hops.append(Hop(ttl, (Reply(None, None, ErrorMark.WARN),)))
                continue
            replies, labels = [], []
            for r in h["result"]:
                reply, lab = _json_reply(r)
                replies.append(reply)
                labels.extend(lab)
            if not replies:
                raise ValueError("hop without replies")
            hops.append(Hop(ttl, tuple(replies), tuple(labels)))
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError(ParseErrorKind.SCHEMA_MISMATCH, str(e), path) from None
    if not hops:
        raise ParseError(ParseErrorKind.SCHEMA_MISMATCH, "empty hop array", path)
    return Trace(dst, tuple(hops), src, path, Format.JSON)


def parse_atlas_json(raw: RawInput) -> list[Trace]:
    try:
        doc = json.loads(raw.data)
    except (ValueError, UnicodeDecodeError) as e:
        raise ParseError(ParseErrorKind.CORRUPT_JSON, str(e), raw.path) from None
    docs = doc if isinstance(doc, list) else [doc]
    return [_json_trace(d, raw.path) for d in docs]


def parse_input(raw: RawInput) -> list:
    """Parse one file into a list of outcomes (each a Trace or a ParseError)."""
    try:
        if raw.format is Format.JSON:
            return list(parse_atlas_json(raw))
        if raw.format is Format.PLAIN:
            return [parse_plain(raw)]
        raise ParseError(ParseErrorKind.UNKNOWN_FORMAT, "unrecognised content", raw.path)
    except ParseError as e:
        return [e]
