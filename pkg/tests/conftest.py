from pathlib import Path

import numpy as np
import pytest
from PIL import Image

from tracemap.geodb import CountryPoint, GeoDb, IpPrefixRecord, load_sample
from tracemap.ingest import Format, Hop, MplsLabel, RawInput, Reply, Trace, sniff_format
from tracemap.ipv4 import ip_to_int

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def raw(text, path="t.txt"):
    data = text.encode() if isinstance(text, str) else text
    return RawInput(Path(path), data, sniff_format(data))


def hop(ttl, *ips, rtt=1.0, labels=False, mark=None):
    """Hop whose replies come from ``ips`` (None = star), all at ``rtt`` ms."""
    replies = tuple(Reply(None) if ip is None else Reply(ip, rtt, mark) for ip in ips)
    lab = (MplsLabel(1000 + ttl, 1, 0, True),) if labels else ()
    return Hop(ttl, replies, lab)


def path_trace(ips, rtts=None, fmt=Format.PLAIN, labels=()):
    """Trace with one hop per address, each answering three times."""
    rtts = rtts or [float(i + 1) for i in range(len(ips))]
    hops = tuple(
        hop(i + 1, ip, ip, ip, rtt=rtts[i], labels=(i in labels)) if ip else hop(i + 1, None, None, None)
        for i, ip in enumerate(ips)
    )
    return Trace(ips[-1] or "203.0.113.9", hops, None, None, fmt)


def mini_db():
    """AA..EE each own a /8 numbered 1..5; points on a 200x100 raster."""
    prefixes = [IpPrefixRecord(ip_to_int(f"{n}.0.0.0"), 8, cc) for n, cc in enumerate(["AA", "BB", "CC", "DD", "EE"], 1)]
    points = [CountryPoint(cc, 20 + 35 * i, 10 + 18 * i) for i, cc in enumerate(["AA", "BB", "CC", "DD", "EE"])]
    return GeoDb(prefixes, points)


@pytest.fixture
def db():
    return mini_db()


@pytest.fixture(scope="session")
def sample_db():
    return load_sample()


@pytest.fixture
def small_map(tmp_path):
    rng = np.random.default_rng(7)
    arr = rng.integers(0, 256, (100, 200, 3), dtype=np.uint8)
    path = tmp_path / "base.png"
    Image.fromarray(arr).save(path)
    return path
