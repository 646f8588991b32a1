import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import raw
from tracemap.ingest import (
    ErrorMark,
    Format,
    Hop,
    MissingFolder,
    ParseError,
    ParseErrorKind,
    Reply,
    Trace,
    discover_inputs,
    parse_atlas_json,
    parse_input,
    parse_plain,
    sniff_format,
)
from tracemap.tracegen import write_plain

HEADER = "traceroute to 8.8.8.8 (8.8.8.8), 30 hops max\n"


def test_discover_empty(tmp_path):
    assert discover_inputs(tmp_path) == []


def test_discover_sorted_recursive_hidden(tmp_path):
    (tmp_path / "b.txt").write_text("x")
    (tmp_path / "a.txt").write_text("x")
    (tmp_path / ".hidden").write_text("x")
    (tmp_path / "sub").mkdir()
    (tmp_path / "sub" / "c.json").write_text('{"fw": 1}')
    found = discover_inputs(tmp_path)
    assert [p.path.name for p in found] == ["a.txt", "b.txt", "c.json"]
    assert found[2].format is Format.JSON


def test_discover_missing(tmp_path):
    with pytest.raises(MissingFolder):
        discover_inputs(tmp_path / "nope")


@pytest.mark.parametrize(
    "data, fmt",
    [
        (b'{"fw":', Format.JSON),
        (b"  \n[1]", Format.JSON),
        (b"traceroute to", Format.PLAIN),
        (b"", Format.PLAIN),
        (b"\xff\xfe\x00", Format.UNKNOWN),
    ],
)
def test_sniff(data, fmt):
    assert sniff_format(data) is fmt


@given(st.binary(max_size=64))
def test_sniff_total(data):
    assert sniff_format(data) in set(Format)


def test_plain_minimal():
    t = parse_plain(raw(HEADER + " 1  gw (10.0.0.1)  1.100 ms  1.200 ms  1.300 ms\n"))
    assert t.destination_ip == "8.8.8.8"
    assert len(t.hops) == 1
    assert [r.rtt_ms for r in t.hops[0].replies] == [1.1, 1.2, 1.3]
    assert all(r.from_ip == "10.0.0.1" for r in t.hops[0].replies)


def test_plain_stars():
    t = parse_plain(raw(HEADER + " 1  10.0.0.1  1 ms\n 5  * * *\n"))
    assert t.hops[1].ttl == 5
    assert t.hops[1].replies == (Reply(None),) * 3


def test_plain_multiple_traces():
    text = HEADER + " 1  10.0.0.1  1 ms\n" + HEADER + " 1  10.0.0.1  1 ms\n"
    with pytest.raises(ParseError) as e:
        parse_plain(raw(text))
    assert e.value.kind is ParseErrorKind.MULTIPLE_TRACES


def test_plain_mixed_responders_and_marks():
    line = " 3  a (1.1.1.1)  2.0 ms !H  b (2.2.2.2)  3.5 ms  *\n"
    t = parse_plain(raw(HEADER + line))
    r = t.hops[0].replies
    assert r[0] == Reply("1.1.1.1", 2.0, ErrorMark.HOST_UNREACHABLE)
    assert r[1] == Reply("2.2.2.2", 3.5)
    assert r[2].is_star


def test_plain_warn_and_net_marks():
    t = parse_plain(raw(HEADER + " 1  1.1.1.1  2 ms !N  3 ms WARN\n"))
    assert [r.error_mark for r in t.hops[0].replies] == [ErrorMark.NET_UNREACHABLE, ErrorMark.WARN]


def test_plain_mpls_attaches_to_previous_hop():
    text = HEADER + (
        " 1  93.17.132.110 (93.17.132.110)  5.0 ms  5.1 ms  5.2 ms\n"
        " 2  109.24.74.178 (109.24.74.178)  9.0 ms  9.1 ms  9.2 ms\n"
        "    MPLS Label 24022 TTL=1 Exp=0 S=1\n"
    )
    t = parse_plain(raw(text))
    assert t.hops[0].mpls_labels == ()
    (lab,) = t.hops[1].mpls_labels
    assert (lab.label, lab.ttl_field, lab.exp, lab.stack_bottom) == (24022, 1, 0, True)


def test_paris_header_gives_source():
    text = "traceroute [(10.0.0.2:33456) -> (8.8.8.8:33457)], protocol udp, algo hopbyhop\n 1  10.0.0.1  1 ms\n"
    t = parse_plain(raw(text))
    assert (t.source_ip, t.destination_ip) == ("10.0.0.2", "8.8.8.8")


@pytest.mark.parametrize(
    "text, kind",
    [
        ("", ParseErrorKind.EMPTY),
        (HEADER, ParseErrorKind.EMPTY),
        ("hello world\n", ParseErrorKind.MALFORMED),
        (HEADER + " 2  1.1.1.1  1 ms\n 2  1.1.1.1  1 ms\n", ParseErrorKind.MALFORMED),
        (HEADER + " 1  1.1.1.1  1 ms\n 2  name-without-ip  1 ms\n", ParseErrorKind.MALFORMED),
        (HEADER + "    MPLS Label 1 TTL=1 Exp=0 S=1\n", ParseErrorKind.MALFORMED),
    ],
)
def test_plain_errors(text, kind):
    with pytest.raises(ParseError) as e:
        parse_plain(raw(text))
    assert e.value.kind is kind


def _atlas(hops, dst="8.8.8.8"):
    return {"dst_addr": dst, "src_addr": "10.0.0.2", "result": hops}


def test_json_corrupt():
    with pytest.raises(ParseError) as e:
        parse_atlas_json(raw('{"result": [', "x.json"))
    assert e.value.kind is ParseErrorKind.CORRUPT_JSON


def test_json_minimal():
    doc = _atlas([{"hop": 1, "result": [{"from": "1.2.3.4", "rtt": 10.0}]}])
    (t,) = parse_atlas_json(raw(json.dumps(doc), "x.json"))
    assert t.hops == (Hop(1, (Reply("1.2.3.4", 10.0),)),)
    assert t.format is Format.JSON


def test_json_array_order_and_stars():
    docs = [
        _atlas([{"hop": 1, "result": [{"x": "*"}, {"from": "1.2.3.4", "rtt": 1.5}]}], dst="1.1.1.1"),
        _atlas([{"hop": 1, "result": [{"from": "1.2.3.4", "rtt": 2.5, "err": "N"}]}], dst="2.2.2.2"),
    ]
    traces = parse_atlas_json(raw(json.dumps(docs), "x.json"))
    assert [t.destination_ip for t in traces] == ["1.1.1.1", "2.2.2.2"]
    assert traces[0].hops[0].replies[0].is_star
    assert traces[1].hops[0].replies[0].error_mark is ErrorMark.NET_UNREACHABLE


def test_json_mpls_extension():
    ext = {"version": 1, "obj": [{"class": 1, "type": 1, "mpls": [{"label": 300, "exp": 0, "s": 1, "ttl": 1}]}]}
    doc = _atlas([{"hop": 1, "result": [{"from": "1.2.3.4", "rtt": 1.0, "icmpext": ext}]}])
    (t,) = parse_atlas_json(raw(json.dumps(doc), "x.json"))
    assert t.hops[0].mpls_labels[0].label == 300


@pytest.mark.parametrize("doc", [{"dst_addr": "8.8.8.8"}, {"result": []}, [{"dst_addr": "8.8.8.8", "result": "x"}]])
def test_json_schema_mismatch(doc):
    with pytest.raises(ParseError) as e:
        parse_atlas_json(raw(json.dumps(doc), "x.json"))
    assert e.value.kind is ParseErrorKind.SCHEMA_MISMATCH


def test_parse_input_never_raises():
    assert parse_input(raw(b"\xff\xfe")) [0].kind is ParseErrorKind.UNKNOWN_FORMAT
    assert isinstance(parse_input(raw("{"))[0], ParseError)


# -- properties ------------------------------------------------------------------

octet = st.integers(0, 255)
ips = st.builds(lambda a, b, c, d: f"{a}.{b}.{c}.{d}", st.integers(1, 223), octet, octet, octet)
rtts = st.integers(0, 999_999).map(lambda n: n / 1000)
replies = st.one_of(
    st.just(Reply(None)),
    st.builds(Reply, ips, rtts, st.sampled_from([None, *ErrorMark])),
)


@st.composite
def traces(draw):
    n = draw(st.integers(1, 12))
    ttls = sorted(draw(st.sets(st.integers(1, 40), min_size=n, max_size=n)))
    hops = tuple(Hop(t, tuple(draw(st.lists(replies, min_size=1, max_size=4)))) for t in ttls)
    return Trace(draw(ips), hops, None, None, Format.PLAIN)


@settings(max_examples=200)
@given(traces())
def test_plain_round_trip(trace):
    text = write_plain(trace)
    parsed = parse_plain(raw(text))
    assert parsed == trace
    assert parse_plain(raw(write_plain(parsed))) == parsed


@given(traces())
def test_parse_deterministic_and_ttls_increase(trace):
    data = write_plain(trace)
    a, b = parse_plain(raw(data)), parse_plain(raw(data))
    assert a == b
    ttls = [h.ttl for h in a.hops]
    assert ttls == sorted(set(ttls))
