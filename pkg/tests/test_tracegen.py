import math
from collections import Counter

import pytest

from conftest import raw
from tracemap.clean import Reason, clean
from tracemap.ingest import Format, list_input_paths, parse_input, read_input
from tracemap.pipeline import process_files
from tracemap.tracegen import (
    MANIFEST_NAME,
    GenSpec,
    _apportion,
    generate,
    read_manifest,
    to_trace,
    write_json,
    write_plain,
)

PATHS = [(("RE", "FR", "US"), 3), (("RE", "MU"), 1)]


def outcome_reasons(folder):
    out = Counter()
    for chunk in process_files(list_input_paths(folder)):
        for _, reason in chunk.verdicts:
            out[reason] += 1
    return out


def test_clean_corpus_all_accepted(tmp_path):
    generate(GenSpec(200, PATHS, seed=3), tmp_path)
    assert outcome_reasons(tmp_path) == Counter({None: 200})


def test_manifest_is_hidden_from_discovery(tmp_path):
    generate(GenSpec(5, PATHS), tmp_path)
    assert (tmp_path / MANIFEST_NAME).exists()
    assert MANIFEST_NAME not in [p.name for p in list_input_paths(tmp_path)]
    assert len(read_manifest(tmp_path)) == 5


def test_defect_rate_near_target_and_equal_to_manifest(tmp_path):
    n, p = 1000, 0.2
    records = generate(GenSpec(n, PATHS, {Reason.THREE_STARS_LAST_HOP: p}, seed=11), tmp_path)
    planted = sum(r["defect"] == Reason.THREE_STARS_LAST_HOP.value for r in records)
    assert abs(planted - n * p) <= 3 * math.sqrt(n * p * (1 - p))
    got = outcome_reasons(tmp_path)
    assert got[Reason.THREE_STARS_LAST_HOP] == planted
    assert got[None] == n - planted


def test_same_seed_same_bytes(tmp_path):
    spec = dict(trace_count=60, country_path_distribution=PATHS, defect_rates={"CorruptJson": 0.1}, seed=5)
    generate(GenSpec(**spec), tmp_path / "a")
    generate(GenSpec(**spec), tmp_path / "b")
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert names == sorted(p.name for p in (tmp_path / "b").iterdir())
    for name in names:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_exact_allocation(tmp_path):
    spec = GenSpec(200, [(("RE", "FR"), 96.5), (("RE", "MU"), 3.5)], allocation="exact", seed=1)
    records = generate(spec, tmp_path)
    assert Counter(tuple(r["countries"]) for r in records) == {("RE", "FR"): 193, ("RE", "MU"): 7}


def test_apportion():
    assert _apportion([1, 1, 1], 10) == [4, 3, 3]
    assert sum(_apportion([0.3, 0.7], 7)) == 7


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(trace_count=-1),
        dict(country_path_distribution=[]),
        dict(country_path_distribution=[(("RE",), 0)]),
        dict(defect_rates={"CorruptJson": 1.5}),
        dict(defect_rates={"CorruptJson": 0.6, "MultipleTraces": 0.6}),
        dict(format="xml"),
        dict(allocation="fair"),
        dict(format="plain", defect_rates={"CorruptJson": 0.1}),
        dict(format="json", defect_rates={"MultipleTraces": 0.1}),
    ],
)
def test_genspec_validation(kwargs):
    base = dict(trace_count=1, country_path_distribution=PATHS)
    base.update(kwargs)
    with pytest.raises(ValueError):
        GenSpec(**base)


def test_unknown_country_rejected(tmp_path):
    with pytest.raises(ValueError):
        generate(GenSpec(1, [(("RE", "XX"), 1)]), tmp_path)


def test_writers_round_trip_ground_truth(tmp_path):
    records = generate(GenSpec(40, PATHS, seed=2, star_rate=0.2, mpls_pairs=[("RE", "FR")]), tmp_path)
    for rec in records:
        data = (tmp_path / rec["file"]).read_bytes()
        (parsed,) = parse_input(raw(data, rec["file"]))
        assert clean(parsed).accepted
        expect = to_trace(rec, parsed.format)
        assert [h.replies for h in parsed.hops] == [h.replies for h in expect.hops]
        assert [bool(h.mpls_labels) for h in parsed.hops] == [h["mpls"] for h in rec["hops"]]


def test_plain_and_json_writers_agree():
    rec = {
        "destination": "8.8.8.8",
        "source": None,
        "hops": [
            {"ttl": 1, "replies": [["10.0.0.1", 1.25, None], [None, None, None], ["10.0.0.2", 2.0, None]], "mpls": False},
            {"ttl": 2, "replies": [["8.8.8.8", 9.5, None]] * 3, "mpls": True},
        ],
    }
    a = to_trace(rec, Format.PLAIN)
    (p,) = parse_input(raw(write_plain(a)))
    (j,) = parse_input(raw(write_json(a), "t.json"))
    assert p.hops == j.hops == a.hops


def test_generated_files_read_back(tmp_path):
    generate(GenSpec(10, PATHS, format="json"), tmp_path)
    for path in list_input_paths(tmp_path):
        assert read_input(path).format is Format.JSON
