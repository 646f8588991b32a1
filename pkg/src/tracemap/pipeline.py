"""End-to-end run: discover, parse, clean, aggregate, log and draw.

Files are processed in fixed-size chunks in path order. Chunk boundaries
do not depend on the worker count and partial results are merged in chunk
order, so every output is byte-identical for any number of workers.
"""

from __future__ import annotations

import logging
import os
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import geodb as geodb_mod
from .clean import CleaningReport, Reason, clean
from .fmt import fixed2, percent_shares
from .ingest import MissingFolder, list_input_paths, parse_input, read_input
from .pathmap import (
    Direction,
    MplsFlag,
    build_segments,
    extract_explicit_mpls,
    filter_last_links,
    flag_invisible_mpls,
)
from .render import RenderConfig, RenderError, render_map
from .stats import StatsTable, merge, write_stats

log = logging.getLogger(__name__)

CHUNK_SIZE = 256
STATS_FILE = "stats.txt"
TRACE_LOG = "trace.txt"

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_ALL_REJECTED = 2


@dataclass
class RunConfig:
    input_folder: Path
    output_dir: Path = Path("tracemap_out")
    prefix_file: Path = geodb_mod.SAMPLE_PREFIXES
    points_file: Path = geodb_mod.SAMPLE_POINTS
    adjacency_file: Path | None = None
    focus_country: str | None = None
    direction: Direction = Direction.LEAVING
    render: RenderConfig = field(default_factory=lambda: RenderConfig(geodb_mod.SAMPLE_MAP))
    worker_count: int = 1


@dataclass
class ChunkResult:
    verdicts: list  # (path, Reason | None) per parse outcome
    accepted: list
    report: CleaningReport
    stats: StatsTable


def process_chunk(paths) -> ChunkResult:
    verdicts, accepted = [], []
    report = CleaningReport()
    stats = StatsTable()
    for path in paths:
        raw = read_input(path)
        for outcome in parse_input(raw):
            verdict = clean(outcome)
            report.add(verdict)
            verdicts.append((path, verdict.reason))
            if verdict.accepted:
                accepted.append(outcome)
                stats.add_trace(outcome)
    return ChunkResult(verdicts, accepted, report, stats)


def process_files(paths, worker_count: int = 1) -> list[ChunkResult]:
    chunks = [paths[i : i + CHUNK_SIZE] for i in range(0, len(paths), CHUNK_SIZE)]
    if worker_count <= 1 or len(chunks) <= 1:
        return [process_chunk(c) for c in chunks]
    with ProcessPoolExecutor(max_workers=min(worker_count, len(chunks))) as pool:
        return list(pool.map(process_chunk, chunks))


# -- trace.txt ---------------------------------------------------------------------

_CONTRACT = re.compile(r"lien.*MPLS|__ trajet")


def _freeform(text: str) -> str:
    # commentary (file names especially) must never match the two grep contracts
    text = text.replace("lien", "l%69en").replace("__ trajet", "_%5F trajet")
    assert not _CONTRACT.search(text)
    return "// " + text


def mpls_line(link) -> str:
    return f"// lien <-> MPLS: {link.ip_a} {link.ip_b}"


def trajet_lines(segments) -> list[str]:
    ordered = segments.ordered()
    shares = percent_shares([s.occurrences for s in ordered])
    lines = []
    for s, pct in zip(ordered, shares):
        rtt = fixed2(s.min_rtt_ms) if s.min_rtt_ms is not None else "-"
        lines.append(
            f"__ trajet: {s.x1} {s.y1} -> {s.x2} {s.y2}: {s.occurrences} ({pct}%) "
            f"[{s.country_a} - {s.country_b} et temps min {rtt} ({pct}%)]"
        )
    return lines


def write_trace_log(report: CleaningReport, mpls, segments, out, last=None, details=()) -> None:
    """Verbose run log. Only the MPLS and trajet line formats are contractual."""
    lines = [_freeform(d) for d in details]
    lines.append(_freeform(f"inputs: {report.input_count} accepted: {report.accepted_count}"))
    for reason in Reason:
        lines.append(f"// clean: {reason.value}: {report.count(reason)}")
    for link in sorted(mpls, key=lambda link: link.sort_key()):
        lines.append(mpls_line(link))
    lines.extend(trajet_lines(segments))
    for s in segments.ordered():
        if s.mpls is MplsFlag.INVISIBLE_CANDIDATE:
            lines.append(_freeform(f"invisible MPLS candidate: {s.country_a} - {s.country_b}"))
    if last is not None:
        ordered = last.ordered()
        shares = percent_shares([s.occurrences for s in ordered])
        for s, pct in zip(ordered, shares):
            rtt = fixed2(s.min_rtt_ms) if s.min_rtt_ms is not None else "-"
            lines.append(_freeform(f"last link: {s.country_a} - {s.country_b}: {s.occurrences} ({pct}%) min {rtt}"))
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("".join(line + "\n" for line in lines))


# -- run -----------------------------------------------------------------------------


class ConfigError(Exception):
    pass


def run(cfg: RunConfig) -> int:
    """Execute the whole pipeline; returns the process exit code."""
    input_folder = Path(cfg.input_folder)
    out_dir = Path(cfg.output_dir)
    try:
        paths = list_input_paths(input_folder)
        db = geodb_mod.load_geodb(cfg.prefix_file, cfg.points_file)
        adjacency = geodb_mod.load_adjacency(cfg.adjacency_file) if cfg.adjacency_file else None
        if out_dir.resolve() == input_folder.resolve() or input_folder.resolve() in out_dir.resolve().parents:
            raise ConfigError("output directory must not be inside the input folder")
        out_dir.mkdir(parents=True, exist_ok=True)
    except (MissingFolder, geodb_mod.GeoDbError, ConfigError, OSError) as e:
        log.error("%s", e)
        return EXIT_CONFIG

    chunks = process_files(paths, cfg.worker_count)
    report = CleaningReport()
    stats = StatsTable()
    accepted = []
    details = []
    for chunk in chunks:
        report = report.merge(chunk.report)
        stats = merge(stats, chunk.stats)
        accepted.extend(chunk.accepted)
        for path, reason in chunk.verdicts:
            if reason is not None:
                details.append(f"rejected {path.relative_to(input_folder)}: {reason.value}")
    stats.localize(db)

    mpls = set()
    for trace in accepted:
        mpls.update(extract_explicit_mpls(trace))
    segments = flag_invisible_mpls(build_segments(accepted, db, mpls), adjacency)
    last = None
    if cfg.focus_country:
        last = flag_invisible_mpls(
            filter_last_links(accepted, db, cfg.focus_country, cfg.direction, mpls), adjacency
        )

    try:
        write_stats(stats, out_dir / STATS_FILE)
        write_trace_log(report, mpls, segments, out_dir / TRACE_LOG, last, details)
        if not accepted:
            return EXIT_ALL_REJECTED
        ext = cfg.render.output_format
        render_map(segments, cfg.render, out_dir / f"map_all.{ext}")
        if last is not None:
            render_map(last, cfg.render, out_dir / f"map_last.{ext}")
    except (RenderError, OSError) as e:
        log.error("%s", e)
        return EXIT_CONFIG
    log.info(
        "%d inputs, %d accepted, %d segments, %d MPLS links",
        report.input_count, report.accepted_count, len(segments), len(mpls),
    )
    return EXIT_OK


def default_jobs() -> int:
    return max(1, min(8, os.cpu_count() or 1))
