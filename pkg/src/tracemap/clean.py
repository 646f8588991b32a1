"""Exclusion rules deciding which parsed traces enter the analysis."""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, field

from .ingest import Format, ParseError, ParseErrorKind, Trace


class Reason(enum.Enum):
    # declaration order is the order rules are tested in
    CORRUPT_JSON = "CorruptJson"
    LAST_THREE_RTT_ZERO = "LastThreeRttZero"
    MULTIPLE_TRACES = "MultipleTraces"
    THREE_STARS_LAST_HOP = "ThreeStarsLastHop"
    UNREACHABLE_MARKER = "UnreachableMarker"
    UNPARSEABLE_TEXT = "UnparseableText"
    UNKNOWN_FORMAT = "UnknownFormat"


@dataclass(frozen=True)
class CleanVerdict:
    accepted: bool
    reason: Reason | None = None


ACCEPT = CleanVerdict(True)

_ERROR_REASONS = {
    ParseErrorKind.CORRUPT_JSON: Reason.CORRUPT_JSON,
    # well-formed JSON that is not a traceroute result is as useless as a corrupt one
    ParseErrorKind.SCHEMA_MISMATCH: Reason.CORRUPT_JSON,
    ParseErrorKind.MULTIPLE_TRACES: Reason.MULTIPLE_TRACES,
    ParseErrorKind.MALFORMED: Reason.UNPARSEABLE_TEXT,
    ParseErrorKind.EMPTY: Reason.UNPARSEABLE_TEXT,
    ParseErrorKind.UNKNOWN_FORMAT: Reason.UNKNOWN_FORMAT,
}


def clean(outcome: Trace | ParseError, format: Format | None = None) -> CleanVerdict:
    """Verdict for one parse outcome; the first firing rule is reported."""
    if isinstance(outcome, ParseError):
        return CleanVerdict(False, _ERROR_REASONS[outcome.kind])
    if format is None:
        format = outcome.format
    last = outcome.hops[-1].replies
    if format is Format.JSON and all(r.rtt_ms == 0 for r in last):
        return CleanVerdict(False, Reason.LAST_THREE_RTT_ZERO)
    if all(r.is_star for r in last):
        return CleanVerdict(False, Reason.THREE_STARS_LAST_HOP)
    for hop in outcome.hops:
        for r in hop.replies:
            if r.error_mark is not None:
                return CleanVerdict(False, Reason.UNREACHABLE_MARKER)
    return ACCEPT


@dataclass
class CleaningReport:
    input_count: int = 0
    accepted_count: int = 0
    rejected: Counter = field(default_factory=Counter)

    def add(self, verdict: CleanVerdict) -> None:
        self.input_count += 1
        if verdict.accepted:
            self.accepted_count += 1
        else:
            self.rejected[verdict.reason] += 1

    def merge(self, other: CleaningReport) -> CleaningReport:
        return CleaningReport(
            self.input_count + other.input_count,
            self.accepted_count + other.accepted_count,
            self.rejected + other.rejected,
        )

    def count(self, reason: Reason) -> int:
        return self.rejected.get(reason, 0)

    @property
    def rejected_count(self) -> int:
        return sum(self.rejected.values())


def clean_corpus(outcomes) -> tuple[list[Trace], CleaningReport]:
    accepted = []
    report = CleaningReport()
    for outcome in outcomes:
        verdict = clean(outcome)
        report.add(verdict)
        if verdict.accepted:
            accepted.append(outcome)
    return accepted, report
