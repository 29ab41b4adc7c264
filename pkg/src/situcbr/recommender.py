"""The recommendation cycle: identify, retrieve, reuse above a threshold, revise.

:class:`Engine` owns the taxonomies, mapping tables, case base and history
journal of one user. Recommending never changes the stored preferences;
only explicit feedback (clicks and saves) revises the case base.
"""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field
from datetime import datetime
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from situcbr.casebase import (
    ADDED,
    MERGED,
    SKIPPED,
    CaseBase,
    PreferenceDoc,
    Revision,
    SimilarityVector,
    UserPreference,
    retrieve_best,
    revise,
)
from situcbr.situation import (
    ContextMaps,
    SensorSnapshot,
    Situation,
    format_timestamp,
    identify_situation,
    parse_timestamp,
)
from situcbr.taxonomy import Taxonomies

logger = logging.getLogger(__name__)

RECOMMENDED = "recommended"
BELOW_THRESHOLD = "below_threshold"
COLD_START = "cold_start"

ACTIONS = ("click", "save")
EVENT_KINDS = ("snapshot", "recommendation", "feedback", "revision")


class FeedbackError(ValueError):
    pass


class ScenarioError(ValueError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"scenario line {lineno}: {message}")
        self.lineno = lineno


@dataclass(frozen=True)
class EngineConfig:
    threshold_B: float = 2.4
    click_weight: float = 1.0
    save_weight: float = 2.0
    max_recommendations: int = 10

    def __post_init__(self):
        if not (0 < self.threshold_B <= 3):
            raise ValueError(f"threshold_B must lie in (0, 3], got {self.threshold_B}")
        if self.click_weight < 0 or self.save_weight < 0:
            raise ValueError("action weights must be non-negative")
        if not (isinstance(self.max_recommendations, int) and self.max_recommendations > 0):
            raise ValueError("max_recommendations must be a positive integer")

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "EngineConfig":
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def weight(self, action: str) -> float:
        if action == "click":
            return self.click_weight
        if action == "save":
            return self.save_weight
        raise FeedbackError(f"unknown feedback action {action!r}; expected one of {ACTIONS}")


@dataclass(frozen=True)
class RecommendationResult:
    decision: str
    matched_case_id: str | None
    total_similarity: Fraction | None
    similarity_vector: SimilarityVector
    docs: tuple[str, ...] = ()
    situation: Situation | None = None

    def to_dict(self) -> dict[str, Any]:
        total = self.total_similarity
        return {
            "decision": self.decision,
            "situation": None if self.situation is None else self.situation.to_dict(),
            "matched_case_id": self.matched_case_id,
            "total_similarity": None if total is None else {"fraction": str(total), "value": round(float(total), 6)},
            "similarity_vector": self.similarity_vector.to_list(),
            "docs": list(self.docs),
        }


@dataclass(frozen=True)
class HistoryEvent:
    timestamp: datetime
    kind: str
    situation: Situation | None = None
    payload: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in EVENT_KINDS:
            raise ValueError(f"unknown history event kind {self.kind!r}")

    def to_line(self) -> str:
        return json.dumps(
            {
                "timestamp": format_timestamp(self.timestamp),
                "kind": self.kind,
                "situation": None if self.situation is None else self.situation.to_dict(),
                "payload": self.payload,
            },
            sort_keys=True,
        )

    @classmethod
    def from_line(cls, line: str) -> "HistoryEvent":
        raw = json.loads(line)
        sit = raw.get("situation")
        return cls(
            parse_timestamp(raw["timestamp"]),
            raw["kind"],
            None if sit is None else Situation.from_dict(sit),
            raw.get("payload", {}),
        )


class HistoryJournal:
    """Append-only event log.

    Events are kept in memory; :meth:`flush` appends the not-yet-written
    ones to ``path`` as JSON lines. Timestamps may not go backwards within
    one journal session.
    """

    def __init__(self, path: str | Path | None = None):
        self.path = None if path is None else Path(path)
        self.events: list[HistoryEvent] = []
        self._flushed = 0

    def __len__(self) -> int:
        return len(self.events)

    def append(self, event: HistoryEvent) -> None:
        if self.events and event.timestamp < self.events[-1].timestamp:
            raise ValueError(
                f"history timestamps must not decrease: {format_timestamp(event.timestamp)} "
                f"after {format_timestamp(self.events[-1].timestamp)}"
            )
        self.events.append(event)

    def flush(self) -> int:
        pending = self.events[self._flushed:]
        if self.path is not None and pending:
            with self.path.open("a", encoding="utf-8") as fh:
                for event in pending:
                    fh.write(event.to_line() + "\n")
        self._flushed = len(self.events)
        return len(pending)

    @staticmethod
    def read(path: str | Path) -> list[HistoryEvent]:
        path = Path(path)
        if not path.exists():
            return []
        return [HistoryEvent.from_line(line) for line in path.read_text(encoding="utf-8").splitlines() if line.strip()]


class Engine:
    def __init__(self, taxonomies: Taxonomies, maps: ContextMaps, casebase: CaseBase | None = None,
                 config: EngineConfig | None = None, journal: HistoryJournal | None = None):
        self.taxonomies = taxonomies
        self.maps = maps
        self.casebase = CaseBase() if casebase is None else casebase
        self.config = EngineConfig() if config is None else config
        self.journal = HistoryJournal() if journal is None else journal
        self.casebase.validate(taxonomies)

    def identify(self, snapshot: SensorSnapshot) -> Situation:
        m = self.maps
        return identify_situation(snapshot, m.places, m.rules, m.contacts)

    def recommend(self, snapshot: SensorSnapshot, threshold: float | None = None) -> RecommendationResult:
        """Recommend the documents of the closest past situation, if close enough.

        ``threshold`` overrides the configured ``threshold_B`` for this call.
        When the best case falls below the threshold its id and total are
        still reported, with no documents.
        """
        B = self.config.threshold_B if threshold is None else threshold
        if not (0 < B <= 3):
            raise ValueError(f"threshold must lie in (0, 3], got {B}")
        situation = self.identify(snapshot)
        self.journal.append(HistoryEvent(
            snapshot.timestamp, "snapshot", situation,
            {"lat": snapshot.latitude, "lon": snapshot.longitude, "agenda_contact": snapshot.agenda_contact},
        ))

        best, vector = retrieve_best(self.taxonomies, self.casebase, situation)
        if best is None:
            result = RecommendationResult(COLD_START, None, None, vector, (), situation)
        else:
            total = next(e.total for e in vector if e.case_id == best.case_id)
            if total >= Fraction(B):
                docs = tuple(d.doc_id for d in best.preference.ranked()[: self.config.max_recommendations])
                best.last_matched_at = snapshot.timestamp
                result = RecommendationResult(RECOMMENDED, best.case_id, total, vector, docs, situation)
            else:
                result = RecommendationResult(BELOW_THRESHOLD, best.case_id, total, vector, (), situation)

        self.journal.append(HistoryEvent(
            snapshot.timestamp, "recommendation", situation,
            {
                "decision": result.decision,
                "matched_case_id": result.matched_case_id,
                "total_similarity": None if result.total_similarity is None else str(result.total_similarity),
                "threshold": B,
                "docs": list(result.docs),
            },
        ))
        return result

    def build_preference(self, events: Sequence[Mapping[str, str]], at: datetime) -> UserPreference:
        scores: dict[str, float] = {}
        for ev in events:
            try:
                doc_id, action = ev["doc_id"], ev["action"]
            except (KeyError, TypeError) as exc:
                raise FeedbackError(f"feedback event needs doc_id and action: {ev!r}") from exc
            scores[doc_id] = scores.get(doc_id, 0.0) + self.config.weight(action)
        return UserPreference(PreferenceDoc(doc_id, score, at) for doc_id, score in scores.items())

    def record_feedback(self, target: SensorSnapshot | Situation, events: Sequence[Mapping[str, str]],
                        at: datetime | None = None) -> Revision:
        """Score clicked/saved documents and revise the case base with them.

        ``target`` is the snapshot (or already identified situation) the
        navigation happened in. ``at`` defaults to the snapshot timestamp and
        is mandatory when a bare situation is given.
        """
        if isinstance(target, SensorSnapshot):
            situation = self.identify(target)
            at = target.timestamp if at is None else at
        else:
            situation = target
            if at is None:
                raise ValueError("record_feedback with a bare Situation needs an explicit 'at' timestamp")
        at = parse_timestamp(at)
        situation.validate(self.taxonomies)
        preference = self.build_preference(events, at)
        self.journal.append(HistoryEvent(at, "feedback", situation, {"events": [dict(e) for e in events]}))

        best, vector = retrieve_best(self.taxonomies, self.casebase, situation)
        best_total = None if best is None else max(vector.totals())
        revision = revise(self.casebase, situation, preference, best_total, taxonomies=self.taxonomies, at=at)
        self.journal.append(HistoryEvent(
            at, "revision", situation, {"outcome": revision.outcome, "case_id": revision.case_id},
        ))
        return revision


# -- scenario replay --------------------------------------------------------


@dataclass
class ReplaySummary:
    events: int = 0
    recommendations: int = 0
    cold_starts: int = 0
    below_threshold: int = 0
    cases_added: int = 0
    cases_merged: int = 0
    feedback_skipped: int = 0
    errors: int = 0


@dataclass
class ReplayReport:
    outcomes: list[dict[str, Any]] = field(default_factory=list)
    summary: ReplaySummary = field(default_factory=ReplaySummary)

    def to_dict(self) -> dict[str, Any]:
        return {"outcomes": self.outcomes, "summary": asdict(self.summary)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def parse_snapshot(record: Mapping[str, Any]) -> SensorSnapshot:
    return SensorSnapshot(
        latitude=float(record["lat"]),
        longitude=float(record["lon"]),
        timestamp=parse_timestamp(record["timestamp"]),
        agenda_contact=record.get("agenda_contact"),
    )


def replay_scenario(engine: Engine, lines: Iterable[str], keep_going: bool = False) -> ReplayReport:
    """Run a line-delimited JSON scenario through ``engine``.

    Recognized records are ``snapshot``, ``recommend_request`` (applies to
    the latest snapshot) and ``feedback``. A malformed line raises
    :class:`ScenarioError`, or is reported and skipped with ``keep_going``.
    """
    report = ReplayReport()
    summary = report.summary
    current: SensorSnapshot | None = None
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        summary.events += 1
        try:
            outcome, current = _replay_one(engine, line, current, summary)
        except (ValueError, KeyError, TypeError) as exc:
            err = exc if isinstance(exc, ScenarioError) else ScenarioError(lineno, str(exc))
            if not keep_going:
                raise err from exc
            summary.errors += 1
            report.outcomes.append({"line": lineno, "type": "error", "error": str(err)})
            continue
        outcome["line"] = lineno
        report.outcomes.append(outcome)
    return report


def _replay_one(engine: Engine, line: str, current: SensorSnapshot | None,
                summary: ReplaySummary) -> tuple[dict[str, Any], SensorSnapshot | None]:
    record = json.loads(line)
    if not isinstance(record, dict):
        raise ValueError("scenario record must be an object")
    kind = record.get("type")
    if kind == "snapshot":
        snap = parse_snapshot(record)
        if current is not None and snap.timestamp < current.timestamp:
            raise ValueError("snapshot timestamps must not decrease")
        return {"type": kind, "timestamp": format_timestamp(snap.timestamp)}, snap
    if current is None:
        raise ValueError(f"{kind!r} record before any snapshot")
    if kind == "recommend_request":
        result = engine.recommend(current)
        if result.decision == RECOMMENDED:
            summary.recommendations += 1
        elif result.decision == COLD_START:
            summary.cold_starts += 1
        else:
            summary.below_threshold += 1
        out = result.to_dict()
        out["type"] = kind
        return out, current
    if kind == "feedback":
        events = record.get("events")
        if not isinstance(events, list):
            raise ValueError("feedback record needs an 'events' list")
        revision = engine.record_feedback(current, events)
        if revision.outcome == ADDED:
            summary.cases_added += 1
        elif revision.outcome == MERGED:
            summary.cases_merged += 1
        elif revision.outcome == SKIPPED:
            summary.feedback_skipped += 1
        return {"type": kind, "outcome": revision.outcome, "case_id": revision.case_id}, current
    raise ValueError(f"unknown scenario record type {kind!r}")
