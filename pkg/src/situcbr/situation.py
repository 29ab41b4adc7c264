"""Turn raw context signals into a semantic situation triple.

A :class:`SensorSnapshot` carries a GPS fix, a timestamp and the agenda
contact of the current meeting. Three mapping tables resolve those into
concepts of the location, time and social taxonomies. Every resolver has a
fallback so that :func:`identify_situation` is total.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import dataclass, field
from datetime import date, datetime
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from situcbr.taxonomy import DIMENSIONS, Taxonomies, Taxonomy

logger = logging.getLogger(__name__)

EARTH_RADIUS_M = 6_371_000.0

TIME_PREDICATES = ("holiday_calendar", "weekend", "weekday", "hour_range", "default")


class MappingError(ValueError):
    """A mapping table failed to parse or refers to an unknown concept."""


class CoordinateError(ValueError):
    pass


def parse_timestamp(value: str | datetime) -> datetime:
    """Parse an RFC-3339 timestamp. A UTC offset (or ``Z``) is mandatory."""
    if isinstance(value, datetime):
        ts = value
    else:
        text = value.strip()
        if text.endswith(("Z", "z")):
            text = text[:-1] + "+00:00"
        try:
            ts = datetime.fromisoformat(text)
        except ValueError as exc:
            raise ValueError(f"invalid RFC-3339 timestamp {value!r}") from exc
    if ts.tzinfo is None or ts.utcoffset() is None:
        raise ValueError(f"timestamp {value!r} has no UTC offset")
    return ts


def format_timestamp(ts: datetime) -> str:
    return ts.isoformat()


def check_coordinates(lat: float, lon: float) -> None:
    if not (-90.0 <= lat <= 90.0):
        raise CoordinateError(f"latitude {lat} outside [-90, 90]")
    if not (-180.0 <= lon <= 180.0):
        raise CoordinateError(f"longitude {lon} outside [-180, 180]")


def haversine_m(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    """Great-circle distance in meters between two points given in degrees."""
    phi1 = math.radians(lat1)
    phi2 = math.radians(lat2)
    dphi = math.radians(lat2 - lat1)
    dlam = math.radians(lon2 - lon1)
    a = math.sin(dphi / 2) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlam / 2) ** 2
    return 2 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(a)))


@dataclass(frozen=True)
class SensorSnapshot:
    latitude: float
    longitude: float
    timestamp: datetime
    agenda_contact: str | None = None

    def __post_init__(self):
        check_coordinates(self.latitude, self.longitude)
        object.__setattr__(self, "timestamp", parse_timestamp(self.timestamp))


@dataclass(frozen=True)
class Situation:
    """A (location, time, social) concept triple."""

    location: str
    time: str
    social: str

    def __iter__(self):
        return iter((self.location, self.time, self.social))

    def __str__(self) -> str:
        return f"({self.location}, {self.time}, {self.social})"

    def validate(self, taxonomies: Taxonomies) -> None:
        for dim, concept in zip(DIMENSIONS, self):
            taxonomies.for_dimension(dim).node(concept)

    def to_dict(self) -> dict[str, str]:
        return {"location": self.location, "time": self.time, "social": self.social}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Situation":
        try:
            return cls(location=data["location"], time=data["time"], social=data["social"])
        except (KeyError, TypeError) as exc:
            raise ValueError(f"situation needs location, time and social fields: {data!r}") from exc


# -- location ---------------------------------------------------------------


@dataclass(frozen=True)
class PlaceRecord:
    place_id: str
    concept_id: str
    latitude: float
    longitude: float
    radius_m: float

    def __post_init__(self):
        check_coordinates(self.latitude, self.longitude)
        if not self.radius_m > 0:
            raise MappingError(f"place {self.place_id!r}: radius_m must be positive")


@dataclass(frozen=True)
class PlaceTable:
    """Known places plus the concept used when no place contains the fix."""

    records: tuple[PlaceRecord, ...]
    fallback_concept_id: str

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))

    @classmethod
    def for_taxonomy(cls, records: Iterable[PlaceRecord], location: Taxonomy) -> "PlaceTable":
        records = tuple(records)
        for rec in records:
            _require_concept(location, rec.concept_id, f"place {rec.place_id!r}")
        return cls(records, location.root)


def resolve_location(places: PlaceTable, lat: float, lon: float) -> str:
    """Concept of the nearest place whose radius contains (lat, lon).

    Equal distances go to the lexicographically smaller ``place_id``. With no
    containing place the table's fallback (the taxonomy root) is returned.
    """
    check_coordinates(lat, lon)
    best: tuple[float, str, str] | None = None
    for rec in places.records:
        d = haversine_m(lat, lon, rec.latitude, rec.longitude)
        if d <= rec.radius_m:
            key = (d, rec.place_id, rec.concept_id)
            if best is None or key < best:
                best = key
    return places.fallback_concept_id if best is None else best[2]


# -- time -------------------------------------------------------------------


@dataclass(frozen=True)
class TimeRule:
    predicate: str
    concept_id: str
    hours: tuple[int, int] | None = None

    def __post_init__(self):
        if self.predicate not in TIME_PREDICATES:
            raise MappingError(f"unknown time predicate {self.predicate!r}")
        if self.predicate == "hour_range":
            if self.hours is None or len(self.hours) != 2:
                raise MappingError("hour_range rule needs hours [start, end]")
            h1, h2 = self.hours
            if not (0 <= h1 <= 23 and 0 <= h2 <= 24 and h1 != h2):
                raise MappingError(f"hour_range bounds {self.hours} invalid")
            object.__setattr__(self, "hours", (int(h1), int(h2)))

    def matches(self, ts: datetime, holidays: frozenset[date]) -> bool:
        p = self.predicate
        if p == "default":
            return True
        if p == "holiday_calendar":
            return ts.date() in holidays
        if p == "weekend":
            return ts.weekday() >= 5
        if p == "weekday":
            return ts.weekday() < 5
        h1, h2 = self.hours
        if h1 < h2:
            return h1 <= ts.hour < h2
        # wraps midnight, e.g. [22, 6)
        return ts.hour >= h1 or ts.hour < h2


@dataclass(frozen=True)
class TimeRuleSet:
    rules: tuple[TimeRule, ...]
    holiday_dates: frozenset[date] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(self.rules))
        object.__setattr__(self, "holiday_dates", frozenset(self.holiday_dates))
        if not self.rules or self.rules[-1].predicate != "default":
            raise MappingError("the last time rule must use the 'default' predicate")

    def validate(self, time: Taxonomy) -> None:
        for i, rule in enumerate(self.rules):
            _require_concept(time, rule.concept_id, f"time rule #{i}")


def resolve_time(rules: TimeRuleSet, timestamp: datetime) -> str:
    """First matching rule wins; rules are evaluated in the timestamp's own offset."""
    ts = parse_timestamp(timestamp)
    for rule in rules.rules:
        if rule.matches(ts, rules.holiday_dates):
            return rule.concept_id
    raise AssertionError("unreachable: TimeRuleSet ends with a default rule")


# -- social -----------------------------------------------------------------


@dataclass(frozen=True)
class ContactDirectory:
    contacts: Mapping[str, str]
    default_concept_id: str

    def validate(self, social: Taxonomy) -> None:
        for name, concept in self.contacts.items():
            _require_concept(social, concept, f"contact {name!r}")
        _require_concept(social, self.default_concept_id, "default contact")


def resolve_social(directory: ContactDirectory, agenda_contact: str | None) -> str:
    if agenda_contact is None:
        return directory.default_concept_id
    concept = directory.contacts.get(agenda_contact)
    if concept is None:
        logger.warning("agenda contact %r is not in the contact directory; using %r",
                       agenda_contact, directory.default_concept_id)
        return directory.default_concept_id
    return concept


# -- whole snapshot ---------------------------------------------------------


@dataclass(frozen=True)
class ContextMaps:
    """The three validated mapping tables used for situation abstraction."""

    places: PlaceTable
    rules: TimeRuleSet
    contacts: ContactDirectory


def identify_situation(snapshot: SensorSnapshot, places: PlaceTable, rules: TimeRuleSet,
                       directory: ContactDirectory) -> Situation:
    return Situation(
        location=resolve_location(places, snapshot.latitude, snapshot.longitude),
        time=resolve_time(rules, snapshot.timestamp),
        social=resolve_social(directory, snapshot.agenda_contact),
    )


# -- file formats -----------------------------------------------------------


def load_places(text: str, location: Taxonomy) -> PlaceTable:
    """Parse ``place_id,concept_id,lat,lon,radius_m`` lines (header optional)."""
    records = []
    for lineno, row in _csv_rows(text, ("place_id", "concept_id", "lat", "lon", "radius_m")):
        if len(row) != 5:
            raise MappingError(f"places line {lineno}: expected 5 fields, got {len(row)}")
        try:
            lat, lon, radius = float(row[2]), float(row[3]), float(row[4])
        except ValueError as exc:
            raise MappingError(f"places line {lineno}: {exc}") from exc
        try:
            records.append(PlaceRecord(row[0], row[1], lat, lon, radius))
        except CoordinateError as exc:
            raise MappingError(f"places line {lineno}: {exc}") from exc
    return PlaceTable.for_taxonomy(records, location)


def load_time_rules(source: str | Mapping[str, Any], time: Taxonomy) -> TimeRuleSet:
    """Parse the time-rule document.

    Shape: ``{"holiday_dates": ["2011-12-25", ...], "rules": [{"predicate":
    "weekday", "concept_id": "workday"}, {"predicate": "hour_range",
    "hours": [12, 14], "concept_id": "midday"}, ..., {"predicate":
    "default", "concept_id": "..."}]}``.
    """
    doc = json.loads(source) if isinstance(source, str) else source
    try:
        rules = [
            TimeRule(r["predicate"], r["concept_id"], tuple(r["hours"]) if r.get("hours") is not None else None)
            for r in doc["rules"]
        ]
        holidays = frozenset(date.fromisoformat(d) for d in doc.get("holiday_dates", []))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, MappingError):
            raise
        raise MappingError(f"malformed time rules: {exc}") from exc
    ruleset = TimeRuleSet(rules, holidays)
    ruleset.validate(time)
    return ruleset


def load_contacts(text: str, social: Taxonomy) -> ContactDirectory:
    """Parse ``contact_name,concept_id`` lines; a line named ``default`` is required."""
    contacts: dict[str, str] = {}
    default = None
    for lineno, row in _csv_rows(text, ("contact_name", "concept_id")):
        if len(row) != 2:
            raise MappingError(f"contacts line {lineno}: expected 2 fields, got {len(row)}")
        name, concept = row
        if name == "default":
            default = concept
        elif name in contacts:
            raise MappingError(f"contacts line {lineno}: duplicate contact {name!r}")
        else:
            contacts[name] = concept
    if default is None:
        raise MappingError("contacts file has no 'default' line")
    directory = ContactDirectory(contacts, default)
    directory.validate(social)
    return directory


def read_context_maps(mappings_dir: str | Path, taxonomies: Taxonomies) -> ContextMaps:
    root = Path(mappings_dir)
    return ContextMaps(
        places=load_places((root / "places.csv").read_text(encoding="utf-8"), taxonomies.location),
        rules=load_time_rules((root / "time_rules.json").read_text(encoding="utf-8"), taxonomies.time),
        contacts=load_contacts((root / "contacts.csv").read_text(encoding="utf-8"), taxonomies.social),
    )


def _csv_rows(text: str, header: Sequence[str]):
    first = True
    for lineno, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        row = [cell.strip() for cell in row]
        if not row or not any(row) or row[0].startswith("#"):
            continue
        if first and tuple(row) == tuple(header):
            first = False
            continue
        first = False
        yield lineno, row


def _require_concept(taxonomy: Taxonomy, concept_id: str, where: str) -> None:
    if concept_id not in taxonomy:
        raise MappingError(f"{where} refers to unknown {taxonomy.dimension} concept {concept_id!r}")
