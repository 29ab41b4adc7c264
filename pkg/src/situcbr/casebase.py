"""Case base of (situation, preference) pairs with similarity retrieval.

Situation similarity is the unweighted sum of the per-dimension concept
similarities, so totals lie in (0, 3] and equal 3 only for identical
triples. Retrieval takes the argmax over all stored cases; revision appends
a case for an unseen situation or folds the feedback into the exact match.
"""

from __future__ import annotations

import json
import logging
import os
import tempfile
from dataclasses import dataclass
from datetime import datetime
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, Iterator, Mapping

from situcbr.situation import Situation, format_timestamp, parse_timestamp
from situcbr.taxonomy import DIMENSIONS, Taxonomies

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
EXACT_MATCH_TOL = 1e-9

ADDED = "added"
MERGED = "merged"
SKIPPED = "skipped"


class CaseBaseError(ValueError):
    """Malformed case-base document or an inconsistent case base."""


class StaleConceptError(CaseBaseError):
    def __init__(self, case_id: str, dimension: str, concept_id: str):
        super().__init__(
            f"case {case_id!r} refers to {dimension} concept {concept_id!r}, "
            f"which is not in the loaded taxonomy"
        )
        self.case_id = case_id
        self.dimension = dimension
        self.concept_id = concept_id


@dataclass(frozen=True)
class PreferenceDoc:
    doc_id: str
    score: float
    last_seen: datetime

    def __post_init__(self):
        if not isinstance(self.doc_id, str) or not self.doc_id:
            raise ValueError(f"doc_id must be a non-empty string, got {self.doc_id!r}")
        if self.score < 0:
            raise ValueError(f"document {self.doc_id!r} has negative score {self.score}")
        object.__setattr__(self, "last_seen", parse_timestamp(self.last_seen))


class UserPreference:
    """Scored documents keyed by ``doc_id``. Zero-score documents are dropped."""

    __slots__ = ("_docs",)

    def __init__(self, docs: Iterable[PreferenceDoc] = ()):
        self._docs: dict[str, PreferenceDoc] = {}
        for doc in docs:
            if doc.doc_id in self._docs:
                raise ValueError(f"duplicate doc_id {doc.doc_id!r} in preference")
            if doc.score > 0:
                self._docs[doc.doc_id] = doc

    def __len__(self) -> int:
        return len(self._docs)

    def __iter__(self) -> Iterator[PreferenceDoc]:
        return iter(self._docs.values())

    def __contains__(self, doc_id: object) -> bool:
        return doc_id in self._docs

    def __getitem__(self, doc_id: str) -> PreferenceDoc:
        return self._docs[doc_id]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, UserPreference):
            return NotImplemented
        return self._docs == other._docs

    def __repr__(self) -> str:
        return f"UserPreference({list(self._docs.values())!r})"

    def merged(self, other: "UserPreference") -> "UserPreference":
        """Sum scores per document; ``last_seen`` keeps the later timestamp."""
        docs = dict(self._docs)
        for doc in other:
            mine = docs.get(doc.doc_id)
            if mine is None:
                docs[doc.doc_id] = doc
            else:
                docs[doc.doc_id] = PreferenceDoc(
                    doc.doc_id, mine.score + doc.score, max(mine.last_seen, doc.last_seen)
                )
        return UserPreference(docs.values())

    def ranked(self) -> list[PreferenceDoc]:
        return sorted(self._docs.values(), key=lambda d: (-d.score, d.doc_id))


@dataclass
class Case:
    case_id: str
    situation: Situation
    preference: UserPreference
    created_at: datetime
    last_matched_at: datetime | None = None


class CaseBase:
    """Insertion-ordered cases; at most one case per distinct situation."""

    def __init__(self, cases: Iterable[Case] = ()):
        self._cases: list[Case] = []
        self._by_situation: dict[Situation, Case] = {}
        self._by_id: dict[str, Case] = {}
        for case in cases:
            self.add(case)

    def __len__(self) -> int:
        return len(self._cases)

    def __iter__(self) -> Iterator[Case]:
        return iter(self._cases)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CaseBase):
            return NotImplemented
        return self._cases == other._cases

    @property
    def cases(self) -> tuple[Case, ...]:
        return tuple(self._cases)

    def add(self, case: Case) -> None:
        if case.case_id in self._by_id:
            raise CaseBaseError(f"duplicate case_id {case.case_id!r}")
        if case.situation in self._by_situation:
            other = self._by_situation[case.situation]
            raise CaseBaseError(
                f"case {case.case_id!r} repeats the situation of case {other.case_id!r}: {case.situation}"
            )
        self._cases.append(case)
        self._by_situation[case.situation] = case
        self._by_id[case.case_id] = case

    def get(self, case_id: str) -> Case:
        return self._by_id[case_id]

    def find(self, situation: Situation) -> Case | None:
        return self._by_situation.get(situation)

    def next_case_id(self) -> str:
        n = len(self._cases) + 1
        while f"case_{n:03d}" in self._by_id:
            n += 1
        return f"case_{n:03d}"

    def validate(self, taxonomies: Taxonomies) -> None:
        for case in self._cases:
            _check_situation(taxonomies, case.situation, case.case_id)


@dataclass(frozen=True)
class SimilarityEntry:
    case_id: str
    location: Fraction
    time: Fraction
    social: Fraction

    @property
    def total(self) -> Fraction:
        return self.location + self.time + self.social

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"case_id": self.case_id}
        for dim in DIMENSIONS:
            value = getattr(self, dim)
            out[dim] = {"fraction": str(value), "value": round(float(value), 6)}
        out["total"] = {"fraction": str(self.total), "value": round(float(self.total), 6)}
        return out


@dataclass(frozen=True)
class SimilarityVector:
    entries: tuple[SimilarityEntry, ...] = ()

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[SimilarityEntry]:
        return iter(self.entries)

    def totals(self) -> list[Fraction]:
        return [e.total for e in self.entries]

    def to_list(self) -> list[dict[str, Any]]:
        return [e.to_dict() for e in self.entries]


def situation_similarity(taxonomies: Taxonomies, a: Situation, b: Situation) -> SimilarityEntry:
    """Per-dimension similarities of two situations; ``.total`` is their sum.

    The returned entry has an empty ``case_id``.
    """
    return SimilarityEntry(
        "",
        taxonomies.location.similarity(a.location, b.location),
        taxonomies.time.similarity(a.time, b.time),
        taxonomies.social.similarity(a.social, b.social),
    )


def retrieve_best(taxonomies: Taxonomies, cb: CaseBase, s: Situation) -> tuple[Case | None, SimilarityVector]:
    """Return the most similar stored case and the full similarity vector.

    Ties on the total go to the most recent ``created_at``, then to the
    larger ``case_id``. An empty case base yields ``(None, empty vector)``.
    """
    s.validate(taxonomies)
    entries = []
    best: Case | None = None
    best_key = None
    for case in cb:
        _check_situation(taxonomies, case.situation, case.case_id)
        sims = situation_similarity(taxonomies, s, case.situation)
        entry = SimilarityEntry(case.case_id, sims.location, sims.time, sims.social)
        entries.append(entry)
        key = (entry.total, case.created_at, case.case_id)
        if best_key is None or key > best_key:
            best, best_key = case, key
    return best, SimilarityVector(tuple(entries))


@dataclass(frozen=True)
class Revision:
    outcome: str
    case_id: str | None = None


def revise(cb: CaseBase, s: Situation, feedback: UserPreference, best_total: float | Fraction | None = None,
           *, taxonomies: Taxonomies | None = None, at: datetime | None = None) -> Revision:
    """Fold feedback gathered in situation ``s`` into the case base.

    Empty feedback is skipped. Feedback for a situation already stored is
    merged into that case (scores add). Otherwise a new case is appended,
    created at ``at`` or, by default, at the latest ``last_seen`` of the
    feedback documents.

    ``best_total`` is the retrieval total for ``s``, if known. Exact-match
    detection uses situation equality; a total of 3 that disagrees with it
    is logged and ignored.
    """
    if taxonomies is not None:
        s.validate(taxonomies)
    if len(feedback) == 0:
        return Revision(SKIPPED)
    existing = cb.find(s)
    if best_total is not None and (abs(float(best_total) - 3.0) <= EXACT_MATCH_TOL) != (existing is not None):
        logger.warning("best_total %s disagrees with exact-match lookup for %s", best_total, s)
    if existing is not None:
        existing.preference = existing.preference.merged(feedback)
        return Revision(MERGED, existing.case_id)
    created = at if at is not None else max(doc.last_seen for doc in feedback)
    case = Case(cb.next_case_id(), s, feedback, parse_timestamp(created))
    cb.add(case)
    return Revision(ADDED, case.case_id)


# -- persistence ------------------------------------------------------------


def to_document(cb: CaseBase) -> dict[str, Any]:
    return {
        "version": FORMAT_VERSION,
        "cases": [
            {
                "case_id": case.case_id,
                "situation": case.situation.to_dict(),
                "preference": [
                    {"doc_id": d.doc_id, "score": d.score, "last_seen": format_timestamp(d.last_seen)}
                    for d in case.preference
                ],
                "created_at": format_timestamp(case.created_at),
                "last_matched_at": None if case.last_matched_at is None else format_timestamp(case.last_matched_at),
            }
            for case in cb
        ],
    }


def save(cb: CaseBase) -> str:
    """Serialize the case base as a JSON document."""
    return json.dumps(to_document(cb), indent=2) + "\n"


def load(document: str | Mapping[str, Any], taxonomies: Taxonomies | None = None) -> CaseBase:
    """Parse a case-base document; with ``taxonomies``, reject stale concept ids."""
    if isinstance(document, str):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise CaseBaseError(f"case base is not valid JSON: {exc}") from exc
    if not isinstance(document, Mapping) or "cases" not in document:
        raise CaseBaseError("case base document needs a 'cases' list")
    version = document.get("version")
    if version != FORMAT_VERSION:
        raise CaseBaseError(f"unsupported case base version {version!r}")
    cb = CaseBase()
    for i, raw in enumerate(document["cases"]):
        try:
            situation = Situation.from_dict(raw["situation"])
            if taxonomies is not None:
                _check_situation(taxonomies, situation, raw["case_id"])
            pref = UserPreference(
                PreferenceDoc(d["doc_id"], float(d["score"]), d["last_seen"]) for d in raw["preference"]
            )
            last = raw.get("last_matched_at")
            case = Case(
                case_id=str(raw["case_id"]),
                situation=situation,
                preference=pref,
                created_at=parse_timestamp(raw["created_at"]),
                last_matched_at=None if last is None else parse_timestamp(last),
            )
        except StaleConceptError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise CaseBaseError(f"case #{i} is malformed: {exc}") from exc
        cb.add(case)
    return cb


def write_casebase(cb: CaseBase, path: str | Path) -> None:
    """Write atomically: a temporary sibling file is renamed over ``path``."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(save(cb))
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def read_casebase(path: str | Path, taxonomies: Taxonomies | None = None) -> CaseBase:
    return load(Path(path).read_text(encoding="utf-8"), taxonomies)


def _check_situation(taxonomies: Taxonomies, situation: Situation, case_id: str) -> None:
    for dim, concept in zip(DIMENSIONS, situation):
        if concept not in taxonomies.for_dimension(dim):
            raise StaleConceptError(case_id, dim, concept)


