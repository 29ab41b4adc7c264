"""Situation-aware recommendation with case-based reasoning.

Raw context (GPS fix, clock, agenda contact) is abstracted into a
(location, time, social) situation over three concept taxonomies. Past
situations and the documents the user engaged with in them form a case
base; a query recommends the documents of the most similar past situation
when it is similar enough, and feedback revises the case base.

Quick tour::

    from situcbr import load_taxonomy, concept_similarity
    loc = load_taxonomy(open("ontologies/location.json").read())
    concept_similarity(loc, "paris", "evry")   # Fraction(2, 3)
"""

from situcbr.casebase import (
    Case,
    CaseBase,
    CaseBaseError,
    PreferenceDoc,
    Revision,
    SimilarityEntry,
    SimilarityVector,
    StaleConceptError,
    UserPreference,
    retrieve_best,
    revise,
    situation_similarity,
)
from situcbr.recommender import (
    Engine,
    EngineConfig,
    HistoryEvent,
    HistoryJournal,
    RecommendationResult,
    ReplayReport,
    replay_scenario,
)
from situcbr.situation import (
    ContactDirectory,
    ContextMaps,
    PlaceRecord,
    PlaceTable,
    SensorSnapshot,
    Situation,
    TimeRule,
    TimeRuleSet,
    haversine_m,
    identify_situation,
    resolve_location,
    resolve_social,
    resolve_time,
)
from situcbr.taxonomy import (
    DIMENSIONS,
    ConceptNode,
    Taxonomies,
    Taxonomy,
    TaxonomyError,
    concept_similarity,
    depth,
    lcs,
    load_taxonomy,
)

__version__ = "0.1.0"
