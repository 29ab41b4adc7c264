"""Random taxonomies and case bases for property and equivalence tests."""

from __future__ import annotations

import random
from datetime import datetime, timedelta, timezone

from situcbr.casebase import Case, CaseBase, PreferenceDoc, UserPreference
from situcbr.situation import Situation
from situcbr.taxonomy import DIMENSIONS, Taxonomies, Taxonomy

import oracles

EPOCH = datetime(2011, 1, 1, tzinfo=timezone.utc)


def random_world(rng: random.Random, max_nodes: int = 50):
    """Three random trees; returns (Taxonomies, parent maps)."""
    maps = tuple(oracles.random_parents(rng, rng.randint(1, max_nodes), f"{d[0]}") for d in DIMENSIONS)
    taxes = Taxonomies(*(
        Taxonomy.from_nodes(d, [{"id": k, "label": k, "parent": v} for k, v in pm.items()])
        for d, pm in zip(DIMENSIONS, maps)
    ))
    return taxes, maps


def random_situation(rng: random.Random, maps) -> Situation:
    return Situation(*(rng.choice(sorted(pm)) for pm in maps))


def random_preference(rng: random.Random, at: datetime, n_max: int = 4) -> UserPreference:
    ids = rng.sample(range(20), rng.randint(1, n_max))
    return UserPreference(PreferenceDoc(f"doc_{i}", float(rng.randint(1, 9)), at) for i in ids)


def random_casebase(rng: random.Random, maps, n_cases: int, distinct_times: bool = False) -> CaseBase:
    """Up to ``n_cases`` cases with distinct situations.

    ``created_at`` values collide often unless ``distinct_times`` is set, so
    tie-breaking paths get exercised.
    """
    cb = CaseBase()
    capacity = 1
    for pm in maps:
        capacity *= len(pm)
    attempts = 0
    while len(cb) < min(n_cases, capacity) and attempts < 20 * n_cases:
        attempts += 1
        s = random_situation(rng, maps)
        if cb.find(s) is not None:
            continue
        offset = len(cb) if distinct_times else rng.randint(0, 5)
        created = EPOCH + timedelta(hours=offset)
        cb.add(Case(f"c{rng.randrange(10**6):06d}_{len(cb)}", s, random_preference(rng, created), created))
    return cb
