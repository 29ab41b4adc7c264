"""
Retrieval and revision over a case base
=======================================

A case pairs a past situation with the documents the user engaged with
there. A query situation is scored against every case, one similarity per
dimension, and the best total wins.
"""

from datetime import datetime, timezone
from importlib import resources

from situcbr import PreferenceDoc, Situation, Taxonomies, UserPreference, load_taxonomy, retrieve_best, revise
from situcbr.casebase import load

data = resources.files("situcbr") / "data"
taxonomies = Taxonomies(*(
    load_taxonomy((data / "ontologies" / f"{dim}.json").read_text())
    for dim in ("location", "time", "social")
))
cb = load((data / "casebase.json").read_text(), taxonomies)

# %%
# Three stored cases.
for case in cb:
    print(case.case_id, tuple(case.situation))

# %%
# Query: a workday in Paris with a champagne client.
s = Situation("paris", "workday", "champagne_client")
best, vector = retrieve_best(taxonomies, cb, s)
for entry in vector.entries:
    print(f"{entry.case_id}: {entry.location} + {entry.time} + {entry.social} = {entry.total}")
print("best:", best.case_id)

# %%
# Feedback in a situation already stored merges scores into that case.
at = datetime(2011, 10, 3, 12, 30, tzinfo=timezone.utc)
print(revise(cb, s, UserPreference([PreferenceDoc("up3_doc_a", 1.0, at)]), taxonomies=taxonomies))
print([(d.doc_id, d.score) for d in cb.get("case_003").preference.ranked()])

# %%
# Feedback anywhere else becomes a new case.
other = Situation("lille", "workday", "manager")
print(revise(cb, other, UserPreference([PreferenceDoc("memo", 2.0, at)]), taxonomies=taxonomies))
print(len(cb), "cases")
