"""
A full session: lunch with a client
===================================

Scaffold a project, ask for a recommendation, then replay the bundled
scenario in which the user clicks and saves documents afterwards.
"""

import json
import tempfile
from pathlib import Path

from situcbr import SensorSnapshot
from situcbr.project import ProjectLayout, commit, init_project, open_engine
from situcbr.recommender import replay_scenario

root = Path(tempfile.mkdtemp()) / "project"
layout = init_project(root)
print(sorted(p.name for p in root.iterdir()))

# %%
# A single query. The matching case is an exact situation match, so the
# total is 3 and clears the default threshold of 2.4.
engine = open_engine(layout)
snap = SensorSnapshot(48.8584, 2.2945, "2011-10-03T12:10:00+02:00", "Henri Lambert")
result = engine.recommend(snap)
print(result.decision, result.matched_case_id, result.total_similarity, result.docs)

# %%
# Lunch with a friend instead of the client: the social match drops and
# the best total falls below the threshold.
with_friend = SensorSnapshot(48.8584, 2.2945, "2011-10-03T12:10:00+02:00", "Julien Petit")
result = engine.recommend(with_friend)
print(result.decision, result.matched_case_id, result.total_similarity)

# %%
# Replay the scenario in a fresh engine and persist the outcome.
engine = open_engine(layout)
report = replay_scenario(engine, (layout.scenarios / "paul.jsonl").read_text().splitlines())
commit(engine, layout)
print(json.dumps(report.to_dict()["summary"], indent=2))

# %%
# The feedback merged into the matched case; the journal records each step.
print([(d.doc_id, d.score) for d in engine.casebase.get("case_003").preference.ranked()])
print([json.loads(line)["kind"] for line in layout.history.read_text().splitlines()])
