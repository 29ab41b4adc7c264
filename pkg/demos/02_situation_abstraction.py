"""
From sensor readings to a situation
===================================

A raw snapshot (GPS fix, timestamp, agenda contact) is mapped into one
concept per dimension: a nearby place, a calendar class and a social role.
"""

from importlib import resources

from situcbr import SensorSnapshot, Taxonomies, haversine_m, identify_situation, load_taxonomy
from situcbr.situation import read_context_maps

data = resources.files("situcbr") / "data"
taxonomies = Taxonomies(*(
    load_taxonomy((data / "ontologies" / f"{dim}.json").read_text())
    for dim in ("location", "time", "social")
))
with resources.as_file(data / "mappings") as mappings:
    maps = read_context_maps(mappings, taxonomies)

# %%
# The Eiffel Tower is about 4.3 km from the Paris centre point, well inside
# its 8 km radius.
paris = next(p for p in maps.places.records if p.place_id == "paris_centre")
print(f"{haversine_m(48.8584, 2.2945, paris.latitude, paris.longitude):.0f} m")

# %%
# A Monday lunch with a known client.
snap = SensorSnapshot(48.8584, 2.2945, "2011-10-03T12:10:00+02:00", "Henri Lambert")
print(identify_situation(snap, maps.places, maps.rules, maps.contacts))

# %%
# Bastille Day falls on the holiday calendar; an unknown contact falls back
# to the directory default (a warning is logged).
snap = SensorSnapshot(50.63, 3.06, "2011-07-14T10:00:00+02:00", "Someone Else")
print(identify_situation(snap, maps.places, maps.rules, maps.contacts))

# %%
# Far from every known place, the location is the root concept.
snap = SensorSnapshot(43.30, 5.37, "2011-10-08T09:00:00+02:00", None)
print(identify_situation(snap, maps.places, maps.rules, maps.contacts))
