"""On-disk project layout: taxonomies, mapping tables, case base and history."""

from __future__ import annotations

import json
import shutil
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from situcbr.casebase import read_casebase, write_casebase
from situcbr.recommender import Engine, EngineConfig, HistoryJournal
from situcbr.situation import read_context_maps
from situcbr.taxonomy import DIMENSIONS, Taxonomies, read_taxonomy

LOCK_NAME = ".situcbr.lock"


class ProjectError(ValueError):
    pass


@dataclass(frozen=True)
class ProjectLayout:
    root: Path

    def __post_init__(self):
        object.__setattr__(self, "root", Path(self.root))

    @property
    def config(self) -> Path:
        return self.root / "config.json"

    @property
    def ontologies(self) -> Path:
        return self.root / "ontologies"

    @property
    def mappings(self) -> Path:
        return self.root / "mappings"

    @property
    def casebase(self) -> Path:
        return self.root / "casebase.json"

    @property
    def history(self) -> Path:
        return self.root / "history.jsonl"

    @property
    def scenarios(self) -> Path:
        return self.root / "scenarios"

    @property
    def lock(self) -> Path:
        return self.root / LOCK_NAME

    def taxonomy_path(self, dimension: str) -> Path:
        return self.ontologies / f"{dimension}.json"

    def required_files(self) -> list[Path]:
        return [
            self.config,
            *(self.taxonomy_path(d) for d in DIMENSIONS),
            self.mappings / "places.csv",
            self.mappings / "time_rules.json",
            self.mappings / "contacts.csv",
            self.casebase,
        ]

    def resolve_scenario(self, name: str | Path) -> Path:
        """Find a scenario by path, trying the project root and a ``.jsonl`` suffix."""
        p = Path(name)
        candidates = [p, p.with_name(p.name + ".jsonl")]
        if not p.is_absolute():
            candidates += [self.root / c for c in candidates]
        for c in candidates:
            if c.is_file():
                return c
        raise ProjectError(f"scenario {str(name)!r} not found")


def init_project(path: str | Path) -> ProjectLayout:
    """Write the bundled demonstration project into an empty or absent directory."""
    layout = ProjectLayout(Path(path))
    if layout.root.exists():
        if not layout.root.is_dir():
            raise ProjectError(f"{layout.root} exists and is not a directory")
        if any(layout.root.iterdir()):
            raise ProjectError(f"{layout.root} is not empty")
    layout.root.mkdir(parents=True, exist_ok=True)
    data = resources.files("situcbr") / "data"
    with resources.as_file(data) as src:
        shutil.copytree(src, layout.root, dirs_exist_ok=True)
    layout.history.touch()
    return layout


def load_taxonomies(layout: ProjectLayout) -> Taxonomies:
    loaded = {}
    for dim in DIMENSIONS:
        tax = read_taxonomy(layout.taxonomy_path(dim))
        if tax.dimension != dim:
            raise ProjectError(f"{layout.taxonomy_path(dim)} declares dimension {tax.dimension!r}")
        loaded[dim] = tax
    return Taxonomies(**loaded)


def load_config(layout: ProjectLayout) -> EngineConfig:
    return EngineConfig.from_dict(json.loads(layout.config.read_text(encoding="utf-8")))


def open_engine(layout: ProjectLayout, config: EngineConfig | None = None) -> Engine:
    """Load and validate every project file; raise :class:`ProjectError` on any failure."""
    missing = [str(p) for p in layout.required_files() if not p.is_file()]
    if missing:
        raise ProjectError(f"project at {layout.root} is missing: {', '.join(missing)}")
    try:
        taxonomies = load_taxonomies(layout)
        maps = read_context_maps(layout.mappings, taxonomies)
        casebase = read_casebase(layout.casebase, taxonomies)
        cfg = load_config(layout) if config is None else config
    except ProjectError:
        raise
    except (ValueError, OSError) as exc:
        raise ProjectError(f"invalid project at {layout.root}: {exc}") from exc
    return Engine(taxonomies, maps, casebase, cfg, HistoryJournal(layout.history))


def commit(engine: Engine, layout: ProjectLayout) -> None:
    write_casebase(engine.casebase, layout.casebase)
    engine.journal.flush()
