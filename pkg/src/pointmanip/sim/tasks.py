"""Task specifications and their on-disk TOML schema.

A task file is a TOML document with a [task] table, repeated [[instances]]
tables (train-time shape parameter pairs), and repeated [[holdout_instances]]
tables (shapes reserved for the pseudo-real split). See docs/task_schema.md.
"""

import sys
from dataclasses import dataclass
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from ..errors import ConfigError
from .objects import CATEGORIES

TABLE_BOUNDS = (0.20, -0.35, 0.80, 0.35)  # x0, y0, x1, y1 in the base frame
SUCCESS_PREDICATES = ("on_top_of", "stacked_inside")

_DATA_DIR = Path(__file__).resolve().parent / "task_data"


@dataclass(frozen=True)
class TaskSpec:
    task_id: str
    instruction: str
    source_object_category: str
    target_object_category: str
    success_predicate: str
    placement_region: tuple  # (x0, y0, x1, y1), meters
    instance_pool: tuple  # of {"source": {...}, "target": {...}}
    holdout_pool: tuple

    def __post_init__(self):
        x0, y0, x1, y1 = self.placement_region
        bx0, by0, bx1, by1 = TABLE_BOUNDS
        if not (bx0 <= x0 < x1 <= bx1 and by0 <= y0 < y1 <= by1):
            raise ConfigError(f"placement_region {self.placement_region} outside table bounds {TABLE_BOUNDS}")
        if not self.instance_pool:
            raise ConfigError("instance_pool must be non-empty")
        if self.success_predicate not in SUCCESS_PREDICATES:
            raise ConfigError(f"unknown success predicate {self.success_predicate!r}")
        for cat in (self.source_object_category, self.target_object_category):
            if cat not in CATEGORIES:
                raise ConfigError(f"unknown object category {cat!r}")


def _require(table: dict, key: str, where: str):
    if key not in table:
        raise ConfigError(f"{where}: missing required key {key!r}")
    return table[key]


def _parse_pairs(raw, where: str):
    pairs = []
    for i, entry in enumerate(raw):
        src = _require(entry, "source", f"{where}[{i}]")
        tgt = _require(entry, "target", f"{where}[{i}]")
        pairs.append({"source": dict(src), "target": dict(tgt)})
    return tuple(pairs)


def parse_task(doc: dict, origin: str = "<memory>") -> TaskSpec:
    task = _require(doc, "task", origin)
    region = _require(task, "placement_region", f"{origin}:[task]")
    if len(region) != 4:
        raise ConfigError(f"{origin}: placement_region must have 4 entries")
    return TaskSpec(
        task_id=_require(task, "id", f"{origin}:[task]"),
        instruction=_require(task, "instruction", f"{origin}:[task]"),
        source_object_category=_require(task, "source_category", f"{origin}:[task]"),
        target_object_category=_require(task, "target_category", f"{origin}:[task]"),
        success_predicate=_require(task, "success", f"{origin}:[task]"),
        placement_region=tuple(float(v) for v in region),
        instance_pool=_parse_pairs(doc.get("instances", []), f"{origin}:instances"),
        holdout_pool=_parse_pairs(doc.get("holdout_instances", []), f"{origin}:holdout_instances"),
    )


def load_task(path) -> TaskSpec:
    """Load a task TOML file; raises ConfigError with a line diagnostic."""
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"{path}: no such task file")
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}")
    return parse_task(doc, origin=str(path))


def builtin_task_names() -> list:
    return sorted(p.stem for p in _DATA_DIR.glob("*.toml"))


def builtin_task(name: str) -> TaskSpec:
    path = _DATA_DIR / f"{name}.toml"
    if not path.exists():
        raise ConfigError(f"unknown builtin task {name!r}; available: {builtin_task_names()}")
    return load_task(path)


def resolve_task(name_or_path: str) -> TaskSpec:
    """Accept either a builtin task name or a path to a task TOML file."""
    p = Path(name_or_path)
    if p.suffix == ".toml" or p.exists():
        return load_task(p)
    return builtin_task(name_or_path)
