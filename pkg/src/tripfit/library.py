"""Protection-library files: base schemes, series combinations, fraction tables.

Library layout (JSON)::

    {
      "units": {"tau_break": "seconds", "v_threshold": "percent_of_nominal"},
      "base_schemes": {"P1": {"steps": [[0.05, 55.0], [0.8, 62.0]]}},
      "combinations": {"P1-P4-P5": ["P1", "P4", "P5"]},
      "motor_classes": ["A", "B", "C", "D"],
      "fraction_table": {"P2-P4": [0.09, 0.08, 0.0, 0.0]},
      "composites": {"mixed_commercial": {"P1": 0.15, "...": 0.85}}
    }

Steps are (tau_break seconds, v_threshold percent-of-nominal) staircase pairs.
A combination key must equal the sorted hyphen-join of its member names and
its zone is the union of the members' zones.  `fraction_table` rows carry one
load fraction per motor class; every class column must sum to 1.
`composites` are extra named fraction maps (used for ad-hoc test mixes).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .protection import (
    FRACTION_SUM_TOL,
    CompositeProtection,
    ProtectionScheme,
    TripZone,
    combine_schemes,
)

EXPECTED_UNITS = {"tau_break": "seconds", "v_threshold": "percent_of_nominal"}

BUILTIN = "builtin"


@dataclass(frozen=True)
class ProtectionLibrary:
    """Parsed protection library: resolved schemes plus fraction tables."""

    schemes: dict[str, ProtectionScheme]
    motor_classes: tuple[str, ...]
    fraction_table: dict[str, tuple[float, ...]]
    composites: dict[str, dict[str, float]]
    source: str = "<memory>"

    def scheme(self, name: str) -> ProtectionScheme:
        try:
            return self.schemes[name]
        except KeyError:
            raise KeyError(f"unknown protection scheme {name!r} in library {self.source}") from None

    def targets(self) -> tuple[str, ...]:
        """Keys accepted by composite(): motor classes plus named composites."""
        return tuple(self.motor_classes) + tuple(sorted(self.composites))

    def composite(self, key: str) -> CompositeProtection:
        """Composite protection for a motor class letter or a named composite."""
        if key in self.motor_classes:
            col = self.motor_classes.index(key)
            fractions = {name: row[col] for name, row in self.fraction_table.items()}
        elif key in self.composites:
            fractions = self.composites[key]
        else:
            raise KeyError(f"unknown composite target {key!r}; have {self.targets()}")
        entries = tuple(
            (self.scheme(name), pi) for name, pi in fractions.items() if pi != 0.0
        )
        if not entries:
            raise ValueError(f"composite {key!r} has no nonzero fractions")
        return CompositeProtection(entries)


def _parse_steps(raw, where: str) -> TripZone:
    if not isinstance(raw, list):
        raise ValueError(f"{where}: steps must be a list of [tau_break, v_threshold] pairs")
    steps = []
    for k, pair in enumerate(raw):
        if not (isinstance(pair, (list, tuple)) and len(pair) == 2):
            raise ValueError(f"{where}: step {k} must be a [tau_break, v_threshold] pair")
        steps.append((float(pair[0]), float(pair[1])))
    try:
        return TripZone(tuple(steps))
    except ValueError as exc:
        raise ValueError(f"{where}: {exc}") from None


def parse_library(doc: dict, source: str = "<memory>") -> ProtectionLibrary:
    """Validate a decoded library document and resolve all schemes."""
    if not isinstance(doc, dict):
        raise ValueError(f"{source}: library document must be a JSON object")
    units = doc.get("units")
    if units != EXPECTED_UNITS:
        raise ValueError(
            f"{source}: units must be exactly {EXPECTED_UNITS} (got {units!r}); "
            "values are interpreted in those units"
        )

    schemes: dict[str, ProtectionScheme] = {}
    base = doc.get("base_schemes", {})
    if not base:
        raise ValueError(f"{source}: base_schemes must be non-empty")
    for name, entry in base.items():
        zone = _parse_steps(entry.get("steps", []), f"{source}: base_schemes[{name!r}]")
        schemes[name] = ProtectionScheme(name, zone)

    for name, members in doc.get("combinations", {}).items():
        if name in schemes:
            raise ValueError(f"{source}: combination {name!r} clashes with a base scheme")
        try:
            combined = combine_schemes([schemes[m] for m in members])
        except KeyError as exc:
            raise ValueError(f"{source}: combination {name!r} references unknown base {exc}") from None
        if combined.name != name:
            raise ValueError(
                f"{source}: combination key {name!r} must be the sorted hyphen-join "
                f"of its members ({combined.name!r})"
            )
        schemes[name] = combined

    motor_classes = tuple(doc.get("motor_classes", []))
    table_raw = doc.get("fraction_table", {})
    fraction_table: dict[str, tuple[float, ...]] = {}
    for name, row in table_raw.items():
        if name not in schemes:
            raise ValueError(f"{source}: fraction_table row {name!r} is not a known scheme")
        if len(row) != len(motor_classes):
            raise ValueError(
                f"{source}: fraction_table[{name!r}] must have one value per motor class "
                f"({len(motor_classes)}), got {len(row)}"
            )
        fraction_table[name] = tuple(float(x) for x in row)
    for col, motor in enumerate(motor_classes):
        total = sum(row[col] for row in fraction_table.values())
        if abs(total - 1.0) > FRACTION_SUM_TOL:
            raise ValueError(
                f"{source}: motor {motor!r} fractions sum to {total!r}, expected 1.0"
            )

    composites: dict[str, dict[str, float]] = {}
    for key, fractions in doc.get("composites", {}).items():
        if key in motor_classes:
            raise ValueError(f"{source}: composite {key!r} clashes with a motor class")
        for name in fractions:
            if name not in schemes:
                raise ValueError(f"{source}: composite {key!r} references unknown scheme {name!r}")
        total = sum(float(x) for x in fractions.values())
        if abs(total - 1.0) > FRACTION_SUM_TOL:
            raise ValueError(f"{source}: composite {key!r} fractions sum to {total!r}, expected 1.0")
        composites[key] = {name: float(x) for name, x in fractions.items()}

    return ProtectionLibrary(schemes, motor_classes, fraction_table, composites, source)


def library_to_jsonable(lib: ProtectionLibrary) -> dict:
    """Inverse of parse_library for round-tripping; combinations re-derived."""
    base = {}
    combos = {}
    for name, scheme in lib.schemes.items():
        if "-" in name:
            combos[name] = name.split("-")
        else:
            base[name] = {"steps": [list(step) for step in scheme.zone.steps]}
    return {
        "units": dict(EXPECTED_UNITS),
        "base_schemes": base,
        "combinations": combos,
        "motor_classes": list(lib.motor_classes),
        "fraction_table": {name: list(row) for name, row in lib.fraction_table.items()},
        "composites": {key: dict(val) for key, val in lib.composites.items()},
    }


def load_library(path: str | Path) -> ProtectionLibrary:
    """Load a library from a JSON file, or the bundled one for 'builtin'."""
    if str(path) == BUILTIN:
        return default_library()
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return parse_library(doc, source=str(path))


def default_library() -> ProtectionLibrary:
    """The bundled illustrative library (example data, not field settings)."""
    text = resources.files("tripfit").joinpath("data/protection_library.json").read_text()
    return parse_library(json.loads(text), source=BUILTIN)
