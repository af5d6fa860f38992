"""Jurisdiction-level solar zoning ordinances and scenario transforms.

An ordinance record captures what a jurisdiction's zoning code says about
utility-scale solar in agricultural districts.  Under permissive zoning a
code that is silent about solar excludes it, so silence is treated as a
de facto ban in the baseline scenario; the progressive scenario instead
fills silent jurisdictions with an ordinance sampled from the observed
permissive ones.
"""

from __future__ import annotations

import csv
import enum
import math
import random
from dataclasses import dataclass
from typing import IO, Iterable

from .errors import OrdinanceParseError, ValidationError


class ScenarioKind(enum.Enum):
    UNREGULATED = "unregulated"
    BASELINE = "baseline"
    PROGRESSIVE = "progressive"


_NUMERIC_RULE_FIELDS = (
    "road_setback_m",
    "ppl_setback_m",
    "nppl_setback_m",
    "min_lot_size_m2",
    "max_lot_size_m2",
)


@dataclass(frozen=True)
class OrdinanceRecord:
    """One jurisdiction's zoning stance toward solar in agricultural zones.

    ``silent`` means the jurisdiction is zoned but its code never mentions
    solar.  ``allows_ses_in_ag`` is only meaningful for zoned, non-silent
    jurisdictions and must be None otherwise; the numeric rules are only
    meaningful when solar is allowed.  Absent numeric rules are None.
    """

    jurisdiction_id: str
    zoned: bool
    silent: bool = False
    allows_ses_in_ag: bool | None = None
    road_setback_m: float | None = None
    ppl_setback_m: float | None = None
    nppl_setback_m: float | None = None
    min_lot_size_m2: float | None = None
    max_lot_size_m2: float | None = None

    def __post_init__(self):
        if not self.jurisdiction_id:
            raise ValidationError("jurisdiction_id must be non-empty")
        if self.silent and not self.zoned:
            raise ValidationError(
                f"jurisdiction {self.jurisdiction_id!r}: silent requires zoned"
            )
        regulates = self.zoned and not self.silent
        if regulates and self.allows_ses_in_ag is None:
            raise ValidationError(
                f"jurisdiction {self.jurisdiction_id!r}: zoned non-silent record "
                "must state allows_ses_in_ag"
            )
        if not regulates and self.allows_ses_in_ag is not None:
            raise ValidationError(
                f"jurisdiction {self.jurisdiction_id!r}: allows_ses_in_ag is only "
                "meaningful for zoned, non-silent jurisdictions"
            )
        carries_rules = any(
            getattr(self, name) is not None for name in _NUMERIC_RULE_FIELDS
        )
        if carries_rules and not (regulates and self.allows_ses_in_ag):
            raise ValidationError(
                f"jurisdiction {self.jurisdiction_id!r}: numeric rules are only "
                "meaningful when solar is allowed"
            )
        for name in _NUMERIC_RULE_FIELDS:
            value = getattr(self, name)
            if value is None:
                continue
            if not math.isfinite(value) or value < 0:
                raise ValidationError(
                    f"jurisdiction {self.jurisdiction_id!r}: {name} must be "
                    f"finite and non-negative, got {value!r}"
                )
        if (
            self.min_lot_size_m2 is not None
            and self.max_lot_size_m2 is not None
            and self.max_lot_size_m2 < self.min_lot_size_m2
        ):
            raise ValidationError(
                f"jurisdiction {self.jurisdiction_id!r}: max_lot_size_m2 < "
                "min_lot_size_m2"
            )


@dataclass(frozen=True)
class EffectiveRule:
    """Resolved constraints a scenario applies to one jurisdiction's land.

    Absent setbacks resolve to 0 and an absent maximum lot size to +inf, so
    every rule is directly applicable to geometry.
    """

    banned: bool
    road_setback_m: float = 0.0
    ppl_setback_m: float = 0.0
    nppl_setback_m: float = 0.0
    min_lot_size_m2: float = 0.0
    max_lot_size_m2: float = math.inf

    def __post_init__(self):
        for name in ("road_setback_m", "ppl_setback_m", "nppl_setback_m",
                     "min_lot_size_m2"):
            value = getattr(self, name)
            if math.isnan(value) or value < 0 or math.isinf(value):
                raise ValidationError(f"{name} must be finite and non-negative")
        if math.isnan(self.max_lot_size_m2) or self.max_lot_size_m2 < 0:
            raise ValidationError("max_lot_size_m2 must be non-negative")
        if self.max_lot_size_m2 < self.min_lot_size_m2:
            raise ValidationError("max_lot_size_m2 < min_lot_size_m2")

    @classmethod
    def banned_rule(cls) -> "EffectiveRule":
        return cls(banned=True)

    @classmethod
    def permitted(cls, road: float = 0.0, ppl: float = 0.0, nppl: float = 0.0,
                  min_lot: float = 0.0, max_lot: float = math.inf) -> "EffectiveRule":
        return cls(
            banned=False,
            road_setback_m=road,
            ppl_setback_m=ppl,
            nppl_setback_m=nppl,
            min_lot_size_m2=min_lot,
            max_lot_size_m2=max_lot,
        )

    def rule_tuple(self) -> tuple:
        return (
            self.road_setback_m,
            self.ppl_setback_m,
            self.nppl_setback_m,
            self.min_lot_size_m2,
            self.max_lot_size_m2,
        )


UNRESTRICTED = EffectiveRule.permitted()

# Stand-in constraints for unzoned land: modest road and property-line
# setbacks, no lot-size limits.  Synthetic, supplied via configuration.
DEFAULT_UNZONED_RULE = EffectiveRule.permitted(road=15.0, ppl=15.0, nppl=30.0)

_COLUMNS = (
    "jurisdiction_id",
    "zoned",
    "silent",
    "allows_ses_in_ag",
    "road_setback_m",
    "ppl_setback_m",
    "nppl_setback_m",
    "min_lot_size_m2",
    "max_lot_size_m2",
)


def _parse_bool(cell: str, column: str, row_num: int):
    text = cell.strip().lower()
    if text == "":
        return None
    if text == "true":
        return True
    if text == "false":
        return False
    raise OrdinanceParseError(
        f"row {row_num}: column {column!r} must be true/false or empty, got {cell!r}"
    )


def _parse_float(cell: str, column: str, row_num: int):
    text = cell.strip()
    if text == "":
        return None
    try:
        return float(text)
    except ValueError as exc:
        raise OrdinanceParseError(
            f"row {row_num}: column {column!r} is not a number: {cell!r}"
        ) from exc


def parse_ordinance_db(source: IO[str] | Iterable[str]) -> list[OrdinanceRecord]:
    """Parse a CSV ordinance table into validated records.

    The stream must carry a header with at least ``jurisdiction_id`` and
    ``zoned``; the remaining rule columns are optional and empty cells mean
    "absent".  Duplicate jurisdiction ids and rows violating record
    invariants raise with the offending row named.
    """
    reader = csv.DictReader(source)
    if reader.fieldnames is None:
        raise OrdinanceParseError("ordinance table is empty (no header row)")
    header = [name.strip() for name in reader.fieldnames]
    for required in ("jurisdiction_id", "zoned"):
        if required not in header:
            raise OrdinanceParseError(
                f"ordinance table is missing required column {required!r}"
            )
    records: list[OrdinanceRecord] = []
    seen: set[str] = set()
    for row_num, row in enumerate(reader, start=2):
        jid = (row.get("jurisdiction_id") or "").strip()
        if not jid:
            raise OrdinanceParseError(f"row {row_num}: empty jurisdiction_id")
        if jid in seen:
            raise OrdinanceParseError(
                f"row {row_num}: duplicate jurisdiction {jid!r}"
            )
        seen.add(jid)
        zoned = _parse_bool(row.get("zoned") or "", "zoned", row_num)
        if zoned is None:
            raise OrdinanceParseError(f"row {row_num}: column 'zoned' is required")
        silent = _parse_bool(row.get("silent") or "", "silent", row_num)
        kwargs = {
            "jurisdiction_id": jid,
            "zoned": zoned,
            "silent": bool(silent),
            "allows_ses_in_ag": _parse_bool(
                row.get("allows_ses_in_ag") or "", "allows_ses_in_ag", row_num
            ),
        }
        for name in _NUMERIC_RULE_FIELDS:
            kwargs[name] = _parse_float(row.get(name) or "", name, row_num)
        try:
            records.append(OrdinanceRecord(**kwargs))
        except ValidationError as exc:
            raise ValidationError(f"row {row_num}: {exc}") from exc
    return records


def serialize_ordinance_db(records: Iterable[OrdinanceRecord], dest: IO[str]) -> None:
    """Write records as CSV such that a re-parse yields equal records."""
    writer = csv.writer(dest, lineterminator="\n")
    writer.writerow(_COLUMNS)
    for rec in records:
        row = []
        for column in _COLUMNS:
            value = getattr(rec, column)
            if value is None:
                row.append("")
            elif isinstance(value, bool):
                row.append("true" if value else "false")
            elif isinstance(value, float):
                row.append(repr(value))
            else:
                row.append(str(value))
        writer.writerow(row)


def record_to_rule(record: OrdinanceRecord) -> EffectiveRule:
    """Resolve a zoned, non-silent record to its effective constraints."""
    if not record.zoned or record.silent:
        raise ValidationError(
            f"jurisdiction {record.jurisdiction_id!r} does not regulate solar "
            "explicitly; use effective_rule with a scenario"
        )
    if not record.allows_ses_in_ag:
        return EffectiveRule.banned_rule()
    return EffectiveRule.permitted(
        road=record.road_setback_m or 0.0,
        ppl=record.ppl_setback_m or 0.0,
        nppl=record.nppl_setback_m or 0.0,
        min_lot=record.min_lot_size_m2 or 0.0,
        max_lot=(
            record.max_lot_size_m2
            if record.max_lot_size_m2 is not None
            else math.inf
        ),
    )


def effective_rule(
    record: OrdinanceRecord,
    scenario: ScenarioKind,
    unzoned_defaults: EffectiveRule = DEFAULT_UNZONED_RULE,
    sampled: EffectiveRule | None = None,
) -> EffectiveRule:
    """Map an ordinance record to the constraints a scenario applies.

    Unregulated ignores all ordinances.  Baseline treats silence as a ban
    (permissive-zoning semantics) and applies ``unzoned_defaults`` to
    unzoned jurisdictions.  Progressive is baseline except silent
    jurisdictions take ``sampled``, which the caller draws via
    ``progressive_fill``.
    """
    if scenario is ScenarioKind.UNREGULATED:
        return UNRESTRICTED
    if not record.zoned:
        return unzoned_defaults
    if record.silent:
        if scenario is ScenarioKind.BASELINE:
            return EffectiveRule.banned_rule()
        if sampled is None:
            raise ValidationError(
                f"jurisdiction {record.jurisdiction_id!r}: progressive scenario "
                "requires a sampled rule for silent jurisdictions"
            )
        return sampled
    return record_to_rule(record)


def permissive_rule_pool(records: Iterable[OrdinanceRecord]) -> list[EffectiveRule]:
    """Distinct permitted rules observed in the table, deterministically ordered."""
    pool: dict[tuple, EffectiveRule] = {}
    for rec in records:
        if rec.zoned and not rec.silent and rec.allows_ses_in_ag:
            rule = record_to_rule(rec)
            pool.setdefault(rule.rule_tuple(), rule)
    return [pool[key] for key in sorted(pool)]


def progressive_fill(
    records: list[OrdinanceRecord],
    seed: int,
    unzoned_defaults: EffectiveRule = DEFAULT_UNZONED_RULE,
) -> dict[str, EffectiveRule]:
    """Resolve every jurisdiction under the progressive scenario.

    Silent jurisdictions draw uniformly (seeded) from the pool of distinct
    permissive ordinances in ``records``; all other jurisdictions resolve
    exactly as in baseline.
    """
    pool = permissive_rule_pool(records)
    if not pool:
        raise ValidationError("no permissive ordinances to sample")
    rng = random.Random(seed)
    resolved: dict[str, EffectiveRule] = {}
    for rec in records:
        if rec.zoned and rec.silent:
            resolved[rec.jurisdiction_id] = pool[rng.randrange(len(pool))]
        else:
            resolved[rec.jurisdiction_id] = effective_rule(
                rec, ScenarioKind.BASELINE, unzoned_defaults
            )
    return resolved


def scenario_rules(
    records: list[OrdinanceRecord],
    scenario: ScenarioKind,
    seed: int = 0,
    unzoned_defaults: EffectiveRule = DEFAULT_UNZONED_RULE,
) -> dict[str, EffectiveRule]:
    """Resolve every jurisdiction in ``records`` for one scenario."""
    if scenario is ScenarioKind.PROGRESSIVE:
        return progressive_fill(records, seed, unzoned_defaults)
    return {
        rec.jurisdiction_id: effective_rule(rec, scenario, unzoned_defaults)
        for rec in records
    }
