"""Closed-form bounds on the decomposition count and ground-state degeneracy.

All formulas use the sorted extents L1 <= L2 <= L3 and return exact ints.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

from .decomp import CountResult
from .lattice import TorusSpec


class BracketViolation(AssertionError):
    """A computed quantity falls outside the proven bounds: the code is wrong."""


def _spec(spec) -> TorusSpec:
    return spec if isinstance(spec, TorusSpec) else TorusSpec(*spec)


def theorem1_lower(spec) -> int:
    """Rotated-column lower bound 2^(L1 L2/4) + 2^(L1 L3/4) + 2^(L2 L3/4)."""
    L1, L2, L3 = _spec(spec).extents
    return 2 ** (L1 * L2 // 4) + 2 ** (L1 * L3 // 4) + 2 ** (L2 * L3 // 4)


def layer_configurations(La: int, Lb: int) -> int:
    """Per-plane count 4 (2^(La/2) + 2^(Lb/2)) used by the upper bound."""
    return 4 * (2 ** (La // 2) + 2 ** (Lb // 2))


def theorem1_upper(spec) -> int:
    """Sum over the three plane orientations of independently filled layers."""
    L1, L2, L3 = _spec(spec).extents
    return (
        layer_configurations(L1, L2) ** L3
        + layer_configurations(L1, L3) ** L2
        + layer_configurations(L2, L3) ** L1
    )


def theorem2_lower(spec) -> int:
    """Independent rotations of the columns perpendicular to the yz-plane."""
    _, L2, L3 = _spec(spec).extents
    return 2 ** (L2 * L3 // 4)


@dataclass
class BoundsReport:
    spec: TorusSpec
    theorem1_lower: int
    theorem1_upper: int
    theorem2_lower: int
    omega4: CountResult | None = None
    span_rank: int | None = None
    span_includes_family: bool = False
    checks: dict[str, bool] = field(default_factory=dict)

    CSV_FIELDS = ("spec", "t1_lower", "omega4", "t1_upper", "t2_lower", "span_rank", "s4", "complete")

    @property
    def s4(self) -> float | None:
        if self.omega4 is None or self.omega4.count <= 0:
            return None
        return math.log(self.omega4.count)

    @property
    def s4_bounds(self) -> tuple[float, float]:
        return math.log(self.theorem1_lower), math.log(self.theorem1_upper)

    def to_json_dict(self) -> dict:
        lo, hi = self.s4_bounds
        return {
            "spec": list(self.spec.extents),
            "theorem1Lower": str(self.theorem1_lower),
            "theorem1Upper": str(self.theorem1_upper),
            "theorem2Lower": str(self.theorem2_lower),
            "omega4": None if self.omega4 is None else str(self.omega4.count),
            "omega4Complete": None if self.omega4 is None else self.omega4.completed,
            "omega4Nodes": None if self.omega4 is None else self.omega4.nodes,
            "spanRank": self.span_rank,
            "spanIncludesFamily": self.span_includes_family,
            "s4": self.s4,
            "s4Lower": lo,
            "s4Upper": hi,
            "checks": dict(self.checks),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)

    @classmethod
    def from_json_dict(cls, obj: dict) -> "BoundsReport":
        spec = TorusSpec(*obj["spec"])
        omega = None
        if obj.get("omega4") is not None:
            omega = CountResult(str(spec), int(obj["omega4"]), obj.get("omega4Nodes") or 0, 0.0, bool(obj["omega4Complete"]))
        return cls(
            spec,
            int(obj["theorem1Lower"]),
            int(obj["theorem1Upper"]),
            int(obj["theorem2Lower"]),
            omega,
            obj.get("spanRank"),
            bool(obj.get("spanIncludesFamily")),
            dict(obj.get("checks", {})),
        )

    def csv_row(self) -> dict:
        return {
            "spec": str(self.spec),
            "t1_lower": str(self.theorem1_lower),
            "omega4": "" if self.omega4 is None else str(self.omega4.count),
            "t1_upper": str(self.theorem1_upper),
            "t2_lower": str(self.theorem2_lower),
            "span_rank": "" if self.span_rank is None else str(self.span_rank),
            "s4": "" if self.s4 is None else repr(self.s4),
            "complete": "" if self.omega4 is None else str(self.omega4.completed).lower(),
        }

    def to_csv(self, header: bool = True) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=self.CSV_FIELDS, lineterminator="\n")
        if header:
            w.writeheader()
        w.writerow(self.csv_row())
        return buf.getvalue()


def assemble_report(
    spec,
    omega4: CountResult | int | None = None,
    span_rank: int | None = None,
    span_includes_family: bool = False,
) -> BoundsReport:
    """Compare computed quantities with the bounds; raise on any violation.

    A partial (budget-limited) count is only checked against the lower bound,
    since it is a lower witness for the true count.
    """
    spec = _spec(spec)
    if isinstance(omega4, int):
        omega4 = CountResult(str(spec), omega4, 0, 0.0, True)
    rep = BoundsReport(spec, theorem1_lower(spec), theorem1_upper(spec), theorem2_lower(spec), omega4, span_rank, span_includes_family)
    rep.checks["t1_lower<=t1_upper"] = rep.theorem1_lower <= rep.theorem1_upper
    if omega4 is not None:
        if omega4.completed or omega4.count >= rep.theorem1_lower:
            rep.checks["t1_lower<=omega4"] = rep.theorem1_lower <= omega4.count
        if omega4.completed:
            rep.checks["omega4<=t1_upper"] = omega4.count <= rep.theorem1_upper
    if span_rank is not None and span_includes_family:
        rep.checks["span_rank>=t2_lower"] = span_rank >= rep.theorem2_lower
    failed = [k for k, ok in rep.checks.items() if not ok]
    if failed:
        raise BracketViolation(f"bracket violation for {spec}: {', '.join(failed)}")
    return rep
