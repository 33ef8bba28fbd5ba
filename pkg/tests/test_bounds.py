import csv
import io
import itertools
import json
import math

import pytest

from flatband.bounds import (
    BoundsReport,
    BracketViolation,
    assemble_report,
    layer_configurations,
    theorem1_lower,
    theorem1_upper,
    theorem2_lower,
)
from flatband.decomp import CountResult
from flatband.lattice import TorusSpec


def test_values_444():
    assert theorem1_lower((4, 4, 4)) == 48
    assert layer_configurations(4, 4) == 32
    assert theorem1_upper((4, 4, 4)) == 3 * 32**4 == 3_145_728
    assert theorem2_lower((4, 4, 4)) == 16
    assert theorem2_lower((4, 4, 6)) == 64


def test_upper_bound_is_larger_for_all_small_specs():
    for spec in itertools.combinations_with_replacement((4, 6, 8), 3):
        assert theorem1_upper(spec) >= theorem1_lower(spec) >= theorem2_lower(spec)


def test_bounds_monotone_in_extents():
    sizes = (4, 6, 8, 10)
    for spec in itertools.combinations_with_replacement(sizes, 3):
        for k in range(3):
            bigger = list(spec)
            bigger[k] += 2
            for fn in (theorem1_lower, theorem1_upper, theorem2_lower):
                assert fn(bigger) >= fn(spec)


def test_argument_order_irrelevant():
    assert theorem1_upper((8, 4, 6)) == theorem1_upper((4, 6, 8))


@pytest.mark.parametrize("count", [200, 936, 6344, 4040])
def test_log_sandwich(count):
    specs = {200: (4, 4, 4), 936: (4, 4, 6), 6344: (4, 4, 8), 4040: (4, 6, 6)}
    rep = assemble_report(specs[count], count)
    lo, hi = rep.s4_bounds
    assert lo <= rep.s4 <= hi
    assert rep.s4 == pytest.approx(math.log(count))


def test_violation_raises():
    with pytest.raises(BracketViolation):
        assemble_report((4, 4, 4), 10)
    with pytest.raises(BracketViolation):
        assemble_report((4, 4, 4), 4_000_000)
    with pytest.raises(BracketViolation):
        assemble_report((4, 4, 4), 200, span_rank=3, span_includes_family=True)


def test_partial_count_not_checked_against_upper():
    partial = CountResult("4,4,4", 20, 100, 0.0, False)
    rep = assemble_report((4, 4, 4), partial)
    assert "omega4<=t1_upper" not in rep.checks
    assert "t1_lower<=omega4" not in rep.checks
    rep = assemble_report((4, 4, 4), CountResult("4,4,4", 60, 100, 0.0, False))
    assert rep.checks["t1_lower<=omega4"]


def test_report_roundtrip():
    rep = assemble_report(TorusSpec(4, 4, 4), 200, span_rank=200, span_includes_family=True)
    back = BoundsReport.from_json_dict(json.loads(rep.to_json()))
    assert back.to_json_dict() == rep.to_json_dict()
    header, row = csv.reader(io.StringIO(rep.to_csv()))
    assert header == ["spec", "t1_lower", "omega4", "t1_upper", "t2_lower", "span_rank", "s4", "complete"]
    assert row[:6] == ["4,4,4", "48", "200", "3145728", "16", "200"]
    assert float(row[6]) == rep.s4 and row[7] == "true"
