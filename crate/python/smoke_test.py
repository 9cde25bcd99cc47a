"""Smoke test for the pygridrisk extension.

Build and install first:  pip install --no-build-isolation ./crates/py
"""

import json
import tempfile
from pathlib import Path

import pygridrisk as gr

grid = gr.Grid.tutorial()
assert grid.generator_ids == ["G1", "G2", "G3", "G4"], grid.generator_ids
assert gr.Grid.parse(grid.to_text()).load_ids == grid.load_ids

# Identical actuals attribute nothing.
same = gr.Day.tutorial(grid, "2020-07-08", "identical")
rep = gr.attribute(grid, same)
assert rep.relative_efficiency_gap == 0.0
assert all(v == 0.0 for row in rep.attribution for v in row)

# A wind shortfall lands on the wind plant.
short = gr.Day.tutorial(grid, "2020-07-08", "single_shortfall")
rep = gr.attribute(grid, short)
totals = dict(zip(rep.asset_ids, rep.asset_totals()))
assert totals["W1"] > 0, totals
assert rep.relative_efficiency_gap <= 0.05
assert len(rep.to_csv().splitlines()) == 1 + 24 * 9
assert "asset_totals" in json.loads(rep.summary_json())

assert f"{100 * gr.adjust_fraction(210.8, 20.0, 200.0):.1f}" == "95.4"
assert gr.adjust_capacity(107.0, 3.0, 1.0) == 3.0
assert gr.rank_scenarios([10.0, 30.0, 20.0, 40.0], 0.5) == [3, 1]

windy = gr.Day.tutorial(grid, "2020-07-09", "wind_over_forecast")
adj = gr.risk(grid, windy, k=40, alpha=0.1)
assert len(adj.worst_set) == 4
assert adj.max_fraction() > 0

days = [gr.Day.tutorial(grid, d, "accurate") for d in ("2020-07-06", "2020-07-07")]
cmp = gr.simulate(grid, days, "rn:0.10,rn:0.30")
assert cmp.policies == ["rn:0.10", "rn:0.30"]
assert len(cmp.cost_csv().splitlines()) == 1 + 2 + 1

try:
    gr.rank_scenarios([1.0], 0.0)
except ValueError:
    pass
else:
    raise AssertionError("alpha = 0 must raise")

data = Path(__file__).resolve().parent.parent / "crates" / "core" / "data" / "tutorial"
assert gr.run_cli(["validate", "--data-dir", str(data)]) == 0
with tempfile.TemporaryDirectory() as out:
    code = gr.run_cli(["attribute", "--data-dir", str(data), "--day", "2020-07-08", "--out", out])
    assert code == 0
    assert (Path(out) / "attr_2020-07-08.csv").exists()

print("pygridrisk smoke test passed")
