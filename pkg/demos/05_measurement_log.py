"""
=======================
5 - Measurement records
=======================
"""

# %%
# Each executed measurement can be written out as its own JSON record, one
# directory per object and run, so that logs from simulated and real sessions
# share a layout.

import json
import tempfile
from pathlib import Path

from objexplore import init_network, load_reference_data
from objexplore.experiment import export_measurement_log, parse_measurement_record
from objexplore.planner import EpisodeConfig, run_episode

data = load_reference_data()
state = init_network(data.tables, data.edges)
traces = [
    run_episode(data.object(name), EpisodeConfig(seed=i), state, data.actions, run_index=i)
    for i, name in enumerate(["hard-sponge", "soft-sponge"])
]

out = Path(tempfile.mkdtemp(prefix="objexplore-log-"))
export_measurement_log(traces, out, setup={"robot": "simulated", "note": "demo"})
for path in sorted(out.rglob("step-*.json"))[:3]:
    print(path.relative_to(out))

# %%
# Records parse back into the same outcome objects the planner produced.

first = sorted(out.rglob("step-1-*.json"))[0]
rec = parse_measurement_record(first)
print(rec.action, rec.outcome)
print(json.dumps(json.loads((out / "manifest.json").read_text())["n_records"]))
