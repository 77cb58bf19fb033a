# Regenerates table1_fixture.json / table1_golden.json with numpy + scipy.
# The Rust side never runs this; the outputs are frozen.
import json
import numpy as np
from scipy import stats

rng = np.random.default_rng(20240806)
systems = {
    "mini_baseline": (8.9, 1.8, 11.1, 1.5),
    "mini_two_agents": (8.9, 1.9, 11.1, 1.5),
    "mini_ft": (12.2, 2.7, 14.0, 2.1),
    "4o_baseline": (7.4, 1.7, 9.5, 1.7),
    "4o_two_agents": (7.3, 1.6, 9.6, 1.6),
    "4o_ft": (12.2, 2.8, 13.9, 2.3),
}
gt = (11.6, 2.4, 13.4, 2.0)
ids = [f"q{q}/{p}/1" for q in range(1, 4) for p in range(100 + q * 10, 104 + q * 10)]

def rows(m):
    fk = np.round(rng.normal(m[0], m[1], len(ids)), 6)
    smog = np.round(rng.normal(m[2], m[3], len(ids)), 6)
    return [{"sample_id": i, "fk_grade": float(a), "smog_index": float(b), "smog_low_confidence": True} for i, a, b in zip(ids, fk, smog)]

fixture = {"ground_truth": rows(gt)}
fixture.update({k: rows(v) for k, v in systems.items()})
json.dump(fixture, open("table1_fixture.json", "w"), indent=1)

def col(rs, k):
    return np.array([r[k] for r in rs])

golden = []
for name, rs in fixture.items():
    row = {"system_id": name, "n": len(rs)}
    for k in ("fk_grade", "smog_index"):
        v = col(rs, k)
        row[k] = {"mean": float(v.mean()), "sd": float(v.std(ddof=1))}
        if name != "ground_truth":
            t, p = stats.ttest_rel(v, col(fixture["ground_truth"], k))
            row[k + "_t"] = float(t)
            row[k + "_p"] = float(p)
    golden.append(row)
json.dump(golden, open("table1_golden.json", "w"), indent=1)
