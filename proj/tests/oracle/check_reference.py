"""Recompute the Shapiro-Wilk reference with scipy and compare to the frozen file."""
import json
import pathlib
import sys

here = pathlib.Path(__file__).resolve().parent
sys.path.insert(0, str(here))

try:
    from scipy import stats
except ImportError:
    print("scipy not available; skipping")
    sys.exit(0)

import shapiro_reference as ref

frozen = json.loads((here.parent / "data" / "shapiro_reference.json").read_text())
bad = 0
for case in frozen["cases"]:
    res = stats.shapiro(ref.draw(case["family"], case["n"], case["seed"]))
    if abs(res.statistic - case["w"]) > 1e-9 or abs(res.pvalue - case["p"]) > 1e-9:
        print("mismatch", case)
        bad += 1
print(f"{len(frozen['cases']) - bad}/{len(frozen['cases'])} reference cases reproduced")
sys.exit(1 if bad else 0)
