"""Estimation error along one growing sample path.

For a correct model the error of the MLE shrinks like sqrt(log log n / n).
The ratio of the two should neither blow up nor collapse to zero as n grows,
also when the errors are weakly dependent (AR(1) or a finite moving
average). The likelihood gap of a wrong model, in contrast, grows linearly.

Run:  python demos/lil_paths.py
"""
import numpy as np

from glmsel.asymptotics import SCENARIOS, run_replication, summarize
from glmsel.numerics import RngStream

grid = (200, 500, 1000, 2000, 5000, 10000)

for name in ("gaussian-iid", "gaussian-ar1", "gaussian-ma", "nbr"):
    reps = [run_replication(SCENARIOS[name], grid, RngStream(7, r)) for r in range(40)]
    ratios = np.array([r.ratios for r in reps])
    print(f"{name:13s} median ratio by n:", " ".join(f"{v:5.2f}" for v in np.nanmedian(ratios, axis=0)))

    s = summarize(reps)
    print(f"{'':13s} bounded in {s['boundedness_pass_rate']:.0%} of reps; "
          f"wrong-model gap per obs at n={grid[-1]}: {np.median([r.gap_wrong_per_n[-1] for r in reps]):.4f}")

# the medians hover at a constant level: the sqrt(log log n / n) rate is
# the right one, dependent errors only change the constant
