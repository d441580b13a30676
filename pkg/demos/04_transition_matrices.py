"""Honest updates as stochastic matrices, and the coefficients that shrink.

Under an Extreme adversary on the complete graph with m=7, b=2 every honest
node keeps exactly three honest values, so each phase matrix has three
entries of 1/3 per row. Products of three consecutive phases are scrambling.
On a sparse ring the same machinery shows the disagreement shrinking phase by phase.
"""

from pathlib import Path

import numpy as np

from relay_iabc import analysis as an
from relay_iabc.config import SimConfig
from relay_iabc.engine import run

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
cfg = SimConfig.from_json((CONFIGS / "extreme_desk.json").read_text())
tr = run(cfg, record_phases=True)
part = tr.scenario.partition
mats = an.extract_all(tr.phases["relay"], part)
beta = an.beta_for(cfg.m, cfg.b)

np.set_printoptions(precision=3, suppress=True)
print("first phase matrix:\n", mats[0].rows)
print("row-stochastic:", all(M.is_row_stochastic() for M in mats))
print("every phase reproduces the next state:",
      all(an.state_consistency_check(M, r.before, r.after) for M, r in zip(mats, tr.phases["relay"])))
print("each row has b+1 entries >= beta:", all(an.check_L2(M, cfg.b, beta) for M in mats))
print("triple products scrambling:",
      all(an.check_T1(*mats[k:k + 3], beta) for k in range(len(mats) - 2)))
print("one phase already agrees here; delta of the first product:", an.dobrushin_delta(mats[0].rows))

ring = SimConfig.from_json((CONFIGS / "sparse_ring.json").read_text())
tr = run(SimConfig.from_dict({**ring.to_dict(), "iterations": 60, "algorithm": "relay"}),
         record_phases=True)
deltas = an.cumulative_deltas(an.extract_all(tr.phases["relay"], tr.scenario.partition))
print("sparse ring, delta of the running product per phase:", " ".join(f"{d:.2e}" for d in deltas))
