"""One desk run per adversary on the paper's dense network.

Prints whether every phase stayed inside the previous phase's interval, how
fast the honest spread collapsed, and what the signature gate rejected.
"""

from relay_iabc.adversary import KINDS
from relay_iabc.config import SimConfig
from relay_iabc.engine import check_convergence, check_validity, run

base = {
    "m": 44, "b": 14,
    "graph": {"kind": "erdos_renyi", "p": 0.8, "seed": 3},
    "iterations": 60, "init_range": [-110, 110], "default_value": 0.0,
    "algorithm": "relay", "seed": 3, "epsilon": 1e-6,
}

print(f"{'adversary':<12} {'valid':<6} {'spread<1e-6 at':<15} {'forged':>7} {'rejected':>9}")
for kind in KINDS:
    cfg = SimConfig.from_dict({**base, "adversary": {"*": {"kind": kind}}})
    tr = run(cfg)
    a = tr.audits["relay"]
    print(f"{kind:<12} {str(check_validity(tr)):<6} {str(check_convergence(tr, 1e-6)):<15} "
          f"{a.forged_sent:>7} {a.rejections:>9}")
